#include <cstdio>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "trs/harness.hpp"
#include "trs/verify.hpp"

namespace {

using namespace trs;

std::string truth_path(const std::string& out) {
    const auto dot = out.find_last_of('.');
    const auto slash = out.find_last_of("/\\");
    const std::string stem =
        (dot == std::string::npos || (slash != std::string::npos && dot < slash))
            ? out
            : out.substr(0, dot);
    return stem + "_truth.trcr";
}

int cmd_gen(const SynthSpec& spec, const std::string& out) {
    const Synthetic syn = gen_synthetic(spec);
    switch (syn.kind) {
        case Synthetic::Kind::dense_real:
            io::write_dense(out, syn.X);
            break;
        case Synthetic::Kind::sparse_real:
            io::write_sparse(out, syn.Xs);
            break;
        case Synthetic::Kind::dense_complex:
            io::write_dense(out, syn.Xc);
            break;
    }
    const std::string truth = truth_path(out);
    if (syn.kind == Synthetic::Kind::dense_complex)
        io::write_cores(truth, syn.cores_c);
    else
        io::write_cores(truth, syn.cores);
    std::cout << "wrote " << out << " and " << truth << "\n";
    return 0;
}

struct FitArgs {
    std::string input;
    std::string solver = "tr-als";
    Index rank = 5;
    Index m = 0;
    Index iters = 100;
    double tol = 0;
    double noise = 0;
    std::uint64_t seed = 0;
    Index restarts = 1;
    std::string out;
};

int cmd_fit(const FitArgs& args) {
    const Solver solver = solver_from_name(args.solver);
    io::AnyTensor data = io::read_tensor(args.input);
    const Index N = data.shape().order();
    FitConfig cfg;
    cfg.ranks.assign(static_cast<std::size_t>(N), args.rank);
    cfg.max_iters = args.iters;
    cfg.tol = args.tol;
    cfg.m = args.m;
    if (args.restarts < 1) throw std::invalid_argument("fit: restarts must be positive");
    if (solver != Solver::tr_als && args.m < 1)
        throw std::invalid_argument("fit: " + args.solver + " needs --m >= 1");

    const std::uint64_t noise_seed = rng::sub_seed(args.seed, rng::tag_noise);
    double best_err = std::numeric_limits<double>::infinity();
    double total_seconds = 0;
    Index best_iters = 0;
    bool wrote = false;
    // keep the best cores across restarts, writing lazily at the end
    TRCores<double> best_real;
    TRCores<cplx> best_cplx;
    bool best_is_complex = false;

    for (Index rs = 1; rs <= args.restarts; ++rs) {
        cfg.seed = rng::sub_seed(args.seed, rng::tag_trial, static_cast<std::uint64_t>(rs));
        double err = 0, secs = 0;
        Index iters = 0;
        if (data.kind == io::AnyTensor::Kind::dense_complex) {
            if (solver != Solver::tr_als && solver != Solver::tr_ksrft_als_premix)
                throw std::invalid_argument(args.solver + " requires a real tensor");
            const DenseTensor<cplx> X = add_noise(data.dense_c, args.noise, noise_seed);
            FitResult<cplx> res = solver == Solver::tr_als ? tr_als(X, cfg)
                                                           : tr_ksrft_als_premix(X, cfg);
            err = res.final_error;
            secs = res.seconds;
            iters = res.iterations;
            if (err < best_err) {
                best_cplx = std::move(res.cores);
                best_is_complex = true;
            }
        } else {
            DenseTensor<double> X;
            SparseTensor Xs;
            const bool sparse = data.kind == io::AnyTensor::Kind::sparse;
            if (sparse) {
                Xs = add_noise(data.sparse, args.noise, noise_seed);
                if (solver != Solver::tr_ts_als) X = Xs.densify();
            } else {
                X = add_noise(data.dense, args.noise, noise_seed);
            }
            FitResult<double> res = [&] {
                switch (solver) {
                    case Solver::tr_als: return tr_als(X, cfg);
                    case Solver::tr_als_sampled: return tr_als_sampled(X, cfg);
                    case Solver::tr_ksrft_als: return tr_ksrft_als(X, cfg);
                    case Solver::tr_ksrft_als_premix: return tr_ksrft_als_premix(X, cfg);
                    case Solver::tr_ts_als:
                        return sparse ? tr_ts_als(Xs, cfg) : tr_ts_als(X, cfg);
                }
                throw std::logic_error("fit: unhandled solver");
            }();
            err = res.final_error;
            secs = res.seconds;
            iters = res.iterations;
            if (err < best_err) best_real = std::move(res.cores);
        }
        total_seconds += secs;
        if (err < best_err) {
            best_err = err;
            best_iters = iters;
        }
        std::cout << "restart " << rs << ": rel_error=" << err << " iters=" << iters
                  << " seconds=" << secs << "\n";
    }
    std::printf("best: rel_error=%.17g iters=%lld seconds=%.6f\n", best_err,
                static_cast<long long>(best_iters), total_seconds);
    if (!args.out.empty()) {
        if (best_is_complex)
            io::write_cores(args.out, best_cplx);
        else
            io::write_cores(args.out, best_real);
        wrote = true;
    }
    if (wrote) std::cout << "wrote " << args.out << "\n";
    return 0;
}

int cmd_sweep(const std::string& config, const std::string& out) {
    const SweepSpec sweep = load_sweep_config(config);
    run_sweep(sweep, out, std::cout);
    return 0;
}

int cmd_verify(std::uint64_t seed) {
    const auto checks = run_verification(seed);
    bool all = true;
    for (const auto& c : checks) {
        std::printf("[%s] %-58s (%d instances, max err %.3g)\n", c.pass ? "PASS" : "FAIL",
                    c.name.c_str(), c.instances, c.max_err);
        all = all && c.pass;
    }
    if (!all) {
        std::cerr << "verification failed\n";
        return 1;
    }
    std::cout << "all checks passed\n";
    return 0;
}

int cmd_info(const std::string& input) {
    std::ifstream probe(input, std::ios::binary);
    if (!probe) throw std::runtime_error("cannot open for reading: " + input);
    char magic[4] = {};
    probe.read(magic, 4);
    probe.close();
    if (std::string(magic, 4) == "TRCR") {
        const io::AnyCores cores = io::read_cores(input);
        std::cout << "core chain, " << (cores.is_complex ? "complex" : "real") << "\n";
        const Index N = cores.is_complex ? cores.complex_.count() : cores.real.count();
        for (Index n = 1; n <= N; ++n) {
            const Shape& sh =
                cores.is_complex ? cores.complex_.core(n).shape() : cores.real.core(n).shape();
            std::cout << "core " << n << ": " << sh.to_string() << "\n";
        }
        return 0;
    }
    const io::AnyTensor data = io::read_tensor(input);
    switch (data.kind) {
        case io::AnyTensor::Kind::dense_real:
            std::cout << "dense real tensor " << data.shape().to_string() << "\n";
            std::cout << "frobenius norm " << frobenius_norm(data.dense) << "\n";
            break;
        case io::AnyTensor::Kind::dense_complex:
            std::cout << "dense complex tensor " << data.shape().to_string() << "\n";
            std::cout << "frobenius norm " << frobenius_norm(data.dense_c) << "\n";
            break;
        case io::AnyTensor::Kind::sparse:
            std::cout << "sparse tensor " << data.shape().to_string() << ", nnz "
                      << data.sparse.nnz() << "\n";
            std::cout << "frobenius norm " << frobenius_norm(data.sparse) << "\n";
            break;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"tensor-ring decomposition benchmark tool"};
    app.require_subcommand(1);

    auto* gen = app.add_subcommand("gen", "generate a synthetic tensor and its truth cores");
    SynthSpec spec;
    std::string gen_out = "tensor.dten";
    gen->add_option("--exp", spec.experiment, "experiment recipe 1..4")->required();
    gen->add_option("--N", spec.N, "tensor order");
    gen->add_option("--I", spec.I, "mode size");
    gen->add_option("--R", spec.R_true, "true rank");
    gen->add_option("--density", spec.density, "nonzero fraction per core (exp 2)");
    gen->add_option("--spread", spec.spread, "planted nonzeros per column (exp 3)");
    gen->add_option("--magnitude", spec.magnitude, "planted value (exp 3; default I/4-10)");
    gen->add_option("--seed", spec.seed, "generator seed");
    gen->add_option("--out", gen_out, "output tensor path");

    auto* fit = app.add_subcommand("fit", "decompose one tensor file");
    FitArgs fargs;
    fit->add_option("--in", fargs.input, "input tensor file")->required();
    fit->add_option("--solver", fargs.solver,
                    "tr-als | tr-als-sampled | tr-ksrft-als | tr-ksrft-als-premix | tr-ts-als");
    fit->add_option("--rank", fargs.rank, "target rank for every mode");
    fit->add_option("--m", fargs.m, "embedding size (randomized solvers)");
    fit->add_option("--iters", fargs.iters, "iteration cap");
    fit->add_option("--tol", fargs.tol, "stop when relative error drops below");
    fit->add_option("--noise", fargs.noise, "relative noise level added before fitting");
    fit->add_option("--seed", fargs.seed, "master seed");
    fit->add_option("--restarts", fargs.restarts, "independent restarts; best kept");
    fit->add_option("--out", fargs.out, "write the best cores archive here");

    auto* sweep = app.add_subcommand("sweep", "two-stage benchmark over embedding sizes");
    std::string sweep_config, sweep_out = "results.csv";
    sweep->add_option("--config", sweep_config, "flat key=value config file")->required();
    sweep->add_option("--out", sweep_out, "output CSV path");

    auto* verify = app.add_subcommand("verify", "run the structural property suites");
    std::uint64_t verify_seed = 7;
    verify->add_option("--seed", verify_seed, "suite seed");

    auto* info = app.add_subcommand("info", "describe a tensor or cores file");
    std::string info_in;
    info->add_option("--in", info_in, "input file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    try {
        if (gen->parsed()) return cmd_gen(spec, gen_out);
        if (fit->parsed()) return cmd_fit(fargs);
        if (sweep->parsed()) return cmd_sweep(sweep_config, sweep_out);
        if (verify->parsed()) return cmd_verify(verify_seed);
        if (info->parsed()) return cmd_info(info_in);
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::domain_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
