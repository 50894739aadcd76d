#include "trs/solvers.hpp"

#include <chrono>
#include <iostream>

namespace trs {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_seconds(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

void check_common(const Shape& shape, const FitConfig& cfg) {
    if (shape.order() < 2)
        throw std::invalid_argument("fit: tensor must have order >= 2");
    if (static_cast<Index>(cfg.ranks.size()) != shape.order())
        throw std::invalid_argument("fit: need one target rank per mode");
    for (Index r : cfg.ranks)
        if (r < 1) throw std::invalid_argument("fit: ranks must be positive");
    if (cfg.max_iters < 0)
        throw std::invalid_argument("fit: max_iters must be nonnegative");
    if (!(cfg.tol >= 0))
        throw std::invalid_argument("fit: tol must be nonnegative");
}

void check_sketched(const Shape& shape, const FitConfig& cfg) {
    check_common(shape, cfg);
    if (cfg.exhaustive_sketch) return;
    if (cfg.m < 1)
        throw std::invalid_argument("fit: sketch size m must be positive");
    const Index N = shape.order();
    Index cols = 0;
    for (Index n = 1; n <= N; ++n)
        cols = std::max(cols, cfg.ranks[static_cast<std::size_t>(n - 1)] *
                                  cfg.ranks[static_cast<std::size_t>(n % N)]);
    if (cfg.m < cols)
        std::cerr << "warning: sketch size m=" << cfg.m
                  << " is below the largest LS column count " << cols
                  << "; sketched systems will be underdetermined\n";
}

}  // namespace

template <class T>
Mat<T> solve_ls(const Mat<T>& A, const Mat<T>& B) {
    if (A.rows() != B.rows())
        throw std::invalid_argument("solve_ls: row counts differ");
    if (A.rows() == 0 || A.cols() == 0)
        throw std::invalid_argument("solve_ls: empty system");
    Eigen::ColPivHouseholderQR<Mat<T>> qr(A);
    qr.setThreshold(1e-12);
    if (A.rows() >= A.cols() && qr.rank() == A.cols()) return qr.solve(B);
    Eigen::JacobiSVD<Mat<T>> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
    svd.setThreshold(1e-12);
    return svd.solve(B);
}

Matd solve_ls_real(const Matz& A, const Matz& B) {
    if (A.rows() != B.rows())
        throw std::invalid_argument("solve_ls_real: row counts differ");
    Matd As(2 * A.rows(), A.cols());
    As << A.real(), A.imag();
    Matd Bs(2 * B.rows(), B.cols());
    Bs << B.real(), B.imag();
    return solve_ls<double>(As, Bs);
}

template <class T>
TRCores<T> init_cores(const Shape& dims, const std::vector<Index>& ranks,
                      std::uint64_t seed) {
    if (static_cast<Index>(ranks.size()) != dims.order())
        throw std::invalid_argument("init_cores: need one rank per mode");
    const Index N = dims.order();
    std::vector<DenseTensor<T>> cores;
    cores.reserve(static_cast<std::size_t>(N));
    for (Index n = 1; n <= N; ++n) {
        const Index R1 = ranks[static_cast<std::size_t>(n - 1)];
        const Index R2 = ranks[static_cast<std::size_t>(n % N)];
        if (R1 < 1 || R2 < 1) throw std::invalid_argument("init_cores: ranks must be positive");
        DenseTensor<T> G{Shape({R1, dims.dim(n), R2})};
        rng::Rng r(rng::sub_seed(seed, rng::tag_init, static_cast<std::uint64_t>(n)));
        for (Index k = 0; k < G.size(); ++k) {
            if constexpr (std::is_same_v<T, cplx>) {
                const double re = r.normal();
                const double im = r.normal();
                G[k] = cplx(re, im);
            } else {
                G[k] = r.normal();
            }
        }
        cores.push_back(std::move(G));
    }
    return TRCores<T>(std::move(cores));
}

template <class T>
FitResult<T> tr_als(const DenseTensor<T>& X, const FitConfig& cfg) {
    const auto t0 = Clock::now();
    check_common(X.shape(), cfg);
    const Index N = X.order();
    FitResult<T> res;
    res.cores = init_cores<T>(X.shape(), cfg.ranks, cfg.seed);
    std::vector<Mat<T>> rhs;  // transposed wrapped unfoldings, one per mode
    rhs.reserve(static_cast<std::size_t>(N));
    for (Index n = 1; n <= N; ++n)
        rhs.push_back(unfold(X, n, UnfoldKind::wrapped).transpose());
    const bool track = cfg.track_per_iter || cfg.tol > 0;
    for (Index it = 1; it <= cfg.max_iters; ++it) {
        for (Index n = 1; n <= N; ++n) {
            const Mat<T> A = subchain_design(subchain_tensor(res.cores, n));
            const Mat<T> Zt = solve_ls<T>(A, rhs[static_cast<std::size_t>(n - 1)]).transpose();
            res.cores.core(n) = core_from_mode2(Zt, res.cores.rank(n), res.cores.rank(n + 1));
        }
        res.iterations = it;
        if (track) {
            const double err = relative_error(res.cores, X);
            res.errors.push_back(err);
            if (cfg.tol > 0 && err < cfg.tol) break;
        }
    }
    res.final_error = res.errors.empty() ? relative_error(res.cores, X) : res.errors.back();
    res.seconds = elapsed_seconds(t0);
    return res;
}

FitResult<double> tr_als_sampled(const DenseTensor<double>& X, const FitConfig& cfg) {
    const auto t0 = Clock::now();
    check_sketched(X.shape(), cfg);
    const Index N = X.order();
    FitResult<double> res;
    res.cores = init_cores<double>(X.shape(), cfg.ranks, cfg.seed);
    std::vector<LeverageDistribution> levs;
    levs.reserve(static_cast<std::size_t>(N));
    for (Index n = 1; n <= N; ++n) levs.push_back(leverage_distribution(res.cores.core(n)));
    rng::Rng sampler(rng::sub_seed(cfg.seed, rng::tag_sampler));
    const bool track = cfg.track_per_iter || cfg.tol > 0;
    for (Index it = 1; it <= cfg.max_iters; ++it) {
        for (Index n = 1; n <= N; ++n) {
            IndexTable idxs;
            if (cfg.exhaustive_sketch) {
                idxs = UniformSampler::exhaustive(X.shape(), n);
            } else {
                std::vector<const LeverageDistribution*> dists;
                dists.reserve(static_cast<std::size_t>(N));
                for (Index k = 1; k <= N; ++k) dists.push_back(&levs[static_cast<std::size_t>(k - 1)]);
                idxs = draw_joint_samples(X.shape(), n, cfg.m, dists, sampler);
            }
            const Matd A = subchain_design(sampled_subchain(res.cores, n, idxs));
            const Matd B = gather_unfolding_rows(X, n, idxs);
            const Matd Zt = solve_ls<double>(A, B).transpose();
            res.cores.core(n) = core_from_mode2(Zt, res.cores.rank(n), res.cores.rank(n + 1));
            levs[static_cast<std::size_t>(n - 1)] = leverage_distribution(res.cores.core(n));
        }
        res.iterations = it;
        if (track) {
            const double err = relative_error(res.cores, X);
            res.errors.push_back(err);
            if (cfg.tol > 0 && err < cfg.tol) break;
        }
    }
    res.final_error = res.errors.empty() ? relative_error(res.cores, X) : res.errors.back();
    res.seconds = elapsed_seconds(t0);
    return res;
}

namespace {

std::vector<ModeMixer> make_mixers(const Shape& shape, std::uint64_t seed) {
    std::vector<ModeMixer> mixers;
    mixers.reserve(static_cast<std::size_t>(shape.order()));
    for (Index n = 1; n <= shape.order(); ++n)
        mixers.emplace_back(shape.dim(n),
                            rng::sub_seed(seed, rng::tag_signflip, static_cast<std::uint64_t>(n)));
    return mixers;
}

template <class T>
TRCores<cplx> mix_all_cores(const TRCores<T>& cores, const std::vector<ModeMixer>& mixers) {
    std::vector<DenseTensor<cplx>> mixed;
    mixed.reserve(static_cast<std::size_t>(cores.count()));
    for (Index n = 1; n <= cores.count(); ++n)
        mixed.push_back(mix_core(cores.core(n), mixers[static_cast<std::size_t>(n - 1)]));
    return TRCores<cplx>(std::move(mixed));
}

}  // namespace

FitResult<double> tr_ksrft_als(const DenseTensor<double>& X, const FitConfig& cfg) {
    const auto t0 = Clock::now();
    check_sketched(X.shape(), cfg);
    const Index N = X.order();
    FitResult<double> res;
    res.cores = init_cores<double>(X.shape(), cfg.ranks, cfg.seed);
    const auto mixers = make_mixers(X.shape(), cfg.seed);
    const DenseTensor<cplx> Xhat = mix_tensor(X, mixers);
    TRCores<cplx> mixed = mix_all_cores(res.cores, mixers);
    UniformSampler sampler(rng::sub_seed(cfg.seed, rng::tag_sampler));
    const bool track = cfg.track_per_iter || cfg.tol > 0;
    for (Index it = 1; it <= cfg.max_iters; ++it) {
        for (Index n = 1; n <= N; ++n) {
            const IndexTable idxs = cfg.exhaustive_sketch
                                        ? UniformSampler::exhaustive(X.shape(), n)
                                        : sampler.draw(X.shape(), n, cfg.m);
            const Matz A = subchain_design(sampled_subchain(mixed, n, idxs));
            const Matz B = ksrft_sketch_rhs(Xhat, n, idxs, &mixers[static_cast<std::size_t>(n - 1)]);
            const Matd Zt = solve_ls_real(A, B).transpose();
            res.cores.core(n) = core_from_mode2(Zt, res.cores.rank(n), res.cores.rank(n + 1));
            mixed.core(n) = mix_core(res.cores.core(n), mixers[static_cast<std::size_t>(n - 1)]);
        }
        res.iterations = it;
        if (track) {
            const double err = relative_error(res.cores, X);
            res.errors.push_back(err);
            if (cfg.tol > 0 && err < cfg.tol) break;
        }
    }
    res.final_error = res.errors.empty() ? relative_error(res.cores, X) : res.errors.back();
    res.seconds = elapsed_seconds(t0);
    return res;
}

namespace {

struct PremixOut {
    TRCores<cplx> cores;  // unmixed, still complex
    std::vector<double> errors;
    Index iterations = 0;
};

// Iterates entirely in the mixed domain. Per-sweep errors are measured there;
// per-mode mixing is unitary and commutes with reconstruction, so they equal
// the errors of the unmixed iterate against the original tensor.
template <class T>
PremixOut premix_loop(const DenseTensor<T>& X, const FitConfig& cfg) {
    check_sketched(X.shape(), cfg);
    const Index N = X.order();
    const TRCores<T> cores0 = init_cores<T>(X.shape(), cfg.ranks, cfg.seed);
    const auto mixers = make_mixers(X.shape(), cfg.seed);
    const DenseTensor<cplx> Xhat = mix_tensor(X, mixers);
    TRCores<cplx> mixed = mix_all_cores(cores0, mixers);
    UniformSampler sampler(rng::sub_seed(cfg.seed, rng::tag_sampler));
    const bool track = cfg.track_per_iter || cfg.tol > 0;
    PremixOut out;
    for (Index it = 1; it <= cfg.max_iters; ++it) {
        for (Index n = 1; n <= N; ++n) {
            const IndexTable idxs = cfg.exhaustive_sketch
                                        ? UniformSampler::exhaustive(X.shape(), n)
                                        : sampler.draw(X.shape(), n, cfg.m);
            const Matz A = subchain_design(sampled_subchain(mixed, n, idxs));
            const Matz B = ksrft_sketch_rhs(Xhat, n, idxs, nullptr);
            const Matz Zt = solve_ls<cplx>(A, B).transpose();
            mixed.core(n) = core_from_mode2(Zt, mixed.rank(n), mixed.rank(n + 1));
        }
        out.iterations = it;
        if (track) {
            const double err = relative_error(mixed, Xhat);
            out.errors.push_back(err);
            if (cfg.tol > 0 && err < cfg.tol) break;
        }
    }
    std::vector<DenseTensor<cplx>> un;
    un.reserve(static_cast<std::size_t>(N));
    for (Index n = 1; n <= N; ++n)
        un.push_back(unmix_core(mixed.core(n), mixers[static_cast<std::size_t>(n - 1)]));
    out.cores = TRCores<cplx>(std::move(un));
    return out;
}

}  // namespace

FitResult<double> tr_ksrft_als_premix(const DenseTensor<double>& X, const FitConfig& cfg) {
    const auto t0 = Clock::now();
    PremixOut loop = premix_loop(X, cfg);
    FitResult<double> res;
    res.errors = std::move(loop.errors);
    res.iterations = loop.iterations;
    double mi = 0;
    std::vector<DenseTensor<double>> cores;
    cores.reserve(static_cast<std::size_t>(loop.cores.count()));
    for (Index n = 1; n <= loop.cores.count(); ++n) {
        const auto& C = loop.cores.core(n);
        DenseTensor<double> G{C.shape()};
        for (Index k = 0; k < C.size(); ++k) {
            mi = std::max(mi, std::abs(C[k].imag()));
            G[k] = C[k].real();
        }
        cores.push_back(std::move(G));
    }
    res.max_imag = mi;
    res.imag_warning = mi >= 1e-8;
    if (res.imag_warning)
        std::cerr << "warning: unmixed cores carry imaginary parts up to " << mi
                  << " on real input; they were dropped\n";
    res.cores = TRCores<double>(std::move(cores));
    res.final_error = relative_error(res.cores, X);
    res.seconds = elapsed_seconds(t0);
    return res;
}

FitResult<cplx> tr_ksrft_als_premix(const DenseTensor<cplx>& X, const FitConfig& cfg) {
    const auto t0 = Clock::now();
    PremixOut loop = premix_loop(X, cfg);
    FitResult<cplx> res;
    res.cores = std::move(loop.cores);
    res.errors = std::move(loop.errors);
    res.iterations = loop.iterations;
    res.final_error = relative_error(res.cores, X);
    res.seconds = elapsed_seconds(t0);
    return res;
}

namespace {

template <class MakeRhs, class ErrorOf>
FitResult<double> ts_fit(const Shape& shape, const FitConfig& cfg, MakeRhs&& make_rhs,
                         ErrorOf&& error_of) {
    const auto t0 = Clock::now();
    check_sketched(shape, cfg);
    const Index N = shape.order();
    FitResult<double> res;
    res.cores = init_cores<double>(shape, cfg.ranks, cfg.seed);
    std::vector<TensorSketchOp> ops;
    if (cfg.exhaustive_sketch) {
        ops.reserve(static_cast<std::size_t>(N));
        for (Index n = 1; n <= N; ++n) ops.push_back(TensorSketchOp::injective(shape, n));
    } else {
        ops.push_back(TensorSketchOp(shape, cfg.m, cfg.seed));
    }
    const auto op_for = [&](Index n) -> const TensorSketchOp& {
        return cfg.exhaustive_sketch ? ops[static_cast<std::size_t>(n - 1)] : ops[0];
    };
    std::vector<Matd> rhs;
    rhs.reserve(static_cast<std::size_t>(N));
    for (Index n = 1; n <= N; ++n) rhs.push_back(make_rhs(n, op_for(n)));
    const bool track = cfg.track_per_iter || cfg.tol > 0;
    for (Index it = 1; it <= cfg.max_iters; ++it) {
        for (Index n = 1; n <= N; ++n) {
            const Matd A = subchain_design(tensorsketch_subchain(res.cores, op_for(n), n));
            const Matd Zt =
                solve_ls<double>(A, rhs[static_cast<std::size_t>(n - 1)]).transpose();
            res.cores.core(n) = core_from_mode2(Zt, res.cores.rank(n), res.cores.rank(n + 1));
        }
        res.iterations = it;
        if (track) {
            const double err = error_of(res.cores);
            res.errors.push_back(err);
            if (cfg.tol > 0 && err < cfg.tol) break;
        }
    }
    res.final_error = res.errors.empty() ? error_of(res.cores) : res.errors.back();
    res.seconds = elapsed_seconds(t0);
    return res;
}

}  // namespace

FitResult<double> tr_ts_als(const DenseTensor<double>& X, const FitConfig& cfg) {
    return ts_fit(
        X.shape(), cfg,
        [&](Index n, const TensorSketchOp& op) { return tensorsketch_rhs(X, n, op); },
        [&](const TRCores<double>& cores) { return relative_error(cores, X); });
}

FitResult<double> tr_ts_als(const SparseTensor& X, const FitConfig& cfg) {
    return ts_fit(
        X.shape(), cfg,
        [&](Index n, const TensorSketchOp& op) { return tensorsketch_rhs(X, n, op); },
        [&](const TRCores<double>& cores) { return relative_error(cores, X); });
}

template Mat<double> solve_ls<double>(const Matd&, const Matd&);
template Mat<cplx> solve_ls<cplx>(const Matz&, const Matz&);
template TRCores<double> init_cores<double>(const Shape&, const std::vector<Index>&, std::uint64_t);
template TRCores<cplx> init_cores<cplx>(const Shape&, const std::vector<Index>&, std::uint64_t);
template FitResult<double> tr_als<double>(const DenseTensor<double>&, const FitConfig&);
template FitResult<cplx> tr_als<cplx>(const DenseTensor<cplx>&, const FitConfig&);

}  // namespace trs
