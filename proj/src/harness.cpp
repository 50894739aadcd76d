#include "trs/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

namespace trs {

namespace {

void check_synth(const SynthSpec& spec) {
    if (spec.experiment < 1 || spec.experiment > 4)
        throw std::invalid_argument("gen_synthetic: experiment must be 1..4");
    if (spec.N < 2) throw std::invalid_argument("gen_synthetic: order must be at least 2");
    if (spec.I < 1) throw std::invalid_argument("gen_synthetic: mode size must be positive");
    if (spec.R_true < 1) throw std::invalid_argument("gen_synthetic: rank must be positive");
    if (spec.experiment == 2 && !(spec.density >= 0 && spec.density <= 1))
        throw std::invalid_argument("gen_synthetic: density must lie in [0, 1]");
    if (spec.experiment == 3) {
        if (spec.spread < 1)
            throw std::invalid_argument("gen_synthetic: spread must be positive");
        if (3 * spec.spread > spec.I)
            throw std::invalid_argument("gen_synthetic: mode size must fit 3*spread rows");
        if (spec.R_true * spec.R_true < 3)
            throw std::invalid_argument("gen_synthetic: need at least 3 unfolding columns");
        const double mag =
            std::isnan(spec.magnitude) ? static_cast<double>(spec.I) / 4.0 - 10.0 : spec.magnitude;
        if (!std::isfinite(mag) || mag == 0.0)
            throw std::invalid_argument("gen_synthetic: planted magnitude must be finite nonzero");
    }
}

template <class T>
DenseTensor<T> normal_core(Index R, Index I, std::uint64_t seed) {
    DenseTensor<T> G{Shape({R, I, R})};
    rng::Rng r(seed);
    for (Index k = 0; k < G.size(); ++k) {
        if constexpr (std::is_same_v<T, cplx>) {
            const double re = r.normal();
            const double im = r.normal();
            G[k] = cplx(re, im);
        } else {
            G[k] = r.normal();
        }
    }
    return G;
}

template <class T>
std::vector<DenseTensor<T>> spiked_cores(const SynthSpec& spec) {
    std::vector<DenseTensor<T>> cores;
    cores.reserve(static_cast<std::size_t>(spec.N));
    for (Index n = 1; n <= spec.N; ++n) {
        const std::uint64_t s = rng::sub_seed(spec.seed, rng::tag_gen, static_cast<std::uint64_t>(n));
        DenseTensor<T> G = normal_core<T>(spec.R_true, spec.I, s);
        rng::Rng r(rng::sub_seed(s, 1));
        G[r.uniform_int(0, G.size() - 1)] = T(20.0);
        cores.push_back(std::move(G));
    }
    return cores;
}

}  // namespace

Synthetic gen_synthetic(const SynthSpec& spec) {
    check_synth(spec);
    Synthetic out;
    out.kind = spec.experiment == 2   ? Synthetic::Kind::sparse_real
               : spec.experiment == 4 ? Synthetic::Kind::dense_complex
                                      : Synthetic::Kind::dense_real;
    switch (spec.experiment) {
        case 1: {
            out.cores = TRCores<double>(spiked_cores<double>(spec));
            out.X = tr_reconstruct(out.cores);
            break;
        }
        case 2: {
            std::vector<DenseTensor<double>> cores;
            cores.reserve(static_cast<std::size_t>(spec.N));
            const Index target = static_cast<Index>(std::llround(
                spec.density * static_cast<double>(spec.R_true * spec.R_true * spec.I)));
            for (Index n = 1; n <= spec.N; ++n) {
                DenseTensor<double> G{Shape({spec.R_true, spec.I, spec.R_true})};
                rng::Rng r(rng::sub_seed(spec.seed, rng::tag_gen, static_cast<std::uint64_t>(n)));
                for (Index t = 0; t < target; ++t) {
                    const Index pos = r.uniform_int(0, G.size() - 1);
                    G[pos] = r.normal();  // repeated positions collapse
                }
                cores.push_back(std::move(G));
            }
            out.cores = TRCores<double>(std::move(cores));
            const DenseTensor<double> full = tr_reconstruct(out.cores);
            out.Xs = SparseTensor{full.shape()};
            for (Index k = 0; k < full.size(); ++k)
                if (full[k] != 0.0)
                    out.Xs.insert(delinearize(k + 1, full.shape()), full[k]);
            break;
        }
        case 3: {
            const double mag = std::isnan(spec.magnitude)
                                   ? static_cast<double>(spec.I) / 4.0 - 10.0
                                   : spec.magnitude;
            std::vector<DenseTensor<double>> cores;
            cores.reserve(static_cast<std::size_t>(spec.N));
            for (Index n = 1; n <= spec.N; ++n) {
                DenseTensor<double> G = normal_core<double>(
                    spec.R_true, spec.I,
                    rng::sub_seed(spec.seed, rng::tag_gen, static_cast<std::uint64_t>(n)));
                Matd M = core_mode2_unfolding(G);
                for (Index c = 0; c < 3; ++c) {
                    M.col(c).setZero();
                    M.col(c).segment(c * spec.spread, spec.spread).setConstant(mag);
                }
                if (n == spec.N) M.bottomRows(spec.I - spec.spread).setZero();
                cores.push_back(core_from_mode2(M, spec.R_true, spec.R_true));
            }
            out.cores = TRCores<double>(std::move(cores));
            out.X = tr_reconstruct(out.cores);
            break;
        }
        default: {
            out.cores_c = TRCores<cplx>(spiked_cores<cplx>(spec));
            out.Xc = tr_reconstruct(out.cores_c);
            break;
        }
    }
    return out;
}

namespace {

template <class T>
DenseTensor<T> add_noise_dense(const DenseTensor<T>& X, double noise, std::uint64_t seed) {
    if (!(noise >= 0) || !std::isfinite(noise))
        throw std::invalid_argument("add_noise: noise must be a nonnegative number");
    DenseTensor<T> Y = X;
    if (noise == 0) return Y;
    const double nx = frobenius_norm(X);
    if (nx == 0) throw std::domain_error("add_noise: cannot scale noise against a zero tensor");
    DenseTensor<T> G{X.shape()};
    rng::Rng r(seed);
    for (Index k = 0; k < G.size(); ++k) {
        if constexpr (std::is_same_v<T, cplx>) {
            const double re = r.normal();
            const double im = r.normal();
            G[k] = cplx(re, im);
        } else {
            G[k] = r.normal();
        }
    }
    const double scale = noise * nx / frobenius_norm(G);
    for (Index k = 0; k < Y.size(); ++k) Y[k] += scale * G[k];
    return Y;
}

}  // namespace

DenseTensor<double> add_noise(const DenseTensor<double>& X, double noise, std::uint64_t seed) {
    return add_noise_dense(X, noise, seed);
}

DenseTensor<cplx> add_noise(const DenseTensor<cplx>& X, double noise, std::uint64_t seed) {
    return add_noise_dense(X, noise, seed);
}

SparseTensor add_noise(const SparseTensor& X, double noise, std::uint64_t seed) {
    if (!(noise >= 0) || !std::isfinite(noise))
        throw std::invalid_argument("add_noise: noise must be a nonnegative number");
    SparseTensor Y = X;
    if (noise == 0) return Y;
    const double nx = frobenius_norm(X);
    if (nx == 0) throw std::domain_error("add_noise: cannot scale noise against a zero tensor");
    rng::Rng r(seed);
    std::vector<double> g(Y.values().size());
    double s2 = 0;
    for (auto& v : g) {
        v = r.normal();
        s2 += v * v;
    }
    const double scale = noise * nx / std::sqrt(s2);
    for (std::size_t k = 0; k < g.size(); ++k) Y.values()[k] += scale * g[k];
    return Y;
}

std::string solver_name(Solver s) {
    switch (s) {
        case Solver::tr_als: return "tr-als";
        case Solver::tr_als_sampled: return "tr-als-sampled";
        case Solver::tr_ksrft_als: return "tr-ksrft-als";
        case Solver::tr_ksrft_als_premix: return "tr-ksrft-als-premix";
        case Solver::tr_ts_als: return "tr-ts-als";
    }
    throw std::logic_error("solver_name: unhandled solver");
}

Solver solver_from_name(const std::string& name) {
    for (Solver s : all_solvers())
        if (solver_name(s) == name) return s;
    throw std::invalid_argument("unknown solver '" + name + "'");
}

const std::vector<Solver>& all_solvers() {
    static const std::vector<Solver> all = {Solver::tr_als, Solver::tr_als_sampled,
                                            Solver::tr_ksrft_als, Solver::tr_ksrft_als_premix,
                                            Solver::tr_ts_als};
    return all;
}

namespace {

FitConfig prep_config(const std::vector<Index>& ranks, Index M, double eps, std::uint64_t seed) {
    if (M < 1) throw std::invalid_argument("preparation_stage: iteration cap must be positive");
    FitConfig cfg;
    cfg.ranks = ranks;
    cfg.max_iters = M;
    cfg.tol = eps;
    cfg.seed = seed;
    return cfg;
}

template <class T>
PrepResult prep_from(const FitResult<T>& res) {
    return PrepResult{res.iterations, res.final_error, res.seconds};
}

}  // namespace

PrepResult preparation_stage(const DenseTensor<double>& X, const std::vector<Index>& ranks,
                             Index M, double eps, std::uint64_t seed) {
    return prep_from(tr_als(X, prep_config(ranks, M, eps, seed)));
}

PrepResult preparation_stage(const DenseTensor<cplx>& X, const std::vector<Index>& ranks,
                             Index M, double eps, std::uint64_t seed) {
    return prep_from(tr_als(X, prep_config(ranks, M, eps, seed)));
}

PrepResult preparation_stage(const SparseTensor& X, const std::vector<Index>& ranks, Index M,
                             double eps, std::uint64_t seed) {
    return prep_from(tr_als(X.densify(), prep_config(ranks, M, eps, seed)));
}

namespace {

struct RunOutcome {
    double error = 0;
    Index iters = 0;
    double seconds = 0;
};

template <class T>
RunOutcome outcome_of(const FitResult<T>& res) {
    return RunOutcome{res.final_error, res.iterations, res.seconds};
}

RunOutcome run_one(Solver s, const DenseTensor<double>& X, const FitConfig& cfg) {
    switch (s) {
        case Solver::tr_als: return outcome_of(tr_als(X, cfg));
        case Solver::tr_als_sampled: return outcome_of(tr_als_sampled(X, cfg));
        case Solver::tr_ksrft_als: return outcome_of(tr_ksrft_als(X, cfg));
        case Solver::tr_ksrft_als_premix: return outcome_of(tr_ksrft_als_premix(X, cfg));
        case Solver::tr_ts_als: return outcome_of(tr_ts_als(X, cfg));
    }
    throw std::logic_error("run_one: unhandled solver");
}

using Runner = std::function<RunOutcome(Solver, const FitConfig&)>;

Runner make_runner(const DenseTensor<double>& X) {
    return [&X](Solver s, const FitConfig& cfg) { return run_one(s, X, cfg); };
}

Runner make_runner(const DenseTensor<cplx>& X) {
    return [&X](Solver s, const FitConfig& cfg) {
        switch (s) {
            case Solver::tr_als: return outcome_of(tr_als(X, cfg));
            case Solver::tr_ksrft_als_premix: return outcome_of(tr_ksrft_als_premix(X, cfg));
            default:
                throw std::invalid_argument(solver_name(s) + " requires a real tensor");
        }
    };
}

/// The CountSketch solver works off stored entries; the rest densify once.
Runner make_runner(const SparseTensor& Xs, const DenseTensor<double>& Xd) {
    return [&Xs, &Xd](Solver s, const FitConfig& cfg) {
        if (s == Solver::tr_ts_als) return outcome_of(tr_ts_als(Xs, cfg));
        return run_one(s, Xd, cfg);
    };
}

Index solver_ordinal(Solver s) { return static_cast<Index>(s) + 1; }

bool record_less(const ExperimentRecord& a, const ExperimentRecord& b) {
    if (a.solver != b.solver) return a.solver < b.solver;
    if (a.m != b.m) return a.m < b.m;
    return a.trial < b.trial;
}

std::vector<ExperimentRecord> stage_grid(const Runner& run, const std::vector<Index>& ranks,
                                         const SweepSpec& sweep, Index T,
                                         std::uint64_t stage_seed) {
    if (T < 1) throw std::invalid_argument("experimental_stage: iteration budget must be positive");
    if (sweep.trials < 1) throw std::invalid_argument("experimental_stage: need at least one trial");
    const auto grid = m_grid(sweep);
    std::vector<ExperimentRecord> records;
    for (Solver s : sweep.solvers) {
        const Index ord = solver_ordinal(s);
        const std::vector<Index> sizes = s == Solver::tr_als ? std::vector<Index>{0} : grid;
        for (Index m : sizes) {
            for (Index trial = 1; trial <= sweep.trials; ++trial) {
                FitConfig cfg;
                cfg.ranks = ranks;
                cfg.max_iters = 2 * T;
                cfg.m = m;
                cfg.seed = rng::sub_seed(stage_seed, static_cast<std::uint64_t>(ord),
                                         static_cast<std::uint64_t>(m),
                                         static_cast<std::uint64_t>(trial));
                const RunOutcome out = run(s, cfg);
                records.push_back(ExperimentRecord{solver_name(s), m, trial, cfg.seed, out.error,
                                                   out.iters, out.seconds});
            }
        }
    }
    std::sort(records.begin(), records.end(), record_less);
    return records;
}

std::vector<ExperimentRecord> stage_threshold(const Runner& run, const std::vector<Index>& ranks,
                                              const SweepSpec& sweep, const PrepResult& prep,
                                              std::uint64_t prep_seed, std::uint64_t stage_seed,
                                              std::ostream& log) {
    if (prep.iterations < 1)
        throw std::invalid_argument("threshold stage: iteration budget must be positive");
    if (sweep.trials < 1) throw std::invalid_argument("threshold stage: need at least one trial");
    if (!(sweep.threshold_factor > 0))
        throw std::invalid_argument("threshold stage: factor must be positive");
    std::vector<ExperimentRecord> records;
    records.push_back(ExperimentRecord{solver_name(Solver::tr_als), 0, 1, prep_seed, prep.error,
                                       prep.iterations, prep.seconds});
    const double target = sweep.threshold_factor * prep.error;
    for (Solver s : sweep.solvers) {
        if (s == Solver::tr_als) continue;
        const Index ord = solver_ordinal(s);
        for (Index m = sweep.J_init; m <= sweep.J_fin; m += sweep.J_inc) {
            std::vector<double> errs;
            errs.reserve(static_cast<std::size_t>(sweep.trials));
            for (Index trial = 1; trial <= sweep.trials; ++trial) {
                FitConfig cfg;
                cfg.ranks = ranks;
                cfg.max_iters = prep.iterations;
                cfg.m = m;
                cfg.seed = rng::sub_seed(stage_seed, static_cast<std::uint64_t>(ord),
                                         static_cast<std::uint64_t>(m),
                                         static_cast<std::uint64_t>(trial));
                const RunOutcome out = run(s, cfg);
                errs.push_back(out.error);
                records.push_back(ExperimentRecord{solver_name(s), m, trial, cfg.seed, out.error,
                                                   out.iters, out.seconds});
            }
            const double med = median(errs);
            log << "  " << solver_name(s) << " m=" << m << " median error " << med << "\n";
            if (med <= target) break;
        }
    }
    std::sort(records.begin(), records.end(), record_less);
    return records;
}

}  // namespace

std::vector<Index> m_grid(const SweepSpec& sweep) {
    if (sweep.J_init < 1 || sweep.J_inc < 1 || sweep.J_init > sweep.J_fin)
        throw std::invalid_argument("m_grid: need 1 <= J_init <= J_fin and J_inc >= 1");
    std::vector<Index> grid;
    for (Index m = sweep.J_init; m <= sweep.J_fin; m += sweep.J_inc) grid.push_back(m);
    return grid;
}

std::vector<ExperimentRecord> experimental_stage(const DenseTensor<double>& X,
                                                 const std::vector<Index>& ranks,
                                                 const SweepSpec& sweep, Index T,
                                                 std::uint64_t stage_seed) {
    return stage_grid(make_runner(X), ranks, sweep, T, stage_seed);
}

std::vector<ExperimentRecord> experimental_stage(const DenseTensor<cplx>& X,
                                                 const std::vector<Index>& ranks,
                                                 const SweepSpec& sweep, Index T,
                                                 std::uint64_t stage_seed) {
    return stage_grid(make_runner(X), ranks, sweep, T, stage_seed);
}

std::vector<ExperimentRecord> experimental_stage(const SparseTensor& X,
                                                 const std::vector<Index>& ranks,
                                                 const SweepSpec& sweep, Index T,
                                                 std::uint64_t stage_seed) {
    const DenseTensor<double> Xd = X.densify();
    return stage_grid(make_runner(X, Xd), ranks, sweep, T, stage_seed);
}

double median(std::vector<double> v) {
    if (v.empty()) throw std::invalid_argument("median: empty sample");
    std::sort(v.begin(), v.end());
    const std::size_t h = v.size() / 2;
    return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

void write_csv(const std::string& path, const std::vector<ExperimentRecord>& records,
               bool record_time) {
    std::vector<ExperimentRecord> rows = records;
    std::sort(rows.begin(), rows.end(), record_less);
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << "solver,m,trial,seed,rel_error,iters,seconds\n";
    char err[64], sec[64];
    for (const auto& r : rows) {
        std::snprintf(err, sizeof err, "%.17g", r.rel_error);
        std::snprintf(sec, sizeof sec, "%.6f", record_time ? r.seconds : 0.0);
        out << r.solver << ',' << r.m << ',' << r.trial << ',' << r.seed << ',' << err << ','
            << r.iters << ',' << sec << '\n';
    }
    if (!out) throw std::runtime_error("write failed: " + path);
}

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> parts;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) parts.push_back(item);
    }
    return parts;
}

Index parse_index(const std::string& key, const std::string& v) {
    std::size_t used = 0;
    Index out = 0;
    try {
        out = static_cast<Index>(std::stoll(v, &used));
    } catch (const std::exception&) {
        throw std::invalid_argument("config: bad integer for " + key + ": '" + v + "'");
    }
    if (used != v.size())
        throw std::invalid_argument("config: bad integer for " + key + ": '" + v + "'");
    return out;
}

std::uint64_t parse_u64(const std::string& key, const std::string& v) {
    std::size_t used = 0;
    std::uint64_t out = 0;
    try {
        out = std::stoull(v, &used);
    } catch (const std::exception&) {
        throw std::invalid_argument("config: bad integer for " + key + ": '" + v + "'");
    }
    if (used != v.size())
        throw std::invalid_argument("config: bad integer for " + key + ": '" + v + "'");
    return out;
}

double parse_double(const std::string& key, const std::string& v) {
    std::size_t used = 0;
    double out = 0;
    try {
        out = std::stod(v, &used);
    } catch (const std::exception&) {
        throw std::invalid_argument("config: bad number for " + key + ": '" + v + "'");
    }
    if (used != v.size())
        throw std::invalid_argument("config: bad number for " + key + ": '" + v + "'");
    return out;
}

}  // namespace

SweepSpec parse_sweep_config(std::istream& in) {
    std::map<std::string, std::string> kv;
    std::string line;
    while (std::getline(in, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config: expected key=value, got '" + line + "'");
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        if (key.empty() || val.empty())
            throw std::invalid_argument("config: empty key or value in '" + line + "'");
        kv[key] = val;
    }
    static const char* known[] = {"experiment", "N",       "I",        "R_true",
                                  "density",    "spread",  "magnitude", "seed",
                                  "input",      "noise",   "solvers",  "R",
                                  "J_init",     "J_inc",   "J_fin",    "trials",
                                  "prep_M",     "prep_eps", "record_time", "mode",
                                  "threshold_factor"};
    for (const auto& [key, value] : kv) {
        (void)value;
        if (std::find_if(std::begin(known), std::end(known),
                         [&](const char* k) { return key == k; }) == std::end(known))
            throw std::invalid_argument("config: unknown key '" + key + "'");
    }
    const auto has = [&](const char* k) { return kv.count(k) > 0; };
    const auto get = [&](const char* k) { return kv.at(k); };

    SweepSpec sweep;
    if (has("mode")) {
        const std::string m = get("mode");
        if (m == "grid")
            sweep.mode = SweepSpec::Mode::grid;
        else if (m == "threshold")
            sweep.mode = SweepSpec::Mode::threshold;
        else
            throw std::invalid_argument("config: mode must be grid or threshold");
    }
    if (has("experiment"))
        sweep.synth.experiment = static_cast<int>(parse_index("experiment", get("experiment")));
    if (has("N")) sweep.synth.N = parse_index("N", get("N"));
    if (has("I")) sweep.synth.I = parse_index("I", get("I"));
    if (has("R_true")) sweep.synth.R_true = parse_index("R_true", get("R_true"));
    if (has("density")) sweep.synth.density = parse_double("density", get("density"));
    if (has("spread")) sweep.synth.spread = parse_index("spread", get("spread"));
    if (has("magnitude")) sweep.synth.magnitude = parse_double("magnitude", get("magnitude"));
    if (has("seed")) {
        sweep.seed = parse_u64("seed", get("seed"));
        sweep.synth.seed = sweep.seed;
    }
    if (has("input")) sweep.input = get("input");
    if (has("noise")) {
        sweep.noise.clear();
        for (const auto& tok : split_list(get("noise"))) {
            const double level = parse_double("noise", tok);
            if (!(level >= 0)) throw std::invalid_argument("config: noise must be nonnegative");
            sweep.noise.push_back(level);
        }
        if (sweep.noise.empty()) throw std::invalid_argument("config: empty noise list");
    }
    if (has("solvers")) {
        sweep.solvers.clear();
        for (const auto& tok : split_list(get("solvers"))) sweep.solvers.push_back(solver_from_name(tok));
        if (sweep.solvers.empty()) throw std::invalid_argument("config: empty solver list");
    }
    sweep.R = has("R") ? parse_index("R", get("R")) : sweep.synth.R_true;
    if (sweep.R < 1) throw std::invalid_argument("config: R must be positive");
    const bool threshold = sweep.mode == SweepSpec::Mode::threshold;
    sweep.J_init = has("J_init") ? parse_index("J_init", get("J_init"))
                                 : (threshold ? 2 * sweep.R * sweep.R : sweep.J_init);
    if (has("J_inc")) sweep.J_inc = parse_index("J_inc", get("J_inc"));
    if (has("J_fin")) sweep.J_fin = parse_index("J_fin", get("J_fin"));
    if (has("trials")) sweep.trials = parse_index("trials", get("trials"));
    sweep.prep_M = has("prep_M") ? parse_index("prep_M", get("prep_M")) : (threshold ? 100 : 500);
    sweep.prep_eps =
        has("prep_eps") ? parse_double("prep_eps", get("prep_eps")) : (threshold ? 1e-3 : 1e-6);
    if (has("record_time")) {
        const std::string v = get("record_time");
        if (v == "wall")
            sweep.record_time = true;
        else if (v == "none")
            sweep.record_time = false;
        else
            throw std::invalid_argument("config: record_time must be wall or none");
    }
    if (has("threshold_factor"))
        sweep.threshold_factor = parse_double("threshold_factor", get("threshold_factor"));
    if (sweep.J_init < 1 || sweep.J_inc < 1 || sweep.J_init > sweep.J_fin)
        throw std::invalid_argument("config: need 1 <= J_init <= J_fin and J_inc >= 1");
    if (sweep.trials < 1) throw std::invalid_argument("config: trials must be positive");
    if (sweep.prep_M < 1) throw std::invalid_argument("config: prep_M must be positive");
    if (!(sweep.prep_eps >= 0)) throw std::invalid_argument("config: prep_eps must be nonnegative");
    if (!(sweep.threshold_factor > 0))
        throw std::invalid_argument("config: threshold_factor must be positive");
    return sweep;
}

SweepSpec load_sweep_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config: " + path);
    return parse_sweep_config(in);
}

namespace {

std::string noise_tagged_path(const std::string& path, double level) {
    char tag[48];
    std::snprintf(tag, sizeof tag, "_noise%g", level);
    const auto dot = path.find_last_of('.');
    const auto slash = path.find_last_of("/\\");
    if (dot == std::string::npos || (slash != std::string::npos && dot < slash))
        return path + tag;
    return path.substr(0, dot) + tag + path.substr(dot);
}

void log_summary(std::ostream& log, const std::vector<ExperimentRecord>& records) {
    std::map<std::pair<std::string, Index>, std::vector<double>> groups;
    for (const auto& r : records) groups[{r.solver, r.m}].push_back(r.rel_error);
    for (auto& [key, errs] : groups) {
        double mean = 0;
        for (double e : errs) mean += e;
        mean /= static_cast<double>(errs.size());
        log << "  " << key.first;
        if (key.second > 0) log << " m=" << key.second;
        log << ": median error " << median(errs) << ", mean " << mean << " over " << errs.size()
            << " trials\n";
    }
}

}  // namespace

std::vector<std::string> run_sweep(const SweepSpec& sweep, const std::string& out_path,
                                   std::ostream& log) {
    if (sweep.noise.empty()) throw std::invalid_argument("run_sweep: empty noise list");
    io::AnyTensor data;
    if (!sweep.input.empty()) {
        data = io::read_tensor(sweep.input);
        log << "input " << sweep.input << ": " << data.shape().to_string() << "\n";
    } else {
        const Synthetic syn = gen_synthetic(sweep.synth);
        switch (syn.kind) {
            case Synthetic::Kind::dense_real:
                data.kind = io::AnyTensor::Kind::dense_real;
                data.dense = syn.X;
                break;
            case Synthetic::Kind::sparse_real:
                data.kind = io::AnyTensor::Kind::sparse;
                data.sparse = syn.Xs;
                break;
            case Synthetic::Kind::dense_complex:
                data.kind = io::AnyTensor::Kind::dense_complex;
                data.dense_c = syn.Xc;
                break;
        }
        log << "synthetic experiment " << sweep.synth.experiment << ": "
            << data.shape().to_string() << "\n";
    }
    const std::vector<Index> ranks(static_cast<std::size_t>(data.shape().order()), sweep.R);
    std::vector<std::string> paths;
    for (std::size_t li = 0; li < sweep.noise.size(); ++li) {
        const double level = sweep.noise[li];
        const std::uint64_t level_seed = rng::sub_seed(sweep.seed, 10, li);
        const std::uint64_t noise_seed = rng::sub_seed(level_seed, rng::tag_noise);
        const std::uint64_t prep_seed = rng::sub_seed(level_seed, 11);
        const std::uint64_t stage_seed = rng::sub_seed(level_seed, 12);
        log << "noise level " << level << "\n";
        PrepResult prep;
        std::vector<ExperimentRecord> records;
        const bool threshold = sweep.mode == SweepSpec::Mode::threshold;
        switch (data.kind) {
            case io::AnyTensor::Kind::dense_real: {
                const DenseTensor<double> Xn = add_noise(data.dense, level, noise_seed);
                prep = preparation_stage(Xn, ranks, sweep.prep_M, sweep.prep_eps, prep_seed);
                log << "  preparation: T=" << prep.iterations << " error=" << prep.error << "\n";
                records = threshold ? stage_threshold(make_runner(Xn), ranks, sweep, prep,
                                                      prep_seed, stage_seed, log)
                                    : experimental_stage(Xn, ranks, sweep, prep.iterations,
                                                         stage_seed);
                break;
            }
            case io::AnyTensor::Kind::dense_complex: {
                const DenseTensor<cplx> Xn = add_noise(data.dense_c, level, noise_seed);
                prep = preparation_stage(Xn, ranks, sweep.prep_M, sweep.prep_eps, prep_seed);
                log << "  preparation: T=" << prep.iterations << " error=" << prep.error << "\n";
                records = threshold ? stage_threshold(make_runner(Xn), ranks, sweep, prep,
                                                      prep_seed, stage_seed, log)
                                    : experimental_stage(Xn, ranks, sweep, prep.iterations,
                                                         stage_seed);
                break;
            }
            case io::AnyTensor::Kind::sparse: {
                const SparseTensor Xn = add_noise(data.sparse, level, noise_seed);
                const DenseTensor<double> Xd = Xn.densify();
                prep = preparation_stage(Xd, ranks, sweep.prep_M, sweep.prep_eps, prep_seed);
                log << "  preparation: T=" << prep.iterations << " error=" << prep.error << "\n";
                records = threshold
                              ? stage_threshold(make_runner(Xn, Xd), ranks, sweep, prep,
                                                prep_seed, stage_seed, log)
                              : stage_grid(make_runner(Xn, Xd), ranks, sweep, prep.iterations,
                                           stage_seed);
                break;
            }
        }
        log_summary(log, records);
        const std::string path =
            sweep.noise.size() == 1 ? out_path : noise_tagged_path(out_path, level);
        write_csv(path, records, sweep.record_time);
        log << "  wrote " << path << " (" << records.size() << " records)\n";
        paths.push_back(path);
    }
    return paths;
}

}  // namespace trs
