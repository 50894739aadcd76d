#pragma once

#include <functional>
#include <iosfwd>
#include <limits>
#include <string>

#include "trs/io.hpp"
#include "trs/solvers.hpp"

namespace trs {

/// Recipe for one synthetic N-way tensor built from R_true x I x R_true cores.
struct SynthSpec {
    int experiment = 1;  // 1 dense, 2 sparse, 3 outlier fibers, 4 complex
    Index N = 3;
    Index I = 60;
    Index R_true = 5;
    double density = 0.05;  // experiment 2: nonzero fraction per core
    Index spread = 15;      // experiment 3: nonzeros per planted column
    double magnitude = std::numeric_limits<double>::quiet_NaN();  // NaN: I/4 - 10
    std::uint64_t seed = 0;
};

struct Synthetic {
    enum class Kind { dense_real, sparse_real, dense_complex };
    Kind kind = Kind::dense_real;
    TRCores<double> cores;    // ground truth (real kinds)
    TRCores<cplx> cores_c;    // ground truth (complex kind)
    DenseTensor<double> X;    // experiments 1 and 3
    SparseTensor Xs;          // experiment 2
    DenseTensor<cplx> Xc;     // experiment 4
};

Synthetic gen_synthetic(const SynthSpec& spec);

/// X + noise * (||X|| / ||N||) * N with N standard normal, so the achieved
/// relative perturbation equals `noise` exactly up to rounding. The sparse
/// overload perturbs only stored entries.
DenseTensor<double> add_noise(const DenseTensor<double>& X, double noise, std::uint64_t seed);
DenseTensor<cplx> add_noise(const DenseTensor<cplx>& X, double noise, std::uint64_t seed);
SparseTensor add_noise(const SparseTensor& X, double noise, std::uint64_t seed);

enum class Solver { tr_als, tr_als_sampled, tr_ksrft_als, tr_ksrft_als_premix, tr_ts_als };

std::string solver_name(Solver s);
Solver solver_from_name(const std::string& name);
const std::vector<Solver>& all_solvers();

struct PrepResult {
    Index iterations = 0;  // T, the budget source for the experimental stage
    double error = 0;
    double seconds = 0;
};

/// Reference run: ALS until the iteration cap M or relative error < eps.
PrepResult preparation_stage(const DenseTensor<double>& X, const std::vector<Index>& ranks,
                             Index M, double eps, std::uint64_t seed);
PrepResult preparation_stage(const DenseTensor<cplx>& X, const std::vector<Index>& ranks,
                             Index M, double eps, std::uint64_t seed);
PrepResult preparation_stage(const SparseTensor& X, const std::vector<Index>& ranks,
                             Index M, double eps, std::uint64_t seed);

struct ExperimentRecord {
    std::string solver;
    Index m = 0;  // 0 for the unsketched reference
    Index trial = 0;
    std::uint64_t seed = 0;
    double rel_error = 0;
    Index iters = 0;
    double seconds = 0;
};

struct SweepSpec {
    SynthSpec synth;
    std::string input;  // tensor file path; empty means synthesize
    std::vector<double> noise{0.0};
    std::vector<Solver> solvers{Solver::tr_als, Solver::tr_als_sampled, Solver::tr_ksrft_als,
                                Solver::tr_ts_als};
    Index R = 5;  // target rank for every mode
    Index J_init = 100;
    Index J_inc = 100;
    Index J_fin = 1000;
    Index trials = 10;
    Index prep_M = 500;
    double prep_eps = 1e-6;
    std::uint64_t seed = 0;
    bool record_time = true;  // false: write zero seconds for bit-stable output
    enum class Mode { grid, threshold } mode = Mode::grid;
    double threshold_factor = 1.1;  // threshold mode stop rule
};

/// Embedding sizes J_init, J_init + J_inc, ..., capped at J_fin.
std::vector<Index> m_grid(const SweepSpec& sweep);

/// One record per solver x embedding size x trial with iteration cap 2T; the
/// unsketched reference runs once per trial without an embedding size.
std::vector<ExperimentRecord> experimental_stage(const DenseTensor<double>& X,
                                                 const std::vector<Index>& ranks,
                                                 const SweepSpec& sweep, Index T,
                                                 std::uint64_t stage_seed);
std::vector<ExperimentRecord> experimental_stage(const DenseTensor<cplx>& X,
                                                 const std::vector<Index>& ranks,
                                                 const SweepSpec& sweep, Index T,
                                                 std::uint64_t stage_seed);
std::vector<ExperimentRecord> experimental_stage(const SparseTensor& X,
                                                 const std::vector<Index>& ranks,
                                                 const SweepSpec& sweep, Index T,
                                                 std::uint64_t stage_seed);

double median(std::vector<double> v);

/// Canonically sorted rows under the header
/// solver,m,trial,seed,rel_error,iters,seconds.
void write_csv(const std::string& path, const std::vector<ExperimentRecord>& records,
               bool record_time);

/// Flat key=value text, one pair per line, '#' comments. Unknown keys are
/// rejected; threshold mode changes the defaults of J_init (2R^2), prep_M
/// (100) and prep_eps (1e-3).
SweepSpec parse_sweep_config(std::istream& in);
SweepSpec load_sweep_config(const std::string& path);

/// Full two-stage protocol per noise level; returns the CSV paths written.
/// Multiple noise levels write one file each, tagged _noise<level>.
std::vector<std::string> run_sweep(const SweepSpec& sweep, const std::string& out_path,
                                   std::ostream& log);

}  // namespace trs
