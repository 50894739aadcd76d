#pragma once

#include "trs/sketch.hpp"

namespace trs {

struct FitConfig {
    std::vector<Index> ranks;        // target R_1..R_N; closure R_{N+1} = R_1
    Index max_iters = 100;           // outer sweeps
    double tol = 0.0;                // > 0: stop once relative error drops below
    Index m = 0;                     // sketch size (randomized solvers)
    std::uint64_t seed = 0;
    bool track_per_iter = false;     // record relative error after every sweep
    bool exhaustive_sketch = false;  // degenerate identity-sketch regime
};

template <class T>
struct FitResult {
    TRCores<T> cores;
    std::vector<double> errors;  // per-sweep errors when tracking is on
    double final_error = 0;
    Index iterations = 0;
    double seconds = 0;
    double max_imag = 0;  // premixed solver on real input: residual imaginary size
    bool imag_warning = false;
};

/// min_Z ||A Z - B||_F. QR when A has full column rank, otherwise the
/// minimum-norm solution via SVD with relative singular value cutoff 1e-12.
template <class T>
Mat<T> solve_ls(const Mat<T>& A, const Mat<T>& B);

/// min over real Z of ||A Z - B||_F for complex A, B, via the stacked system
/// [Re A; Im A] Z = [Re B; Im B].
Matd solve_ls_real(const Matz& A, const Matz& B);

/// Seeded standard-normal initialization (complex scalars get independent
/// real and imaginary parts). All solvers derive initial cores identically.
template <class T>
TRCores<T> init_cores(const Shape& dims, const std::vector<Index>& ranks,
                      std::uint64_t seed);

/// Alternating LS over the exact subchain design. Works for real and complex
/// tensors.
template <class T>
FitResult<T> tr_als(const DenseTensor<T>& X, const FitConfig& cfg);

/// ALS with leverage-score row sampling of each LS problem; the distribution
/// of a core refreshes right after its update.
FitResult<double> tr_als_sampled(const DenseTensor<double>& X, const FitConfig& cfg);

/// ALS on the Fourier-mixed problem: uniform row sampling of mixed subchain
/// and right-hand side, real-constrained LS, cores re-mixed after update.
FitResult<double> tr_ksrft_als(const DenseTensor<double>& X, const FitConfig& cfg);

/// Variant iterating entirely in the mixed domain with complex LS; cores are
/// unmixed once at the end. Real input yields real cores (imaginary parts are
/// dropped; their maximum magnitude is reported and a warning is flagged at
/// 1e-8).
FitResult<double> tr_ksrft_als_premix(const DenseTensor<double>& X, const FitConfig& cfg);
FitResult<cplx> tr_ksrft_als_premix(const DenseTensor<cplx>& X, const FitConfig& cfg);

/// ALS with CountSketch-based subchain compression; hashes are drawn once up
/// front and the sketched right-hand sides are precomputed per mode. The
/// sparse overload touches only stored entries for the right-hand sides.
FitResult<double> tr_ts_als(const DenseTensor<double>& X, const FitConfig& cfg);
FitResult<double> tr_ts_als(const SparseTensor& X, const FitConfig& cfg);

}  // namespace trs
