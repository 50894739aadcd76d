#pragma once

#include <cstdint>
#include <vector>

#include "trs/rng.hpp"
#include "trs/tr.hpp"

namespace trs {

/// Random diagonal sign-flip operator: diag(d), d_i in {-1, +1}.
class SignFlip {
public:
    SignFlip(Index n, std::uint64_t seed);

    Index size() const { return static_cast<Index>(signs_.size()); }
    double sign(Index i) const {
        if (i < 1 || i > size()) throw std::domain_error("SignFlip: index out of range");
        return signs_[static_cast<std::size_t>(i - 1)];
    }
    const std::vector<double>& signs() const { return signs_; }

private:
    std::vector<double> signs_;
};

/// Unitary Fourier mixer for one mode: mixing applies F D to a fiber, the
/// inverse applies D F^*. F is the unitary DFT of the mode's length.
class ModeMixer {
public:
    ModeMixer(Index n, std::uint64_t seed) : signs_(n, seed) {}

    Index size() const { return signs_.size(); }
    const SignFlip& signs() const { return signs_; }

    void mix_fiber(cplx* x) const;    // x <- F D x
    void unmix_fiber(cplx* x) const;  // x <- D F^* x

private:
    SignFlip signs_;
};

/// Mix/unmix the middle mode of an order-3 core.
DenseTensor<cplx> mix_core(const DenseTensor<double>& core, const ModeMixer& mixer);
DenseTensor<cplx> mix_core(const DenseTensor<cplx>& core, const ModeMixer& mixer);
DenseTensor<cplx> unmix_core(const DenseTensor<cplx>& core, const ModeMixer& mixer);

/// Mix every mode of a tensor (one mixer per mode, in mode order).
DenseTensor<cplx> mix_tensor(const DenseTensor<double>& X, const std::vector<ModeMixer>& mixers);
DenseTensor<cplx> mix_tensor(const DenseTensor<cplx>& X, const std::vector<ModeMixer>& mixers);
DenseTensor<cplx> unmix_tensor(const DenseTensor<cplx>& X, const std::vector<ModeMixer>& mixers);

/// Per-mode sampled index lists for the ordered modes (n+1..N, 1..n-1).
struct IndexTable {
    std::vector<Index> modes;             // 1-based mode numbers, in order
    std::vector<std::vector<Index>> idx;  // idx[k][j]: 1-based draw j for modes[k]

    Index m() const { return idx.empty() ? 0 : static_cast<Index>(idx[0].size()); }

    /// 1-based joint column index of draw j (0-based) in the wrapped
    /// mode-n unfolding: little-endian over the listed modes.
    Index joint(const Shape& shape, Index j) const {
        Index flat = 0, stride = 1;
        for (std::size_t k = 0; k < modes.size(); ++k) {
            flat += (idx[k][static_cast<std::size_t>(j)] - 1) * stride;
            stride *= shape.dim(modes[k]);
        }
        return flat + 1;
    }
};

/// Uniform-with-replacement sampler of per-mode indices.
class UniformSampler {
public:
    explicit UniformSampler(std::uint64_t seed) : rng_(seed) {}

    IndexTable draw(const Shape& shape, Index skip, Index m);

    /// Degenerate regime: every joint index exactly once, in column order.
    static IndexTable exhaustive(const Shape& shape, Index skip);

private:
    rng::Rng rng_;
};

/// Polynomial hash over GF(2^61-1): degree k-1 with uniform coefficients,
/// giving k-wise independence.
class KWiseHash {
public:
    static constexpr std::uint64_t prime = (std::uint64_t(1) << 61) - 1;

    KWiseHash() = default;
    KWiseHash(Index k, std::uint64_t seed);

    std::uint64_t raw(Index x) const;  // in [0, prime)
    Index bucket(Index x, Index m) const {
        return static_cast<Index>(raw(x) % static_cast<std::uint64_t>(m)) + 1;
    }
    double sign(Index x) const { return (raw(x) & 1u) ? 1.0 : -1.0; }

    const std::vector<std::uint64_t>& coeffs() const { return coeffs_; }

private:
    std::vector<std::uint64_t> coeffs_;
};

/// CountSketch data for every mode of a tensor: 3-wise independent bucket
/// hashes into [m] and 4-wise independent sign hashes, materialized as
/// per-mode tables. The combined sketch over modes != n hashes a joint index
/// to ((sum of (h_j - 1)) mod m) + 1 with sign prod s_j.
class TensorSketchOp {
public:
    TensorSketchOp(const Shape& shape, Index m, std::uint64_t seed);

    /// Degenerate regime for a fixed skipped mode: m = prod_{j != skip} I_j,
    /// combined bucket equals the joint column index, all signs +1.
    static TensorSketchOp injective(const Shape& shape, Index skip);

    Index m() const { return m_; }
    const Shape& shape() const { return shape_; }

    Index bucket(Index mode, Index i) const {
        return bucket_[static_cast<std::size_t>(mode - 1)][static_cast<std::size_t>(i - 1)];
    }
    double sign(Index mode, Index i) const {
        return sign_[static_cast<std::size_t>(mode - 1)][static_cast<std::size_t>(i - 1)];
    }

    /// Combined hash of per-mode indices `others`, aligned with
    /// modes_skipping(order, skip).
    Index combined_bucket(Index skip, const MultiIndex& others) const;
    double combined_sign(Index skip, const MultiIndex& others) const;

private:
    TensorSketchOp() = default;
    Shape shape_;
    Index m_ = 0;
    std::vector<std::vector<Index>> bucket_;
    std::vector<std::vector<double>> sign_;
};

/// Row-leverage-score sampling distribution of a matrix: p_i proportional to
/// the squared i-th row norm of an orthonormal column basis. QR on the
/// full-rank path, SVD fallback at a relative singular value cutoff.
class LeverageDistribution {
public:
    explicit LeverageDistribution(const Matd& M, double rank_tol = 1e-12);

    const Vecd& probabilities() const { return p_; }
    Index rank() const { return rank_; }

    /// One draw (1-based) by inverse-CDF.
    Index sample(rng::Rng& rng) const;

private:
    Vecd p_;
    std::vector<double> cdf_;
    Index rank_ = 0;
};

/// Leverage distribution over the lateral-slice index of a core, computed
/// from its classical mode-2 unfolding.
LeverageDistribution leverage_distribution(const DenseTensor<double>& core);

/// Per-mode draws from the given distributions (entry for the skipped mode is
/// ignored and may be null).
IndexTable draw_joint_samples(const Shape& shape, Index skip, Index m,
                              const std::vector<const LeverageDistribution*>& dists,
                              rng::Rng& rng);

/// Sampled subchain: slice j is the left-to-right product of the sampled
/// lateral slices of the cores in order (n+1..N, 1..n-1); an
/// R_{n+1} x m x R_n tensor.
template <class T>
DenseTensor<T> sampled_subchain(const TRCores<T>& cores, Index skip,
                                const IndexTable& idxs) {
    const Index N = cores.count();
    if (N < 2) throw std::invalid_argument("sampled_subchain: need at least two cores");
    const auto order = modes_skipping(N, skip);
    if (idxs.modes != order)
        throw std::invalid_argument("sampled_subchain: index table modes mismatch");
    const Index m = idxs.m();
    const Index R1 = cores.rank(skip + 1), R2 = cores.rank(skip);
    DenseTensor<T> out{Shape({R1, m, R2})};
    using MutSlice = Eigen::Map<Mat<T>, 0, Eigen::OuterStride<>>;
    Mat<T> acc, tmp;
    for (Index j = 0; j < m; ++j) {
        acc = lateral_slice(cores.core(order[0]), idxs.idx[0][static_cast<std::size_t>(j)]);
        for (std::size_t k = 1; k < order.size(); ++k) {
            tmp.noalias() =
                acc * lateral_slice(cores.core(order[k]), idxs.idx[k][static_cast<std::size_t>(j)]);
            acc.swap(tmp);
        }
        MutSlice(out.data() + j * R1, R1, R2, Eigen::OuterStride<>(R1 * m)) = acc;
    }
    return out;
}

/// Rows of the wrapped mode-n unfolding transpose at the joint sample
/// indices: an m x I_n matrix, row j = X(i_1,...,:,...,i_N) over mode n.
template <class T>
Mat<T> gather_unfolding_rows(const DenseTensor<T>& X, Index mode, const IndexTable& idxs) {
    const auto sp = detail::mode_split(X.shape(), mode);
    const Index m = idxs.m();
    Mat<T> B(m, sp.mode_size);
    for (Index j = 0; j < m; ++j) {
        const Index c = idxs.joint(X.shape(), j) - 1;
        const Index outer = c % sp.outer_size;
        const Index inner = c / sp.outer_size;
        const T* base = X.data() + inner + outer * sp.inner_size * sp.mode_size;
        for (Index i = 0; i < sp.mode_size; ++i) B(j, i) = base[i * sp.inner_size];
    }
    return B;
}

/// Sampled right-hand side of the Fourier-mixed LS problem: rows of the mixed
/// tensor's wrapped mode-n unfolding transpose, each row passed through the
/// mode-n unmixer when one is given.
Matz ksrft_sketch_rhs(const DenseTensor<cplx>& Xhat, Index mode, const IndexTable& idxs,
                      const ModeMixer* unmix);

/// CountSketch of the middle mode of a core: lateral slice i accumulates into
/// bucket(mode, i) with its sign; an R1 x m x R2 tensor.
template <class T>
DenseTensor<T> countsketch_core(const DenseTensor<T>& core, const TensorSketchOp& op,
                                Index mode) {
    if (core.order() != 3)
        throw std::invalid_argument("countsketch_core: core must be order 3");
    if (op.shape().dim(mode) != core.dim(2))
        throw std::invalid_argument("countsketch_core: mode extent mismatch");
    const Index R1 = core.dim(1), I = core.dim(2), R2 = core.dim(3);
    const Index m = op.m();
    DenseTensor<T> out{Shape({R1, m, R2})};
    using MutSlice = Eigen::Map<Mat<T>, 0, Eigen::OuterStride<>>;
    for (Index i = 1; i <= I; ++i) {
        const Index h = op.bucket(mode, i);
        MutSlice(out.data() + (h - 1) * R1, R1, R2, Eigen::OuterStride<>(R1 * m)) +=
            T(op.sign(mode, i)) * lateral_slice(core, i);
    }
    return out;
}

/// TensorSketch of the subchain via the FFT factorization: per-mode
/// CountSketches of the cores, transformed along the sketch dimension,
/// slice-multiplied, and transformed back.
DenseTensor<double> tensorsketch_subchain(const TRCores<double>& cores,
                                          const TensorSketchOp& op, Index skip);

/// TensorSketch of the unfolding right-hand side: T_{!=n} X_[n]^T, an
/// m x I_n matrix. The sparse overload touches only stored entries.
Matd tensorsketch_rhs(const DenseTensor<double>& X, Index mode, const TensorSketchOp& op);
Matd tensorsketch_rhs(const SparseTensor& X, Index mode, const TensorSketchOp& op);

enum class SketchKind { ksrft, tensorsketch };

/// Sketch-size heuristic from the sampling-complexity bounds with all hidden
/// constants set to 1 (log factors clamped at 1), floored at 1 and capped at
/// prod(other_dims). For the Fourier sketch the failure probability only
/// enters the success bound, so eta is validated but unused.
Index recommend_embedding_size(SketchKind kind, Index Rn, Index Rn1, Index N,
                               const std::vector<Index>& other_dims, double eps,
                               double eta);

}  // namespace trs
