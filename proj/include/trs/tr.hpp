#pragma once

#include <vector>

#include "trs/tensor.hpp"

namespace trs {

/// Read-only view of lateral slice i (1-based) of an order-3 core
/// (R1 x I x R2): an R1 x R2 matrix.
template <class T>
using SliceView = Eigen::Map<const Mat<T>, 0, Eigen::OuterStride<>>;

template <class T>
SliceView<T> lateral_slice(const DenseTensor<T>& core, Index i) {
    if (core.order() != 3)
        throw std::invalid_argument("lateral_slice: core must be order 3");
    if (i < 1 || i > core.dim(2))
        throw std::domain_error("lateral_slice: slice index out of range");
    const Index R1 = core.dim(1), I = core.dim(2), R2 = core.dim(3);
    return SliceView<T>(core.data() + (i - 1) * R1, R1, R2,
                        Eigen::OuterStride<>(R1 * I));
}

/// Tensor-ring core chain: core n has shape R_n x I_n x R_{n+1}, with the
/// ring closure R_{N+1} = R_1.
template <class T>
class TRCores {
public:
    TRCores() = default;

    explicit TRCores(std::vector<DenseTensor<T>> cores) : cores_(std::move(cores)) {
        if (cores_.empty())
            throw std::invalid_argument("TRCores: need at least one core");
        const Index N = count();
        for (Index n = 1; n <= N; ++n) {
            if (cores_[static_cast<std::size_t>(n - 1)].order() != 3)
                throw std::invalid_argument("TRCores: every core must be order 3");
            const Index next = n == N ? 1 : n + 1;
            if (cores_[static_cast<std::size_t>(n - 1)].dim(3) !=
                cores_[static_cast<std::size_t>(next - 1)].dim(1))
                throw std::invalid_argument("TRCores: ring rank mismatch between cores " +
                                            std::to_string(n) + " and " +
                                            std::to_string(next));
        }
    }

    Index count() const { return static_cast<Index>(cores_.size()); }

    const DenseTensor<T>& core(Index n) const {
        if (n < 1 || n > count()) throw std::domain_error("TRCores::core: index out of range");
        return cores_[static_cast<std::size_t>(n - 1)];
    }
    DenseTensor<T>& core(Index n) {
        if (n < 1 || n > count()) throw std::domain_error("TRCores::core: index out of range");
        return cores_[static_cast<std::size_t>(n - 1)];
    }

    /// R_n for n in 1..N+1, wrapping at the ring closure.
    Index rank(Index n) const {
        if (n < 1 || n > count() + 1) throw std::domain_error("TRCores::rank: index out of range");
        return n == count() + 1 ? cores_[0].dim(1) : core(n).dim(1);
    }

    Shape dims() const {
        std::vector<Index> d;
        d.reserve(static_cast<std::size_t>(count()));
        for (Index n = 1; n <= count(); ++n) d.push_back(core(n).dim(2));
        return Shape(d);
    }

    const std::vector<DenseTensor<T>>& cores() const { return cores_; }
    std::vector<DenseTensor<T>>& cores() { return cores_; }

private:
    std::vector<DenseTensor<T>> cores_;
};

/// Mode-2 subchain product: A (I1 x J1 x K) with B (K x J2 x I2) gives an
/// I1 x J1*J2 x I2 tensor whose slice (j1, j2), j1 fastest, is A(j1) B(j2).
template <class T>
DenseTensor<T> subchain_product(const DenseTensor<T>& A, const DenseTensor<T>& B) {
    if (A.order() != 3 || B.order() != 3)
        throw std::invalid_argument("subchain_product: operands must be order 3");
    if (A.dim(3) != B.dim(1))
        throw std::invalid_argument("subchain_product: inner ranks do not match");
    const Index I1 = A.dim(1), J1 = A.dim(2);
    const Index J2 = B.dim(2), I2 = B.dim(3);
    DenseTensor<T> C{Shape({I1, J1 * J2, I2})};
    using MutSlice = Eigen::Map<Mat<T>, 0, Eigen::OuterStride<>>;
    for (Index j2 = 1; j2 <= J2; ++j2) {
        auto b = lateral_slice(B, j2);
        for (Index j1 = 1; j1 <= J1; ++j1) {
            const Index j = j1 + (j2 - 1) * J1;
            MutSlice c(C.data() + (j - 1) * I1, I1, I2,
                       Eigen::OuterStride<>(I1 * J1 * J2));
            c = lateral_slice(A, j1) * b;
        }
    }
    return C;
}

/// Slice-wise product of two order-3 tensors sharing the middle extent:
/// slice j of the result is A(j) B(j).
template <class T>
DenseTensor<T> slices_hadamard(const DenseTensor<T>& A, const DenseTensor<T>& B) {
    if (A.order() != 3 || B.order() != 3)
        throw std::invalid_argument("slices_hadamard: operands must be order 3");
    if (A.dim(2) != B.dim(2))
        throw std::invalid_argument("slices_hadamard: middle extents do not match");
    if (A.dim(3) != B.dim(1))
        throw std::invalid_argument("slices_hadamard: inner ranks do not match");
    const Index I1 = A.dim(1), J = A.dim(2), I2 = B.dim(3);
    DenseTensor<T> C{Shape({I1, J, I2})};
    using MutSlice = Eigen::Map<Mat<T>, 0, Eigen::OuterStride<>>;
    for (Index j = 1; j <= J; ++j) {
        MutSlice c(C.data() + (j - 1) * I1, I1, I2, Eigen::OuterStride<>(I1 * J));
        c = lateral_slice(A, j) * lateral_slice(B, j);
    }
    return C;
}

/// Ordered mode list (n+1..N, 1..n-1) for operations that skip mode n.
inline std::vector<Index> modes_skipping(Index N, Index skip) {
    if (skip < 1 || skip > N) throw std::domain_error("modes_skipping: mode out of range");
    std::vector<Index> order;
    order.reserve(static_cast<std::size_t>(N - 1));
    for (Index k = skip + 1; k <= N; ++k) order.push_back(k);
    for (Index k = 1; k < skip; ++k) order.push_back(k);
    return order;
}

/// Merged chain of all cores except core n: an R_{n+1} x prod_{j!=n} I_j x R_n
/// tensor whose slice at the joint index of (i_{n+1},...,i_N,i_1,...,i_{n-1})
/// is the left-to-right product of the corresponding lateral slices.
template <class T>
DenseTensor<T> subchain_tensor(const TRCores<T>& cores, Index skip) {
    const Index N = cores.count();
    if (N < 2)
        throw std::invalid_argument("subchain_tensor: need at least two cores");
    const auto order = modes_skipping(N, skip);
    DenseTensor<T> acc = cores.core(order[0]);
    for (std::size_t k = 1; k < order.size(); ++k)
        acc = subchain_product(acc, cores.core(order[k]));
    return acc;
}

/// Classical mode-2 unfolding of a core: I x R1*R2 with the R1 index fastest.
template <class T>
Mat<T> core_mode2_unfolding(const DenseTensor<T>& core) {
    if (core.order() != 3)
        throw std::invalid_argument("core_mode2_unfolding: core must be order 3");
    return unfold(core, 2, UnfoldKind::classical);
}

/// Inverse of core_mode2_unfolding.
template <class T>
DenseTensor<T> core_from_mode2(const Mat<T>& M, Index R1, Index R2) {
    if (R1 < 1 || R2 < 1 || M.cols() != R1 * R2)
        throw std::invalid_argument("core_from_mode2: column count must equal R1*R2");
    return fold(M, 2, Shape({R1, M.rows(), R2}), UnfoldKind::classical);
}

/// LS design matrix: the wrapped mode-2 unfolding of the subchain tensor,
/// prod_{j!=n} I_j rows by R_n*R_{n+1} columns (R_n index fastest, matching
/// the column order of core_mode2_unfolding).
template <class T>
Mat<T> subchain_design(const DenseTensor<T>& subchain) {
    if (subchain.order() != 3)
        throw std::invalid_argument("subchain_design: operand must be order 3");
    return unfold(subchain, 2, UnfoldKind::wrapped);
}

/// Contract the ring: X(i_1,...,i_N) = trace(G_1(i_1) ... G_N(i_N)).
template <class T>
DenseTensor<T> tr_reconstruct(const TRCores<T>& cores) {
    const Index N = cores.count();
    if (N == 1) {
        const auto& G = cores.core(1);
        DenseTensor<T> X{cores.dims()};
        for (Index i = 1; i <= G.dim(2); ++i) X[i - 1] = lateral_slice(G, i).trace();
        return X;
    }
    const Mat<T> A = subchain_design(subchain_tensor(cores, 1));
    const Mat<T> Z = core_mode2_unfolding(cores.core(1));
    const Mat<T> X1 = Z * A.transpose();
    return fold(X1, 1, cores.dims(), UnfoldKind::wrapped);
}

/// ||TR(cores) - X||_F / ||X||_F.
template <class T>
double relative_error(const TRCores<T>& cores, const DenseTensor<T>& X) {
    if (cores.dims() != X.shape())
        throw std::invalid_argument("relative_error: core dims do not match tensor");
    const double denom = frobenius_norm(X);
    if (denom == 0.0)
        throw std::domain_error("relative_error: reference tensor has zero norm");
    const DenseTensor<T> R = tr_reconstruct(cores);
    double s = 0;
    for (Index k = 0; k < X.size(); ++k) s += std::norm(R[k] - X[k]);
    return std::sqrt(s) / denom;
}

inline double relative_error(const TRCores<double>& cores, const SparseTensor& X) {
    if (cores.dims() != X.shape())
        throw std::invalid_argument("relative_error: core dims do not match tensor");
    const double denom = frobenius_norm(X);
    if (denom == 0.0)
        throw std::domain_error("relative_error: reference tensor has zero norm");
    DenseTensor<double> R = tr_reconstruct(cores);
    double s = 0;
    for (Index k = 0; k < R.size(); ++k) s += R[k] * R[k];
    const auto& idx = X.indices();
    const auto& val = X.values();
    for (std::size_t k = 0; k < val.size(); ++k) {
        const double r = R.at(idx[k]);
        s += (r - val[k]) * (r - val[k]) - r * r;
    }
    return std::sqrt(std::max(s, 0.0)) / denom;
}

}  // namespace trs
