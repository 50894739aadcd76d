#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <unordered_map>
#include <vector>

#include "trs/shape.hpp"

namespace trs {

using cplx = std::complex<double>;

template <class T>
using Mat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;
template <class T>
using Vec = Eigen::Matrix<T, Eigen::Dynamic, 1>;
using Matd = Mat<double>;
using Matz = Mat<cplx>;
using Vecd = Vec<double>;

/// Unfolding flavors. wrapped: columns run over modes (n+1..N, 1..n-1),
/// first listed fastest. classical: columns run over (1..n-1, n+1..N).
enum class UnfoldKind { wrapped, classical };

/// Dense N-way tensor, flat storage with the first index varying fastest.
template <class T>
class DenseTensor {
public:
    DenseTensor() = default;

    explicit DenseTensor(Shape shape)
        : shape_(std::move(shape)),
          data_(static_cast<std::size_t>(shape_.size()), T(0)) {}

    DenseTensor(Shape shape, std::vector<T> data)
        : shape_(std::move(shape)), data_(std::move(data)) {
        if (static_cast<Index>(data_.size()) != shape_.size())
            throw std::invalid_argument("DenseTensor: data size does not match shape");
    }

    const Shape& shape() const { return shape_; }
    Index order() const { return shape_.order(); }
    Index dim(Index mode) const { return shape_.dim(mode); }
    Index size() const { return static_cast<Index>(data_.size()); }

    /// 1-based multi-index access.
    T& at(const MultiIndex& idx) {
        return data_[static_cast<std::size_t>(linearize(idx, shape_) - 1)];
    }
    const T& at(const MultiIndex& idx) const {
        return data_[static_cast<std::size_t>(linearize(idx, shape_) - 1)];
    }

    /// 0-based flat storage access.
    T& operator[](Index off) { return data_[static_cast<std::size_t>(off)]; }
    const T& operator[](Index off) const { return data_[static_cast<std::size_t>(off)]; }

    T* data() { return data_.data(); }
    const T* data() const { return data_.data(); }

private:
    Shape shape_;
    std::vector<T> data_;
};

/// Coordinate-format sparse tensor (real scalars). Duplicate coordinates
/// accumulate.
class SparseTensor {
public:
    SparseTensor() = default;
    explicit SparseTensor(Shape shape) : shape_(std::move(shape)) {}

    const Shape& shape() const { return shape_; }
    Index order() const { return shape_.order(); }
    Index nnz() const { return static_cast<Index>(values_.size()); }

    void insert(const MultiIndex& idx, double v) {
        const Index flat = linearize(idx, shape_);
        auto it = slot_.find(flat);
        if (it != slot_.end()) {
            values_[it->second] += v;
        } else {
            slot_.emplace(flat, values_.size());
            indices_.push_back(idx);
            values_.push_back(v);
        }
    }

    const std::vector<MultiIndex>& indices() const { return indices_; }
    const std::vector<double>& values() const { return values_; }
    std::vector<double>& values() { return values_; }

    DenseTensor<double> densify() const {
        DenseTensor<double> out(shape_);
        for (std::size_t k = 0; k < values_.size(); ++k)
            out.at(indices_[k]) += values_[k];
        return out;
    }

private:
    Shape shape_;
    std::vector<MultiIndex> indices_;
    std::vector<double> values_;
    std::unordered_map<Index, std::size_t> slot_;
};

/// Kronecker product; with 1-based pair indices the element law is
/// (A kron B)(i2 + (i1-1)*I2, j2 + (j1-1)*J2) = A(i1,j1) B(i2,j2).
template <class T>
Mat<T> kronecker(const Mat<T>& A, const Mat<T>& B) {
    Mat<T> C(A.rows() * B.rows(), A.cols() * B.cols());
    for (Eigen::Index i = 0; i < A.rows(); ++i)
        for (Eigen::Index j = 0; j < A.cols(); ++j)
            C.block(i * B.rows(), j * B.cols(), B.rows(), B.cols()) = A(i, j) * B;
    return C;
}

/// Column-wise Khatri-Rao product: column j is A(:,j) kron B(:,j).
template <class T>
Mat<T> khatri_rao(const Mat<T>& A, const Mat<T>& B) {
    if (A.cols() != B.cols())
        throw std::invalid_argument("khatri_rao: column counts differ");
    Mat<T> C(A.rows() * B.rows(), A.cols());
    for (Eigen::Index j = 0; j < A.cols(); ++j)
        for (Eigen::Index i = 0; i < A.rows(); ++i)
            C.col(j).segment(i * B.rows(), B.rows()) = A(i, j) * B.col(j);
    return C;
}

namespace detail {

/// Splits the flat offset space around a mode: offsets decompose as
/// inner + (i_n - 1) * inner_size + outer * inner_size * I_n.
struct ModeSplit {
    Index inner_size;  // product of extents before the mode
    Index mode_size;
    Index outer_size;  // product of extents after the mode
};

inline ModeSplit mode_split(const Shape& shape, Index mode) {
    if (mode < 1 || mode > shape.order())
        throw std::domain_error("mode out of range");
    ModeSplit s{1, shape.dim(mode), 1};
    for (Index k = 1; k < mode; ++k) s.inner_size *= shape.dim(k);
    for (Index k = mode + 1; k <= shape.order(); ++k) s.outer_size *= shape.dim(k);
    return s;
}

}  // namespace detail

/// Mode-n product with a matrix U (J x I_n): contracts mode n of X with the
/// second index of U.
template <class T>
DenseTensor<T> mode_n_product(const DenseTensor<T>& X, const Mat<T>& U, Index mode) {
    const auto sp = detail::mode_split(X.shape(), mode);
    if (U.cols() != sp.mode_size)
        throw std::invalid_argument("mode_n_product: matrix columns must match mode extent");
    std::vector<Index> dims = X.shape().dims();
    dims[static_cast<std::size_t>(mode - 1)] = U.rows();
    DenseTensor<T> Y{Shape(dims)};
    const Index J = U.rows();
    using StrideV = Eigen::Map<const Vec<T>, 0, Eigen::InnerStride<>>;
    using StrideVM = Eigen::Map<Vec<T>, 0, Eigen::InnerStride<>>;
    for (Index outer = 0; outer < sp.outer_size; ++outer) {
        const Index xbase = outer * sp.inner_size * sp.mode_size;
        const Index ybase = outer * sp.inner_size * J;
        for (Index inner = 0; inner < sp.inner_size; ++inner) {
            StrideV x(X.data() + xbase + inner, sp.mode_size,
                      Eigen::InnerStride<>(sp.inner_size));
            StrideVM y(Y.data() + ybase + inner, J, Eigen::InnerStride<>(sp.inner_size));
            y = U * x;
        }
    }
    return Y;
}

/// Matricization along a mode: rows are the mode-n index, columns follow the
/// chosen UnfoldKind ordering of the remaining modes.
template <class T>
Mat<T> unfold(const DenseTensor<T>& X, Index mode, UnfoldKind kind) {
    const auto sp = detail::mode_split(X.shape(), mode);
    const Index cols = sp.inner_size * sp.outer_size;
    Mat<T> M(sp.mode_size, cols);
    for (Index outer = 0; outer < sp.outer_size; ++outer)
        for (Index i = 0; i < sp.mode_size; ++i) {
            const T* src = X.data() + (outer * sp.mode_size + i) * sp.inner_size;
            for (Index inner = 0; inner < sp.inner_size; ++inner) {
                const Index col = (kind == UnfoldKind::classical)
                                      ? inner + sp.inner_size * outer
                                      : outer + sp.outer_size * inner;
                M(i, col) = src[inner];
            }
        }
    return M;
}

/// Inverse of unfold for the given target shape.
template <class T>
DenseTensor<T> fold(const Mat<T>& M, Index mode, const Shape& shape, UnfoldKind kind) {
    const auto sp = detail::mode_split(shape, mode);
    if (M.rows() != sp.mode_size || M.cols() != sp.inner_size * sp.outer_size)
        throw std::invalid_argument("fold: matrix size does not match shape");
    DenseTensor<T> X(shape);
    for (Index outer = 0; outer < sp.outer_size; ++outer)
        for (Index i = 0; i < sp.mode_size; ++i) {
            T* dst = X.data() + (outer * sp.mode_size + i) * sp.inner_size;
            for (Index inner = 0; inner < sp.inner_size; ++inner) {
                const Index col = (kind == UnfoldKind::classical)
                                      ? inner + sp.inner_size * outer
                                      : outer + sp.outer_size * inner;
                dst[inner] = M(i, col);
            }
        }
    return X;
}

template <class T>
double frobenius_norm(const DenseTensor<T>& X) {
    double s = 0;
    for (Index k = 0; k < X.size(); ++k) s += std::norm(X[k]);
    return std::sqrt(s);
}

inline double frobenius_norm(const SparseTensor& X) {
    double s = 0;
    for (double v : X.values()) s += v * v;
    return std::sqrt(s);
}

}  // namespace trs
