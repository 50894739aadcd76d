#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace trs {

using Index = std::int64_t;

/// Multi-indices and mode numbers are 1-based throughout the public API.
using MultiIndex = std::vector<Index>;

/// Flattening convention for multi-indices. little: first index varies
/// fastest (the storage order); big: last index varies fastest.
enum class Endian { little, big };

class Shape {
public:
    Shape() = default;

    explicit Shape(std::vector<Index> dims) : dims_(std::move(dims)) {
        if (dims_.empty())
            throw std::invalid_argument("Shape: order must be at least 1");
        for (Index d : dims_)
            if (d < 1)
                throw std::invalid_argument("Shape: dimensions must be positive");
    }

    Index order() const { return static_cast<Index>(dims_.size()); }

    /// Extent of the given mode (1-based).
    Index dim(Index mode) const {
        if (mode < 1 || mode > order())
            throw std::domain_error("Shape::dim: mode out of range");
        return dims_[static_cast<std::size_t>(mode - 1)];
    }

    const std::vector<Index>& dims() const { return dims_; }

    /// Total number of entries.
    Index size() const {
        Index p = 1;
        for (Index d : dims_) p *= d;
        return p;
    }

    bool operator==(const Shape& o) const { return dims_ == o.dims_; }
    bool operator!=(const Shape& o) const { return !(*this == o); }

    std::string to_string() const {
        std::string s;
        for (std::size_t k = 0; k < dims_.size(); ++k) {
            if (k) s += "x";
            s += std::to_string(dims_[k]);
        }
        return s;
    }

private:
    std::vector<Index> dims_;
};

/// Flatten a 1-based multi-index to a 1-based linear index.
inline Index linearize(const MultiIndex& idx, const Shape& shape,
                       Endian endian = Endian::little) {
    const Index n = shape.order();
    if (static_cast<Index>(idx.size()) != n)
        throw std::invalid_argument("linearize: index order does not match shape");
    for (Index k = 1; k <= n; ++k)
        if (idx[static_cast<std::size_t>(k - 1)] < 1 ||
            idx[static_cast<std::size_t>(k - 1)] > shape.dim(k))
            throw std::domain_error("linearize: index out of range");
    Index flat = 0;
    if (endian == Endian::little) {
        for (Index k = n; k >= 1; --k)
            flat = flat * shape.dim(k) + (idx[static_cast<std::size_t>(k - 1)] - 1);
    } else {
        for (Index k = 1; k <= n; ++k)
            flat = flat * shape.dim(k) + (idx[static_cast<std::size_t>(k - 1)] - 1);
    }
    return flat + 1;
}

/// Inverse of linearize; returns a 1-based multi-index.
inline MultiIndex delinearize(Index flat, const Shape& shape,
                              Endian endian = Endian::little) {
    if (flat < 1 || flat > shape.size())
        throw std::domain_error("delinearize: linear index out of range");
    const Index n = shape.order();
    MultiIndex idx(static_cast<std::size_t>(n));
    Index rem = flat - 1;
    if (endian == Endian::little) {
        for (Index k = 1; k <= n; ++k) {
            idx[static_cast<std::size_t>(k - 1)] = rem % shape.dim(k) + 1;
            rem /= shape.dim(k);
        }
    } else {
        for (Index k = n; k >= 1; --k) {
            idx[static_cast<std::size_t>(k - 1)] = rem % shape.dim(k) + 1;
            rem /= shape.dim(k);
        }
    }
    return idx;
}

/// Storage strides (0-based offsets, first index fastest).
inline std::vector<Index> storage_strides(const Shape& shape) {
    std::vector<Index> s(static_cast<std::size_t>(shape.order()));
    Index acc = 1;
    for (Index k = 1; k <= shape.order(); ++k) {
        s[static_cast<std::size_t>(k - 1)] = acc;
        acc *= shape.dim(k);
    }
    return s;
}

}  // namespace trs
