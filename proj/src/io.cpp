#include "trs/io.hpp"

#include <array>
#include <cinttypes>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

namespace trs::io {

namespace {

constexpr std::array<char, 4> dense_magic = {'D', 'T', 'E', 'N'};
constexpr std::array<char, 4> cores_magic = {'T', 'R', 'C', 'R'};
constexpr std::uint32_t format_version = 1;

void write_u32(std::ostream& out, std::uint32_t v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

void write_u64(std::ostream& out, std::uint64_t v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

std::uint32_t read_u32(std::istream& in, const char* what) {
    std::uint32_t v = 0;
    if (!in.read(reinterpret_cast<char*>(&v), sizeof v))
        throw std::runtime_error(std::string("read: truncated ") + what);
    return v;
}

std::uint64_t read_u64(std::istream& in, const char* what) {
    std::uint64_t v = 0;
    if (!in.read(reinterpret_cast<char*>(&v), sizeof v))
        throw std::runtime_error(std::string("read: truncated ") + what);
    return v;
}

template <class T>
void write_dense_block(std::ostream& out, const DenseTensor<T>& X) {
    out.write(dense_magic.data(), dense_magic.size());
    write_u32(out, format_version);
    write_u32(out, static_cast<std::uint32_t>(X.order()));
    for (Index n = 1; n <= X.order(); ++n)
        write_u64(out, static_cast<std::uint64_t>(X.dim(n)));
    write_u32(out, std::is_same_v<T, cplx> ? 1u : 0u);
    out.write(reinterpret_cast<const char*>(X.data()),
              static_cast<std::streamsize>(static_cast<std::size_t>(X.size()) * sizeof(T)));
}

struct DenseBlock {
    bool is_complex = false;
    DenseTensor<double> real;
    DenseTensor<cplx> complex_;
};

DenseBlock read_dense_block(std::istream& in, bool magic_consumed) {
    if (!magic_consumed) {
        std::array<char, 4> magic{};
        if (!in.read(magic.data(), magic.size()) || magic != dense_magic)
            throw std::runtime_error("read: missing dense tensor magic");
    }
    const std::uint32_t version = read_u32(in, "version");
    if (version != format_version)
        throw std::runtime_error("read: unsupported dense tensor version " +
                                 std::to_string(version));
    const std::uint32_t order = read_u32(in, "order");
    if (order == 0 || order > 64) throw std::runtime_error("read: implausible tensor order");
    std::vector<Index> dims;
    dims.reserve(order);
    for (std::uint32_t n = 0; n < order; ++n)
        dims.push_back(static_cast<Index>(read_u64(in, "extent")));
    const std::uint32_t kind = read_u32(in, "scalar kind");
    DenseBlock block;
    const Shape shape(dims);
    if (kind == 0) {
        block.real = DenseTensor<double>(shape);
        if (!in.read(reinterpret_cast<char*>(block.real.data()),
                     static_cast<std::streamsize>(static_cast<std::size_t>(block.real.size()) *
                                                  sizeof(double))))
            throw std::runtime_error("read: truncated tensor payload");
    } else if (kind == 1) {
        block.is_complex = true;
        block.complex_ = DenseTensor<cplx>(shape);
        if (!in.read(reinterpret_cast<char*>(block.complex_.data()),
                     static_cast<std::streamsize>(static_cast<std::size_t>(block.complex_.size()) *
                                                  sizeof(cplx))))
            throw std::runtime_error("read: truncated tensor payload");
    } else {
        throw std::runtime_error("read: unknown scalar kind " + std::to_string(kind));
    }
    return block;
}

std::ofstream open_out(const std::string& path, std::ios::openmode mode) {
    std::ofstream out(path, mode);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    return out;
}

std::ifstream open_in(const std::string& path, std::ios::openmode mode) {
    std::ifstream in(path, mode);
    if (!in) throw std::runtime_error("cannot open for reading: " + path);
    return in;
}

}  // namespace

void write_dense(const std::string& path, const DenseTensor<double>& X) {
    auto out = open_out(path, std::ios::binary);
    write_dense_block(out, X);
    if (!out) throw std::runtime_error("write failed: " + path);
}

void write_dense(const std::string& path, const DenseTensor<cplx>& X) {
    auto out = open_out(path, std::ios::binary);
    write_dense_block(out, X);
    if (!out) throw std::runtime_error("write failed: " + path);
}

void write_sparse(const std::string& path, const SparseTensor& X) {
    auto out = open_out(path, std::ios::out);
    out << X.order();
    for (Index n = 1; n <= X.order(); ++n) out << ' ' << X.shape().dim(n);
    out << ' ' << X.nnz() << '\n';
    char buf[64];
    const auto& idx = X.indices();
    const auto& val = X.values();
    for (std::size_t k = 0; k < val.size(); ++k) {
        for (Index i : idx[k]) out << i << ' ';
        std::snprintf(buf, sizeof buf, "%.17g", val[k]);
        out << buf << '\n';
    }
    if (!out) throw std::runtime_error("write failed: " + path);
}

SparseTensor read_sparse(const std::string& path) {
    auto in = open_in(path, std::ios::in);
    Index order = 0;
    if (!(in >> order) || order < 1 || order > 64)
        throw std::runtime_error("sparse read: bad order in " + path);
    std::vector<Index> dims(static_cast<std::size_t>(order));
    for (auto& d : dims)
        if (!(in >> d)) throw std::runtime_error("sparse read: bad extents in " + path);
    Index nnz = 0;
    if (!(in >> nnz) || nnz < 0)
        throw std::runtime_error("sparse read: bad entry count in " + path);
    SparseTensor X{Shape(dims)};
    MultiIndex idx(static_cast<std::size_t>(order));
    for (Index k = 0; k < nnz; ++k) {
        for (auto& i : idx)
            if (!(in >> i)) throw std::runtime_error("sparse read: truncated entry in " + path);
        double v = 0;
        if (!(in >> v)) throw std::runtime_error("sparse read: truncated value in " + path);
        X.insert(idx, v);
    }
    return X;
}

namespace {

template <class T>
void write_cores_impl(const std::string& path, const TRCores<T>& cores) {
    auto out = open_out(path, std::ios::binary);
    out.write(cores_magic.data(), cores_magic.size());
    write_u32(out, format_version);
    write_u32(out, static_cast<std::uint32_t>(cores.count()));
    for (Index n = 1; n <= cores.count(); ++n) write_dense_block(out, cores.core(n));
    if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace

void write_cores(const std::string& path, const TRCores<double>& cores) {
    write_cores_impl(path, cores);
}

void write_cores(const std::string& path, const TRCores<cplx>& cores) {
    write_cores_impl(path, cores);
}

AnyTensor read_tensor(const std::string& path) {
    AnyTensor out;
    {
        auto in = open_in(path, std::ios::binary);
        std::array<char, 4> magic{};
        if (in.read(magic.data(), magic.size()) && magic == dense_magic) {
            DenseBlock block = read_dense_block(in, true);
            if (block.is_complex) {
                out.kind = AnyTensor::Kind::dense_complex;
                out.dense_c = std::move(block.complex_);
            } else {
                out.kind = AnyTensor::Kind::dense_real;
                out.dense = std::move(block.real);
            }
            return out;
        }
        if (magic == cores_magic)
            throw std::runtime_error("read: " + path + " holds a core chain, not a tensor");
    }
    out.kind = AnyTensor::Kind::sparse;
    out.sparse = read_sparse(path);
    return out;
}

AnyCores read_cores(const std::string& path) {
    auto in = open_in(path, std::ios::binary);
    std::array<char, 4> magic{};
    if (!in.read(magic.data(), magic.size()) || magic != cores_magic)
        throw std::runtime_error("read: " + path + " is not a core-chain archive");
    const std::uint32_t version = read_u32(in, "version");
    if (version != format_version)
        throw std::runtime_error("read: unsupported core-chain version " +
                                 std::to_string(version));
    const std::uint32_t count = read_u32(in, "core count");
    if (count == 0 || count > 64) throw std::runtime_error("read: implausible core count");
    std::vector<DenseTensor<double>> real;
    std::vector<DenseTensor<cplx>> complex_;
    for (std::uint32_t n = 0; n < count; ++n) {
        DenseBlock block = read_dense_block(in, false);
        if (n == 0) {
            if (block.is_complex)
                complex_.reserve(count);
            else
                real.reserve(count);
        }
        if (block.is_complex) {
            if (!real.empty())
                throw std::runtime_error("read: mixed scalar kinds in core chain");
            complex_.push_back(std::move(block.complex_));
        } else {
            if (!complex_.empty())
                throw std::runtime_error("read: mixed scalar kinds in core chain");
            real.push_back(std::move(block.real));
        }
    }
    AnyCores out;
    if (!complex_.empty()) {
        out.is_complex = true;
        out.complex_ = TRCores<cplx>(std::move(complex_));
    } else {
        out.real = TRCores<double>(std::move(real));
    }
    return out;
}

}  // namespace trs::io
