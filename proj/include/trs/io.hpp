#pragma once

#include <iosfwd>
#include <string>

#include "trs/tr.hpp"

namespace trs::io {

/// Binary dense-tensor format: magic "DTEN", u32 version (1), u32 order,
/// u64 extents, u32 scalar kind (0 = f64, 1 = c128), then the entries in
/// storage order as raw little-endian doubles (real, imaginary interleaved
/// for complex).
void write_dense(const std::string& path, const DenseTensor<double>& X);
void write_dense(const std::string& path, const DenseTensor<cplx>& X);

/// Sparse coordinate text format: header line "order I_1 ... I_N nnz",
/// then one "i_1 ... i_N value" line per stored entry (1-based indices).
void write_sparse(const std::string& path, const SparseTensor& X);
SparseTensor read_sparse(const std::string& path);

/// Core-chain archive: magic "TRCR", u32 version (1), u32 core count, then
/// each core as an embedded dense-tensor block.
void write_cores(const std::string& path, const TRCores<double>& cores);
void write_cores(const std::string& path, const TRCores<cplx>& cores);

struct AnyTensor {
    enum class Kind { dense_real, dense_complex, sparse };
    Kind kind = Kind::dense_real;
    DenseTensor<double> dense;
    DenseTensor<cplx> dense_c;
    SparseTensor sparse;

    const Shape& shape() const {
        switch (kind) {
            case Kind::dense_real: return dense.shape();
            case Kind::dense_complex: return dense_c.shape();
            default: return sparse.shape();
        }
    }
};

/// Reads either format, dispatching on the leading magic bytes; files that do
/// not start with a known magic are parsed as sparse coordinate text.
AnyTensor read_tensor(const std::string& path);

struct AnyCores {
    bool is_complex = false;
    TRCores<double> real;
    TRCores<cplx> complex_;
};

AnyCores read_cores(const std::string& path);

}  // namespace trs::io
