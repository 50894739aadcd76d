#pragma once

#include <complex>
#include <vector>

#include "trs/shape.hpp"

namespace trs::fft {

/// In-place unitary DFT of length n. Forward kernel exp(-2*pi*i*j*k/n),
/// inverse the conjugate; both scaled by 1/sqrt(n). Arbitrary lengths run in
/// O(n log n).
void unitary(std::complex<double>* x, Index n, bool inverse);

inline void unitary(std::vector<std::complex<double>>& x, bool inverse) {
    unitary(x.data(), static_cast<Index>(x.size()), inverse);
}

}  // namespace trs::fft
