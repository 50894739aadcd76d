#include "trs/fft.hpp"

#include <fftw3.h>

#include <cmath>
#include <cstring>
#include <mutex>
#include <stdexcept>
#include <unordered_map>

namespace trs::fft {

namespace {

// FFTW's planner is not thread-safe; plan creation is serialized. Each thread
// keeps plans per length, planned on its own scratch buffer, and executes on
// that buffer, so new-array alignment rules never come into play.
std::mutex planner_mutex;

struct PlanPair {
    fftw_plan fwd = nullptr;
    fftw_plan bwd = nullptr;
    fftw_complex* buf = nullptr;
};

PlanPair& plans_for(Index n) {
    thread_local std::unordered_map<Index, PlanPair> cache;
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;
    PlanPair p;
    p.buf = fftw_alloc_complex(static_cast<std::size_t>(n));
    if (!p.buf) throw std::bad_alloc();
    {
        std::lock_guard<std::mutex> lock(planner_mutex);
        p.fwd = fftw_plan_dft_1d(static_cast<int>(n), p.buf, p.buf, FFTW_FORWARD,
                                 FFTW_ESTIMATE);
        p.bwd = fftw_plan_dft_1d(static_cast<int>(n), p.buf, p.buf, FFTW_BACKWARD,
                                 FFTW_ESTIMATE);
    }
    if (!p.fwd || !p.bwd) throw std::runtime_error("fft: planning failed");
    return cache.emplace(n, p).first->second;
}

}  // namespace

void unitary(std::complex<double>* x, Index n, bool inverse) {
    if (n < 1) throw std::invalid_argument("fft::unitary: length must be positive");
    if (n == 1) return;
    auto& p = plans_for(n);
    std::memcpy(p.buf, x, sizeof(fftw_complex) * static_cast<std::size_t>(n));
    fftw_execute(inverse ? p.bwd : p.fwd);
    const double s = 1.0 / std::sqrt(static_cast<double>(n));
    const auto* b = reinterpret_cast<const std::complex<double>*>(p.buf);
    for (Index k = 0; k < n; ++k) x[k] = b[k] * s;
}

}  // namespace trs::fft
