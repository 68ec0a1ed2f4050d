#pragma once

#include <complex>
#include <vector>

#include <fftw3.h>

namespace framepick::detail {

// Thin RAII wrapper around FFTW real<->complex plans of one fixed size.
// Plan creation is serialized internally (FFTW planning is not thread-safe);
// execution via the new-array interface is safe from concurrent threads as
// long as each caller owns its buffers. Plans use FFTW_ESTIMATE, so planning
// is deterministic, and FFTW_UNALIGNED, so any double-aligned buffer works.
class RealDft {
public:
    explicit RealDft(int n);
    ~RealDft();
    RealDft(const RealDft&) = delete;
    RealDft& operator=(const RealDft&) = delete;

    int size() const noexcept { return n_; }
    int spectrum_size() const noexcept { return n_ / 2 + 1; }

    // out[j] = sum_t in[t] e^{-2 pi i j t / n}, j = 0..n/2. Input preserved.
    void forward(const double* in, std::complex<double>* out) const;

    // out[t] = sum_j in[j] e^{+2 pi i j t / n} expanded Hermitian, UNNORMALIZED.
    // The input buffer is clobbered (FFTW c2r semantics).
    void backward(std::complex<double>* in, double* out) const;

private:
    int n_;
    fftw_plan fwd_;
    fftw_plan bwd_;
};

} // namespace framepick::detail
