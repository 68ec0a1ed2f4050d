#pragma once

#include <complex>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <utility>
#include <variant>
#include <vector>

#include "framepick/grid.hpp"

namespace framepick {

using cplx = std::complex<double>;

/// Finite Gabor frame on slices of length M: time-frequency shifted copies of
/// a Hann window of width W (unit l2 norm, peak wrapped to index 0), with time
/// step a and channel stride b. Requires a | M and b | M.
struct GaborFrameSpec {
    int slice_len = 60;    // M
    int window_width = 20; // W, Hann support in samples
    int time_step = 1;     // a
    int freq_step = 1;     // b

    int num_time_positions() const { return slice_len / time_step; } // K_t
    int num_channels() const { return slice_len / freq_step; }       // K_f

    void validate() const;
    std::uint64_t id() const;
};

/// Constant-Q filterbank frame on slices of length M. Filter centers are
/// geometrically spaced from fmin up to Nyquist (0.5 cycles/sample) with
/// `bins_per_octave` filters per octave; each filter is a raised-cosine
/// (Hann-shaped) bump in frequency whose bandwidth grows proportionally with
/// its center, the lowest one having half-width `bw`. Responses are evaluated
/// at |frequency|, so impulse responses are real and zero-phase.
/// Frequencies are normalized (cycles/sample); for data clocked at fs Hz,
/// a physical frequency F converts as fmin = F / fs.
struct FilterbankFrameSpec {
    int slice_len = 60;
    double fmin = 1.0 / 60.0; // lowest center frequency, cycles/sample
    double bw = 1.0 / 60.0;   // half-width of the lowest filter, cycles/sample
    int bins_per_octave = 30;

    void validate() const;
    std::uint64_t id() const;
};

using FrameSpec = std::variant<GaborFrameSpec, FilterbankFrameSpec>;

/// Complex analysis coefficients of one slice: rows = time positions k,
/// columns = channels l. All entries finite.
struct CoefficientGrid {
    Grid<cplx> values;
    std::uint64_t frame_id = 0;
};

struct FrameBounds {
    double lower = 0.0; // A
    double upper = 0.0; // B
};

class GaborAnalyzer {
public:
    explicit GaborAnalyzer(const GaborFrameSpec& spec);
    ~GaborAnalyzer();
    GaborAnalyzer(GaborAnalyzer&&) noexcept;
    GaborAnalyzer& operator=(GaborAnalyzer&&) noexcept;
    GaborAnalyzer(const GaborAnalyzer&) = delete;
    GaborAnalyzer& operator=(const GaborAnalyzer&) = delete;

    /// values[k,l] = sum_t slice[t] * conj(window[(t - k*a) mod M])
    ///                      * exp(-2*pi*i*l*b*t/M), circular within the slice.
    CoefficientGrid analyze(std::span<const double> slice) const;

    /// Diagonal of the frame operator, reported as (min, max) over time:
    /// A = K_f * min_t sum_k |window[(t - k*a) mod M]|^2 and likewise for B.
    /// Exact frame bounds whenever W <= M/b (time-diagonal frame operator).
    /// Throws if A vanishes to machine precision (uncovered samples).
    FrameBounds frame_bounds() const;

    const GaborFrameSpec& spec() const { return spec_; }
    const std::vector<double>& window() const { return window_; }

private:
    struct Impl;
    GaborFrameSpec spec_;
    std::vector<double> window_; // length M, unit l2 norm, peak at index 0
    std::unique_ptr<Impl> impl_;
};

class FilterbankAnalyzer {
public:
    explicit FilterbankAnalyzer(const FilterbankFrameSpec& spec);
    ~FilterbankAnalyzer();
    FilterbankAnalyzer(FilterbankAnalyzer&&) noexcept;
    FilterbankAnalyzer& operator=(FilterbankAnalyzer&&) noexcept;
    FilterbankAnalyzer(const FilterbankAnalyzer&) = delete;
    FilterbankAnalyzer& operator=(const FilterbankAnalyzer&) = delete;

    /// values[k,l] = IDFT( DFT(slice) .* conj(response_l) )[k]; K_t = M.
    CoefficientGrid analyze(std::span<const double> slice) const;

    /// (min, max) over DFT bins inside (fmin/2, 0.5] of the summed squared
    /// responses of all filters. Throws on a spectral hole (A = 0).
    FrameBounds frame_bounds() const;

    const FilterbankFrameSpec& spec() const { return spec_; }
    int num_filters() const { return static_cast<int>(centers_.size()); }
    const std::vector<double>& center_frequencies() const { return centers_; }

    /// Sampled frequency response of filter l over DFT bins 0..M-1.
    const std::vector<double>& response(int l) const { return responses_[static_cast<std::size_t>(l)]; }

    /// Time-domain impulse response of filter l (real, zero-phase).
    std::vector<double> impulse_response(int l) const;

    /// Response of filter l at an arbitrary normalized frequency.
    double response_at(int l, double freq) const;

private:
    struct Impl;
    FilterbankFrameSpec spec_;
    std::vector<double> centers_;
    std::vector<std::vector<double>> responses_;
    std::unique_ptr<Impl> impl_;
};

/// Either analyzer behind one interface; constructed once, then shared
/// read-only across workers.
class FrameAnalyzer {
public:
    explicit FrameAnalyzer(const FrameSpec& spec);

    CoefficientGrid analyze(std::span<const double> slice) const;
    FrameBounds frame_bounds() const;
    int slice_len() const;
    int time_step() const;
    std::uint64_t id() const;

    const GaborAnalyzer* gabor() const { return gabor_.get(); }
    const FilterbankAnalyzer* filterbank() const { return filterbank_.get(); }

private:
    std::unique_ptr<GaborAnalyzer> gabor_;
    std::unique_ptr<FilterbankAnalyzer> filterbank_;
};

// Convenience single-shot entry points.
CoefficientGrid analyze_gabor(std::span<const double> slice, const GaborFrameSpec& spec);
CoefficientGrid analyze_filterbank(std::span<const double> slice, const FilterbankFrameSpec& spec);
FrameBounds frame_bounds(const FrameSpec& spec);

/// Frame-bounds diagnostic for an arbitrary set of sampled responses (one
/// vector of length slice_len per filter): (min, max) over DFT bins inside
/// (band_lo_exclusive, 0.5] of the summed squared responses. Throws when the
/// minimum vanishes to machine precision (spectral hole).
FrameBounds filterbank_frame_bounds(const std::vector<std::vector<double>>& responses,
                                    int slice_len, double band_lo_exclusive);

/// Noise scale estimate: median(|values|) / 0.6745 over non-excluded entries.
/// The constant calibrates the median of |x| for real zero-mean Gaussian x to
/// its standard deviation. `exclude` holds flat indices into the grid.
double mad_noise_sigma(const CoefficientGrid& coeffs,
                       std::span<const std::size_t> exclude = {});

} // namespace framepick
