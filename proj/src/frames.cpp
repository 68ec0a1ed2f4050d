#include "framepick/frames.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <numbers>

#include "fft.hpp"
#include "stats.hpp"

namespace framepick {

namespace {

constexpr double kMadCalibration = 0.6745; // median(|x|) / sigma for real Gaussian x
constexpr double kDegenerateRel = 1e-14;

std::uint64_t fnv1a(std::uint64_t h, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
        h ^= (v >> (8 * i)) & 0xffu;
        h *= 1099511628211ull;
    }
    return h;
}

std::uint64_t bits(double x) {
    std::uint64_t u;
    static_assert(sizeof(u) == sizeof(x));
    std::memcpy(&u, &x, sizeof(u));
    return u;
}

} // namespace

void GaborFrameSpec::validate() const {
    if (slice_len <= 0) throw ValidationError("gabor: slice_len must be positive");
    if (window_width <= 0 || window_width > slice_len)
        throw ValidationError("gabor: window_width must be in [1, slice_len]");
    if (time_step <= 0 || slice_len % time_step != 0)
        throw ValidationError("gabor: time_step must be positive and divide slice_len");
    if (freq_step <= 0 || slice_len % freq_step != 0)
        throw ValidationError("gabor: freq_step must be positive and divide slice_len");
}

std::uint64_t GaborFrameSpec::id() const {
    std::uint64_t h = 1469598103934665603ull;
    h = fnv1a(h, 1);
    h = fnv1a(h, static_cast<std::uint64_t>(slice_len));
    h = fnv1a(h, static_cast<std::uint64_t>(window_width));
    h = fnv1a(h, static_cast<std::uint64_t>(time_step));
    h = fnv1a(h, static_cast<std::uint64_t>(freq_step));
    return h;
}

void FilterbankFrameSpec::validate() const {
    if (slice_len <= 0) throw ValidationError("filterbank: slice_len must be positive");
    if (!(fmin > 0.0)) throw ValidationError("filterbank: fmin must be positive");
    if (fmin >= 0.5) throw ValidationError("filterbank: fmin must lie below Nyquist (0.5)");
    if (!(bw > 0.0)) throw ValidationError("filterbank: bw must be positive");
    if (bins_per_octave <= 0) throw ValidationError("filterbank: bins_per_octave must be positive");
}

std::uint64_t FilterbankFrameSpec::id() const {
    std::uint64_t h = 1469598103934665603ull;
    h = fnv1a(h, 2);
    h = fnv1a(h, static_cast<std::uint64_t>(slice_len));
    h = fnv1a(h, bits(fmin));
    h = fnv1a(h, bits(bw));
    h = fnv1a(h, static_cast<std::uint64_t>(bins_per_octave));
    return h;
}

// ---------------------------------------------------------------------------
// Gabor

struct GaborAnalyzer::Impl {
    explicit Impl(int n) : dft(n) {}
    detail::RealDft dft;
};

GaborAnalyzer::GaborAnalyzer(const GaborFrameSpec& spec) : spec_(spec) {
    spec_.validate();
    const int m = spec_.slice_len;
    const int w = spec_.window_width;

    // Hann taps strictly positive on all W samples, peak in the middle.
    std::vector<double> taps(static_cast<std::size_t>(w));
    for (int n = 0; n < w; ++n) {
        const double s = std::sin(std::numbers::pi * (n + 1) / (w + 1));
        taps[static_cast<std::size_t>(n)] = s * s;
    }

    // Wrap so the peak sits at index 0 (zero-phase convention): time position
    // k of the coefficient grid then aligns with sample k*a of the slice.
    window_.assign(static_cast<std::size_t>(m), 0.0);
    const int center = (w - 1) / 2;
    for (int n = 0; n < w; ++n) {
        const int idx = ((n - center) % m + m) % m;
        window_[static_cast<std::size_t>(idx)] += taps[static_cast<std::size_t>(n)];
    }

    double norm2 = 0.0;
    for (double v : window_) norm2 += v * v;
    const double inv = 1.0 / std::sqrt(norm2);
    for (double& v : window_) v *= inv;

    impl_ = std::make_unique<Impl>(m);
}

GaborAnalyzer::~GaborAnalyzer() = default;
GaborAnalyzer::GaborAnalyzer(GaborAnalyzer&&) noexcept = default;
GaborAnalyzer& GaborAnalyzer::operator=(GaborAnalyzer&&) noexcept = default;

CoefficientGrid GaborAnalyzer::analyze(std::span<const double> slice) const {
    const int m = spec_.slice_len;
    if (static_cast<int>(slice.size()) != m) {
        throw ValidationError("analyze_gabor: slice length " + std::to_string(slice.size()) +
                              " does not match slice_len " + std::to_string(m));
    }
    const int kt = spec_.num_time_positions();
    const int kf = spec_.num_channels();
    const int a = spec_.time_step;
    const int b = spec_.freq_step;
    const int half = m / 2;

    CoefficientGrid out;
    out.values = Grid<cplx>(static_cast<std::size_t>(kt), static_cast<std::size_t>(kf));
    out.frame_id = spec_.id();

    std::vector<double> windowed(static_cast<std::size_t>(m));
    std::vector<cplx> spectrum(static_cast<std::size_t>(impl_->dft.spectrum_size()));

    for (int k = 0; k < kt; ++k) {
        const int shift = k * a;
        for (int t = 0; t < m; ++t) {
            const int wi = ((t - shift) % m + m) % m;
            windowed[static_cast<std::size_t>(t)] =
                slice[static_cast<std::size_t>(t)] * window_[static_cast<std::size_t>(wi)];
        }
        impl_->dft.forward(windowed.data(), spectrum.data());
        for (int l = 0; l < kf; ++l) {
            const int bin = l * b;
            const cplx v = bin <= half ? spectrum[static_cast<std::size_t>(bin)]
                                       : std::conj(spectrum[static_cast<std::size_t>(m - bin)]);
            out.values(static_cast<std::size_t>(k), static_cast<std::size_t>(l)) = v;
        }
    }
    return out;
}

FrameBounds GaborAnalyzer::frame_bounds() const {
    const int m = spec_.slice_len;
    const int kt = spec_.num_time_positions();
    const int kf = spec_.num_channels();
    const int a = spec_.time_step;

    double lo = std::numeric_limits<double>::infinity();
    double hi = 0.0;
    for (int t = 0; t < m; ++t) {
        double acc = 0.0;
        for (int k = 0; k < kt; ++k) {
            const int wi = ((t - k * a) % m + m) % m;
            const double g = window_[static_cast<std::size_t>(wi)];
            acc += g * g;
        }
        const double d = static_cast<double>(kf) * acc;
        lo = std::min(lo, d);
        hi = std::max(hi, d);
    }
    if (lo <= hi * kDegenerateRel) {
        throw ValidationError("gabor frame is degenerate: some samples are not covered by any "
                              "window shift (A = 0)");
    }
    return {lo, hi};
}

// ---------------------------------------------------------------------------
// Constant-Q filterbank

struct FilterbankAnalyzer::Impl {
    explicit Impl(int n) : dft(n) {}
    detail::RealDft dft;
    double band_lo_exclusive = 0.0; // lower edge of the diagnostic band
};

namespace {

// Raised-cosine bump: 1 at the center, 0 at |freq - center| >= half_width.
double hann_bump(double freq, double center, double half_width) {
    const double d = std::abs(freq - center);
    if (d >= half_width) return 0.0;
    const double c = std::cos(0.5 * std::numbers::pi * d / half_width);
    return c * c;
}

} // namespace

FilterbankAnalyzer::FilterbankAnalyzer(const FilterbankFrameSpec& spec) : spec_(spec) {
    spec_.validate();
    const int m = spec_.slice_len;

    centers_.clear();
    for (int j = 0;; ++j) {
        const double c = spec_.fmin * std::exp2(static_cast<double>(j) / spec_.bins_per_octave);
        if (c >= 0.5 * (1.0 - 1e-12)) break;
        centers_.push_back(c);
    }
    centers_.push_back(0.5); // top filter pinned to Nyquist so the band is covered

    responses_.resize(centers_.size());
    for (std::size_t l = 0; l < centers_.size(); ++l) {
        const double half_width = spec_.bw * (centers_[l] / spec_.fmin);
        auto& r = responses_[l];
        r.assign(static_cast<std::size_t>(m), 0.0);
        for (int j = 0; j < m; ++j) {
            // Responses are a function of |frequency|, mirroring onto the
            // negative-frequency bins; impulse responses come out real.
            const double folded = static_cast<double>(std::min(j, m - j)) / m;
            r[static_cast<std::size_t>(j)] = hann_bump(folded, centers_[l], half_width);
        }
    }

    impl_ = std::make_unique<Impl>(m);
    impl_->band_lo_exclusive = spec_.fmin / 2.0;
}

FilterbankAnalyzer::~FilterbankAnalyzer() = default;
FilterbankAnalyzer::FilterbankAnalyzer(FilterbankAnalyzer&&) noexcept = default;
FilterbankAnalyzer& FilterbankAnalyzer::operator=(FilterbankAnalyzer&&) noexcept = default;

CoefficientGrid FilterbankAnalyzer::analyze(std::span<const double> slice) const {
    const int m = spec_.slice_len;
    if (static_cast<int>(slice.size()) != m) {
        throw ValidationError("analyze_filterbank: slice length " + std::to_string(slice.size()) +
                              " does not match slice_len " + std::to_string(m));
    }
    const int nf = num_filters();
    const int ns = impl_->dft.spectrum_size();

    CoefficientGrid out;
    out.values = Grid<cplx>(static_cast<std::size_t>(m), static_cast<std::size_t>(nf));
    out.frame_id = spec_.id();

    std::vector<cplx> spectrum(static_cast<std::size_t>(ns));
    std::vector<cplx> product(static_cast<std::size_t>(ns));
    std::vector<double> filtered(static_cast<std::size_t>(m));
    impl_->dft.forward(slice.data(), spectrum.data());

    const double inv_m = 1.0 / static_cast<double>(m);
    for (int l = 0; l < nf; ++l) {
        const auto& resp = responses_[static_cast<std::size_t>(l)];
        for (int j = 0; j < ns; ++j) {
            product[static_cast<std::size_t>(j)] =
                spectrum[static_cast<std::size_t>(j)] * resp[static_cast<std::size_t>(j)];
        }
        impl_->dft.backward(product.data(), filtered.data());
        for (int k = 0; k < m; ++k) {
            out.values(static_cast<std::size_t>(k), static_cast<std::size_t>(l)) =
                cplx(filtered[static_cast<std::size_t>(k)] * inv_m, 0.0);
        }
    }
    return out;
}

FrameBounds filterbank_frame_bounds(const std::vector<std::vector<double>>& responses,
                                    int slice_len, double band_lo_exclusive) {
    const int half = slice_len / 2;

    double lo = std::numeric_limits<double>::infinity();
    double hi = 0.0;
    bool any = false;
    for (int j = 1; j <= half; ++j) {
        const double freq = static_cast<double>(j) / slice_len;
        if (freq <= band_lo_exclusive) continue;
        double s = 0.0;
        for (const auto& r : responses) {
            const double g = r[static_cast<std::size_t>(j)];
            s += g * g;
        }
        lo = std::min(lo, s);
        hi = std::max(hi, s);
        any = true;
    }
    if (!any) throw ValidationError("filterbank: no DFT bin falls inside the diagnostic band");
    if (lo <= hi * kDegenerateRel) {
        throw ValidationError("filterbank frame is degenerate: spectral hole inside the covered "
                              "band (A = 0)");
    }
    return {lo, hi};
}

FrameBounds FilterbankAnalyzer::frame_bounds() const {
    return filterbank_frame_bounds(responses_, spec_.slice_len, impl_->band_lo_exclusive);
}

std::vector<double> FilterbankAnalyzer::impulse_response(int l) const {
    const int m = spec_.slice_len;
    const int ns = impl_->dft.spectrum_size();
    const auto& resp = responses_[static_cast<std::size_t>(l)];
    std::vector<cplx> spec_buf(static_cast<std::size_t>(ns));
    for (int j = 0; j < ns; ++j) spec_buf[static_cast<std::size_t>(j)] = cplx(resp[static_cast<std::size_t>(j)], 0.0);
    std::vector<double> h(static_cast<std::size_t>(m));
    impl_->dft.backward(spec_buf.data(), h.data());
    const double inv_m = 1.0 / static_cast<double>(m);
    for (double& v : h) v *= inv_m;
    return h;
}

double FilterbankAnalyzer::response_at(int l, double freq) const {
    const double half_width = spec_.bw * (centers_[static_cast<std::size_t>(l)] / spec_.fmin);
    return hann_bump(std::abs(freq), centers_[static_cast<std::size_t>(l)], half_width);
}

// ---------------------------------------------------------------------------
// Variant wrapper and free functions

FrameAnalyzer::FrameAnalyzer(const FrameSpec& spec) {
    if (const auto* g = std::get_if<GaborFrameSpec>(&spec)) {
        gabor_ = std::make_unique<GaborAnalyzer>(*g);
    } else {
        filterbank_ = std::make_unique<FilterbankAnalyzer>(std::get<FilterbankFrameSpec>(spec));
    }
}

CoefficientGrid FrameAnalyzer::analyze(std::span<const double> slice) const {
    return gabor_ ? gabor_->analyze(slice) : filterbank_->analyze(slice);
}

FrameBounds FrameAnalyzer::frame_bounds() const {
    return gabor_ ? gabor_->frame_bounds() : filterbank_->frame_bounds();
}

int FrameAnalyzer::slice_len() const {
    return gabor_ ? gabor_->spec().slice_len : filterbank_->spec().slice_len;
}

int FrameAnalyzer::time_step() const { return gabor_ ? gabor_->spec().time_step : 1; }

std::uint64_t FrameAnalyzer::id() const {
    return gabor_ ? gabor_->spec().id() : filterbank_->spec().id();
}

CoefficientGrid analyze_gabor(std::span<const double> slice, const GaborFrameSpec& spec) {
    return GaborAnalyzer(spec).analyze(slice);
}

CoefficientGrid analyze_filterbank(std::span<const double> slice, const FilterbankFrameSpec& spec) {
    return FilterbankAnalyzer(spec).analyze(slice);
}

FrameBounds frame_bounds(const FrameSpec& spec) {
    return FrameAnalyzer(spec).frame_bounds();
}

double mad_noise_sigma(const CoefficientGrid& coeffs, std::span<const std::size_t> exclude) {
    const std::size_t n = coeffs.values.size();
    std::vector<char> dropped(n, 0);
    for (std::size_t idx : exclude) {
        if (idx < n) dropped[idx] = 1;
    }
    std::vector<double> mags;
    mags.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (!dropped[i]) mags.push_back(std::abs(coeffs.values[i]));
    }
    if (mags.empty()) throw ValidationError("mad_noise_sigma: no coefficients left after exclusion");
    return detail::median_inplace(mags) / kMadCalibration;
}

} // namespace framepick
