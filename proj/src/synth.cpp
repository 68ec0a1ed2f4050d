#include "framepick/synth.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "framepick/rng.hpp"

namespace framepick {

namespace {

std::vector<double> linear_axis(int length, double start, double step) {
    std::vector<double> axis(static_cast<std::size_t>(length));
    for (int i = 0; i < length; ++i) axis[static_cast<std::size_t>(i)] = start + step * i;
    return axis;
}

void add_gaussian(std::vector<double>& f, double center, double sigma, double amp) {
    const int n = static_cast<int>(f.size());
    const int lo = std::max(0, static_cast<int>(std::floor(center - 8.0 * sigma)));
    const int hi = std::min(n - 1, static_cast<int>(std::ceil(center + 8.0 * sigma)));
    for (int t = lo; t <= hi; ++t) {
        const double d = (t - center) / sigma;
        f[static_cast<std::size_t>(t)] += amp * std::exp(-0.5 * d * d);
    }
}

} // namespace

void SynthSpec::validate() const {
    if (length <= 0) throw ValidationError("synth: length must be positive");
    if (n_peaks < 0) throw ValidationError("synth: n_peaks must be nonnegative");
    if (n_peaks > 0 && (!(peak_width_min > 0.0) || peak_width_max < peak_width_min)) {
        throw ValidationError("synth: invalid peak width range");
    }
    if (n_peaks > 0 && (!(amp_min > 0.0) || amp_max < amp_min)) {
        throw ValidationError("synth: invalid amplitude range");
    }
    if (baseline_scale < 0.0 || noise_sigma0 < 0.0 || noise_decay < 0.0) {
        throw ValidationError("synth: baseline/noise parameters must be nonnegative");
    }
    if (!(mz_step > 0.0)) throw ValidationError("synth: mz_step must be positive");
}

SynthResult synth_spectrum(const SynthSpec& spec) {
    spec.validate();
    Rng rng(spec.seed);

    SynthResult out;
    out.spectrum.mz = linear_axis(spec.length, spec.mz_start, spec.mz_step);
    out.spectrum.intensity.assign(static_cast<std::size_t>(spec.length), 0.0);

    if (spec.n_peaks > 0) {
        const double min_sep = 3.0 * spec.peak_width_max;
        const double margin = 4.0 * spec.peak_width_max;
        const double usable = spec.length - 1 - 2.0 * margin;
        if (usable < (spec.n_peaks - 1) * min_sep) {
            throw ValidationError("synth: cannot place " + std::to_string(spec.n_peaks) +
                                  " peaks with the required separation in " +
                                  std::to_string(spec.length) + " bins");
        }

        std::vector<double> centers;
        centers.reserve(static_cast<std::size_t>(spec.n_peaks));
        const long max_attempts = 10000L * spec.n_peaks;
        long attempts = 0;
        while (static_cast<int>(centers.size()) < spec.n_peaks) {
            if (++attempts > max_attempts) {
                throw ValidationError("synth: separation constraint too tight to satisfy by "
                                      "sampling");
            }
            const double cand = rng.uniform(margin, spec.length - 1 - margin);
            bool ok = true;
            for (double c : centers) {
                if (std::abs(c - cand) < min_sep) {
                    ok = false;
                    break;
                }
            }
            if (ok) centers.push_back(cand);
        }
        std::sort(centers.begin(), centers.end());

        for (double c : centers) {
            const double width = rng.uniform(spec.peak_width_min, spec.peak_width_max);
            const double amp = rng.uniform(spec.amp_min, spec.amp_max);
            add_gaussian(out.spectrum.intensity, c, width, amp);
            const int bin = static_cast<int>(std::lround(c));
            out.truth.push_back({bin, out.spectrum.mz[static_cast<std::size_t>(bin)], amp});
        }
    }

    // Noise draws are independent of the baseline parameters, so toggling the
    // baseline on an identical seed changes nothing else.
    if (spec.noise_sigma0 > 0.0) {
        for (int t = 0; t < spec.length; ++t) {
            const double sigma = spec.noise_sigma0 * std::exp(-spec.noise_decay * t);
            out.spectrum.intensity[static_cast<std::size_t>(t)] += sigma * rng.normal();
        }
    }
    if (spec.baseline_amp > 0.0 && spec.baseline_scale > 0.0) {
        for (int t = 0; t < spec.length; ++t) {
            out.spectrum.intensity[static_cast<std::size_t>(t)] +=
                spec.baseline_amp * std::exp(-t / spec.baseline_scale);
        }
    }
    return out;
}

bool shape_contains(const Shape& shape, int row, int col) {
    const int dr = row - shape.center_row;
    const int dc = col - shape.center_col;
    const int h = shape.half_size;
    switch (shape.kind) {
    case ShapeKind::square:
        return std::abs(dr) <= h && std::abs(dc) <= h;
    case ShapeKind::triangle:
        // Apex at the top row, base at the bottom.
        return dr >= -h && dr <= h && 2 * std::abs(dc) <= dr + h;
    case ShapeKind::circle:
        return dr * dr + dc * dc <= h * h;
    case ShapeKind::cross: {
        const int arm = std::max(1, h / 3);
        return (std::abs(dr) <= arm && std::abs(dc) <= h) ||
               (std::abs(dc) <= arm && std::abs(dr) <= h);
    }
    }
    return false;
}

void PhantomSpec::validate() const {
    if (rows <= 0 || cols <= 0) throw ValidationError("phantom: grid dims must be positive");
    if (spectrum_len <= 0) throw ValidationError("phantom: spectrum_len must be positive");
    if (!(noise_sigma >= 0.0)) throw ValidationError("phantom: noise_sigma must be nonnegative");
    if (!(mz_step > 0.0)) throw ValidationError("phantom: mz_step must be positive");
    for (std::size_t i = 0; i < shapes.size(); ++i) {
        const Shape& s = shapes[i];
        if (s.half_size < 0) throw ValidationError("phantom: shape half_size must be nonnegative");
        if (s.center_row - s.half_size < 0 || s.center_row + s.half_size >= rows ||
            s.center_col - s.half_size < 0 || s.center_col + s.half_size >= cols) {
            throw ValidationError("phantom: shape " + std::to_string(i) +
                                  " does not fit inside the grid");
        }
        if (s.mz_bin < 0 || s.mz_bin >= spectrum_len) {
            throw ValidationError("phantom: shape " + std::to_string(i) + " m/z bin out of range");
        }
        for (std::size_t j = i + 1; j < shapes.size(); ++j) {
            if (shapes[j].mz_bin == s.mz_bin) {
                throw ValidationError("phantom: shapes must use distinct m/z bins");
            }
        }
    }
}

PhantomResult synth_phantom(const PhantomSpec& spec) {
    spec.validate();

    PhantomResult out;
    out.grid = DatasetGrid::dense(spec.rows, spec.cols,
                                  linear_axis(spec.spectrum_len, spec.mz_start, spec.mz_step));
    out.occupancy_maps.assign(spec.shapes.size(),
                              std::vector<std::uint8_t>(out.grid.num_spots(), 0));

    for (int r = 0; r < spec.rows; ++r) {
        for (int c = 0; c < spec.cols; ++c) {
            const std::size_t flat = static_cast<std::size_t>(r) * static_cast<std::size_t>(spec.cols) +
                                     static_cast<std::size_t>(c);
            int member = -1;
            for (std::size_t s = 0; s < spec.shapes.size(); ++s) {
                if (shape_contains(spec.shapes[s], r, c)) {
                    if (member >= 0) {
                        throw ValidationError("phantom: shapes overlap at spot (" +
                                              std::to_string(r) + "," + std::to_string(c) + ")");
                    }
                    member = static_cast<int>(s);
                    out.occupancy_maps[s][flat] = 1;
                }
            }

            Rng rng(Rng::derive_seed(spec.seed, flat));
            auto spot = out.grid.spot(r, c);
            if (spec.noise_sigma > 0.0) {
                for (std::size_t t = 0; t < spot.size(); ++t) spot[t] = spec.noise_sigma * rng.normal();
            }
            if (member >= 0) {
                std::vector<double> peak(spot.size(), 0.0);
                add_gaussian(peak, spec.shapes[static_cast<std::size_t>(member)].mz_bin,
                             spec.peak_width, spec.peak_amplitude);
                for (std::size_t t = 0; t < spot.size(); ++t) spot[t] += peak[t];
            }
        }
    }
    return out;
}

} // namespace framepick
