#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "framepick/peakpick.hpp"
#include "framepick/spectrum.hpp"

namespace framepick {

/// Recipe for one annotated synthetic spectrum with MALDI-TOF-like traits:
/// Gaussian peaks on a decaying exponential baseline, plus additive Gaussian
/// noise whose level shrinks toward higher bins. Peak centers keep a mutual
/// distance of at least three maximum peak widths so the annotation is
/// unambiguous.
struct SynthSpec {
    int length = 15000;
    int n_peaks = 20;
    double peak_width_min = 2.0; // Gaussian sigma, bins
    double peak_width_max = 6.0;
    double amp_min = 20.0;
    double amp_max = 60.0;
    double baseline_amp = 0.0;   // baseline intensity at bin 0
    double baseline_scale = 0.0; // exponential decay length in bins; 0 disables
    double noise_sigma0 = 0.0;   // noise std at bin 0
    double noise_decay = 0.0;    // per-bin decay rate of the noise std
    double mz_start = 2000.0;
    double mz_step = 1.2;
    std::uint64_t seed = 0;

    void validate() const;
};

struct SynthResult {
    Spectrum spectrum;
    std::vector<Peak> truth; // inserted apices, ascending bin order
};

SynthResult synth_spectrum(const SynthSpec& spec);

enum class ShapeKind { square, triangle, circle, cross };

/// One spatial region bound to a single m/z bin. `half_size` is the
/// half-extent in grid spots.
struct Shape {
    ShapeKind kind = ShapeKind::square;
    int center_row = 0;
    int center_col = 0;
    int half_size = 0;
    int mz_bin = 0;
};

bool shape_contains(const Shape& shape, int row, int col);

/// Recipe for a phantom dataset: every spot gets i.i.d. Gaussian noise and,
/// when it lies inside a shape, a Gaussian peak at that shape's m/z bin.
/// Shapes must not overlap and must fit inside the grid; their bins must be
/// distinct.
struct PhantomSpec {
    int rows = 40;
    int cols = 40;
    int spectrum_len = 600;
    std::vector<Shape> shapes;
    double peak_amplitude = 10.0;
    double peak_width = 2.0; // Gaussian sigma, bins
    double noise_sigma = 1.0;
    double mz_start = 2000.0;
    double mz_step = 1.2;
    std::uint64_t seed = 0;

    void validate() const;
};

struct PhantomResult {
    DatasetGrid grid;
    // One rows*cols membership map per shape, row-major.
    std::vector<std::vector<std::uint8_t>> occupancy_maps;
};

PhantomResult synth_phantom(const PhantomSpec& spec);

} // namespace framepick
