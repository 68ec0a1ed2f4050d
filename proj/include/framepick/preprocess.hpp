#pragma once

#include <span>
#include <vector>

namespace framepick {

struct BaselineResult {
    std::vector<double> corrected;
    std::vector<double> baseline;
};

/// Morphological top-hat baseline removal: the baseline is the opening of the
/// signal (erosion followed by the adjoint dilation) with a flat structuring
/// element of `window_bins` samples; corrected = signal - baseline. Opening
/// is idempotent and never exceeds the signal, so corrected >= 0 everywhere.
BaselineResult tophat_baseline(std::span<const double> f, int window_bins);

/// Total-ion-count normalization: divides by the sum of intensities, with
/// negative entries clamped to 0 for the sum only. Throws when the clamped
/// sum vanishes (degenerate spectrum).
std::vector<double> tic_normalize(std::span<const double> f);

} // namespace framepick
