#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "framepick/frames.hpp"
#include "framepick/multiplier.hpp"
#include "framepick/spatial.hpp"
#include "framepick/spectrum.hpp"

namespace framepick {

/// Overlapping slicing of a spectrum: slices of length M every
/// hop = round(M * (1 - overlap)) samples. Overlaps below 0.5 weaken the
/// pairing logic that cancels peaks appearing in consecutive slices; callers
/// should surface a warning (see pairing_overlap_ok).
struct SliceConfig {
    int slice_len = 60;
    double overlap = 0.5;

    int hop() const;
    void validate() const;
    bool pairing_overlap_ok() const { return overlap >= 0.5; }

    /// Number of slices covering a signal of length len (last slice padded).
    int num_slices(std::size_t len) const;
};

/// Per-bin nonnegative score; local maxima mark detected peaks. Scores do not
/// track the original peak intensities in any way.
struct PeakIndicator {
    std::vector<double> z;
};

struct Peak {
    int bin = 0;
    double mz = 0.0;
    double score = 0.0;
};

enum class LambdaMode { fixed, noise_adaptive, target_count };

/// How the regularization weight is chosen per slice pair. fixed uses
/// base_lambda as-is; noise_adaptive scales it by the squared MAD noise
/// estimate of the pair's coefficients (floored at 1e-15); target_count is
/// resolved up front by tune_lambda, never per pair.
struct LambdaPolicy {
    LambdaMode mode = LambdaMode::fixed;
    double base_lambda = 1.5e-3;
    std::optional<int> target;

    void validate() const;
};

struct ExtractParams {
    double min_score = 0.0;
    int min_separation_bins = 3;
};

/// Cuts f into K = ceil((L - M)/H) + 1 overlapping slices; the last slice is
/// zero-padded to length M. Throws when L < M.
std::vector<std::vector<double>> slice_spectrum(std::span<const double> f, const SliceConfig& cfg);

/// Runs the pairwise multiplier-mask detector over one spectrum: consecutive
/// slice coefficients are compared, each pair's mask deviations below 1 are
/// summed over channels, and the per-time scores accumulate into the global
/// indicator by maximum. Needs at least two slices.
PeakIndicator pick_spectrum(std::span<const double> f, const SliceConfig& cfg,
                            const FrameAnalyzer& frame, const LambdaPolicy& policy);
PeakIndicator pick_spectrum(std::span<const double> f, const SliceConfig& cfg,
                            const FrameSpec& frame, const LambdaPolicy& policy);

/// Effective lambda for one slice pair under the policy. target_count mode is
/// a misuse here (tune_lambda owns it) and throws.
double resolve_lambda(const LambdaPolicy& policy, const CoefficientGrid& c1,
                      const CoefficientGrid& c2);

/// Strict local maxima of z scoring above min_score, greedily keeping the
/// highest and suppressing maxima closer than min_separation_bins to an
/// already accepted one. Returned in descending score order.
std::vector<Peak> extract_peaks(const PeakIndicator& indicator, std::span<const double> axis,
                                double min_score, int min_separation_bins);

/// Number of peaks extract_peaks would return (axis-independent).
int count_peaks(const PeakIndicator& indicator, double min_score, int min_separation_bins);

/// Largest lambda (log-bisection over [1e-9, 1e3], <= 60 steps) whose fixed-
/// lambda pick yields at least target_peaks extracted peaks; peak count is
/// nonincreasing in lambda, so equality is attained whenever possible.
/// Throws UnattainableTargetError when even lambda = 1e-9 falls short.
double tune_lambda(std::span<const double> f, const SliceConfig& cfg, const FrameAnalyzer& frame,
                   int target_peaks, const ExtractParams& extract);
double tune_lambda(std::span<const double> f, const SliceConfig& cfg, const FrameSpec& frame,
                   int target_peaks, const ExtractParams& extract);

struct SpotError {
    int row = 0;
    int col = 0;
    std::string message;
};

struct DatasetPickResult {
    std::vector<PeakIndicator> indicators; // one per present spot, row-major
    std::vector<SpotError> errors;         // failed spots (their indicator is empty)
};

/// Per-spot picking over a dataset. Without a neighborhood spec every spot is
/// processed independently; with one, each slice pair's mask thresholds are
/// modulated by the spatially weighted coefficients of the resolved
/// neighbors (absent or out-of-bounds spots drop out, weights renormalize).
/// Failures are collected per spot and do not abort the batch. Results are
/// identical for any thread count.
DatasetPickResult pick_dataset(const DatasetGrid& grid, const SliceConfig& cfg,
                               const FrameSpec& frame, const LambdaPolicy& policy,
                               const std::optional<NeighborhoodSpec>& spatial,
                               int threads = 0);

/// Dataset-level convenience: tunes lambda on the mean spectrum of the grid.
double tune_lambda_mean_spectrum(const DatasetGrid& grid, const SliceConfig& cfg,
                                 const FrameSpec& frame, int target_peaks,
                                 const ExtractParams& extract);

} // namespace framepick
