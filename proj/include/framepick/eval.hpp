#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "framepick/peakpick.hpp"

namespace framepick {

/// Result of pairing detections with reference peaks.
struct MatchResult {
    std::vector<std::pair<std::size_t, std::size_t>> matches; // (detected, reference) indices
    std::vector<std::size_t> unmatched_detected;
    std::vector<std::size_t> unmatched_reference;
};

/// One-to-one greedy matching in descending detection score: each detected
/// peak takes the nearest still-unmatched reference within a relative m/z
/// tolerance (|mz_d - mz_r| <= rel_tol * mz_r, boundary inclusive).
MatchResult match_peaks(std::span<const Peak> detected, std::span<const Peak> reference,
                        double rel_tol = 0.01);

struct SpectrumScore {
    std::string id;
    std::size_t n_reference = 0;
    std::size_t n_detected = 0;
    std::size_t n_correct = 0;
    double sensitivity = 0.0;
    double fdr = 0.0;
    double f1 = 0.0;
};

/// Aggregate metrics. The headline sensitivity/FDR/F1 are computed from the
/// pooled counts; mean_* average the per-spectrum values.
struct EvalReport {
    double sensitivity = 0.0;
    double fdr = 0.0;
    double f1 = 0.0;
    std::size_t n_reference = 0;
    std::size_t n_detected = 0;
    std::size_t n_correct = 0;
    std::size_t n_false = 0;
    double mean_sensitivity = 0.0;
    double mean_fdr = 0.0;
    double mean_f1 = 0.0;
    std::vector<SpectrumScore> per_spectrum;
};

/// sensitivity = correct/reference, fdr = false/detected,
/// f1 = 2 (1 - fdr) sens / ((1 - fdr) + sens). Degenerate conventions:
/// no reference -> sensitivity is 1 when nothing was detected, else 0;
/// no detections -> fdr = 0; f1 = 0 when both factors vanish.
SpectrumScore score_counts(std::size_t n_correct, std::size_t n_detected, std::size_t n_reference);

SpectrumScore score_match(const MatchResult& match, std::size_t n_detected,
                          std::size_t n_reference);

EvalReport score(std::vector<SpectrumScore> per_spectrum);

} // namespace framepick
