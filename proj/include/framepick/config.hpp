#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "framepick/peakpick.hpp"
#include "framepick/spatial.hpp"

namespace framepick {

/// Complete description of one pipeline run. Validated as a whole before any
/// computation and serialized next to every output so a run can be repeated
/// bit for bit.
struct RunConfig {
    // slicing
    int slice_len = 60;
    double overlap = 0.5;

    // frame
    std::string frame = "gabor"; // gabor | filterbank
    int window_width = 20;
    int time_step = 1;
    int freq_step = 1;
    double fmin = 1.0 / 60.0;
    double bw = 1.0 / 60.0;
    int bins_per_octave = 30;

    // regularization
    std::string lambda_mode = "fixed"; // fixed | noise-adaptive
    double lambda = 1.5e-3;

    // spatial pooling
    std::string spatial = "none"; // none | average | gaussian | disk | median
    int kernel_size = 3;
    double spatial_sigma = 0.5;
    double spatial_radius = 1.0;

    // preprocessing
    std::string baseline = "none"; // none | tophat
    int baseline_window = 100;
    bool tic = false;

    // peak extraction
    double min_score = 0.0;
    int min_separation = 3;

    // execution
    int threads = 0;
    std::uint64_t seed = 0;

    void validate() const;

    SliceConfig slice_config() const;
    FrameSpec frame_spec() const;
    LambdaPolicy lambda_policy() const;
    std::optional<NeighborhoodSpec> neighborhood() const;

    std::string to_json() const; // single line
    static RunConfig from_json(const std::string& text);
};

} // namespace framepick
