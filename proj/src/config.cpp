#include "framepick/config.hpp"

#include <json.hpp>

namespace framepick {

using nlohmann::json;

void RunConfig::validate() const {
    slice_config().validate();
    if (frame != "gabor" && frame != "filterbank") {
        throw ValidationError("config: frame must be 'gabor' or 'filterbank'");
    }
    std::visit([](const auto& s) { s.validate(); }, frame_spec());
    if (lambda_mode != "fixed" && lambda_mode != "noise-adaptive") {
        throw ValidationError("config: lambda_mode must be 'fixed' or 'noise-adaptive'");
    }
    lambda_policy().validate();
    if (auto hood = neighborhood()) hood->validate();
    if (baseline != "none" && baseline != "tophat") {
        throw ValidationError("config: baseline must be 'none' or 'tophat'");
    }
    if (baseline == "tophat" && baseline_window < 1) {
        throw ValidationError("config: baseline_window must be >= 1");
    }
    if (min_score < 0.0) throw ValidationError("config: min_score must be nonnegative");
    if (min_separation < 1) throw ValidationError("config: min_separation must be >= 1");
    if (threads < 0) throw ValidationError("config: threads must be nonnegative");
}

SliceConfig RunConfig::slice_config() const { return {slice_len, overlap}; }

FrameSpec RunConfig::frame_spec() const {
    if (frame == "filterbank") {
        return FilterbankFrameSpec{slice_len, fmin, bw, bins_per_octave};
    }
    return GaborFrameSpec{slice_len, window_width, time_step, freq_step};
}

LambdaPolicy RunConfig::lambda_policy() const {
    LambdaPolicy p;
    p.mode = lambda_mode == "noise-adaptive" ? LambdaMode::noise_adaptive : LambdaMode::fixed;
    p.base_lambda = lambda;
    return p;
}

std::optional<NeighborhoodSpec> RunConfig::neighborhood() const {
    if (spatial == "none") return std::nullopt;
    NeighborhoodSpec spec;
    spec.size = kernel_size;
    spec.sigma = spatial_sigma;
    spec.radius = spatial_radius;
    if (spatial == "average") {
        spec.kernel = KernelKind::average;
    } else if (spatial == "gaussian") {
        spec.kernel = KernelKind::gaussian;
    } else if (spatial == "disk") {
        spec.kernel = KernelKind::disk;
    } else if (spatial == "median") {
        spec.kernel = KernelKind::median;
    } else {
        throw ValidationError("config: unknown spatial kernel '" + spatial + "'");
    }
    return spec;
}

std::string RunConfig::to_json() const {
    json j;
    j["slice_len"] = slice_len;
    j["overlap"] = overlap;
    j["frame"] = frame;
    j["window_width"] = window_width;
    j["time_step"] = time_step;
    j["freq_step"] = freq_step;
    j["fmin"] = fmin;
    j["bw"] = bw;
    j["bins_per_octave"] = bins_per_octave;
    j["lambda_mode"] = lambda_mode;
    j["lambda"] = lambda;
    j["spatial"] = spatial;
    j["kernel_size"] = kernel_size;
    j["spatial_sigma"] = spatial_sigma;
    j["spatial_radius"] = spatial_radius;
    j["baseline"] = baseline;
    j["baseline_window"] = baseline_window;
    j["tic"] = tic;
    j["min_score"] = min_score;
    j["min_separation"] = min_separation;
    j["threads"] = threads;
    j["seed"] = seed;
    return j.dump();
}

RunConfig RunConfig::from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw IoError(std::string("config: JSON parse failed: ") + e.what());
    }
    RunConfig c;
    try {
        c.slice_len = j.value("slice_len", c.slice_len);
        c.overlap = j.value("overlap", c.overlap);
        c.frame = j.value("frame", c.frame);
        c.window_width = j.value("window_width", c.window_width);
        c.time_step = j.value("time_step", c.time_step);
        c.freq_step = j.value("freq_step", c.freq_step);
        c.fmin = j.value("fmin", c.fmin);
        c.bw = j.value("bw", c.bw);
        c.bins_per_octave = j.value("bins_per_octave", c.bins_per_octave);
        c.lambda_mode = j.value("lambda_mode", c.lambda_mode);
        c.lambda = j.value("lambda", c.lambda);
        c.spatial = j.value("spatial", c.spatial);
        c.kernel_size = j.value("kernel_size", c.kernel_size);
        c.spatial_sigma = j.value("spatial_sigma", c.spatial_sigma);
        c.spatial_radius = j.value("spatial_radius", c.spatial_radius);
        c.baseline = j.value("baseline", c.baseline);
        c.baseline_window = j.value("baseline_window", c.baseline_window);
        c.tic = j.value("tic", c.tic);
        c.min_score = j.value("min_score", c.min_score);
        c.min_separation = j.value("min_separation", c.min_separation);
        c.threads = j.value("threads", c.threads);
        c.seed = j.value("seed", c.seed);
    } catch (const json::exception& e) {
        throw IoError(std::string("config: bad field type: ") + e.what());
    }
    return c;
}

} // namespace framepick
