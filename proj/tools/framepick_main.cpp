// framepick: batch peak picking for (imaging) mass-spectrometry spectra via
// sparse frame-multiplier masks between overlapping spectrum slices.

#include <algorithm>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "framepick/config.hpp"
#include "framepick/eval.hpp"
#include "framepick/io.hpp"
#include "framepick/parallel.hpp"
#include "framepick/peakpick.hpp"
#include "framepick/preprocess.hpp"
#include "framepick/rng.hpp"
#include "framepick/synth.hpp"

using nlohmann::json;
using namespace framepick;

namespace {

std::string read_text_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "' for reading");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << text;
    if (!out) throw IoError("write failed for '" + path + "'");
}

bool file_is_container(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "' for reading");
    std::string head(6, '\0');
    in.read(head.data(), 6);
    return in.gcount() == 6 && head == "msgrid";
}

// A CSV spectrum is treated as a 1x1 dataset so every command speaks one type.
DatasetGrid load_input(const std::string& path) {
    if (file_is_container(path)) return read_dataset(path);
    const Spectrum s = read_spectrum_csv(path);
    s.validate();
    DatasetGrid g = DatasetGrid::dense(1, 1, s.mz);
    std::copy(s.intensity.begin(), s.intensity.end(), g.intensities.begin());
    return g;
}

void apply_preprocess(DatasetGrid& grid, const RunConfig& rc) {
    if (rc.baseline == "none" && !rc.tic) return;
    const std::size_t l = grid.axis_len();
    const std::size_t n = grid.num_present();
    parallel_for(n, rc.threads, [&](std::size_t i) {
        double* row = grid.intensities.data() + i * l;
        std::span<double> spot(row, l);
        if (rc.baseline == "tophat") {
            BaselineResult b = tophat_baseline(spot, rc.baseline_window);
            std::copy(b.corrected.begin(), b.corrected.end(), spot.begin());
        }
        if (rc.tic) {
            std::vector<double> t = tic_normalize(spot);
            std::copy(t.begin(), t.end(), spot.begin());
        }
    });
}

json peaks_to_json(const std::vector<Peak>& peaks) {
    json arr = json::array();
    for (const Peak& p : peaks) {
        arr.push_back({{"bin", p.bin}, {"mz", p.mz}, {"score", p.score}});
    }
    return arr;
}

std::vector<Peak> peaks_from_json(const json& arr) {
    std::vector<Peak> out;
    for (const auto& e : arr) {
        out.push_back({e.at("bin").get<int>(), e.at("mz").get<double>(),
                       e.at("score").get<double>()});
    }
    return out;
}

struct SpotPeaks {
    int row = 0;
    int col = 0;
    std::vector<Peak> peaks;
};

json spot_peaks_to_json(const std::vector<SpotPeaks>& spots, const std::string& config_json) {
    json j;
    j["config"] = json::parse(config_json);
    json arr = json::array();
    for (const auto& s : spots) {
        arr.push_back({{"row", s.row}, {"col", s.col}, {"peaks", peaks_to_json(s.peaks)}});
    }
    j["spots"] = arr;
    return j;
}

std::vector<SpotPeaks> spot_peaks_from_json(const json& j) {
    std::vector<SpotPeaks> out;
    for (const auto& e : j.at("spots")) {
        out.push_back({e.at("row").get<int>(), e.at("col").get<int>(),
                       peaks_from_json(e.at("peaks"))});
    }
    return out;
}

// Spatial kernel flag: none | average | gaussian[:sigma] | disk[:radius] | median
void parse_spatial_flag(const std::string& text, RunConfig& rc) {
    const std::size_t colon = text.find(':');
    const std::string kind = text.substr(0, colon);
    if (kind != "none" && kind != "average" && kind != "gaussian" && kind != "disk" &&
        kind != "median") {
        throw ValidationError("--spatial: unknown kernel '" + kind + "'");
    }
    rc.spatial = kind;
    if (colon != std::string::npos) {
        const std::string arg = text.substr(colon + 1);
        try {
            if (kind == "gaussian") {
                rc.spatial_sigma = std::stod(arg);
            } else if (kind == "disk") {
                rc.spatial_radius = std::stod(arg);
            } else {
                throw ValidationError("--spatial: '" + kind + "' takes no parameter");
            }
        } catch (const std::invalid_argument&) {
            throw ValidationError("--spatial: bad numeric parameter '" + arg + "'");
        }
    }
}

// Baseline flag: none | tophat[:window_bins]
void parse_baseline_flag(const std::string& text, RunConfig& rc) {
    const std::size_t colon = text.find(':');
    const std::string kind = text.substr(0, colon);
    if (kind != "none" && kind != "tophat") {
        throw ValidationError("--baseline: unknown mode '" + kind + "'");
    }
    rc.baseline = kind;
    if (colon != std::string::npos) {
        try {
            rc.baseline_window = std::stoi(text.substr(colon + 1));
        } catch (const std::exception&) {
            throw ValidationError("--baseline: bad window '" + text.substr(colon + 1) + "'");
        }
    }
}

void add_pipeline_flags(CLI::App* cmd, RunConfig& rc, std::string& spatial_flag,
                        std::string& baseline_flag) {
    cmd->add_option("--slice-len", rc.slice_len, "Slice length M in samples");
    cmd->add_option("--overlap", rc.overlap, "Slice overlap in (0,1)");
    cmd->add_option("--frame", rc.frame, "Analysis frame: gabor | filterbank");
    cmd->add_option("--window-width", rc.window_width, "Hann window width (gabor)");
    cmd->add_option("--time-step", rc.time_step, "Time sampling step a (gabor)");
    cmd->add_option("--freq-step", rc.freq_step, "Frequency channel stride b (gabor)");
    cmd->add_option("--fmin", rc.fmin, "Lowest filter center, cycles/sample (filterbank)");
    cmd->add_option("--bw", rc.bw, "Lowest filter half-bandwidth, cycles/sample (filterbank)");
    cmd->add_option("--bins", rc.bins_per_octave, "Filters per octave (filterbank)");
    cmd->add_option("--lambda", rc.lambda, "Regularization weight");
    cmd->add_option("--lambda-mode", rc.lambda_mode, "fixed | noise-adaptive");
    cmd->add_option("--spatial", spatial_flag,
                    "Neighborhood kernel: none|average|gaussian:SIGMA|disk:RADIUS|median");
    cmd->add_option("--kernel-size", rc.kernel_size, "Neighborhood window side (odd)");
    cmd->add_option("--baseline", baseline_flag, "Baseline removal: none|tophat:WINDOW");
    cmd->add_flag("--tic", rc.tic, "Total-ion-count normalization before picking");
    cmd->add_option("--min-score", rc.min_score, "Minimum indicator score for a peak");
    cmd->add_option("--min-separation", rc.min_separation, "Minimum peak distance in bins");
    cmd->add_option("--threads", rc.threads, "Worker threads (0 = hardware)");
    cmd->add_option("--seed", rc.seed, "Seed recorded with the outputs");
}

void finalize_config(RunConfig& rc, const std::string& spatial_flag,
                     const std::string& baseline_flag) {
    if (!spatial_flag.empty()) parse_spatial_flag(spatial_flag, rc);
    if (!baseline_flag.empty()) parse_baseline_flag(baseline_flag, rc);
    rc.validate();
    if (!rc.slice_config().pairing_overlap_ok()) {
        std::cerr << "warning: overlap below 0.5 can split a peak across consecutive slices "
                     "without a counteracting pair\n";
    }
}

DatasetGrid indicators_to_grid(const DatasetGrid& source, const DatasetPickResult& picked) {
    DatasetGrid out;
    out.rows = source.rows;
    out.cols = source.cols;
    out.mz = source.mz;
    out.occupancy = source.occupancy;
    out.intensities.assign(source.num_present() * source.axis_len(), 0.0);
    const std::size_t l = source.axis_len();
    for (std::size_t i = 0; i < picked.indicators.size(); ++i) {
        const auto& z = picked.indicators[i].z;
        if (z.size() == l) {
            std::copy(z.begin(), z.end(), out.intensities.begin() + static_cast<std::ptrdiff_t>(i * l));
        }
    }
    return out;
}

int report_spot_errors(const DatasetPickResult& picked, std::size_t n_spots) {
    if (picked.errors.empty()) return 0;
    std::cerr << "warning: " << picked.errors.size() << " of " << n_spots
              << " spots failed:\n";
    for (const SpotError& e : picked.errors) {
        std::cerr << "  spot (" << e.row << "," << e.col << "): " << e.message << '\n';
    }
    return picked.errors.size() == n_spots ? 1 : 0;
}

DatasetPickResult run_pick(DatasetGrid& grid, RunConfig& rc) {
    apply_preprocess(grid, rc);
    std::optional<NeighborhoodSpec> hood = rc.neighborhood();
    if (hood && grid.num_present() <= 1) {
        std::cerr << "warning: --spatial has no effect on a single spectrum; using basic mode\n";
        hood.reset();
        rc.spatial = "none";
    }
    return pick_dataset(grid, rc.slice_config(), rc.frame_spec(), rc.lambda_policy(), hood,
                        rc.threads);
}

std::vector<SpotPeaks> extract_all(const DatasetGrid& grid, const DatasetPickResult& picked,
                                   const RunConfig& rc) {
    std::vector<SpotPeaks> out;
    std::size_t idx = 0;
    for (int r = 0; r < grid.rows; ++r) {
        for (int c = 0; c < grid.cols; ++c) {
            if (!grid.present(r, c)) continue;
            const PeakIndicator& ind = picked.indicators[idx++];
            SpotPeaks sp{r, c, {}};
            if (ind.z.size() == grid.axis_len()) {
                sp.peaks = extract_peaks(ind, grid.mz, rc.min_score, rc.min_separation);
            }
            out.push_back(std::move(sp));
        }
    }
    return out;
}

std::string pretty_report(const EvalReport& rep) {
    std::ostringstream os;
    os << "peaks:       " << rep.n_detected << " detected, " << rep.n_reference
       << " reference, " << rep.n_correct << " correct, " << rep.n_false << " false\n";
    os << "sensitivity: " << rep.sensitivity << '\n';
    os << "fdr:         " << rep.fdr << '\n';
    os << "f1:          " << rep.f1 << '\n';
    if (rep.per_spectrum.size() > 1) {
        os << "per-spectrum means: sensitivity " << rep.mean_sensitivity << ", fdr "
           << rep.mean_fdr << ", f1 " << rep.mean_f1 << " over " << rep.per_spectrum.size()
           << " spectra\n";
    }
    return os.str();
}

json report_to_json(const EvalReport& rep) {
    json j;
    j["sensitivity"] = rep.sensitivity;
    j["fdr"] = rep.fdr;
    j["f1"] = rep.f1;
    j["n_reference"] = rep.n_reference;
    j["n_detected"] = rep.n_detected;
    j["n_correct"] = rep.n_correct;
    j["n_false"] = rep.n_false;
    j["mean_sensitivity"] = rep.mean_sensitivity;
    j["mean_fdr"] = rep.mean_fdr;
    j["mean_f1"] = rep.mean_f1;
    json per = json::array();
    for (const auto& s : rep.per_spectrum) {
        per.push_back({{"id", s.id},
                       {"n_reference", s.n_reference},
                       {"n_detected", s.n_detected},
                       {"n_correct", s.n_correct},
                       {"sensitivity", s.sensitivity},
                       {"fdr", s.fdr},
                       {"f1", s.f1}});
    }
    j["per_spectrum"] = per;
    return j;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"framepick: sparse frame-multiplier peak picking for mass spectrometry "
                 "imaging data"};
    app.require_subcommand(1);

    // --config seeds every pipeline flag; explicit flags override it.
    RunConfig rc;
    for (int i = 1; i + 1 < argc; ++i) {
        if (std::string(argv[i]) == "--config") {
            try {
                rc = RunConfig::from_json(read_text_file(argv[i + 1]));
            } catch (const IoError& e) {
                std::cerr << "error: " << e.what() << '\n';
                return 2;
            }
        }
    }
    std::string config_path;
    app.add_option("--config", config_path, "JSON run configuration to start from")
        ->expected(1);

    std::string spatial_flag;
    std::string baseline_flag;

    // ---- simulate ----------------------------------------------------------
    auto* simulate = app.add_subcommand("simulate", "Generate annotated synthetic data");
    auto* sim_spectrum = simulate->add_subcommand("spectrum", "Independent spectra");
    SynthSpec synth_spec;
    int sim_count = 1;
    std::string sim_out;
    sim_spectrum->add_option("--out", sim_out, "Output prefix")->required();
    sim_spectrum->add_option("--count", sim_count, "Number of spectra");
    sim_spectrum->add_option("--length", synth_spec.length, "Bins per spectrum");
    sim_spectrum->add_option("--n-peaks", synth_spec.n_peaks, "Peaks per spectrum");
    sim_spectrum->add_option("--width-min", synth_spec.peak_width_min, "Min peak sigma (bins)");
    sim_spectrum->add_option("--width-max", synth_spec.peak_width_max, "Max peak sigma (bins)");
    sim_spectrum->add_option("--amp-min", synth_spec.amp_min, "Min peak amplitude");
    sim_spectrum->add_option("--amp-max", synth_spec.amp_max, "Max peak amplitude");
    sim_spectrum->add_option("--baseline-amp", synth_spec.baseline_amp, "Baseline at bin 0");
    sim_spectrum->add_option("--baseline-scale", synth_spec.baseline_scale,
                             "Baseline decay length in bins (0 disables)");
    sim_spectrum->add_option("--noise-sigma0", synth_spec.noise_sigma0, "Noise std at bin 0");
    sim_spectrum->add_option("--noise-decay", synth_spec.noise_decay,
                             "Per-bin decay rate of the noise std");
    sim_spectrum->add_option("--mz-start", synth_spec.mz_start, "m/z of bin 0");
    sim_spectrum->add_option("--mz-step", synth_spec.mz_step, "m/z per bin");
    sim_spectrum->add_option("--seed", synth_spec.seed, "Generator seed");

    auto* sim_phantom = simulate->add_subcommand("phantom", "Spatial phantom dataset");
    PhantomSpec phantom_spec;
    std::string phantom_out;
    std::vector<int> shape_bins{150, 250, 350, 450};
    sim_phantom->add_option("--out", phantom_out, "Output prefix")->required();
    sim_phantom->add_option("--rows", phantom_spec.rows, "Grid rows");
    sim_phantom->add_option("--cols", phantom_spec.cols, "Grid cols");
    sim_phantom->add_option("--length", phantom_spec.spectrum_len, "Bins per spectrum");
    sim_phantom
        ->add_option("--shape-bins", shape_bins,
                     "Four m/z bins for square, triangle, circle, cross")
        ->expected(4);
    sim_phantom->add_option("--amplitude", phantom_spec.peak_amplitude, "Peak amplitude");
    sim_phantom->add_option("--peak-width", phantom_spec.peak_width, "Peak sigma (bins)");
    sim_phantom->add_option("--noise", phantom_spec.noise_sigma, "Noise std");
    sim_phantom->add_option("--mz-start", phantom_spec.mz_start, "m/z of bin 0");
    sim_phantom->add_option("--mz-step", phantom_spec.mz_step, "m/z per bin");
    sim_phantom->add_option("--seed", phantom_spec.seed, "Generator seed");

    // ---- pick --------------------------------------------------------------
    auto* pick = app.add_subcommand("pick", "Detect peaks in a spectrum or dataset");
    std::string pick_in, pick_out;
    pick->add_option("--input", pick_in, "CSV spectrum or dataset container")->required();
    pick->add_option("--out", pick_out, "Output prefix")->required();
    add_pipeline_flags(pick, rc, spatial_flag, baseline_flag);

    // ---- denoise -----------------------------------------------------------
    auto* denoise = app.add_subcommand(
        "denoise",
        "Run the picking pipeline and keep the indicator signal as a denoised dataset. "
        "Indicator intensities carry no relation to the original peak intensities; they "
        "measure coefficient changes between overlapping slices.");
    std::string den_in, den_out;
    denoise->add_option("--input", den_in, "CSV spectrum or dataset container")->required();
    denoise->add_option("--out", den_out, "Output prefix")->required();
    add_pipeline_flags(denoise, rc, spatial_flag, baseline_flag);

    // ---- eval --------------------------------------------------------------
    auto* eval_cmd = app.add_subcommand("eval", "Score detected peaks against ground truth");
    std::string eval_detected, eval_truth, eval_out;
    double eval_tol = 0.01;
    eval_cmd->add_option("--detected", eval_detected, "Detected peaks JSON")->required();
    eval_cmd->add_option("--truth", eval_truth, "Reference peaks JSON")->required();
    eval_cmd->add_option("--rel-tol", eval_tol, "Relative m/z matching tolerance");
    eval_cmd->add_option("--out", eval_out, "Output prefix for the JSON report");

    // ---- render ------------------------------------------------------------
    auto* render = app.add_subcommand("render", "Render one m/z bin range as an image");
    std::string render_in, render_out, render_format = "pgm";
    int render_bin = -1, render_bin_hi = -1;
    double render_quantile = 0.0;
    render->add_option("--input", render_in, "Dataset container")->required();
    render->add_option("--out", render_out, "Output image file")->required();
    render->add_option("--bin", render_bin, "m/z bin (range start)")->required();
    render->add_option("--bin-hi", render_bin_hi, "m/z bin range end (default: --bin)");
    render->add_option("--hotspot-quantile", render_quantile,
                       "Clip this top fraction of intensities before scaling");
    render->add_option("--format", render_format, "pgm | png");

    // ---- tune-lambda -------------------------------------------------------
    auto* tune = app.add_subcommand("tune-lambda", "Find lambda for a target peak count");
    std::string tune_in, tune_out;
    int tune_target = 0;
    bool tune_per_spectrum = false;
    tune->add_option("--input", tune_in, "CSV spectrum or dataset container")->required();
    tune->add_option("--target", tune_target, "Desired peak count")->required();
    tune->add_option("--out", tune_out, "Output prefix for the lambda report");
    tune->add_flag("--per-spectrum", tune_per_spectrum,
                   "Tune each spectrum separately instead of the dataset mean spectrum");
    add_pipeline_flags(tune, rc, spatial_flag, baseline_flag);

    try {
        app.parse(argc, argv);

        if (sim_spectrum->parsed()) {
            if (sim_count < 1) throw ValidationError("simulate: --count must be >= 1");
            synth_spec.validate();
            rc.seed = synth_spec.seed;
            SynthResult first = synth_spectrum(synth_spec);
            DatasetGrid grid = DatasetGrid::dense(sim_count, 1, first.spectrum.mz);
            std::vector<SpotPeaks> truth;
            for (int i = 0; i < sim_count; ++i) {
                SynthSpec per = synth_spec;
                per.seed = Rng::derive_seed(synth_spec.seed, static_cast<std::uint64_t>(i));
                SynthResult res = i == 0 && per.seed == synth_spec.seed
                                      ? std::move(first)
                                      : synth_spectrum(per);
                auto spot = grid.spot(i, 0);
                std::copy(res.spectrum.intensity.begin(), res.spectrum.intensity.end(),
                          spot.begin());
                truth.push_back({i, 0, std::move(res.truth)});
            }
            const std::string cfg_json = rc.to_json();
            write_dataset(sim_out + ".msgrid", grid, cfg_json);
            write_text_file(sim_out + ".truth.json", spot_peaks_to_json(truth, cfg_json).dump(2));
            write_text_file(sim_out + ".runconfig.json", cfg_json);
            std::cout << "wrote " << sim_out << ".msgrid (" << sim_count << " spectra)\n";
            return 0;
        }

        if (sim_phantom->parsed()) {
            const int r4 = phantom_spec.rows / 4;
            const int c4 = phantom_spec.cols / 4;
            const int half = std::max(1, std::min(phantom_spec.rows, phantom_spec.cols) / 6);
            phantom_spec.shapes = {
                {ShapeKind::square, r4, c4, half, shape_bins[0]},
                {ShapeKind::triangle, r4, 3 * c4, half, shape_bins[1]},
                {ShapeKind::circle, 3 * r4, c4, half, shape_bins[2]},
                {ShapeKind::cross, 3 * r4, 3 * c4, half, shape_bins[3]},
            };
            phantom_spec.validate();
            rc.seed = phantom_spec.seed;
            PhantomResult res = synth_phantom(phantom_spec);
            const std::string cfg_json = rc.to_json();
            write_dataset(phantom_out + ".msgrid", res.grid, cfg_json);

            json truth;
            truth["config"] = json::parse(cfg_json);
            json shapes = json::array();
            static const char* kShapeNames[] = {"square", "triangle", "circle", "cross"};
            for (std::size_t s = 0; s < phantom_spec.shapes.size(); ++s) {
                json shape;
                shape["kind"] = kShapeNames[static_cast<int>(phantom_spec.shapes[s].kind)];
                shape["mz_bin"] = phantom_spec.shapes[s].mz_bin;
                shape["mz"] = res.grid.mz[static_cast<std::size_t>(phantom_spec.shapes[s].mz_bin)];
                std::string occ;
                occ.reserve(res.occupancy_maps[s].size());
                for (std::uint8_t o : res.occupancy_maps[s]) occ.push_back(o != 0 ? '1' : '0');
                shape["occupancy"] = occ;
                shapes.push_back(shape);
            }
            truth["rows"] = phantom_spec.rows;
            truth["cols"] = phantom_spec.cols;
            truth["shapes"] = shapes;
            write_text_file(phantom_out + ".truth.json", truth.dump(2));
            write_text_file(phantom_out + ".runconfig.json", cfg_json);
            std::cout << "wrote " << phantom_out << ".msgrid (" << phantom_spec.rows << "x"
                      << phantom_spec.cols << " grid)\n";
            return 0;
        }

        if (pick->parsed() || denoise->parsed()) {
            const bool is_pick = pick->parsed();
            const std::string in_path = is_pick ? pick_in : den_in;
            const std::string out_prefix = is_pick ? pick_out : den_out;
            finalize_config(rc, spatial_flag, baseline_flag);

            DatasetGrid grid = load_input(in_path);
            const DatasetPickResult picked = run_pick(grid, rc);
            const int bad = report_spot_errors(picked, grid.num_present());
            const std::string cfg_json = rc.to_json();

            const DatasetGrid zgrid = indicators_to_grid(grid, picked);
            if (is_pick) {
                write_dataset(out_prefix + ".indicator.msgrid", zgrid, cfg_json);
                const auto spots = extract_all(grid, picked, rc);
                write_text_file(out_prefix + ".peaks.json",
                                spot_peaks_to_json(spots, cfg_json).dump(2));
            } else {
                write_dataset(out_prefix + ".denoised.msgrid", zgrid, cfg_json);
            }
            write_text_file(out_prefix + ".runconfig.json", cfg_json);
            std::cout << "processed " << grid.num_present() - picked.errors.size() << " of "
                      << grid.num_present() << " spectra\n";
            return bad;
        }

        if (eval_cmd->parsed()) {
            if (!(eval_tol > 0.0)) throw ValidationError("eval: --rel-tol must be positive");
            const json detected = json::parse(read_text_file(eval_detected));
            const json truth = json::parse(read_text_file(eval_truth));
            const auto det_spots = spot_peaks_from_json(detected);
            const auto ref_spots = spot_peaks_from_json(truth);

            std::vector<SpectrumScore> scores;
            for (const auto& ref : ref_spots) {
                const auto det = std::find_if(det_spots.begin(), det_spots.end(),
                                              [&](const SpotPeaks& d) {
                                                  return d.row == ref.row && d.col == ref.col;
                                              });
                const std::vector<Peak> none;
                const std::vector<Peak>& dp = det != det_spots.end() ? det->peaks : none;
                const MatchResult m = match_peaks(dp, ref.peaks, eval_tol);
                SpectrumScore s = score_match(m, dp.size(), ref.peaks.size());
                s.id = "(" + std::to_string(ref.row) + "," + std::to_string(ref.col) + ")";
                scores.push_back(std::move(s));
            }
            const EvalReport rep = score(std::move(scores));
            std::cout << pretty_report(rep);
            if (!eval_out.empty()) {
                write_text_file(eval_out + ".report.json", report_to_json(rep).dump(2));
            }
            return 0;
        }

        if (render->parsed()) {
            std::string cfg_echo;
            const DatasetGrid grid = read_dataset(render_in, &cfg_echo);
            const int hi = render_bin_hi < 0 ? render_bin : render_bin_hi;
            const auto pixels = render_mz_image(grid, render_bin, hi, render_quantile);
            if (render_format == "pgm") {
                write_pgm(render_out, grid.rows, grid.cols, pixels, cfg_echo);
            } else if (render_format == "png") {
                write_png(render_out, grid.rows, grid.cols, pixels);
            } else {
                throw ValidationError("render: --format must be pgm or png");
            }
            write_text_file(render_out + ".runconfig.json", cfg_echo);
            std::cout << "wrote " << render_out << '\n';
            return 0;
        }

        if (tune->parsed()) {
            finalize_config(rc, spatial_flag, baseline_flag);
            if (tune_target < 1) throw ValidationError("tune-lambda: --target must be >= 1");
            DatasetGrid grid = load_input(tune_in);
            apply_preprocess(grid, rc);
            const ExtractParams extract{rc.min_score, rc.min_separation};

            json out;
            out["config"] = json::parse(rc.to_json());
            out["target"] = tune_target;
            if (!tune_per_spectrum) {
                const double lam = tune_lambda_mean_spectrum(grid, rc.slice_config(),
                                                             rc.frame_spec(), tune_target, extract);
                out["mode"] = "mean-spectrum";
                out["lambda"] = lam;
                std::cout << "lambda = " << lam << " (mean spectrum)\n";
            } else {
                out["mode"] = "per-spectrum";
                const FrameAnalyzer analyzer(rc.frame_spec());
                json per = json::array();
                const std::size_t l = grid.axis_len();
                std::size_t idx = 0;
                for (int r = 0; r < grid.rows; ++r) {
                    for (int c = 0; c < grid.cols; ++c) {
                        if (!grid.present(r, c)) continue;
                        json e;
                        e["row"] = r;
                        e["col"] = c;
                        const double* rowp = grid.intensities.data() + idx * l;
                        try {
                            e["lambda"] = tune_lambda(std::span<const double>(rowp, l),
                                                      rc.slice_config(), analyzer, tune_target,
                                                      extract);
                        } catch (const UnattainableTargetError& err) {
                            e["error"] = err.what();
                            e["max_achievable"] = err.max_achievable();
                        }
                        per.push_back(std::move(e));
                        ++idx;
                    }
                }
                out["per_spot"] = per;
                std::cout << "tuned " << idx << " spectra\n";
            }
            const std::string prefix = tune_out.empty() ? tune_in + ".lambda" : tune_out;
            write_text_file(prefix + ".lambda.json", out.dump(2));
            return 0;
        }

        return 0;
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e); // --help
        app.exit(e);
        return 1;
    } catch (const UnattainableTargetError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const json::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
