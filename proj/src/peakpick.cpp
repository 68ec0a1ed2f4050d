#include "framepick/peakpick.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "framepick/parallel.hpp"
#include "stats.hpp"

namespace framepick {

namespace {

constexpr double kMadCalibration = 0.6745;
constexpr double kLambdaFloor = 1e-15;
constexpr double kTuneLambdaLo = 1e-9;
constexpr double kTuneLambdaHi = 1e3;
constexpr int kTuneMaxIterations = 60;

// Precomputed per-pair element statistics: ratio y = |c2|/|c1| and energy
// E = |c1|^2, with trivial reference coefficients encoded as (y = 1,
// E = +inf) so they can never contribute. Evaluating the indicator for a
// lambda is then a cheap pass that reproduces the estimate_mask-based
// computation bit for bit: only the downward branch m = y + lambda/E < 1
// produces a score.
struct PairStats {
    std::vector<double> y;
    std::vector<double> energy;
    double lambda = 0.0;
};

struct SpectrumContext {
    std::size_t signal_len = 0;
    int hop = 0;
    int time_step = 0;
    int time_positions = 0;
    int channels = 0;
    std::vector<PairStats> pairs;
};

double negative_deviation(double y, double energy, double lambda) {
    const double m = y + lambda / energy;
    return m < 1.0 ? 1.0 - m : 0.0;
}

PairStats build_pair_stats(const CoefficientGrid& c1, const CoefficientGrid& c2) {
    const std::size_t n = c1.values.size();
    const double eps = coefficient_epsilon(c1);
    PairStats stats;
    stats.y.resize(n);
    stats.energy.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double m1 = std::abs(c1.values[i]);
        if (m1 <= eps) {
            stats.y[i] = 1.0;
            stats.energy[i] = std::numeric_limits<double>::infinity();
        } else {
            stats.y[i] = std::abs(c2.values[i]) / m1;
            stats.energy[i] = m1 * m1;
        }
    }
    return stats;
}

SpectrumContext build_context(std::span<const double> f, const SliceConfig& cfg,
                              const FrameAnalyzer& frame, const LambdaPolicy* policy) {
    const auto slices = slice_spectrum(f, cfg);
    if (slices.size() < 2) {
        throw ValidationError("pick: signal yields a single slice; the detector is pairwise and "
                              "needs at least two");
    }

    SpectrumContext ctx;
    ctx.signal_len = f.size();
    ctx.hop = cfg.hop();
    ctx.time_step = frame.time_step();

    CoefficientGrid prev = frame.analyze(slices[0]);
    ctx.time_positions = static_cast<int>(prev.values.rows());
    ctx.channels = static_cast<int>(prev.values.cols());
    ctx.pairs.reserve(slices.size() - 1);
    for (std::size_t i = 1; i < slices.size(); ++i) {
        CoefficientGrid cur = frame.analyze(slices[i]);
        PairStats stats = build_pair_stats(prev, cur);
        if (policy != nullptr) stats.lambda = resolve_lambda(*policy, prev, cur);
        ctx.pairs.push_back(std::move(stats));
        prev = std::move(cur);
    }
    return ctx;
}

SpectrumContext build_context_from_stack(const std::vector<CoefficientGrid>& stack,
                                         std::size_t signal_len, const SliceConfig& cfg,
                                         int time_step, const LambdaPolicy& policy) {
    SpectrumContext ctx;
    ctx.signal_len = signal_len;
    ctx.hop = cfg.hop();
    ctx.time_step = time_step;
    ctx.time_positions = static_cast<int>(stack.front().values.rows());
    ctx.channels = static_cast<int>(stack.front().values.cols());
    ctx.pairs.reserve(stack.size() - 1);
    for (std::size_t i = 1; i < stack.size(); ++i) {
        PairStats stats = build_pair_stats(stack[i - 1], stack[i]);
        stats.lambda = resolve_lambda(policy, stack[i - 1], stack[i]);
        ctx.pairs.push_back(std::move(stats));
    }
    return ctx;
}

PeakIndicator indicator_from_context(const SpectrumContext& ctx,
                                     std::optional<double> lambda_override) {
    PeakIndicator out;
    out.z.assign(ctx.signal_len, 0.0);
    const std::size_t kt = static_cast<std::size_t>(ctx.time_positions);
    const std::size_t kf = static_cast<std::size_t>(ctx.channels);
    for (std::size_t p = 0; p < ctx.pairs.size(); ++p) {
        const PairStats& stats = ctx.pairs[p];
        const double lambda = lambda_override ? *lambda_override : stats.lambda;
        for (std::size_t k = 0; k < kt; ++k) {
            double score = 0.0;
            const std::size_t base = k * kf;
            for (std::size_t l = 0; l < kf; ++l) {
                score += negative_deviation(stats.y[base + l], stats.energy[base + l], lambda);
            }
            const std::size_t bin =
                p * static_cast<std::size_t>(ctx.hop) + k * static_cast<std::size_t>(ctx.time_step);
            if (bin < ctx.signal_len && score > out.z[bin]) out.z[bin] = score;
        }
    }
    return out;
}

// Mask-deviation scores of one pair accumulated into z (spatial path).
void accumulate_mask_scores(const MaskGrid& mask, std::size_t pair_index, int hop, int time_step,
                            std::vector<double>& z) {
    const std::size_t kt = mask.values.rows();
    const std::size_t kf = mask.values.cols();
    for (std::size_t k = 0; k < kt; ++k) {
        double score = 0.0;
        for (std::size_t l = 0; l < kf; ++l) {
            const double d = mask.values(k, l) - 1.0;
            if (d < 0.0) score -= d;
        }
        const std::size_t bin = pair_index * static_cast<std::size_t>(hop) +
                                k * static_cast<std::size_t>(time_step);
        if (bin < z.size() && score > z[bin]) z[bin] = score;
    }
}

std::vector<Peak> local_maxima(const PeakIndicator& indicator, double min_score,
                               int min_separation_bins) {
    if (min_separation_bins < 1) {
        throw ValidationError("extract_peaks: min_separation_bins must be >= 1");
    }
    const auto& z = indicator.z;
    const std::size_t n = z.size();

    std::vector<Peak> candidates;
    for (std::size_t i = 0; i < n; ++i) {
        const bool left_ok = i == 0 || z[i] > z[i - 1];
        const bool right_ok = i + 1 == n || z[i] > z[i + 1];
        if (left_ok && right_ok && z[i] > min_score) {
            candidates.push_back({static_cast<int>(i), 0.0, z[i]});
        }
    }
    std::sort(candidates.begin(), candidates.end(), [](const Peak& a, const Peak& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.bin < b.bin;
    });

    std::vector<Peak> accepted;
    for (const Peak& cand : candidates) {
        bool keep = true;
        for (const Peak& acc : accepted) {
            if (std::abs(cand.bin - acc.bin) < min_separation_bins) {
                keep = false;
                break;
            }
        }
        if (keep) accepted.push_back(cand);
    }
    return accepted;
}

} // namespace

// ---------------------------------------------------------------------------
// SliceConfig / LambdaPolicy

int SliceConfig::hop() const {
    return static_cast<int>(std::lround(slice_len * (1.0 - overlap)));
}

void SliceConfig::validate() const {
    if (slice_len <= 0) throw ValidationError("slice config: slice_len must be positive");
    if (!(overlap > 0.0) || !(overlap < 1.0)) {
        throw ValidationError("slice config: overlap must lie strictly inside (0, 1)");
    }
    if (hop() < 1) throw ValidationError("slice config: hop rounds to zero; reduce overlap");
}

int SliceConfig::num_slices(std::size_t len) const {
    const std::size_t m = static_cast<std::size_t>(slice_len);
    const std::size_t h = static_cast<std::size_t>(hop());
    if (len < m) throw ValidationError("slice config: signal shorter than slice_len");
    return static_cast<int>((len - m + h - 1) / h) + 1;
}

void LambdaPolicy::validate() const {
    if (!(base_lambda > 0.0)) throw ValidationError("lambda policy: base_lambda must be positive");
    const bool needs_target = mode == LambdaMode::target_count;
    if (needs_target != target.has_value()) {
        throw ValidationError(needs_target
                                  ? "lambda policy: target_count mode requires a target"
                                  : "lambda policy: target is only meaningful in target_count mode");
    }
    if (target && *target < 1) throw ValidationError("lambda policy: target must be >= 1");
}

// ---------------------------------------------------------------------------
// Operations

std::vector<std::vector<double>> slice_spectrum(std::span<const double> f, const SliceConfig& cfg) {
    cfg.validate();
    const int k = cfg.num_slices(f.size()); // throws when f is shorter than one slice
    const std::size_t m = static_cast<std::size_t>(cfg.slice_len);
    const std::size_t h = static_cast<std::size_t>(cfg.hop());

    std::vector<std::vector<double>> slices(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) {
        const std::size_t start = static_cast<std::size_t>(i) * h;
        auto& s = slices[static_cast<std::size_t>(i)];
        s.assign(m, 0.0);
        const std::size_t avail = std::min(m, f.size() - start);
        std::copy_n(f.begin() + static_cast<std::ptrdiff_t>(start), avail, s.begin());
    }
    return slices;
}

double resolve_lambda(const LambdaPolicy& policy, const CoefficientGrid& c1,
                      const CoefficientGrid& c2) {
    policy.validate();
    switch (policy.mode) {
    case LambdaMode::fixed:
        return policy.base_lambda;
    case LambdaMode::noise_adaptive: {
        // Pool both grids; the top decile by magnitude is presumed peak
        // content and excluded from the noise estimate.
        std::vector<double> mags;
        mags.reserve(c1.values.size() + c2.values.size());
        for (std::size_t i = 0; i < c1.values.size(); ++i) mags.push_back(std::abs(c1.values[i]));
        for (std::size_t i = 0; i < c2.values.size(); ++i) mags.push_back(std::abs(c2.values[i]));
        if (mags.empty()) throw ValidationError("resolve_lambda: empty coefficient grids");
        const std::size_t keep = mags.size() - mags.size() / 10;
        if (keep < mags.size()) {
            std::nth_element(mags.begin(), mags.begin() + static_cast<std::ptrdiff_t>(keep),
                             mags.end());
            mags.resize(keep);
        }
        const double sigma = detail::median_inplace(mags) / kMadCalibration;
        return std::max(kLambdaFloor, policy.base_lambda * sigma * sigma);
    }
    case LambdaMode::target_count:
        throw ValidationError("resolve_lambda: target_count is resolved by tune_lambda, not per "
                              "slice pair");
    }
    throw ValidationError("resolve_lambda: unknown mode");
}

PeakIndicator pick_spectrum(std::span<const double> f, const SliceConfig& cfg,
                            const FrameAnalyzer& frame, const LambdaPolicy& policy) {
    policy.validate();
    const SpectrumContext ctx = build_context(f, cfg, frame, &policy);
    return indicator_from_context(ctx, std::nullopt);
}

PeakIndicator pick_spectrum(std::span<const double> f, const SliceConfig& cfg,
                            const FrameSpec& frame, const LambdaPolicy& policy) {
    return pick_spectrum(f, cfg, FrameAnalyzer(frame), policy);
}

std::vector<Peak> extract_peaks(const PeakIndicator& indicator, std::span<const double> axis,
                                double min_score, int min_separation_bins) {
    if (axis.size() != indicator.z.size()) {
        throw ValidationError("extract_peaks: axis length does not match indicator length");
    }
    std::vector<Peak> peaks = local_maxima(indicator, min_score, min_separation_bins);
    for (Peak& p : peaks) p.mz = axis[static_cast<std::size_t>(p.bin)];
    return peaks;
}

int count_peaks(const PeakIndicator& indicator, double min_score, int min_separation_bins) {
    return static_cast<int>(local_maxima(indicator, min_score, min_separation_bins).size());
}

double tune_lambda(std::span<const double> f, const SliceConfig& cfg, const FrameAnalyzer& frame,
                   int target_peaks, const ExtractParams& extract) {
    if (target_peaks < 1) throw ValidationError("tune_lambda: target_peaks must be >= 1");
    const SpectrumContext ctx = build_context(f, cfg, frame, nullptr);

    auto count_at = [&](double lambda) {
        const PeakIndicator ind = indicator_from_context(ctx, lambda);
        return count_peaks(ind, extract.min_score, extract.min_separation_bins);
    };

    const int at_lo = count_at(kTuneLambdaLo);
    if (at_lo < target_peaks) {
        throw UnattainableTargetError(
            "tune_lambda: target of " + std::to_string(target_peaks) +
                " peaks is unattainable; at most " + std::to_string(at_lo) + " detected",
            at_lo);
    }
    if (count_at(kTuneLambdaHi) >= target_peaks) return kTuneLambdaHi;

    double lo = kTuneLambdaLo; // count >= target here
    double hi = kTuneLambdaHi; // count < target here
    for (int it = 0; it < kTuneMaxIterations && hi / lo > 1.0 + 1e-12; ++it) {
        const double mid = std::sqrt(lo * hi);
        if (count_at(mid) >= target_peaks) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return lo;
}

double tune_lambda(std::span<const double> f, const SliceConfig& cfg, const FrameSpec& frame,
                   int target_peaks, const ExtractParams& extract) {
    return tune_lambda(f, cfg, FrameAnalyzer(frame), target_peaks, extract);
}

// ---------------------------------------------------------------------------
// Dataset orchestration

namespace {

struct SpotRef {
    int row = 0;
    int col = 0;
    std::size_t index = 0; // position among present spots
};

std::vector<SpotRef> present_spots(const DatasetGrid& grid) {
    std::vector<SpotRef> out;
    out.reserve(grid.num_present());
    std::size_t idx = 0;
    for (int r = 0; r < grid.rows; ++r) {
        for (int c = 0; c < grid.cols; ++c) {
            if (grid.present(r, c)) out.push_back({r, c, idx++});
        }
    }
    return out;
}

struct StackEntry {
    bool ok = false;
    std::vector<CoefficientGrid> stack;
    std::string error;
};

// Analyzes every slice of one spot; failures are recorded, not thrown.
StackEntry analyze_spot(std::span<const double> f, const SliceConfig& cfg,
                        const FrameAnalyzer& frame) {
    StackEntry entry;
    try {
        const auto slices = slice_spectrum(f, cfg);
        if (slices.size() < 2) {
            throw ValidationError("pick: signal yields a single slice; the detector is pairwise "
                                  "and needs at least two");
        }
        entry.stack.reserve(slices.size());
        for (const auto& s : slices) entry.stack.push_back(frame.analyze(s));
        entry.ok = true;
    } catch (const std::exception& e) {
        entry.error = e.what();
    }
    return entry;
}

} // namespace

DatasetPickResult pick_dataset(const DatasetGrid& grid, const SliceConfig& cfg,
                               const FrameSpec& frame, const LambdaPolicy& policy,
                               const std::optional<NeighborhoodSpec>& spatial, int threads) {
    grid.validate();
    cfg.validate();
    policy.validate();
    if (spatial) spatial->validate();
    const FrameAnalyzer analyzer(frame);

    const std::vector<SpotRef> spots = present_spots(grid);
    DatasetPickResult result;
    result.indicators.resize(spots.size());
    std::vector<std::string> spot_errors(spots.size());

    const bool use_spatial = spatial.has_value() && spatial->size > 1;

    if (!use_spatial) {
        parallel_for(spots.size(), threads, [&](std::size_t i) {
            try {
                result.indicators[i] =
                    pick_spectrum(grid.spot(spots[i].row, spots[i].col), cfg, analyzer, policy);
            } catch (const std::exception& e) {
                spot_errors[i] = e.what();
            }
        });
    } else {
        const int rad = spatial->size / 2;
        const Reducer reducer = spatial->reducer();
        const std::size_t l = grid.axis_len();

        // Row-window cache of per-spot slice analyses: row r needs rows
        // [r - rad, r + rad]; rows leaving the window are released.
        std::vector<std::vector<StackEntry>> cache(static_cast<std::size_t>(grid.rows));
        std::vector<char> cached(static_cast<std::size_t>(grid.rows), 0);
        std::vector<std::vector<const SpotRef*>> spots_by_row(static_cast<std::size_t>(grid.rows));
        for (const SpotRef& s : spots) {
            spots_by_row[static_cast<std::size_t>(s.row)].push_back(&s);
        }

        auto ensure_row = [&](int r) {
            if (r < 0 || r >= grid.rows || cached[static_cast<std::size_t>(r)]) return;
            auto& row_cache = cache[static_cast<std::size_t>(r)];
            row_cache.resize(static_cast<std::size_t>(grid.cols));
            std::vector<int> cols_present;
            for (int c = 0; c < grid.cols; ++c) {
                if (grid.present(r, c)) cols_present.push_back(c);
            }
            parallel_for(cols_present.size(), threads, [&](std::size_t i) {
                const int c = cols_present[i];
                row_cache[static_cast<std::size_t>(c)] = analyze_spot(grid.spot(r, c), cfg, analyzer);
            });
            cached[static_cast<std::size_t>(r)] = 1;
        };

        auto process_spot = [&](const SpotRef& spot) {
            const StackEntry& center =
                cache[static_cast<std::size_t>(spot.row)][static_cast<std::size_t>(spot.col)];
            if (!center.ok) {
                spot_errors[spot.index] = center.error;
                return;
            }
            const ResolvedNeighborhood hood = resolve_neighbors(
                {spot.row, spot.col}, grid.rows, grid.cols, *spatial, grid.occupancy);

            // Keep neighbors whose analysis succeeded; renormalize weights.
            std::vector<const std::vector<CoefficientGrid>*> stacks;
            std::vector<double> weights;
            for (std::size_t j = 0; j < hood.coords.size(); ++j) {
                const auto& entry = cache[static_cast<std::size_t>(hood.coords[j].row)]
                                         [static_cast<std::size_t>(hood.coords[j].col)];
                if (!entry.ok) continue;
                stacks.push_back(&entry.stack);
                weights.push_back(hood.weights.weights[j]);
            }
            double wsum = 0.0;
            for (double w : weights) wsum += w;
            for (double& w : weights) w /= wsum;

            if (stacks.size() == 1) {
                // Degenerate neighborhood: identical to the basic per-spot path.
                const SpectrumContext ctx =
                    build_context_from_stack(center.stack, l, cfg, analyzer.time_step(), policy);
                result.indicators[spot.index] = indicator_from_context(ctx, std::nullopt);
                return;
            }

            NeighborWeights nw;
            nw.weights = weights;
            nw.offsets.resize(weights.size()); // offsets are not used downstream

            PeakIndicator indicator;
            indicator.z.assign(l, 0.0);
            const std::size_t pairs = center.stack.size() - 1;
            std::vector<const CoefficientGrid*> n1(stacks.size());
            std::vector<const CoefficientGrid*> n2(stacks.size());
            for (std::size_t p = 0; p < pairs; ++p) {
                const CoefficientGrid& c1 = center.stack[p];
                const CoefficientGrid& c2 = center.stack[p + 1];
                const double lambda = resolve_lambda(policy, c1, c2);
                for (std::size_t j = 0; j < stacks.size(); ++j) {
                    n1[j] = &(*stacks[j])[p];
                    n2[j] = &(*stacks[j])[p + 1];
                }
                const MaskGrid mask = estimate_mask_spatial(c1, c2, n1, n2, nw, lambda, reducer);
                accumulate_mask_scores(mask, p, cfg.hop(), analyzer.time_step(), indicator.z);
            }
            result.indicators[spot.index] = std::move(indicator);
        };

        for (int r = 0; r < grid.rows; ++r) {
            for (int rr = r - rad; rr <= r + rad; ++rr) ensure_row(rr);

            const auto& row_spots = spots_by_row[static_cast<std::size_t>(r)];
            parallel_for(row_spots.size(), threads,
                         [&](std::size_t i) { process_spot(*row_spots[i]); });

            const int leaving = r - rad;
            if (leaving >= 0) {
                cache[static_cast<std::size_t>(leaving)].clear();
                cache[static_cast<std::size_t>(leaving)].shrink_to_fit();
            }
        }
    }

    for (const SpotRef& s : spots) {
        if (!spot_errors[s.index].empty()) {
            result.errors.push_back({s.row, s.col, spot_errors[s.index]});
        }
    }
    return result;
}

double tune_lambda_mean_spectrum(const DatasetGrid& grid, const SliceConfig& cfg,
                                 const FrameSpec& frame, int target_peaks,
                                 const ExtractParams& extract) {
    grid.validate();
    const std::size_t n = grid.num_present();
    if (n == 0) throw ValidationError("tune_lambda: dataset has no present spots");
    const std::size_t l = grid.axis_len();
    std::vector<double> mean(l, 0.0);
    for (std::size_t s = 0; s < n; ++s) {
        const double* row = grid.intensities.data() + s * l;
        for (std::size_t i = 0; i < l; ++i) mean[i] += row[i];
    }
    const double inv = 1.0 / static_cast<double>(n);
    for (double& v : mean) v *= inv;
    return tune_lambda(mean, cfg, frame, target_peaks, extract);
}

} // namespace framepick
