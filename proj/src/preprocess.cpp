#include "framepick/preprocess.hpp"

#include <algorithm>
#include <deque>
#include <string>

#include "framepick/errors.hpp"

namespace framepick {

namespace {

// Sliding extremum over index windows [i + lo, i + hi] clipped to the signal,
// via a monotone deque (O(n)). The front holds the current extremum; an index
// survives at the back only while cmp(f[back], f[incoming]) holds, so
// cmp = std::less yields a sliding minimum and std::greater a sliding maximum.
template <typename Cmp>
std::vector<double> sliding_extremum(std::span<const double> f, int lo, int hi, Cmp cmp) {
    const int n = static_cast<int>(f.size());
    std::vector<double> out(static_cast<std::size_t>(n));
    std::deque<int> q; // indices with values monotone under cmp
    int next = 0;      // first index not yet pushed
    for (int i = 0; i < n; ++i) {
        const int wlo = std::max(0, i + lo);
        const int whi = std::min(n - 1, i + hi);
        while (next <= whi) {
            while (!q.empty() && !cmp(f[static_cast<std::size_t>(q.back())],
                                      f[static_cast<std::size_t>(next)])) {
                q.pop_back();
            }
            q.push_back(next);
            ++next;
        }
        while (q.front() < wlo) q.pop_front();
        out[static_cast<std::size_t>(i)] = f[static_cast<std::size_t>(q.front())];
    }
    return out;
}

} // namespace

BaselineResult tophat_baseline(std::span<const double> f, int window_bins) {
    const int n = static_cast<int>(f.size());
    if (window_bins < 1) throw ValidationError("tophat_baseline: window_bins must be >= 1");
    if (window_bins > n) {
        throw ValidationError("tophat_baseline: window_bins (" + std::to_string(window_bins) +
                              ") exceeds signal length (" + std::to_string(n) + ")");
    }

    // Structuring element offsets B = [-(w-1)/2, w/2]; erosion scans i + B,
    // the adjoint dilation scans i - B. The pair forms a proper opening.
    const int lo = -(window_bins - 1) / 2;
    const int hi = window_bins / 2;

    const std::vector<double> eroded = sliding_extremum(f, lo, hi, std::less<double>());
    BaselineResult out;
    out.baseline = sliding_extremum(std::span<const double>(eroded), -hi, -lo, std::greater<double>());
    out.corrected.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        out.corrected[static_cast<std::size_t>(i)] =
            f[static_cast<std::size_t>(i)] - out.baseline[static_cast<std::size_t>(i)];
    }
    return out;
}

std::vector<double> tic_normalize(std::span<const double> f) {
    double sum = 0.0;
    for (double v : f) sum += std::max(0.0, v);
    if (!(sum > 0.0)) {
        throw ValidationError("tic_normalize: spectrum has no positive intensity");
    }
    std::vector<double> out(f.begin(), f.end());
    for (double& v : out) v /= sum;
    return out;
}

} // namespace framepick
