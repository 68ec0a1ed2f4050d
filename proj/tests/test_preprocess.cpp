#include <doctest.h>

#include <algorithm>
#include <vector>

#include "framepick/preprocess.hpp"
#include "framepick/errors.hpp"
#include "framepick/rng.hpp"

using namespace framepick;

namespace {

// Quadratic-time reference opening with the same structuring element
// convention: erosion over i + [lo, hi], adjoint dilation over i - [lo, hi].
std::vector<double> brute_force_opening(const std::vector<double>& f, int w) {
    const int n = static_cast<int>(f.size());
    const int lo = -(w - 1) / 2;
    const int hi = w / 2;
    std::vector<double> eroded(f.size());
    for (int i = 0; i < n; ++i) {
        double m = 1e300;
        for (int u = lo; u <= hi; ++u) {
            const int j = i + u;
            if (j >= 0 && j < n) m = std::min(m, f[static_cast<std::size_t>(j)]);
        }
        eroded[static_cast<std::size_t>(i)] = m;
    }
    std::vector<double> opened(f.size());
    for (int i = 0; i < n; ++i) {
        double m = -1e300;
        for (int u = lo; u <= hi; ++u) {
            const int j = i - u;
            if (j >= 0 && j < n) m = std::max(m, eroded[static_cast<std::size_t>(j)]);
        }
        opened[static_cast<std::size_t>(i)] = m;
    }
    return opened;
}

} // namespace

TEST_CASE("top-hat of a constant removes everything") {
    const std::vector<double> f(50, 4.5);
    const BaselineResult r = tophat_baseline(f, 7);
    for (double v : r.baseline) CHECK(v == 4.5);
    for (double v : r.corrected) CHECK(v == 0.0);
}

TEST_CASE("top-hat keeps a narrow spike entirely in the corrected signal") {
    std::vector<double> f(30, 0.0);
    f[14] = 9.0;
    const BaselineResult r = tophat_baseline(f, 5);
    for (double v : r.baseline) CHECK(v == 0.0);
    CHECK(r.corrected[14] == 9.0);
}

TEST_CASE("top-hat matches the brute-force opening on a ramp and random signals") {
    std::vector<double> ramp(20);
    for (int i = 0; i < 20; ++i) ramp[static_cast<std::size_t>(i)] = static_cast<double>(i);
    for (int w : {1, 2, 5, 6, 20}) {
        const BaselineResult r = tophat_baseline(ramp, w);
        const auto expect = brute_force_opening(ramp, w);
        for (std::size_t i = 0; i < ramp.size(); ++i) CHECK(r.baseline[i] == expect[i]);
        // the opening never exceeds the signal
        for (std::size_t i = 0; i < ramp.size(); ++i) CHECK(r.baseline[i] <= ramp[i]);
        // residual of a ramp stays below the window width
        for (std::size_t i = 0; i < ramp.size(); ++i) CHECK(r.corrected[i] <= w - 1 + 1e-12);
    }

    Rng rng(41);
    for (int rep = 0; rep < 10; ++rep) {
        std::vector<double> f(64);
        for (double& v : f) v = rng.uniform(-3.0, 3.0);
        const int w = 1 + static_cast<int>(rng.next_u64() % 12);
        const BaselineResult r = tophat_baseline(f, w);
        const auto expect = brute_force_opening(f, w);
        for (std::size_t i = 0; i < f.size(); ++i) {
            CHECK(r.baseline[i] == expect[i]);
            CHECK(r.baseline[i] <= f[i]);
        }
    }
}

TEST_CASE("top-hat baseline is idempotent") {
    Rng rng(43);
    std::vector<double> f(80);
    for (double& v : f) v = rng.uniform(0.0, 5.0);
    for (int w : {3, 4, 11}) {
        const BaselineResult once = tophat_baseline(f, w);
        const BaselineResult twice = tophat_baseline(once.baseline, w);
        for (std::size_t i = 0; i < f.size(); ++i) CHECK(twice.baseline[i] == once.baseline[i]);
    }
}

TEST_CASE("top-hat rejects windows larger than the signal") {
    CHECK_THROWS_AS(tophat_baseline(std::vector<double>(5, 1.0), 6), ValidationError);
    CHECK_THROWS_AS(tophat_baseline(std::vector<double>(5, 1.0), 0), ValidationError);
}

TEST_CASE("tic normalization: fixed cases") {
    const auto a = tic_normalize(std::vector<double>{1.0, 1.0, 1.0, 1.0});
    for (double v : a) CHECK(v == 0.25);

    const auto b = tic_normalize(std::vector<double>{2.0, 0.0, 0.0});
    CHECK(b[0] == 1.0);
    CHECK(b[1] == 0.0);
    CHECK(b[2] == 0.0);
}

TEST_CASE("tic normalization: output sums to 1 and is scale invariant") {
    Rng rng(47);
    std::vector<double> f(100);
    for (double& v : f) v = rng.uniform(0.0, 10.0);
    const auto n1 = tic_normalize(f);
    double sum = 0.0;
    for (double v : n1) sum += v;
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));

    std::vector<double> scaled = f;
    for (double& v : scaled) v *= 7.25;
    const auto n2 = tic_normalize(scaled);
    for (std::size_t i = 0; i < f.size(); ++i) {
        CHECK(n2[i] == doctest::Approx(n1[i]).epsilon(1e-12));
    }
}

TEST_CASE("tic normalization rejects spectra without positive content") {
    CHECK_THROWS_AS(tic_normalize(std::vector<double>(4, 0.0)), ValidationError);
    CHECK_THROWS_AS(tic_normalize(std::vector<double>{-1.0, -2.0}), ValidationError);
}

TEST_CASE("tic clamps negatives in the denominator only") {
    const auto n = tic_normalize(std::vector<double>{-1.0, 2.0, 2.0});
    CHECK(n[0] == doctest::Approx(-0.25).epsilon(1e-15));
    CHECK(n[1] == doctest::Approx(0.5).epsilon(1e-15));
}
