#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "framepick/synth.hpp"

using namespace framepick;

TEST_CASE("empty spec yields a zero spectrum and no truth") {
    SynthSpec spec;
    spec.length = 500;
    spec.n_peaks = 0;
    spec.noise_sigma0 = 0.0;
    spec.baseline_scale = 0.0;
    const SynthResult r = synth_spectrum(spec);
    CHECK(r.truth.empty());
    for (double v : r.spectrum.intensity) CHECK(v == 0.0);
    CHECK(r.spectrum.mz.size() == 500);
}

TEST_CASE("single clean peak peaks at the annotated center") {
    SynthSpec spec;
    spec.length = 400;
    spec.n_peaks = 1;
    spec.noise_sigma0 = 0.0;
    spec.seed = 9;
    const SynthResult r = synth_spectrum(spec);
    REQUIRE(r.truth.size() == 1);
    const auto it = std::max_element(r.spectrum.intensity.begin(), r.spectrum.intensity.end());
    const int argmax = static_cast<int>(it - r.spectrum.intensity.begin());
    CHECK(std::abs(argmax - r.truth[0].bin) <= 1);
}

TEST_CASE("generation is bitwise reproducible from the seed") {
    SynthSpec spec;
    spec.length = 2000;
    spec.n_peaks = 5;
    spec.noise_sigma0 = 0.7;
    spec.noise_decay = 1e-4;
    spec.baseline_amp = 3.0;
    spec.baseline_scale = 500.0;
    spec.seed = 1234;
    const SynthResult a = synth_spectrum(spec);
    const SynthResult b = synth_spectrum(spec);
    CHECK(a.spectrum.intensity == b.spectrum.intensity);
    CHECK(a.truth.size() == b.truth.size());
}

TEST_CASE("toggling the baseline changes nothing but the baseline term") {
    SynthSpec with;
    with.length = 1000;
    with.n_peaks = 3;
    with.noise_sigma0 = 0.5;
    with.baseline_amp = 10.0;
    with.baseline_scale = 300.0;
    with.seed = 77;
    SynthSpec without = with;
    without.baseline_amp = 0.0;

    const SynthResult rw = synth_spectrum(with);
    const SynthResult ro = synth_spectrum(without);
    REQUIRE(rw.truth.size() == ro.truth.size());
    for (std::size_t i = 0; i < rw.truth.size(); ++i) CHECK(rw.truth[i].bin == ro.truth[i].bin);
    for (std::size_t t = 0; t < rw.spectrum.intensity.size(); ++t) {
        const double expected = 10.0 * std::exp(-static_cast<double>(t) / 300.0);
        CHECK(rw.spectrum.intensity[t] - ro.spectrum.intensity[t] ==
              doctest::Approx(expected).epsilon(1e-12));
    }
}

TEST_CASE("ground truth count matches the requested peak count") {
    SynthSpec spec;
    spec.length = 15000;
    spec.n_peaks = 20;
    spec.noise_sigma0 = 1.0;
    spec.seed = 5;
    const SynthResult r = synth_spectrum(spec);
    CHECK(static_cast<int>(r.truth.size()) == 20);
    // separation invariant: centers at least 3 max widths apart
    for (std::size_t i = 1; i < r.truth.size(); ++i) {
        CHECK(r.truth[i].bin - r.truth[i - 1].bin >= 3.0 * spec.peak_width_max - 1.0);
    }
}

TEST_CASE("noise std decays along the axis when requested") {
    SynthSpec spec;
    spec.length = 20000;
    spec.n_peaks = 0;
    spec.noise_sigma0 = 2.0;
    spec.noise_decay = 1e-4;
    spec.seed = 99;
    const SynthResult r = synth_spectrum(spec);
    auto std_of = [&](std::size_t lo, std::size_t hi) {
        double s2 = 0.0;
        for (std::size_t t = lo; t < hi; ++t) s2 += r.spectrum.intensity[t] * r.spectrum.intensity[t];
        return std::sqrt(s2 / static_cast<double>(hi - lo));
    };
    const double first_decile = std_of(0, 2000);
    const double last_decile = std_of(18000, 20000);
    CHECK(first_decile > last_decile);
    // expected ratio exp(-0.1) vs exp(-1.9)
    CHECK(first_decile / last_decile == doctest::Approx(std::exp(1.8)).epsilon(0.1));
}

TEST_CASE("infeasible separation constraint is rejected") {
    SynthSpec spec;
    spec.length = 100;
    spec.n_peaks = 50;
    CHECK_THROWS_AS(synth_spectrum(spec), ValidationError);
}

TEST_CASE("phantom: clean peaks, correct membership, reproducible") {
    PhantomSpec spec;
    spec.rows = 12;
    spec.cols = 12;
    spec.spectrum_len = 200;
    spec.noise_sigma = 0.0;
    spec.peak_amplitude = 5.0;
    spec.shapes = {
        {ShapeKind::square, 3, 3, 2, 40},
        {ShapeKind::circle, 8, 8, 2, 120},
    };
    spec.seed = 3;
    const PhantomResult r = synth_phantom(spec);
    REQUIRE(r.occupancy_maps.size() == 2);

    for (int row = 0; row < 12; ++row) {
        for (int col = 0; col < 12; ++col) {
            const std::size_t flat = static_cast<std::size_t>(row) * 12 + static_cast<std::size_t>(col);
            const auto spot = r.grid.spot(row, col);
            const auto it = std::max_element(spot.begin(), spot.end());
            if (r.occupancy_maps[0][flat]) {
                CHECK(static_cast<int>(it - spot.begin()) == 40);
                CHECK(shape_contains(spec.shapes[0], row, col));
            } else if (r.occupancy_maps[1][flat]) {
                CHECK(static_cast<int>(it - spot.begin()) == 120);
            } else {
                CHECK(*it == 0.0);
            }
        }
    }

    const PhantomResult again = synth_phantom(spec);
    CHECK(again.grid.intensities == r.grid.intensities);
}

TEST_CASE("phantom with no shapes is pure noise") {
    PhantomSpec spec;
    spec.rows = 4;
    spec.cols = 4;
    spec.spectrum_len = 128;
    spec.noise_sigma = 1.0;
    spec.shapes = {};
    spec.seed = 8;
    const PhantomResult r = synth_phantom(spec);
    CHECK(r.occupancy_maps.empty());
    double energy = 0.0;
    for (double v : r.grid.intensities) energy += v * v;
    CHECK(energy > 0.0);
}

TEST_CASE("phantom rejects overlapping shapes and out-of-grid shapes") {
    PhantomSpec spec;
    spec.rows = 10;
    spec.cols = 10;
    spec.spectrum_len = 100;
    spec.shapes = {
        {ShapeKind::square, 4, 4, 2, 10},
        {ShapeKind::circle, 5, 5, 2, 20},
    };
    CHECK_THROWS_AS(synth_phantom(spec), ValidationError);

    spec.shapes = {{ShapeKind::square, 0, 0, 2, 10}};
    CHECK_THROWS_AS(synth_phantom(spec), ValidationError);

    spec.shapes = {
        {ShapeKind::square, 2, 2, 1, 10},
        {ShapeKind::circle, 7, 7, 1, 10}, // duplicate bin
    };
    CHECK_THROWS_AS(synth_phantom(spec), ValidationError);
}
