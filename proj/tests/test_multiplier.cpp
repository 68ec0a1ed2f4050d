#include <doctest.h>

#include <cmath>
#include <vector>

#include "framepick/multiplier.hpp"
#include "framepick/rng.hpp"

using namespace framepick;

namespace {

CoefficientGrid scalar_grid(double magnitude) {
    CoefficientGrid g;
    g.values = Grid<cplx>(1, 1, cplx(magnitude, 0.0));
    return g;
}

CoefficientGrid random_grid(Rng& rng, std::size_t rows, std::size_t cols, double scale = 1.0) {
    CoefficientGrid g;
    g.values = Grid<cplx>(rows, cols);
    for (std::size_t i = 0; i < g.values.size(); ++i) {
        g.values[i] = cplx(scale * rng.normal(), scale * rng.normal());
    }
    return g;
}

double scalar_objective(double c1, double c2, double m, double lambda) {
    const double r = c2 - m * c1;
    return 0.5 * r * r + lambda * std::abs(m - 1.0);
}

// Minimum of the scalar objective over the grid {lo + j*step}. The objective
// is strictly convex in m, so a ternary search over grid indices finds the
// grid minimum without the closed form.
double grid_search_min(double c1, double c2, double lambda, double lo, double hi,
                       double step = 1e-6) {
    const auto value = [&](long j) { return scalar_objective(c1, c2, lo + step * j, lambda); };
    long a = 0;
    long b = static_cast<long>(std::floor((hi - lo) / step));
    while (b - a > 2) {
        const long m1 = a + (b - a) / 3;
        const long m2 = b - (b - a) / 3;
        if (value(m1) < value(m2)) {
            b = m2;
        } else {
            a = m1;
        }
    }
    double best = value(a);
    for (long j = a + 1; j <= b; ++j) best = std::min(best, value(j));
    return best;
}

// Exhaustive reference for the ternary search itself (small ranges only).
double grid_search_min_dense(double c1, double c2, double lambda, double lo, double hi,
                             double step = 1e-6) {
    double best = 1e300;
    const long n = static_cast<long>(std::floor((hi - lo) / step));
    for (long j = 0; j <= n; ++j) {
        best = std::min(best, scalar_objective(c1, c2, lo + step * j, lambda));
    }
    return best;
}

double mask_scalar(double c1, double c2, double lambda) {
    const MaskGrid m = estimate_mask(scalar_grid(c1), scalar_grid(c2), lambda);
    return m.values[0];
}

} // namespace

TEST_CASE("mask is 1 wherever the magnitudes agree") {
    Rng rng(3);
    const CoefficientGrid c1 = random_grid(rng, 4, 5);
    CoefficientGrid c2 = c1;
    // change phases, keep magnitudes
    for (std::size_t i = 0; i < c2.values.size(); ++i) {
        const double mag = std::abs(c2.values[i]);
        c2.values[i] = cplx(0.0, -mag);
    }
    const MaskGrid m = estimate_mask(c1, c2, 0.3);
    for (std::size_t i = 0; i < m.values.size(); ++i) CHECK(m.values[i] == 1.0);
}

TEST_CASE("scalar closed form: |c1|=2, |c2|=4, lambda=1 gives 1.75") {
    const double m = mask_scalar(2.0, 4.0, 1.0);
    CHECK(m == doctest::Approx(1.75).epsilon(1e-15));
    // dense grid-search oracle over [0, 3]
    const double grid_min = grid_search_min_dense(2.0, 4.0, 1.0, 0.0, 3.0);
    CHECK(scalar_objective(2.0, 4.0, m, 1.0) <= grid_min + 1e-9);
}

TEST_CASE("scalar closed form: threshold above deviation shrinks fully to 1") {
    CHECK(mask_scalar(2.0, 3.0, 10.0) == 1.0);
}

TEST_CASE("trivial reference coefficient forces mask 1") {
    CHECK(mask_scalar(0.0, 5.0, 0.1) == 1.0);
    // below the relative epsilon of the grid's maximum
    CoefficientGrid c1;
    c1.values = Grid<cplx>(1, 2);
    c1.values[0] = cplx(1.0, 0.0);
    c1.values[1] = cplx(1e-14, 0.0);
    CoefficientGrid c2;
    c2.values = Grid<cplx>(1, 2, cplx(5.0, 0.0));
    const MaskGrid m = estimate_mask(c1, c2, 1e-6);
    CHECK(m.values[1] == 1.0);
    CHECK(m.values[0] > 1.0);
}

TEST_CASE("estimate_mask input validation") {
    CHECK_THROWS_AS(estimate_mask(scalar_grid(1.0), scalar_grid(1.0), 0.0), ValidationError);
    CHECK_THROWS_AS(estimate_mask(scalar_grid(1.0), scalar_grid(1.0), -1.0), ValidationError);
    CoefficientGrid wide;
    wide.values = Grid<cplx>(1, 2);
    CHECK_THROWS_AS(estimate_mask(scalar_grid(1.0), wide, 1.0), ValidationError);
}

TEST_CASE("ternary grid oracle agrees with dense enumeration") {
    Rng rng(5);
    for (int rep = 0; rep < 20; ++rep) {
        const double c1 = rng.uniform(0.2, 3.0);
        const double c2 = rng.uniform(0.0, 3.0);
        const double lambda = rng.uniform(1e-3, 2.0);
        const double t = grid_search_min(c1, c2, lambda, 0.0, 3.0, 1e-4);
        const double d = grid_search_min_dense(c1, c2, lambda, 0.0, 3.0, 1e-4);
        CHECK(t == doctest::Approx(d).epsilon(1e-12));
    }
}

TEST_CASE("closed form attains the grid-search minimum") {
    Rng rng(7);
    for (int rep = 0; rep < 500; ++rep) {
        const double c1 = std::exp(rng.uniform(std::log(1e-6), std::log(10.0)));
        const double c2 = rng.uniform(0.0, 10.0);
        const double lambda = std::exp(rng.uniform(std::log(1e-6), std::log(10.0)));
        const double y = c2 / c1;
        const double lo = std::min(1.0, y) - 1e-3;
        const double hi = std::max(1.0, y) + 1e-3;
        const double grid_min = grid_search_min(c1, c2, lambda, lo, hi);
        const double m = mask_scalar(c1, c2, lambda);
        CHECK(scalar_objective(c1, c2, m, lambda) <= grid_min + 1e-9);
    }
}

TEST_CASE("shrinkage moves the ratio toward 1 and never past it") {
    Rng rng(11);
    for (int rep = 0; rep < 50; ++rep) {
        const CoefficientGrid c1 = random_grid(rng, 6, 6);
        const CoefficientGrid c2 = random_grid(rng, 6, 6, 2.0);
        const double lambda = std::exp(rng.uniform(std::log(1e-4), std::log(10.0)));
        const MaskGrid m = estimate_mask(c1, c2, lambda);
        for (std::size_t i = 0; i < m.values.size(); ++i) {
            const double a1 = std::abs(c1.values[i]);
            if (a1 <= coefficient_epsilon(c1)) continue;
            const double y = std::abs(c2.values[i]) / a1;
            CHECK(std::abs(m.values[i] - 1.0) <= std::abs(y - 1.0) + 1e-15);
            if (m.values[i] != 1.0) {
                CHECK(std::signbit(m.values[i] - 1.0) == std::signbit(y - 1.0));
            }
            CHECK(m.values[i] >= std::min(1.0, y) - 1e-15);
        }
    }
}

TEST_CASE("larger lambda never increases the mask deviation") {
    Rng rng(13);
    const CoefficientGrid c1 = random_grid(rng, 5, 8);
    const CoefficientGrid c2 = random_grid(rng, 5, 8, 3.0);
    const MaskGrid m1 = estimate_mask(c1, c2, 0.05);
    const MaskGrid m2 = estimate_mask(c1, c2, 0.5);
    for (std::size_t i = 0; i < m1.values.size(); ++i) {
        CHECK(std::abs(m1.values[i] - 1.0) >= std::abs(m2.values[i] - 1.0) - 1e-15);
    }
}

TEST_CASE("mask equals 1 exactly iff the deviation is within the threshold") {
    Rng rng(17);
    for (int rep = 0; rep < 2000; ++rep) {
        const double a1 = rng.uniform(0.5, 2.0);
        const double lambda = rng.uniform(0.1, 2.0);
        const double thr = lambda / (a1 * a1);
        double y;
        switch (rep % 6) {
        case 0: y = 1.0 + thr; break;                  // boundary, inside
        case 1: y = 1.0 - thr; break;                  // boundary, inside
        case 2: y = 1.0 + thr * (1.0 + 1e-12); break;  // just outside
        case 3: y = 1.0 - thr * (1.0 + 1e-12); break;  // just outside
        default: y = rng.uniform(0.0, 3.0); break;
        }
        const double c2 = y * a1;
        const MaskGrid m = estimate_mask(scalar_grid(a1), scalar_grid(c2), lambda);
        const double y_eff = std::abs(cplx(c2, 0.0)) / std::abs(cplx(a1, 0.0));
        const bool inside = std::abs(y_eff - 1.0) <= lambda / (a1 * a1);
        CHECK((m.values[0] == 1.0) == inside);
    }
}

TEST_CASE("objective value: fixed cases") {
    const CoefficientGrid c = scalar_grid(2.0);
    MaskGrid one;
    one.values = Grid<double>(1, 1, 1.0);
    CHECK(mask_objective(c, c, one, 0.7) == 0.0);

    const CoefficientGrid c2 = scalar_grid(5.0);
    CHECK(mask_objective(c, c2, one, 0.7) == doctest::Approx(0.5 * 3.0 * 3.0).epsilon(1e-15));
}

TEST_CASE("estimated mask beats random candidate masks") {
    Rng rng(19);
    const CoefficientGrid c1 = random_grid(rng, 4, 4);
    const CoefficientGrid c2 = random_grid(rng, 4, 4, 2.0);
    const double lambda = 0.2;
    const MaskGrid best = estimate_mask(c1, c2, lambda);
    const double best_obj = mask_objective(c1, c2, best, lambda);
    MaskGrid cand;
    cand.values = Grid<double>(4, 4);
    for (int rep = 0; rep < 100000; ++rep) {
        for (std::size_t i = 0; i < cand.values.size(); ++i) {
            // mix perturbations of the optimum with wide uniform draws
            cand.values[i] = rep % 2 == 0 ? best.values[i] + 0.01 * rng.normal()
                                          : rng.uniform(-1.0, 4.0);
        }
        CHECK(best_obj <= mask_objective(c1, c2, cand, lambda) + 1e-12);
    }
}

// ---------------------------------------------------------------------------
// spatial variant

TEST_CASE("spatial mask with the trivial neighborhood is bitwise the basic mask") {
    Rng rng(23);
    const CoefficientGrid c1 = random_grid(rng, 5, 5);
    const CoefficientGrid c2 = random_grid(rng, 5, 5, 2.0);
    NeighborWeights w;
    w.offsets = {{0, 0}};
    w.weights = {1.0};
    const CoefficientGrid* n1[] = {&c1};
    const CoefficientGrid* n2[] = {&c2};
    const MaskGrid basic = estimate_mask(c1, c2, 0.15);
    const MaskGrid spatial = estimate_mask_spatial(c1, c2, n1, n2, w, 0.15);
    REQUIRE(spatial.values.same_shape(basic.values));
    for (std::size_t i = 0; i < basic.values.size(); ++i) {
        CHECK(spatial.values[i] == basic.values[i]);
    }
}

TEST_CASE("spatial mask with identical neighbors matches the basic mask closely") {
    Rng rng(29);
    const CoefficientGrid c1 = random_grid(rng, 5, 5);
    const CoefficientGrid c2 = random_grid(rng, 5, 5, 2.0);
    NeighborWeights w;
    w.offsets = {{0, 0}, {0, 1}, {1, 0}};
    w.weights = {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
    const CoefficientGrid* n1[] = {&c1, &c1, &c1};
    const CoefficientGrid* n2[] = {&c2, &c2, &c2};
    const MaskGrid basic = estimate_mask(c1, c2, 0.15);
    const MaskGrid spatial = estimate_mask_spatial(c1, c2, n1, n2, w, 0.15);
    for (std::size_t i = 0; i < basic.values.size(); ++i) {
        CHECK(spatial.values[i] == doctest::Approx(basic.values[i]).epsilon(1e-9));
    }
}

TEST_CASE("flat neighbors damp an isolated center deviation") {
    // center: y = 2 with |c1| = 1; two flat neighbors with ratio 1
    const CoefficientGrid center_c1 = scalar_grid(1.0);
    const CoefficientGrid center_c2 = scalar_grid(2.0);
    const CoefficientGrid flat = scalar_grid(1.0);
    NeighborWeights w;
    w.offsets = {{0, 0}, {0, 1}, {0, -1}};
    w.weights = {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
    const CoefficientGrid* n1[] = {&center_c1, &flat, &flat};
    const CoefficientGrid* n2[] = {&center_c2, &flat, &flat};

    const double lambda = 0.6;
    // ytilde = 4/3, |c1tilde|^2 = 1 -> factor = 1 - 0.6/(1/3) < 0 -> mask 1
    const MaskGrid spatial = estimate_mask_spatial(center_c1, center_c2, n1, n2, w, lambda);
    CHECK(spatial.values[0] == 1.0);
    // the basic estimator keeps the deviation: 1 + 1 * (1 - 0.6) = 1.4
    const MaskGrid basic = estimate_mask(center_c1, center_c2, lambda);
    CHECK(basic.values[0] == doctest::Approx(1.4).epsilon(1e-15));
}

TEST_CASE("median reducer resists a single outlier neighbor") {
    const CoefficientGrid center_c1 = scalar_grid(1.0);
    const CoefficientGrid center_c2 = scalar_grid(2.0);
    const CoefficientGrid flat = scalar_grid(1.0);
    CoefficientGrid outlier_c1 = scalar_grid(1.0);
    CoefficientGrid outlier_c2 = scalar_grid(100.0);
    NeighborWeights w;
    w.offsets = {{0, 0}, {0, 1}, {0, -1}};
    w.weights = {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
    const CoefficientGrid* n1[] = {&center_c1, &flat, &outlier_c1};
    const CoefficientGrid* n2[] = {&center_c2, &flat, &outlier_c2};

    // linear aggregate sees ytilde = (2 + 1 + 100)/3; the median sees 2
    const MaskGrid lin = estimate_mask_spatial(center_c1, center_c2, n1, n2, w, 0.6,
                                               Reducer::linear);
    const MaskGrid med = estimate_mask_spatial(center_c1, center_c2, n1, n2, w, 0.6,
                                               Reducer::median);
    // median: ytilde = 2, c1tilde = 1 -> factor = 1 - 0.6/1 = 0.4 -> m = 1.4
    CHECK(med.values[0] == doctest::Approx(1.4).epsilon(1e-12));
    CHECK(lin.values[0] > med.values[0]); // weaker shrinkage under the outlier
}

TEST_CASE("spatial estimator validates the neighbor lists") {
    const CoefficientGrid a = scalar_grid(1.0);
    NeighborWeights w;
    w.offsets = {{0, 0}};
    w.weights = {0.5}; // does not sum to 1
    const CoefficientGrid* n1[] = {&a};
    const CoefficientGrid* n2[] = {&a};
    CHECK_THROWS_AS(estimate_mask_spatial(a, a, n1, n2, w, 1.0), ValidationError);

    NeighborWeights w2;
    w2.offsets = {{0, 0}, {0, 1}};
    w2.weights = {0.5, 0.5}; // two weights, one neighbor
    CHECK_THROWS_AS(estimate_mask_spatial(a, a, n1, n2, w2, 1.0), ValidationError);
}
