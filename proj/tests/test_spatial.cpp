#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "framepick/spatial.hpp"

using namespace framepick;

namespace {

double weight_sum(const NeighborWeights& w) {
    double s = 0.0;
    for (double v : w.weights) s += v;
    return s;
}

} // namespace

TEST_CASE("average kernel of size 3 yields nine ninths") {
    const NeighborWeights w = kernel_weights({KernelKind::average, 3, 0.5, 1.0});
    REQUIRE(w.weights.size() == 9);
    for (double v : w.weights) CHECK(v == doctest::Approx(1.0 / 9.0).epsilon(1e-15));
    CHECK(weight_sum(w) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("size-1 kernel is the identity neighborhood") {
    for (KernelKind k : {KernelKind::average, KernelKind::gaussian, KernelKind::disk,
                         KernelKind::median}) {
        const NeighborWeights w = kernel_weights({k, 1, 0.5, 1.0});
        REQUIRE(w.weights.size() == 1);
        CHECK(w.weights[0] == 1.0);
        CHECK(w.offsets[0][0] == 0);
        CHECK(w.offsets[0][1] == 0);
    }
}

TEST_CASE("gaussian kernel concentrates on the center as sigma shrinks") {
    const NeighborWeights w = kernel_weights({KernelKind::gaussian, 3, 0.05, 1.0});
    double center = 0.0;
    for (std::size_t j = 0; j < w.offsets.size(); ++j) {
        if (w.offsets[j][0] == 0 && w.offsets[j][1] == 0) center = w.weights[j];
    }
    CHECK(center == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("gaussian weights follow the squared distance") {
    const double sigma = 0.8;
    const NeighborWeights w = kernel_weights({KernelKind::gaussian, 5, sigma, 1.0});
    CHECK(weight_sum(w) == doctest::Approx(1.0).epsilon(1e-12));
    // ratio of any two weights is exp(-(d1^2-d2^2)/(2 sigma^2))
    double w_center = 0.0;
    double w_diag = 0.0;
    for (std::size_t j = 0; j < w.offsets.size(); ++j) {
        if (w.offsets[j][0] == 0 && w.offsets[j][1] == 0) w_center = w.weights[j];
        if (w.offsets[j][0] == 1 && w.offsets[j][1] == 1) w_diag = w.weights[j];
    }
    CHECK(w_diag / w_center == doctest::Approx(std::exp(-2.0 / (2.0 * sigma * sigma))).epsilon(1e-12));
}

TEST_CASE("disk kernel keeps only offsets within the radius") {
    const NeighborWeights w = kernel_weights({KernelKind::disk, 5, 0.5, 1.0});
    // radius 1: center plus the four axis neighbors
    REQUIRE(w.weights.size() == 5);
    for (const auto& off : w.offsets) {
        CHECK(off[0] * off[0] + off[1] * off[1] <= 1);
    }
    for (double v : w.weights) CHECK(v == doctest::Approx(0.2).epsilon(1e-15));
}

TEST_CASE("kernel validation rejects even sizes and bad parameters") {
    CHECK_THROWS_AS(kernel_weights({KernelKind::average, 2, 0.5, 1.0}), ValidationError);
    CHECK_THROWS_AS(kernel_weights({KernelKind::average, 0, 0.5, 1.0}), ValidationError);
    CHECK_THROWS_AS(kernel_weights({KernelKind::gaussian, 3, 0.0, 1.0}), ValidationError);
    CHECK_THROWS_AS(kernel_weights({KernelKind::disk, 3, 0.5, 0.0}), ValidationError);
}

TEST_CASE("corner spot of a 3x3 average kernel keeps four neighbors at 1/4") {
    const ResolvedNeighborhood hood =
        resolve_neighbors({0, 0}, 4, 4, {KernelKind::average, 3, 0.5, 1.0});
    REQUIRE(hood.coords.size() == 4);
    for (double v : hood.weights.weights) CHECK(v == doctest::Approx(0.25).epsilon(1e-15));
    bool has_center = false;
    for (const auto& c : hood.coords) has_center |= c.row == 0 && c.col == 0;
    CHECK(has_center);
}

TEST_CASE("interior spot keeps the full kernel") {
    const ResolvedNeighborhood hood =
        resolve_neighbors({2, 2}, 5, 5, {KernelKind::average, 3, 0.5, 1.0});
    CHECK(hood.coords.size() == 9);
    CHECK(weight_sum(hood.weights) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("1x1 grid resolves to the center alone") {
    const ResolvedNeighborhood hood =
        resolve_neighbors({0, 0}, 1, 1, {KernelKind::gaussian, 3, 0.5, 1.0});
    REQUIRE(hood.coords.size() == 1);
    CHECK(hood.weights.weights[0] == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("absent spots are dropped like out-of-bounds ones") {
    // 3x3 grid with a hole right of the center
    std::vector<std::uint8_t> occupancy(9, 1);
    occupancy[5] = 0; // (1, 2)
    const ResolvedNeighborhood hood =
        resolve_neighbors({1, 1}, 3, 3, {KernelKind::average, 3, 0.5, 1.0}, occupancy);
    CHECK(hood.coords.size() == 8);
    CHECK(weight_sum(hood.weights) == doctest::Approx(1.0).epsilon(1e-12));
    for (const auto& c : hood.coords) CHECK(!(c.row == 1 && c.col == 2));
}

TEST_CASE("mirrored centers resolve to mirrored coordinate sets") {
    const NeighborhoodSpec spec{KernelKind::average, 3, 0.5, 1.0};
    const ResolvedNeighborhood left = resolve_neighbors({2, 0}, 5, 5, spec);
    const ResolvedNeighborhood right = resolve_neighbors({2, 4}, 5, 5, spec);
    REQUIRE(left.coords.size() == right.coords.size());
    // mirror: col -> 4 - col
    for (const auto& c : left.coords) {
        const bool found = std::any_of(right.coords.begin(), right.coords.end(),
                                       [&](const GridCoord& r) {
                                           return r.row == c.row && r.col == 4 - c.col;
                                       });
        CHECK(found);
    }
}

TEST_CASE("resolve_neighbors rejects centers outside the grid") {
    CHECK_THROWS_AS(resolve_neighbors({5, 0}, 5, 5, {KernelKind::average, 3, 0.5, 1.0}),
                    ValidationError);
}
