#pragma once

#include <array>
#include <span>
#include <vector>

#include "framepick/frames.hpp"
#include "framepick/grid.hpp"

namespace framepick {

/// Estimated multiplier mask over the same index grid as the coefficients.
/// Entries are exactly 1 wherever the reference coefficient is trivial, and
/// never undershoot min(1, |c2|/|c1|): shrinkage only moves ratios toward 1.
struct MaskGrid {
    Grid<double> values;
};

/// Spatial neighborhood as integer (drow, dcol) offsets with one nonnegative
/// weight each; weights sum to 1 after boundary renormalization.
struct NeighborWeights {
    std::vector<std::array<int, 2>> offsets;
    std::vector<double> weights;
};

enum class Reducer { linear, median };

/// Reference coefficients with magnitude at or below this threshold are
/// treated as trivial (mask forced to 1): 1e-12 times the grid's maximum
/// magnitude, floored at 1e-300 so an all-zero grid stays trivial.
double coefficient_epsilon(const CoefficientGrid& c);

/// Minimizer of  1/2 * || |c2| - m .* |c1| ||^2  +  lambda * || m - 1 ||_1,
/// evaluated elementwise in closed form. With y = |c2|/|c1| and the threshold
/// thr = lambda/|c1|^2:
///     m = y - thr   if y - 1 >  thr
///     m = y + thr   if y - 1 < -thr
///     m = 1         otherwise (and wherever |c1| is trivial).
/// The branch structure makes "m == 1 iff |y - 1| <= thr" hold exactly.
MaskGrid estimate_mask(const CoefficientGrid& c1, const CoefficientGrid& c2, double lambda);

/// Spatially weighted variant: the deviation term still comes from the center
/// ratio y = |c2|/|c1|, but the shrinkage factor uses neighbor aggregates
///     ytilde = sum_j w_j |c2_j|/|c1_j|   and   c1tilde = sum_j w_j c1_j,
/// so m = (y - 1) * max(0, 1 - lambda / (|c1tilde|^2 |ytilde - 1|)) + 1.
/// The center grids must appear among the neighbors. With the median reducer
/// the aggregates are unweighted elementwise medians (componentwise for the
/// complex c1tilde). Per-neighbor ratios with trivial |c1_j| count as 1.
MaskGrid estimate_mask_spatial(const CoefficientGrid& c1, const CoefficientGrid& c2,
                               std::span<const CoefficientGrid* const> neighbor_c1,
                               std::span<const CoefficientGrid* const> neighbor_c2,
                               const NeighborWeights& weights, double lambda,
                               Reducer reducer = Reducer::linear);

/// Objective value of the minimization problem above for a candidate mask.
double mask_objective(const CoefficientGrid& c1, const CoefficientGrid& c2, const MaskGrid& mask,
                      double lambda);

} // namespace framepick
