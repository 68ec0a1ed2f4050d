#include "framepick/multiplier.hpp"

#include <algorithm>
#include <cmath>

#include "stats.hpp"

namespace framepick {

namespace {

void check_lambda(double lambda) {
    if (!(lambda > 0.0)) throw ValidationError("estimate_mask: lambda must be positive");
}

} // namespace

double coefficient_epsilon(const CoefficientGrid& c) {
    double max_mag = 0.0;
    for (std::size_t i = 0; i < c.values.size(); ++i) {
        max_mag = std::max(max_mag, std::abs(c.values[i]));
    }
    return 1e-12 * std::max(max_mag, 1e-300);
}

MaskGrid estimate_mask(const CoefficientGrid& c1, const CoefficientGrid& c2, double lambda) {
    check_lambda(lambda);
    require_same_shape(c1.values.rows(), c1.values.cols(), c2.values.rows(), c2.values.cols(),
                       "estimate_mask");

    const double eps = coefficient_epsilon(c1);
    MaskGrid mask;
    mask.values = Grid<double>(c1.values.rows(), c1.values.cols(), 1.0);

    for (std::size_t i = 0; i < c1.values.size(); ++i) {
        const double m1 = std::abs(c1.values[i]);
        if (m1 <= eps) continue; // trivial reference -> mask stays 1
        const double m2 = std::abs(c2.values[i]);
        const double y = m2 / m1;
        const double dev = y - 1.0;
        const double thr = lambda / (m1 * m1);
        if (dev > thr) {
            mask.values[i] = y - thr;
        } else if (dev < -thr) {
            mask.values[i] = y + thr;
        }
    }
    return mask;
}

MaskGrid estimate_mask_spatial(const CoefficientGrid& c1, const CoefficientGrid& c2,
                               std::span<const CoefficientGrid* const> neighbor_c1,
                               std::span<const CoefficientGrid* const> neighbor_c2,
                               const NeighborWeights& weights, double lambda, Reducer reducer) {
    check_lambda(lambda);
    require_same_shape(c1.values.rows(), c1.values.cols(), c2.values.rows(), c2.values.cols(),
                       "estimate_mask_spatial");
    const std::size_t n = neighbor_c1.size();
    if (n == 0 || neighbor_c2.size() != n || weights.weights.size() != n) {
        throw ValidationError("estimate_mask_spatial: neighbor/weight count mismatch");
    }
    for (std::size_t j = 0; j < n; ++j) {
        require_same_shape(c1.values.rows(), c1.values.cols(), neighbor_c1[j]->values.rows(),
                           neighbor_c1[j]->values.cols(), "estimate_mask_spatial (neighbor c1)");
        require_same_shape(c1.values.rows(), c1.values.cols(), neighbor_c2[j]->values.rows(),
                           neighbor_c2[j]->values.cols(), "estimate_mask_spatial (neighbor c2)");
    }
    double wsum = 0.0;
    for (double w : weights.weights) wsum += w;
    if (std::abs(wsum - 1.0) > 1e-9) {
        throw ValidationError("estimate_mask_spatial: weights must sum to 1");
    }

    // A single full-weight neighbor is the center itself; the aggregates
    // collapse and the basic estimator applies verbatim.
    if (n == 1 && weights.weights[0] == 1.0) return estimate_mask(c1, c2, lambda);

    const double eps_center = coefficient_epsilon(c1);
    std::vector<double> eps_neighbor(n);
    for (std::size_t j = 0; j < n; ++j) eps_neighbor[j] = coefficient_epsilon(*neighbor_c1[j]);

    MaskGrid mask;
    mask.values = Grid<double>(c1.values.rows(), c1.values.cols(), 1.0);

    std::vector<double> ratios(n);
    std::vector<double> res(n), ims(n);

    for (std::size_t i = 0; i < c1.values.size(); ++i) {
        const double m1 = std::abs(c1.values[i]);
        if (m1 <= eps_center) continue;
        const double m2 = std::abs(c2.values[i]);
        const double y = m2 / m1;

        for (std::size_t j = 0; j < n; ++j) {
            const double a1 = std::abs(neighbor_c1[j]->values[i]);
            ratios[j] = a1 <= eps_neighbor[j] ? 1.0 : std::abs(neighbor_c2[j]->values[i]) / a1;
        }

        double ytilde;
        cplx c1tilde;
        if (reducer == Reducer::linear) {
            ytilde = 0.0;
            c1tilde = cplx(0.0, 0.0);
            for (std::size_t j = 0; j < n; ++j) {
                ytilde += weights.weights[j] * ratios[j];
                c1tilde += weights.weights[j] * neighbor_c1[j]->values[i];
            }
        } else {
            for (std::size_t j = 0; j < n; ++j) {
                res[j] = neighbor_c1[j]->values[i].real();
                ims[j] = neighbor_c1[j]->values[i].imag();
            }
            ytilde = detail::median_inplace(ratios);
            c1tilde = cplx(detail::median_inplace(res), detail::median_inplace(ims));
        }

        const double at = std::abs(c1tilde);
        const double denom = (at * at) * std::abs(ytilde - 1.0);
        if (denom <= 0.0) continue; // infinite shrinkage threshold -> mask 1
        const double factor = 1.0 - lambda / denom;
        if (factor <= 0.0) continue;
        mask.values[i] = 1.0 + (y - 1.0) * factor;
    }
    return mask;
}

double mask_objective(const CoefficientGrid& c1, const CoefficientGrid& c2, const MaskGrid& mask,
                      double lambda) {
    require_same_shape(c1.values.rows(), c1.values.cols(), c2.values.rows(), c2.values.cols(),
                       "mask_objective");
    require_same_shape(c1.values.rows(), c1.values.cols(), mask.values.rows(), mask.values.cols(),
                       "mask_objective (mask)");
    double quad = 0.0;
    double l1 = 0.0;
    for (std::size_t i = 0; i < c1.values.size(); ++i) {
        const double r = std::abs(c2.values[i]) - mask.values[i] * std::abs(c1.values[i]);
        quad += r * r;
        l1 += std::abs(mask.values[i] - 1.0);
    }
    return 0.5 * quad + lambda * l1;
}

} // namespace framepick
