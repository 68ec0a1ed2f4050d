#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "framepick/multiplier.hpp"

namespace framepick {

enum class KernelKind { average, gaussian, disk, median };

/// Square window of odd side length `size` around a grid spot. `sigma` is
/// used by the gaussian kernel, `radius` by the disk kernel. The median
/// kernel marks that downstream mask estimation reduces neighbors by
/// elementwise medians instead of weighted sums.
struct NeighborhoodSpec {
    KernelKind kernel = KernelKind::average;
    int size = 3;
    double sigma = 0.5;
    double radius = 1.0;

    void validate() const;
    Reducer reducer() const { return kernel == KernelKind::median ? Reducer::median : Reducer::linear; }
};

struct GridCoord {
    int row = 0;
    int col = 0;
};

struct ResolvedNeighborhood {
    std::vector<GridCoord> coords;
    NeighborWeights weights;
};

/// Full-window weights for the kernel, normalized to sum 1. average and
/// median give uniform weights; gaussian uses exp(-(dx^2+dy^2)/(2 sigma^2));
/// disk is uniform over offsets with dx^2+dy^2 <= radius^2.
NeighborWeights kernel_weights(const NeighborhoodSpec& spec);

/// Drops offsets that fall outside the rows x cols grid (or onto absent
/// spots, when an occupancy mask is given) and renormalizes the remaining
/// weights to sum 1. The center spot is always part of the result.
ResolvedNeighborhood resolve_neighbors(GridCoord center, int rows, int cols,
                                       const NeighborhoodSpec& spec,
                                       std::span<const std::uint8_t> occupancy = {});

} // namespace framepick
