#include "framepick/spatial.hpp"

#include <cmath>

namespace framepick {

void NeighborhoodSpec::validate() const {
    if (size < 1 || size % 2 == 0) {
        throw ValidationError("neighborhood: size must be a positive odd integer");
    }
    if (kernel == KernelKind::gaussian && !(sigma > 0.0)) {
        throw ValidationError("neighborhood: gaussian sigma must be positive");
    }
    if (kernel == KernelKind::disk && !(radius > 0.0)) {
        throw ValidationError("neighborhood: disk radius must be positive");
    }
}

NeighborWeights kernel_weights(const NeighborhoodSpec& spec) {
    spec.validate();
    const int rad = spec.size / 2;

    NeighborWeights out;
    for (int dr = -rad; dr <= rad; ++dr) {
        for (int dc = -rad; dc <= rad; ++dc) {
            double w = 0.0;
            const double d2 = static_cast<double>(dr * dr + dc * dc);
            switch (spec.kernel) {
            case KernelKind::average:
            case KernelKind::median:
                w = 1.0;
                break;
            case KernelKind::gaussian:
                w = std::exp(-d2 / (2.0 * spec.sigma * spec.sigma));
                break;
            case KernelKind::disk:
                w = d2 <= spec.radius * spec.radius ? 1.0 : 0.0;
                break;
            }
            if (w > 0.0) {
                out.offsets.push_back({dr, dc});
                out.weights.push_back(w);
            }
        }
    }

    double sum = 0.0;
    for (double w : out.weights) sum += w;
    for (double& w : out.weights) w /= sum;
    return out;
}

ResolvedNeighborhood resolve_neighbors(GridCoord center, int rows, int cols,
                                       const NeighborhoodSpec& spec,
                                       std::span<const std::uint8_t> occupancy) {
    if (center.row < 0 || center.row >= rows || center.col < 0 || center.col >= cols) {
        throw ValidationError("resolve_neighbors: center outside the grid");
    }
    const NeighborWeights full = kernel_weights(spec);

    auto present = [&](int r, int c) {
        if (r < 0 || r >= rows || c < 0 || c >= cols) return false;
        if (occupancy.empty()) return true;
        return occupancy[static_cast<std::size_t>(r) * static_cast<std::size_t>(cols) +
                         static_cast<std::size_t>(c)] != 0;
    };

    ResolvedNeighborhood out;
    double sum = 0.0;
    for (std::size_t j = 0; j < full.offsets.size(); ++j) {
        const int r = center.row + full.offsets[j][0];
        const int c = center.col + full.offsets[j][1];
        const bool is_center = full.offsets[j][0] == 0 && full.offsets[j][1] == 0;
        if (!is_center && !present(r, c)) continue;
        out.coords.push_back({r, c});
        out.weights.offsets.push_back(full.offsets[j]);
        out.weights.weights.push_back(full.weights[j]);
        sum += full.weights[j];
    }
    for (double& w : out.weights.weights) w /= sum;
    return out;
}

} // namespace framepick
