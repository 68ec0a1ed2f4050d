#pragma once

#include <algorithm>
#include <cstddef>
#include <vector>

namespace framepick::detail {

// Median with lower/upper averaging for even sizes; reorders v. v must be
// non-empty.
inline double median_inplace(std::vector<double>& v) {
    const std::size_t mid = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
    double med = v[mid];
    if (v.size() % 2 == 0) {
        const double below =
            *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
        med = 0.5 * (below + med);
    }
    return med;
}

} // namespace framepick::detail
