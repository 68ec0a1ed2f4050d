#include "framepick/spectrum.hpp"

#include <cmath>
#include <string>

namespace framepick {

void Spectrum::validate() const {
    if (mz.size() != intensity.size()) {
        throw ValidationError("spectrum: mz and intensity lengths differ");
    }
    for (std::size_t i = 1; i < mz.size(); ++i) {
        if (!(mz[i] > mz[i - 1])) {
            throw ValidationError("spectrum: mz axis must be strictly increasing (position " +
                                  std::to_string(i) + ")");
        }
    }
    for (double v : intensity) {
        if (!std::isfinite(v)) throw ValidationError("spectrum: non-finite intensity");
    }
}

std::size_t DatasetGrid::num_present() const {
    std::size_t n = 0;
    for (std::uint8_t o : occupancy) n += o != 0 ? 1 : 0;
    return n;
}

std::size_t DatasetGrid::spot_index(int r, int c) const {
    const std::size_t flat = static_cast<std::size_t>(r) * static_cast<std::size_t>(cols) +
                             static_cast<std::size_t>(c);
    if (occupancy[flat] == 0) {
        throw ValidationError("dataset: spot (" + std::to_string(r) + "," + std::to_string(c) +
                              ") is absent");
    }
    std::size_t idx = 0;
    for (std::size_t i = 0; i < flat; ++i) idx += occupancy[i] != 0 ? 1 : 0;
    return idx;
}

std::span<const double> DatasetGrid::spot(int r, int c) const {
    const std::size_t l = axis_len();
    return {intensities.data() + spot_index(r, c) * l, l};
}

std::span<double> DatasetGrid::spot(int r, int c) {
    const std::size_t l = axis_len();
    return {intensities.data() + spot_index(r, c) * l, l};
}

void DatasetGrid::validate() const {
    if (rows <= 0 || cols <= 0) throw ValidationError("dataset: dims must be positive");
    if (occupancy.size() != num_spots()) throw ValidationError("dataset: occupancy size mismatch");
    if (intensities.size() != num_present() * axis_len()) {
        throw ValidationError("dataset: intensity payload size mismatch");
    }
    for (std::size_t i = 1; i < mz.size(); ++i) {
        if (!(mz[i] > mz[i - 1])) throw ValidationError("dataset: mz axis must be strictly increasing");
    }
}

DatasetGrid DatasetGrid::dense(int rows, int cols, std::vector<double> axis) {
    DatasetGrid g;
    g.rows = rows;
    g.cols = cols;
    g.mz = std::move(axis);
    g.occupancy.assign(static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols), 1);
    g.intensities.assign(g.num_spots() * g.axis_len(), 0.0);
    return g;
}

} // namespace framepick
