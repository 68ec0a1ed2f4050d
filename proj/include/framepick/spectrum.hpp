#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "framepick/errors.hpp"

namespace framepick {

/// One spot's measurement: an m/z axis and matching intensities.
struct Spectrum {
    std::vector<double> mz;
    std::vector<double> intensity;

    std::size_t size() const { return mz.size(); }
    void validate() const;
};

/// Rectangular spatial arrangement of spectra sharing one m/z axis. Absent
/// spots (holes in the acquisition region) carry no intensity row; present
/// spots are stored row-major in acquisition order.
struct DatasetGrid {
    int rows = 0;
    int cols = 0;
    std::vector<double> mz;
    std::vector<std::uint8_t> occupancy;  // rows*cols flags, row-major
    std::vector<double> intensities;      // n_present * L, row-major spots

    std::size_t axis_len() const { return mz.size(); }
    std::size_t num_spots() const { return static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols); }
    std::size_t num_present() const;

    bool present(int r, int c) const {
        return occupancy[static_cast<std::size_t>(r) * static_cast<std::size_t>(cols) +
                         static_cast<std::size_t>(c)] != 0;
    }

    /// Index of spot (r, c) among present spots; throws if absent.
    std::size_t spot_index(int r, int c) const;

    std::span<const double> spot(int r, int c) const;
    std::span<double> spot(int r, int c);

    void validate() const;

    /// Fully occupied grid with zeroed intensities.
    static DatasetGrid dense(int rows, int cols, std::vector<double> axis);
};

} // namespace framepick
