#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "framepick/spectrum.hpp"

namespace framepick {

/// Two-column headerless CSV "mz,intensity". Values are written with enough
/// digits to round-trip exactly.
Spectrum read_spectrum_csv(const std::string& path);
void write_spectrum_csv(const std::string& path, const Spectrum& spectrum);

/// Dataset container: a line-oriented text header (magic, dims, axis
/// encoding, occupancy, embedded run config, payload size) followed by the
/// intensity rows of all present spots as little-endian float32, row-major.
/// read(write(x)) is byte-exact.
DatasetGrid read_dataset(const std::string& path, std::string* config_echo = nullptr);
void write_dataset(const std::string& path, const DatasetGrid& grid,
                   const std::string& config_json);

/// 8-bit image of one m/z bin range: per present spot the maximum intensity
/// over [bin_lo, bin_hi]; values above the (1 - hotspot_quantile) quantile
/// are clipped to that quantile (hotspot removal), then min-max scaled to
/// 0..255 (an all-equal image maps to 0). Absent spots render as 0.
std::vector<std::uint8_t> render_mz_image(const DatasetGrid& grid, int bin_lo, int bin_hi,
                                          double hotspot_quantile);

void write_pgm(const std::string& path, int rows, int cols,
               const std::vector<std::uint8_t>& pixels, const std::string& comment = "");
void write_png(const std::string& path, int rows, int cols,
               const std::vector<std::uint8_t>& pixels);

} // namespace framepick
