#include "framepick/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include <zlib.h>

namespace framepick {

namespace {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

double parse_double(const std::string& s, const std::string& where) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw IoError(where + ": bad number '" + s + "'");
    }
}

void put_u32_le(std::string& out, std::uint32_t v) {
    out.push_back(static_cast<char>(v & 0xff));
    out.push_back(static_cast<char>((v >> 8) & 0xff));
    out.push_back(static_cast<char>((v >> 16) & 0xff));
    out.push_back(static_cast<char>((v >> 24) & 0xff));
}

std::uint32_t float_bits(float f) {
    std::uint32_t u;
    std::memcpy(&u, &f, sizeof(u));
    return u;
}

float bits_float(std::uint32_t u) {
    float f;
    std::memcpy(&f, &u, sizeof(f));
    return f;
}

} // namespace

// ---------------------------------------------------------------------------
// Spectrum CSV

Spectrum read_spectrum_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "' for reading");

    Spectrum s;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const std::size_t comma = line.find(',');
        if (comma == std::string::npos || line.find(',', comma + 1) != std::string::npos) {
            throw IoError(path + ": line " + std::to_string(line_no) +
                          ": expected exactly two comma-separated columns");
        }
        const std::string where = path + ": line " + std::to_string(line_no);
        const double mz = parse_double(line.substr(0, comma), where);
        const double intensity = parse_double(line.substr(comma + 1), where);
        if (!s.mz.empty() && !(mz > s.mz.back())) {
            throw IoError(path + ": line " + std::to_string(line_no) +
                          ": mz axis not strictly increasing");
        }
        s.mz.push_back(mz);
        s.intensity.push_back(intensity);
    }
    if (s.mz.empty()) throw IoError(path + ": empty spectrum");
    return s;
}

void write_spectrum_csv(const std::string& path, const Spectrum& spectrum) {
    spectrum.validate();
    std::ofstream out(path);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    for (std::size_t i = 0; i < spectrum.size(); ++i) {
        out << format_double(spectrum.mz[i]) << ',' << format_double(spectrum.intensity[i])
            << '\n';
    }
    if (!out) throw IoError("write failed for '" + path + "'");
}

// ---------------------------------------------------------------------------
// Dataset container

namespace {

constexpr const char* kMagic = "msgrid 1";

bool axis_is_linear(const std::vector<double>& mz) {
    if (mz.size() < 2) return false;
    const double start = mz[0];
    const double step = mz[1] - mz[0];
    for (std::size_t i = 0; i < mz.size(); ++i) {
        if (mz[i] != start + step * static_cast<double>(i)) return false;
    }
    return true;
}

} // namespace

void write_dataset(const std::string& path, const DatasetGrid& grid,
                   const std::string& config_json) {
    grid.validate();
    if (config_json.find('\n') != std::string::npos) {
        throw ValidationError("write_dataset: config must be a single line");
    }

    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path + "' for writing");

    out << kMagic << '\n';
    out << "dims " << grid.rows << ' ' << grid.cols << '\n';
    out << "length " << grid.axis_len() << '\n';
    if (axis_is_linear(grid.mz)) {
        out << "axis linear " << format_double(grid.mz[0]) << ' '
            << format_double(grid.mz[1] - grid.mz[0]) << '\n';
    } else {
        out << "axis explicit";
        for (double v : grid.mz) out << ' ' << format_double(v);
        out << '\n';
    }
    out << "occupancy ";
    for (std::uint8_t o : grid.occupancy) out << (o != 0 ? '1' : '0');
    out << '\n';
    out << "config " << (config_json.empty() ? "{}" : config_json) << '\n';

    std::string payload;
    payload.reserve(grid.intensities.size() * 4);
    for (double v : grid.intensities) {
        put_u32_le(payload, float_bits(static_cast<float>(v)));
    }
    out << "payload " << payload.size() << '\n';
    out << "end\n";
    out.write(payload.data(), static_cast<std::streamsize>(payload.size()));
    if (!out) throw IoError("write failed for '" + path + "'");
}

DatasetGrid read_dataset(const std::string& path, std::string* config_echo) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "' for reading");

    auto next_line = [&](const char* what) {
        std::string line;
        if (!std::getline(in, line)) throw IoError(path + ": truncated header (" + what + ")");
        return line;
    };
    auto expect_key = [&](const std::string& line, const std::string& key) {
        if (line.rfind(key + " ", 0) != 0) {
            throw IoError(path + ": expected '" + key + "' line, got '" + line + "'");
        }
        return line.substr(key.size() + 1);
    };

    if (next_line("magic") != kMagic) throw IoError(path + ": not a dataset container");

    DatasetGrid grid;
    {
        std::istringstream dims(expect_key(next_line("dims"), "dims"));
        if (!(dims >> grid.rows >> grid.cols) || grid.rows <= 0 || grid.cols <= 0) {
            throw IoError(path + ": bad dims");
        }
    }
    std::size_t axis_len = 0;
    {
        std::istringstream len(expect_key(next_line("length"), "length"));
        if (!(len >> axis_len) || axis_len == 0) throw IoError(path + ": bad length");
    }
    {
        std::istringstream axis(expect_key(next_line("axis"), "axis"));
        std::string encoding;
        axis >> encoding;
        if (encoding == "linear") {
            std::string a, b;
            if (!(axis >> a >> b)) throw IoError(path + ": bad linear axis");
            const double start = parse_double(a, path + ": axis");
            const double step = parse_double(b, path + ": axis");
            grid.mz.resize(axis_len);
            for (std::size_t i = 0; i < axis_len; ++i) {
                grid.mz[i] = start + step * static_cast<double>(i);
            }
        } else if (encoding == "explicit") {
            grid.mz.reserve(axis_len);
            std::string tok;
            while (axis >> tok) grid.mz.push_back(parse_double(tok, path + ": axis"));
            if (grid.mz.size() != axis_len) {
                throw IoError(path + ": axis value count does not match length");
            }
        } else {
            throw IoError(path + ": unknown axis encoding '" + encoding + "'");
        }
    }
    {
        const std::string occ = expect_key(next_line("occupancy"), "occupancy");
        if (occ.size() != grid.num_spots()) {
            throw IoError(path + ": occupancy size does not match dims");
        }
        grid.occupancy.resize(occ.size());
        for (std::size_t i = 0; i < occ.size(); ++i) {
            if (occ[i] != '0' && occ[i] != '1') throw IoError(path + ": bad occupancy flag");
            grid.occupancy[i] = occ[i] == '1' ? 1 : 0;
        }
    }
    const std::string config = expect_key(next_line("config"), "config");
    if (config_echo != nullptr) *config_echo = config;

    std::size_t payload_size = 0;
    {
        std::istringstream p(expect_key(next_line("payload"), "payload"));
        if (!(p >> payload_size)) throw IoError(path + ": bad payload size");
    }
    if (next_line("end") != "end") throw IoError(path + ": missing end marker");

    const std::size_t expected = grid.num_present() * axis_len * 4;
    if (payload_size != expected) {
        throw IoError(path + ": header/payload size mismatch (payload " +
                      std::to_string(payload_size) + ", expected " + std::to_string(expected) +
                      ")");
    }

    std::string payload(payload_size, '\0');
    in.read(payload.data(), static_cast<std::streamsize>(payload_size));
    if (static_cast<std::size_t>(in.gcount()) != payload_size) {
        throw IoError(path + ": truncated payload");
    }

    grid.intensities.resize(grid.num_present() * axis_len);
    for (std::size_t i = 0; i < grid.intensities.size(); ++i) {
        const auto* b = reinterpret_cast<const unsigned char*>(payload.data() + i * 4);
        const std::uint32_t u = static_cast<std::uint32_t>(b[0]) |
                                (static_cast<std::uint32_t>(b[1]) << 8) |
                                (static_cast<std::uint32_t>(b[2]) << 16) |
                                (static_cast<std::uint32_t>(b[3]) << 24);
        grid.intensities[i] = static_cast<double>(bits_float(u));
    }
    grid.validate();
    return grid;
}

// ---------------------------------------------------------------------------
// Rendering

std::vector<std::uint8_t> render_mz_image(const DatasetGrid& grid, int bin_lo, int bin_hi,
                                          double hotspot_quantile) {
    if (bin_lo < 0 || bin_hi >= static_cast<int>(grid.axis_len()) || bin_lo > bin_hi) {
        throw ValidationError("render: bin range [" + std::to_string(bin_lo) + ", " +
                              std::to_string(bin_hi) + "] is empty or out of bounds");
    }
    if (hotspot_quantile < 0.0 || hotspot_quantile >= 1.0) {
        throw ValidationError("render: hotspot_quantile must lie in [0, 1)");
    }

    std::vector<double> value(grid.num_spots(), 0.0);
    std::vector<double> present_values;
    present_values.reserve(grid.num_present());
    for (int r = 0; r < grid.rows; ++r) {
        for (int c = 0; c < grid.cols; ++c) {
            if (!grid.present(r, c)) continue;
            const auto spot = grid.spot(r, c);
            double v = spot[static_cast<std::size_t>(bin_lo)];
            for (int b = bin_lo + 1; b <= bin_hi; ++b) {
                v = std::max(v, spot[static_cast<std::size_t>(b)]);
            }
            value[static_cast<std::size_t>(r) * static_cast<std::size_t>(grid.cols) +
                  static_cast<std::size_t>(c)] = v;
            present_values.push_back(v);
        }
    }

    if (hotspot_quantile > 0.0 && !present_values.empty()) {
        // Nearest-rank quantile: the k-th smallest with k = ceil(q * n).
        std::vector<double> sorted = present_values;
        std::sort(sorted.begin(), sorted.end());
        const double q = 1.0 - hotspot_quantile;
        std::size_t k = static_cast<std::size_t>(
            std::ceil(q * static_cast<double>(sorted.size())));
        k = std::min(std::max<std::size_t>(k, 1), sorted.size());
        const double clip = sorted[k - 1];
        for (double& v : value) v = std::min(v, clip);
        for (double& v : present_values) v = std::min(v, clip);
    }

    double lo = 0.0;
    double hi = 0.0;
    if (!present_values.empty()) {
        lo = *std::min_element(present_values.begin(), present_values.end());
        hi = *std::max_element(present_values.begin(), present_values.end());
    }

    std::vector<std::uint8_t> pixels(grid.num_spots(), 0);
    if (hi > lo) {
        const double scale = 255.0 / (hi - lo);
        for (std::size_t i = 0; i < pixels.size(); ++i) {
            if (grid.occupancy[i] == 0) continue;
            pixels[i] = static_cast<std::uint8_t>(std::lround((value[i] - lo) * scale));
        }
    }
    return pixels;
}

void write_pgm(const std::string& path, int rows, int cols,
               const std::vector<std::uint8_t>& pixels, const std::string& comment) {
    if (pixels.size() != static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols)) {
        throw ValidationError("write_pgm: pixel count does not match dims");
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << "P5\n";
    if (!comment.empty()) out << "# " << comment << '\n';
    out << cols << ' ' << rows << "\n255\n";
    out.write(reinterpret_cast<const char*>(pixels.data()),
              static_cast<std::streamsize>(pixels.size()));
    if (!out) throw IoError("write failed for '" + path + "'");
}

namespace {

void png_chunk(std::ofstream& out, const char type[4], const std::string& data) {
    const std::uint32_t len = static_cast<std::uint32_t>(data.size());
    const auto be = [](std::uint32_t v) {
        std::string s(4, '\0');
        s[0] = static_cast<char>((v >> 24) & 0xff);
        s[1] = static_cast<char>((v >> 16) & 0xff);
        s[2] = static_cast<char>((v >> 8) & 0xff);
        s[3] = static_cast<char>(v & 0xff);
        return s;
    };
    out << be(len);
    out.write(type, 4);
    out.write(data.data(), static_cast<std::streamsize>(data.size()));
    std::uint32_t crc = static_cast<std::uint32_t>(crc32(0L, nullptr, 0));
    crc = static_cast<std::uint32_t>(
        crc32(crc, reinterpret_cast<const Bytef*>(type), 4));
    crc = static_cast<std::uint32_t>(
        crc32(crc, reinterpret_cast<const Bytef*>(data.data()),
              static_cast<uInt>(data.size())));
    out << be(crc);
}

} // namespace

void write_png(const std::string& path, int rows, int cols,
               const std::vector<std::uint8_t>& pixels) {
    if (pixels.size() != static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols)) {
        throw ValidationError("write_png: pixel count does not match dims");
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path + "' for writing");

    static const unsigned char sig[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
    out.write(reinterpret_cast<const char*>(sig), 8);

    std::string ihdr;
    const auto be32 = [&](std::uint32_t v) {
        ihdr.push_back(static_cast<char>((v >> 24) & 0xff));
        ihdr.push_back(static_cast<char>((v >> 16) & 0xff));
        ihdr.push_back(static_cast<char>((v >> 8) & 0xff));
        ihdr.push_back(static_cast<char>(v & 0xff));
    };
    be32(static_cast<std::uint32_t>(cols));
    be32(static_cast<std::uint32_t>(rows));
    ihdr.push_back(8); // bit depth
    ihdr.push_back(0); // grayscale
    ihdr.push_back(0); // compression
    ihdr.push_back(0); // filter
    ihdr.push_back(0); // no interlace
    png_chunk(out, "IHDR", ihdr);

    // Each scanline is prefixed with filter type 0 (none).
    std::string raw;
    raw.reserve(static_cast<std::size_t>(rows) * (static_cast<std::size_t>(cols) + 1));
    for (int r = 0; r < rows; ++r) {
        raw.push_back('\0');
        raw.append(reinterpret_cast<const char*>(pixels.data()) +
                       static_cast<std::ptrdiff_t>(r) * cols,
                   static_cast<std::size_t>(cols));
    }
    uLongf bound = compressBound(static_cast<uLong>(raw.size()));
    std::string compressed(bound, '\0');
    if (compress2(reinterpret_cast<Bytef*>(compressed.data()), &bound,
                  reinterpret_cast<const Bytef*>(raw.data()), static_cast<uLong>(raw.size()),
                  9) != Z_OK) {
        throw IoError("write_png: compression failed");
    }
    compressed.resize(bound);
    png_chunk(out, "IDAT", compressed);
    png_chunk(out, "IEND", "");
    if (!out) throw IoError("write failed for '" + path + "'");
}

} // namespace framepick
