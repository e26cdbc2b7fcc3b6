#pragma once

#include <filesystem>
#include <iosfwd>

#include "hdd/grid.hpp"

namespace hdd {

// HDDG v1, little-endian, no padding:
//   "HDDG" | u16 version | u32 h, w, c | f64 lat_min, lat_max, lon_min, lon_max
//   | c x (u16 len, UTF-8 name) | f32 payload [c][h][w]
inline constexpr std::uint16_t kGridFormatVersion = 1;

void write_grid(const Grid& g, std::ostream& out);
void write_grid(const Grid& g, const std::filesystem::path& path);
Grid read_grid(std::istream& in);
Grid read_grid(const std::filesystem::path& path);

// Values after the f32 round trip; what read_grid(write_grid(g)) returns.
Grid quantize_to_f32(const Grid& g);

}  // namespace hdd
