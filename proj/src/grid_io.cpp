#include "hdd/grid_io.hpp"

#include <cmath>
#include <fstream>
#include <limits>

#include "hdd/binio.hpp"

namespace hdd {

const char* to_string(ParseErrorKind kind) {
  switch (kind) {
    case ParseErrorKind::kBadMagic: return "bad magic";
    case ParseErrorKind::kVersionMismatch: return "version mismatch";
    case ParseErrorKind::kTruncated: return "truncated";
    case ParseErrorKind::kNonFinite: return "non-finite value";
    case ParseErrorKind::kMalformed: return "malformed";
    case ParseErrorKind::kIo: return "i/o error";
  }
  return "parse error";
}

void write_grid(const Grid& g, std::ostream& out) {
  out.write("HDDG", 4);
  binio::put<std::uint16_t>(out, kGridFormatVersion);
  binio::put<std::uint32_t>(out, static_cast<std::uint32_t>(g.height()));
  binio::put<std::uint32_t>(out, static_cast<std::uint32_t>(g.width()));
  binio::put<std::uint32_t>(out, static_cast<std::uint32_t>(g.channels()));
  const GeoExtent& e = g.extent();
  for (double v : {e.lat_min, e.lat_max, e.lon_min, e.lon_max}) binio::put<double>(out, v);
  for (const auto& name : g.channel_names()) {
    if (name.size() > std::numeric_limits<std::uint16_t>::max())
      throw InvalidArgument("write_grid: channel name too long");
    binio::put<std::uint16_t>(out, static_cast<std::uint16_t>(name.size()));
    out.write(name.data(), static_cast<std::streamsize>(name.size()));
  }
  for (double v : g.values()) {
    const float f = static_cast<float>(v);
    if (!std::isfinite(f)) throw InvalidArgument("write_grid: value overflows f32");
    binio::put<float>(out, f);
  }
  if (!out) throw ParseError(ParseErrorKind::kIo, "write_grid: stream failure");
}

void write_grid(const Grid& g, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError(ParseErrorKind::kIo, "cannot open " + path.string() + " for writing");
  write_grid(g, out);
}

Grid read_grid(std::istream& in) {
  const std::string magic = binio::get_bytes(in, 4, "magic");
  if (magic != "HDDG") throw ParseError(ParseErrorKind::kBadMagic, "expected \"HDDG\", found \"" + magic + "\"");
  const auto version = binio::get<std::uint16_t>(in, "version");
  if (version != kGridFormatVersion)
    throw ParseError(ParseErrorKind::kVersionMismatch, "unsupported HDDG version " + std::to_string(version));
  const auto h = binio::get<std::uint32_t>(in, "height");
  const auto w = binio::get<std::uint32_t>(in, "width");
  const auto c = binio::get<std::uint32_t>(in, "channels");
  if (h == 0 || w == 0 || c == 0 || h > (1u << 20) || w > (1u << 20) || c > (1u << 16))
    throw ParseError(ParseErrorKind::kMalformed, "implausible dimensions");
  GeoExtent e;
  e.lat_min = binio::get<double>(in, "extent");
  e.lat_max = binio::get<double>(in, "extent");
  e.lon_min = binio::get<double>(in, "extent");
  e.lon_max = binio::get<double>(in, "extent");
  std::vector<std::string> names;
  names.reserve(c);
  for (std::uint32_t i = 0; i < c; ++i) {
    const auto len = binio::get<std::uint16_t>(in, "channel name length");
    names.push_back(binio::get_bytes(in, len, "channel name"));
  }
  const std::size_t n = static_cast<std::size_t>(h) * w * c;
  std::vector<double> data(n);
  for (std::size_t i = 0; i < n; ++i) {
    const float f = binio::get<float>(in, "payload");
    if (!std::isfinite(f)) throw ParseError(ParseErrorKind::kNonFinite, "payload index " + std::to_string(i));
    data[i] = f;
  }
  try {
    return Grid(Shape{static_cast<int>(h), static_cast<int>(w)}, std::move(names), e, std::move(data));
  } catch (const InvalidArgument& ex) {
    throw ParseError(ParseErrorKind::kMalformed, ex.what());
  }
}

Grid read_grid(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(ParseErrorKind::kIo, "cannot open " + path.string());
  return read_grid(in);
}

Grid quantize_to_f32(const Grid& g) {
  std::vector<double> q(g.values().begin(), g.values().end());
  for (double& v : q) v = static_cast<float>(v);
  return g.with_data(std::move(q));
}

}  // namespace hdd
