#include "hdd/grid.hpp"

#include <cmath>
#include <numbers>
#include <set>

#include "hdd/error.hpp"
#include "hdd/kernels.hpp"

namespace hdd {

bool GeoExtent::is_sentinel() const noexcept {
  return lat_min == 0.0 && lat_max == 1.0 && lon_min == 0.0 && lon_max == 1.0;
}

void GeoExtent::validate() const {
  if (!(std::isfinite(lat_min) && std::isfinite(lat_max) && std::isfinite(lon_min) && std::isfinite(lon_max)))
    throw InvalidArgument("extent: non-finite bound");
  if (lat_min < -90.0 || lat_max > 90.0) throw InvalidArgument("extent: latitude outside [-90, 90]");
  if (!(lat_min < lat_max)) throw InvalidArgument("extent: lat_min must be < lat_max");
  if (lon_min < -180.0 || lon_min >= 360.0 || lon_max < -180.0 || lon_max >= 360.0)
    throw InvalidArgument("extent: longitude outside [-180, 360)");
}

Grid::Grid(Shape shape, std::vector<std::string> channel_names, GeoExtent extent, std::vector<double> data)
    : shape_(shape), names_(std::move(channel_names)), extent_(extent), data_(std::move(data)) {
  if (shape_.h < 1 || shape_.w < 1) throw InvalidArgument("grid: height and width must be positive");
  if (names_.empty()) throw InvalidArgument("grid: at least one channel required");
  std::set<std::string> seen;
  for (const auto& n : names_) {
    if (n.empty()) throw InvalidArgument("grid: empty channel name");
    if (!seen.insert(n).second) throw InvalidArgument("grid: duplicate channel name '" + n + "'");
  }
  extent_.validate();
  if (data_.size() != names_.size() * shape_.area())
    throw InvalidArgument("grid: data length " + std::to_string(data_.size()) + " != channels*height*width " +
                          std::to_string(names_.size() * shape_.area()));
  for (std::size_t i = 0; i < data_.size(); ++i)
    if (!std::isfinite(data_[i])) throw NonFiniteValue("grid: non-finite value at flat index " + std::to_string(i));
}

Grid Grid::from_data(Shape shape, int channels, std::vector<double> data, GeoExtent extent) {
  if (channels < 1) throw InvalidArgument("grid: at least one channel required");
  std::vector<std::string> names;
  for (int c = 0; c < channels; ++c) names.push_back("c" + std::to_string(c));
  return Grid(shape, std::move(names), extent, std::move(data));
}

Grid Grid::constant(Shape shape, int channels, double value, GeoExtent extent) {
  if (shape.h < 1 || shape.w < 1 || channels < 1) throw InvalidArgument("grid: shape and channels must be positive");
  return from_data(shape, channels, std::vector<double>(shape.area() * channels, value), extent);
}

std::span<const double> Grid::channel(int c) const {
  if (c < 0 || c >= channels()) throw InvalidArgument("grid: channel index out of range");
  return std::span<const double>(data_).subspan(c * plane_size(), plane_size());
}

double Grid::at(int c, int row, int col) const {
  if (c < 0 || c >= channels() || row < 0 || row >= shape_.h || col < 0 || col >= shape_.w)
    throw InvalidArgument("grid: index out of range");
  return data_[(static_cast<std::size_t>(c) * shape_.h + row) * shape_.w + col];
}

Grid Grid::with_data(Shape shape, std::vector<double> data) const {
  return Grid(shape, names_, extent_, std::move(data));
}

namespace {

Grid resample(const Grid& g, Shape target) {
  if (target == g.shape()) return g;
  std::vector<double> out(target.area() * g.channels());
  kernels::resample_bilinear(g.values(), g.channels(), g.height(), g.width(), out, target.h, target.w);
  return g.with_data(target, std::move(out));
}

void check_target(Shape target) {
  if (target.h < 1 || target.w < 1) throw InvalidArgument("resample: target shape must be positive");
}

}  // namespace

Grid downsample(const Grid& g, Shape target) {
  check_target(target);
  if (target.h > g.height() || target.w > g.width())
    throw InvalidArgument("downsample: target " + std::to_string(target.h) + "x" + std::to_string(target.w) +
                          " exceeds source " + std::to_string(g.height()) + "x" + std::to_string(g.width()));
  return resample(g, target);
}

Grid upsample(const Grid& g, Shape target) {
  check_target(target);
  if (target.h < g.height() || target.w < g.width())
    throw InvalidArgument("upsample: target " + std::to_string(target.h) + "x" + std::to_string(target.w) +
                          " smaller than source " + std::to_string(g.height()) + "x" + std::to_string(g.width()));
  return resample(g, target);
}

Grid resize(const Grid& g, Shape target) {
  check_target(target);
  return resample(g, target);
}

std::vector<double> area_weights(Shape shape, const GeoExtent& extent) {
  extent.validate();
  if (shape.h < 1 || shape.w < 1) throw InvalidArgument("area_weights: shape must be positive");
  std::vector<double> w(shape.area(), 1.0);
  if (extent.is_sentinel()) return w;
  const double dlat = (extent.lat_max - extent.lat_min) / shape.h;
  for (int r = 0; r < shape.h; ++r) {
    // Row 0 is the southern edge.
    const double lat = extent.lat_min + (r + 0.5) * dlat;
    const double c = std::cos(lat * std::numbers::pi / 180.0);
    if (!(c > 0.0)) throw InvalidArgument("area_weights: non-positive weight at row " + std::to_string(r));
    for (int col = 0; col < shape.w; ++col) w[static_cast<std::size_t>(r) * shape.w + col] = c;
  }
  return w;
}

std::vector<double> area_weights(const Grid& g) { return area_weights(g.shape(), g.extent()); }

}  // namespace hdd
