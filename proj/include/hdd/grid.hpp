#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace hdd {

struct Shape {
  int h = 1;
  int w = 1;

  std::size_t area() const noexcept { return static_cast<std::size_t>(h) * static_cast<std::size_t>(w); }
  friend bool operator==(const Shape&, const Shape&) = default;
};

struct GeoExtent {
  double lat_min = 0.0;
  double lat_max = 1.0;
  double lon_min = 0.0;
  double lon_max = 1.0;

  // (0, 1, 0, 1) marks synthetic unit-square data with uniform area weights.
  static GeoExtent unit() noexcept { return {}; }
  bool is_sentinel() const noexcept;
  void validate() const;

  friend bool operator==(const GeoExtent&, const GeoExtent&) = default;
};

// A c-channel 2-D field, layout [channel][row][col]. Immutable once built;
// every constructor validates shape, names and finiteness.
class Grid {
 public:
  Grid(Shape shape, std::vector<std::string> channel_names, GeoExtent extent, std::vector<double> data);

  // Unnamed channels get "c0", "c1", ...
  static Grid from_data(Shape shape, int channels, std::vector<double> data,
                        GeoExtent extent = GeoExtent::unit());
  static Grid constant(Shape shape, int channels, double value, GeoExtent extent = GeoExtent::unit());

  int height() const noexcept { return shape_.h; }
  int width() const noexcept { return shape_.w; }
  int channels() const noexcept { return static_cast<int>(names_.size()); }
  Shape shape() const noexcept { return shape_; }
  std::size_t plane_size() const noexcept { return shape_.area(); }
  std::size_t size() const noexcept { return data_.size(); }

  const std::vector<std::string>& channel_names() const noexcept { return names_; }
  const GeoExtent& extent() const noexcept { return extent_; }

  std::span<const double> values() const noexcept { return data_; }
  std::span<const double> channel(int c) const;
  double at(int c, int row, int col) const;

  // Same metadata, new payload (validated).
  Grid with_data(Shape shape, std::vector<double> data) const;
  Grid with_data(std::vector<double> data) const { return with_data(shape_, std::move(data)); }

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  Shape shape_;
  std::vector<std::string> names_;
  GeoExtent extent_;
  std::vector<double> data_;
};

// Bilinear, cell-center aligned, clamped edges. Identity when target == source.
Grid downsample(const Grid& g, Shape target);
Grid upsample(const Grid& g, Shape target);
// Either direction per axis; used where a schedule step may grow or shrink.
Grid resize(const Grid& g, Shape target);

// cos(latitude) at each row's cell-center latitude, [height][width] row-major.
std::vector<double> area_weights(const Grid& g);
std::vector<double> area_weights(Shape shape, const GeoExtent& extent);

}  // namespace hdd
