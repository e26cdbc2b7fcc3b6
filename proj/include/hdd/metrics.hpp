#pragma once

#include <array>
#include <optional>
#include <span>
#include <vector>

#include "hdd/grid.hpp"

namespace hdd {

double rmse(const Grid& pred, const Grid& obs);
// data_range defaults to max(obs) - min(obs). Capped at 200 dB.
double psnr(const Grid& pred, const Grid& obs, std::optional<double> data_range = std::nullopt);
inline constexpr double kPsnrCap = 200.0;

// Energy-form ensemble CRPS per pixel, then weighted over cells (uniform when
// weights is empty). Pairs include i == j.
double crps(std::span<const Grid> ensemble, const Grid& obs, std::span<const double> weights = {});

// Weights are per cell of one plane and reused for every channel.
double mape(const Grid& pred_annual, const Grid& obs_annual, std::span<const double> weights);
double scor(const Grid& pred_annual, const Grid& obs_annual, std::span<const double> weights);

// Mean rainfall per calendar month, layout [12][height][width].
class MonthlyClimatology {
 public:
  MonthlyClimatology(Shape shape, std::vector<double> values, GeoExtent extent = GeoExtent::unit());
  // A 12-channel grid (channel names are not checked) or twelve 1-channel grids.
  static MonthlyClimatology from_grid(const Grid& g);
  static MonthlyClimatology from_months(std::span<const Grid> months);

  Shape shape() const noexcept { return shape_; }
  const GeoExtent& extent() const noexcept { return extent_; }
  std::span<const double> values() const noexcept { return values_; }
  double at(int month0, std::size_t cell) const { return values_[month0 * shape_.area() + cell]; }

  // max over months minus the annual mean, per cell.
  std::vector<double> amplitude() const;
  // 1..12; ties go to the earliest month.
  std::vector<int> phase() const;
  // Sum over months of mean daily rate times days in the month (non-leap year).
  Grid annual_total() const;
  Grid to_grid() const;

 private:
  Shape shape_;
  std::vector<double> values_;
  GeoExtent extent_;
};

inline constexpr std::array<int, 12> kDaysInMonth{31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};

enum class NrmseMode {
  kPrinted,  // sqrt(mean_w dA^2) / mean_w A_obs^2
  kRms,      // sqrt(mean_w dA^2) / sqrt(mean_w A_obs^2)
};
NrmseMode parse_nrmse_mode(const std::string& s);
const char* to_string(NrmseMode m);

double amplitude_nrmse(const MonthlyClimatology& pred, const MonthlyClimatology& obs, std::span<const double> weights,
                       NrmseMode mode = NrmseMode::kPrinted);
// Shortest circular distance on the 12-month circle, in [0, 6].
int circular_month_distance(int a, int b);
double phase_mad(const MonthlyClimatology& pred, const MonthlyClimatology& obs, std::span<const double> weights);

struct Thresholds {
  double mape = 0.75;
  double scor = 0.7;
  double nrmse = 0.6;
  double mad = 2.0;
};

struct Scorecard {
  double mape = 0, scor = 0, nrmse = 0, mad = 0;
  bool mape_pass = false, scor_pass = false, nrmse_pass = false, mad_pass = false;
  bool overall = false;
  int passed() const noexcept { return mape_pass + scor_pass + nrmse_pass + mad_pass; }
};

// Pass flags are inclusive at every threshold.
Scorecard grade(double mape, double scor, double nrmse, double mad, const Thresholds& th = {});
Scorecard scorecard(const MonthlyClimatology& pred, const MonthlyClimatology& obs, std::span<const double> weights,
                    NrmseMode mode = NrmseMode::kPrinted, const Thresholds& th = {});

}  // namespace hdd
