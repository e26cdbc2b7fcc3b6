#pragma once

#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

#include "hdd/grid.hpp"

namespace hdd {

// sigmas are in sampling order: sigmas.front() = sigma_max, sigmas.back() = sigma_min.
struct NoiseSchedule {
  std::vector<double> sigmas;
  double sigma_min = 0.0;
  double sigma_max = 0.0;
  double rho = 7.0;

  int steps() const noexcept { return static_cast<int>(sigmas.size()); }
  // Noise level paired with forward step t (1 = finest/least noisy, T = coarsest).
  double at_step(int t) const;
};

NoiseSchedule karras_sigmas(double sigma_min, double sigma_max, double rho, int steps);

// shapes[0] is t = 1 (full resolution); shapes[T-1] is the coarsest.
struct ShapeSchedule {
  std::vector<Shape> shapes;
  Shape full;

  int steps() const noexcept { return static_cast<int>(shapes.size()); }
  const Shape& at_step(int t) const;
  void validate() const;
};

struct ChurnParams {
  double s_churn = 1.0;
  double s_min = 0.0;
  double s_max = std::numeric_limits<double>::infinity();
  double s_noise = 1.0;

  static ChurnParams none() noexcept { return {0.0, 0.0, std::numeric_limits<double>::infinity(), 1.0}; }
  void validate() const;
};

enum class ShapeKind { kIdentity, kEqual, kUnit, kTandem };
ShapeKind parse_shape_kind(const std::string& s);
std::string to_string(ShapeKind k);

ShapeSchedule equally_spaced_shapes(int H, int W, int T);
ShapeSchedule unit_shrink_shapes(int H, int W, int T);
ShapeSchedule tandem_shapes(int H, int W, int T, int k);
ShapeSchedule identity_shapes(int H, int W, int T);
ShapeSchedule make_shapes(ShapeKind kind, int H, int W, int T, int k = 1);

// Sum of A_t over the schedule; exact integer.
unsigned long long total_area(const ShapeSchedule& s);
double normalized_mean_area(const ShapeSchedule& s);
double speedup(const ShapeSchedule& s);
// Closed form for the unit-shrink schedule, valid only when no clamping occurs.
double unit_shrink_speedup_closed_form(int H, int W, int T);

// "t h w sigma" lines, t = 1..T.
void write_schedule_table(std::ostream& out, const ShapeSchedule& shapes, const NoiseSchedule& noise);

}  // namespace hdd
