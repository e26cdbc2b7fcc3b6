#include "hdd/schedules.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>

#include "hdd/error.hpp"

namespace hdd {

double NoiseSchedule::at_step(int t) const {
  if (t < 1 || t > steps()) throw InvalidArgument("noise schedule: step out of range");
  return sigmas[static_cast<std::size_t>(steps() - t)];
}

NoiseSchedule karras_sigmas(double sigma_min, double sigma_max, double rho, int steps) {
  if (steps < 2) throw InvalidArgument("karras_sigmas: need at least 2 steps");
  if (!(sigma_min > 0.0) || !(sigma_max > sigma_min)) throw InvalidArgument("karras_sigmas: need 0 < sigma_min < sigma_max");
  if (!(rho > 0.0)) throw InvalidArgument("karras_sigmas: rho must be positive");
  NoiseSchedule s{{}, sigma_min, sigma_max, rho};
  s.sigmas.resize(steps);
  const double a = std::pow(sigma_max, 1.0 / rho);
  const double b = std::pow(sigma_min, 1.0 / rho);
  for (int i = 0; i < steps; ++i) {
    const double frac = static_cast<double>(i) / (steps - 1);
    s.sigmas[i] = std::pow(a + frac * (b - a), rho);
  }
  // pow(pow(x, 1/rho), rho) is not exact; pin the endpoints.
  s.sigmas.front() = sigma_max;
  s.sigmas.back() = sigma_min;
  for (int i = 1; i < steps; ++i)
    if (!(s.sigmas[i] < s.sigmas[i - 1])) throw InvalidArgument("karras_sigmas: schedule not strictly decreasing");
  return s;
}

const Shape& ShapeSchedule::at_step(int t) const {
  if (t < 1 || t > steps()) throw InvalidArgument("shape schedule: step out of range");
  return shapes[static_cast<std::size_t>(t - 1)];
}

void ShapeSchedule::validate() const {
  if (shapes.empty()) throw InvalidArgument("shape schedule: empty");
  if (!(shapes.front() == full)) throw InvalidArgument("shape schedule: first shape must be the full shape");
  for (std::size_t i = 0; i < shapes.size(); ++i) {
    const Shape& s = shapes[i];
    if (s.h < 1 || s.w < 1 || s.h > full.h || s.w > full.w)
      throw InvalidArgument("shape schedule: shape out of bounds at t=" + std::to_string(i + 1));
    if (i > 0 && (s.h > shapes[i - 1].h || s.w > shapes[i - 1].w))
      throw InvalidArgument("shape schedule: not monotone non-increasing at t=" + std::to_string(i + 1));
  }
}

void ChurnParams::validate() const {
  if (!(s_churn >= 0.0) || !(s_noise >= 0.0) || !(s_min >= 0.0)) throw InvalidArgument("churn: negative parameter");
  if (!(s_min <= s_max)) throw InvalidArgument("churn: s_min must be <= s_max");
}

ShapeKind parse_shape_kind(const std::string& s) {
  if (s == "identity") return ShapeKind::kIdentity;
  if (s == "equal") return ShapeKind::kEqual;
  if (s == "unit") return ShapeKind::kUnit;
  if (s == "tandem") return ShapeKind::kTandem;
  throw InvalidArgument("unknown shape schedule kind '" + s + "' (identity|equal|unit|tandem)");
}

std::string to_string(ShapeKind k) {
  switch (k) {
    case ShapeKind::kIdentity: return "identity";
    case ShapeKind::kEqual: return "equal";
    case ShapeKind::kUnit: return "unit";
    case ShapeKind::kTandem: return "tandem";
  }
  return "?";
}

namespace {

void check_dims(int H, int W) {
  if (H < 1 || W < 1) throw InvalidArgument("shape schedule: H and W must be positive");
}

// n - level/(levels-1) * (n-1), rounded half up in exact integer arithmetic,
// clamped to >= 1.
int ramp(int n, int level, int levels) {
  if (levels == 1) return n;
  const long long den = levels - 1;
  const long long num = static_cast<long long>(n) * den - static_cast<long long>(level) * (n - 1);
  return std::max(1, static_cast<int>((2 * num + den) / (2 * den)));
}

}  // namespace

ShapeSchedule equally_spaced_shapes(int H, int W, int T) {
  check_dims(H, W);
  if (T < 2) throw InvalidArgument("equally_spaced_shapes: need T >= 2");
  ShapeSchedule s{{}, {H, W}};
  for (int t = 1; t <= T; ++t) s.shapes.push_back({ramp(H, t - 1, T), ramp(W, t - 1, T)});
  return s;
}

ShapeSchedule unit_shrink_shapes(int H, int W, int T) {
  check_dims(H, W);
  if (T < 1) throw InvalidArgument("unit_shrink_shapes: need T >= 1");
  ShapeSchedule s{{}, {H, W}};
  for (int t = 1; t <= T; ++t) s.shapes.push_back({std::max(1, H - (t - 1)), std::max(1, W - (t - 1))});
  return s;
}

ShapeSchedule tandem_shapes(int H, int W, int T, int k) {
  check_dims(H, W);
  if (T < 2) throw InvalidArgument("tandem_shapes: need T >= 2");
  if (k < 1) throw InvalidArgument("tandem_shapes: need k >= 1");
  if (k > T) throw InvalidArgument("tandem_shapes: k must not exceed T");
  const int levels = (T + k - 1) / k;
  ShapeSchedule s{{}, {H, W}};
  for (int t = 1; t <= T; ++t) {
    const int level = (t - 1) / k;
    s.shapes.push_back({ramp(H, level, levels), ramp(W, level, levels)});
  }
  return s;
}

ShapeSchedule identity_shapes(int H, int W, int T) {
  check_dims(H, W);
  if (T < 1) throw InvalidArgument("identity_shapes: need T >= 1");
  return ShapeSchedule{std::vector<Shape>(T, Shape{H, W}), {H, W}};
}

ShapeSchedule make_shapes(ShapeKind kind, int H, int W, int T, int k) {
  switch (kind) {
    case ShapeKind::kIdentity: return identity_shapes(H, W, T);
    case ShapeKind::kEqual: return equally_spaced_shapes(H, W, T);
    case ShapeKind::kUnit: return unit_shrink_shapes(H, W, T);
    case ShapeKind::kTandem: return tandem_shapes(H, W, T, k);
  }
  throw InvalidArgument("make_shapes: unknown kind");
}

unsigned long long total_area(const ShapeSchedule& s) {
  unsigned long long total = 0;
  for (const Shape& sh : s.shapes) total += sh.area();
  return total;
}

double normalized_mean_area(const ShapeSchedule& s) {
  s.validate();
  const unsigned long long denom = static_cast<unsigned long long>(s.steps()) * s.full.area();
  return static_cast<double>(total_area(s)) / static_cast<double>(denom);
}

double speedup(const ShapeSchedule& s) {
  s.validate();
  const unsigned long long denom = static_cast<unsigned long long>(s.steps()) * s.full.area();
  return static_cast<double>(denom) / static_cast<double>(total_area(s));
}

double unit_shrink_speedup_closed_form(int H, int W, int T) {
  check_dims(H, W);
  if (T < 1) throw InvalidArgument("unit_shrink_speedup_closed_form: need T >= 1");
  if (T > std::min(H, W)) throw InvalidArgument("unit_shrink_speedup_closed_form: T > min(H, W) activates clamping");
  const double A = static_cast<double>(H) * W;
  const double tm1 = T - 1.0;
  return 1.0 / (1.0 - tm1 / (2.0 * A) * (H + W) + tm1 * (2.0 * T - 1.0) / (6.0 * A));
}

void write_schedule_table(std::ostream& out, const ShapeSchedule& shapes, const NoiseSchedule& noise) {
  if (shapes.steps() != noise.steps()) throw InvalidArgument("schedule table: step counts differ");
  out << "t h w sigma\n";
  const auto old = out.precision(17);
  for (int t = 1; t <= shapes.steps(); ++t) {
    const Shape& s = shapes.at_step(t);
    out << t << ' ' << s.h << ' ' << s.w << ' ' << noise.at_step(t) << '\n';
  }
  out.precision(old);
}

}  // namespace hdd
