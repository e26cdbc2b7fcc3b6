#include "hdd/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "hdd/error.hpp"

namespace hdd {
namespace {

void require_same_shape(const Grid& a, const Grid& b, const char* op) {
  if (a.shape() != b.shape() || a.channels() != b.channels())
    throw InvalidArgument(std::string(op) + ": shape mismatch");
}

// Validates per-cell weights and returns their sum.
double check_weights(std::span<const double> w, std::size_t plane, const char* op) {
  if (w.size() != plane)
    throw InvalidArgument(std::string(op) + ": expected " + std::to_string(plane) + " weights, got " +
                          std::to_string(w.size()));
  double total = 0.0;
  for (double v : w) {
    if (!std::isfinite(v) || v < 0.0) throw InvalidArgument(std::string(op) + ": weights must be finite and >= 0");
    total += v;
  }
  if (!(total > 0.0)) throw InvalidArgument(std::string(op) + ": weights sum to zero");
  return total;
}

}  // namespace

double rmse(const Grid& pred, const Grid& obs) {
  require_same_shape(pred, obs, "rmse");
  const auto p = pred.values(), o = obs.values();
  double acc = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) acc += (p[i] - o[i]) * (p[i] - o[i]);
  return std::sqrt(acc / static_cast<double>(p.size()));
}

double psnr(const Grid& pred, const Grid& obs, std::optional<double> data_range) {
  require_same_shape(pred, obs, "psnr");
  double range;
  if (data_range) {
    range = *data_range;
  } else {
    const auto [lo, hi] = std::minmax_element(obs.values().begin(), obs.values().end());
    range = *hi - *lo;
  }
  if (!(range > 0.0) || !std::isfinite(range)) throw InvalidArgument("psnr: data_range must be finite and > 0");
  const double e = rmse(pred, obs);
  if (e == 0.0) return kPsnrCap;
  return std::min(kPsnrCap, 20.0 * std::log10(range / e));
}

double crps(std::span<const Grid> ensemble, const Grid& obs, std::span<const double> weights) {
  const std::size_t m = ensemble.size();
  if (m < 2) throw InvalidArgument("crps: need at least 2 ensemble members");
  for (const Grid& g : ensemble) require_same_shape(g, obs, "crps");
  const std::size_t plane = obs.plane_size();
  const std::size_t n = obs.size();
  double wsum = static_cast<double>(plane);
  if (!weights.empty()) wsum = check_weights(weights, plane, "crps");

  std::vector<double> per(n);
#pragma omp parallel
  {
    std::vector<double> xs(m);
#pragma omp for schedule(static)
    for (std::size_t i = 0; i < n; ++i) {
      const double y = obs.values()[i];
      double skill = 0.0;
      for (std::size_t k = 0; k < m; ++k) {
        xs[k] = ensemble[k].values()[i];
        skill += std::abs(xs[k] - y);
      }
      // sum_{j,k} |x_j - x_k| = 2 sum_k (2k - m + 1) x_(k) over the sorted sample
      std::sort(xs.begin(), xs.end());
      double spread = 0.0;
      for (std::size_t k = 0; k < m; ++k) spread += (2.0 * k - static_cast<double>(m) + 1.0) * xs[k];
      spread *= 2.0;
      const double md = static_cast<double>(m);
      per[i] = std::max(0.0, skill / md - 0.5 * spread / (md * md));
    }
  }
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) total += (weights.empty() ? 1.0 : weights[i % plane]) * per[i];
  return total / (wsum * obs.channels());
}

double mape(const Grid& pred_annual, const Grid& obs_annual, std::span<const double> weights) {
  require_same_shape(pred_annual, obs_annual, "mape");
  const std::size_t plane = obs_annual.plane_size();
  const double wsum = check_weights(weights, plane, "mape");
  const auto p = pred_annual.values(), o = obs_annual.values();
  double acc = 0.0;
  for (std::size_t i = 0; i < o.size(); ++i) {
    if (o[i] == 0.0) {
      const std::size_t cell = i % plane;
      const std::size_t row = cell / obs_annual.width(), col = cell % obs_annual.width();
      throw DivisionByZero(row, col,
                           "mape: observed value is zero at row " + std::to_string(row) + ", col " + std::to_string(col));
    }
    acc += weights[i % plane] * std::abs((p[i] - o[i]) / o[i]);
  }
  return acc / (wsum * obs_annual.channels());
}

double scor(const Grid& pred_annual, const Grid& obs_annual, std::span<const double> weights) {
  require_same_shape(pred_annual, obs_annual, "scor");
  const std::size_t plane = obs_annual.plane_size();
  const double wsum = check_weights(weights, plane, "scor") * obs_annual.channels();
  const auto p = pred_annual.values(), o = obs_annual.values();
  double mp = 0.0, mo = 0.0;
  for (std::size_t i = 0; i < o.size(); ++i) {
    mp += weights[i % plane] * p[i];
    mo += weights[i % plane] * o[i];
  }
  mp /= wsum;
  mo /= wsum;
  double cov = 0.0, vp = 0.0, vo = 0.0;
  for (std::size_t i = 0; i < o.size(); ++i) {
    const double w = weights[i % plane];
    cov += w * (p[i] - mp) * (o[i] - mo);
    vp += w * (p[i] - mp) * (p[i] - mp);
    vo += w * (o[i] - mo) * (o[i] - mo);
  }
  if (!(vp > 0.0) || !(vo > 0.0)) throw DegenerateField("scor: zero weighted variance");
  return std::clamp(cov / std::sqrt(vp * vo), -1.0, 1.0);
}

MonthlyClimatology::MonthlyClimatology(Shape shape, std::vector<double> values, GeoExtent extent)
    : shape_(shape), values_(std::move(values)), extent_(extent) {
  if (shape_.h < 1 || shape_.w < 1) throw InvalidArgument("climatology: empty shape");
  extent_.validate();
  if (values_.size() != 12 * shape_.area())
    throw InvalidArgument("climatology: expected 12*h*w values, got " + std::to_string(values_.size()));
  for (double v : values_) {
    if (!std::isfinite(v)) throw NonFiniteValue("climatology: non-finite value");
    if (v < 0.0) throw InvalidArgument("climatology: negative rainfall");
  }
}

MonthlyClimatology MonthlyClimatology::from_grid(const Grid& g) {
  if (g.channels() != 12) throw InvalidArgument("climatology: expected 12 channels, got " + std::to_string(g.channels()));
  return MonthlyClimatology(g.shape(), {g.values().begin(), g.values().end()}, g.extent());
}

MonthlyClimatology MonthlyClimatology::from_months(std::span<const Grid> months) {
  if (months.size() != 12) throw InvalidArgument("climatology: expected 12 monthly grids");
  std::vector<double> v;
  for (const Grid& g : months) {
    if (g.channels() != 1 || g.shape() != months[0].shape())
      throw InvalidArgument("climatology: monthly grids must be single-channel with equal shapes");
    v.insert(v.end(), g.values().begin(), g.values().end());
  }
  return MonthlyClimatology(months[0].shape(), std::move(v), months[0].extent());
}

std::vector<double> MonthlyClimatology::amplitude() const {
  const std::size_t n = shape_.area();
  std::vector<double> a(n);
  for (std::size_t i = 0; i < n; ++i) {
    double mx = at(0, i), mean = 0.0;
    for (int m = 0; m < 12; ++m) {
      mx = std::max(mx, at(m, i));
      mean += at(m, i);
    }
    a[i] = mx - mean / 12.0;
  }
  return a;
}

std::vector<int> MonthlyClimatology::phase() const {
  const std::size_t n = shape_.area();
  std::vector<int> ph(n);
  for (std::size_t i = 0; i < n; ++i) {
    int best = 0;
    for (int m = 1; m < 12; ++m)
      if (at(m, i) > at(best, i)) best = m;
    ph[i] = best + 1;
  }
  return ph;
}

Grid MonthlyClimatology::annual_total() const {
  const std::size_t n = shape_.area();
  std::vector<double> t(n, 0.0);
  for (int m = 0; m < 12; ++m)
    for (std::size_t i = 0; i < n; ++i) t[i] += at(m, i) * kDaysInMonth[m];
  return Grid(shape_, {"annual"}, extent_, std::move(t));
}

Grid MonthlyClimatology::to_grid() const {
  std::vector<std::string> names;
  for (int m = 1; m <= 12; ++m) names.push_back((m < 10 ? "m0" : "m") + std::to_string(m));
  return Grid(shape_, std::move(names), extent_, values_);
}

NrmseMode parse_nrmse_mode(const std::string& s) {
  if (s == "printed") return NrmseMode::kPrinted;
  if (s == "rms") return NrmseMode::kRms;
  throw InvalidArgument("unknown nrmse mode '" + s + "' (expected printed|rms)");
}

const char* to_string(NrmseMode m) { return m == NrmseMode::kPrinted ? "printed" : "rms"; }

double amplitude_nrmse(const MonthlyClimatology& pred, const MonthlyClimatology& obs, std::span<const double> weights,
                       NrmseMode mode) {
  if (pred.shape() != obs.shape()) throw InvalidArgument("amplitude_nrmse: shape mismatch");
  const double wsum = check_weights(weights, obs.shape().area(), "amplitude_nrmse");
  const auto ap = pred.amplitude(), ao = obs.amplitude();
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < ao.size(); ++i) {
    num += weights[i] * (ap[i] - ao[i]) * (ap[i] - ao[i]);
    den += weights[i] * ao[i] * ao[i];
  }
  num /= wsum;
  den /= wsum;
  if (!(den > 0.0)) throw DegenerateField("amplitude_nrmse: observed amplitudes are all zero");
  return std::sqrt(num) / (mode == NrmseMode::kPrinted ? den : std::sqrt(den));
}

int circular_month_distance(int a, int b) {
  const int d = std::abs(a - b) % 12;
  return std::min(d, 12 - d);
}

double phase_mad(const MonthlyClimatology& pred, const MonthlyClimatology& obs, std::span<const double> weights) {
  if (pred.shape() != obs.shape()) throw InvalidArgument("phase_mad: shape mismatch");
  const double wsum = check_weights(weights, obs.shape().area(), "phase_mad");
  const auto pp = pred.phase(), po = obs.phase();
  double acc = 0.0;
  for (std::size_t i = 0; i < po.size(); ++i) acc += weights[i] * circular_month_distance(pp[i], po[i]);
  return acc / wsum;
}

Scorecard grade(double mape_v, double scor_v, double nrmse_v, double mad_v, const Thresholds& th) {
  Scorecard s;
  s.mape = mape_v;
  s.scor = scor_v;
  s.nrmse = nrmse_v;
  s.mad = mad_v;
  s.mape_pass = mape_v <= th.mape;
  s.scor_pass = scor_v >= th.scor;
  s.nrmse_pass = nrmse_v <= th.nrmse;
  s.mad_pass = mad_v <= th.mad;
  s.overall = s.passed() == 4;
  return s;
}

Scorecard scorecard(const MonthlyClimatology& pred, const MonthlyClimatology& obs, std::span<const double> weights,
                    NrmseMode mode, const Thresholds& th) {
  const Grid pa = pred.annual_total(), oa = obs.annual_total();
  return grade(mape(pa, oa, weights), scor(pa, oa, weights), amplitude_nrmse(pred, obs, weights, mode),
               phase_mad(pred, obs, weights), th);
}

}  // namespace hdd
