#include "hdd/spectral.hpp"

#include <fftw3.h>

#include <cmath>
#include <limits>
#include <mutex>
#include <ostream>

#include "fft_lock.hpp"
#include "hdd/error.hpp"

namespace hdd {

namespace detail {
std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace detail

namespace {

double axis_frequency(int k, int n) {
  const int signed_k = k <= n / 2 ? k : k - n;
  return static_cast<double>(signed_k) / n;
}

}  // namespace

std::vector<double> power_spectrum_2d(const Grid& g, int channel) {
  const auto plane = g.channel(channel);
  const int h = g.height(), w = g.width();
  const std::size_t n = plane.size();
  fftw_complex* buf = fftw_alloc_complex(n);
  if (!buf) throw std::bad_alloc();
  fftw_plan plan;
  {
    std::lock_guard lock(detail::fftw_planner_mutex());
    plan = fftw_plan_dft_2d(h, w, buf, buf, FFTW_FORWARD, FFTW_ESTIMATE);
  }
  for (std::size_t i = 0; i < n; ++i) {
    buf[i][0] = plane[i];
    buf[i][1] = 0.0;
  }
  fftw_execute(plan);
  std::vector<double> p(n);
  for (std::size_t i = 0; i < n; ++i) p[i] = buf[i][0] * buf[i][0] + buf[i][1] * buf[i][1];
  {
    std::lock_guard lock(detail::fftw_planner_mutex());
    fftw_destroy_plan(plan);
  }
  fftw_free(buf);
  return p;
}

Spectrum rapsd(const Grid& g, int channel, const RapsdOptions& options) {
  if (g.height() < 4 || g.width() < 4) throw InvalidArgument("rapsd: height and width must be >= 4");
  if (options.bins_per_decade < 1) throw InvalidArgument("rapsd: bins_per_decade must be >= 1");
  const int h = g.height(), w = g.width();
  const std::vector<double> p = power_spectrum_2d(g, channel);

  Spectrum s;
  s.n_pixels = static_cast<std::size_t>(h) * w;
  double sum_sq = 0.0;
  for (double v : g.channel(channel)) sum_sq += v * v;
  s.field_power = static_cast<double>(s.n_pixels) * sum_sq;
  for (double v : p) s.total_power += v;
  s.dc_power = p[0];

  const double f0 = std::min(1.0 / h, 1.0 / w);
  const double ratio = std::pow(10.0, 1.0 / options.bins_per_decade);
  const double log_ratio = std::log(ratio);
  const double f_top = std::sqrt(0.5);
  const int nbins = static_cast<int>(std::floor(std::log(f_top / f0) / log_ratio)) + 1;
  std::vector<double> sum(nbins, 0.0);
  std::vector<std::size_t> cnt(nbins, 0);
  for (int ky = 0; ky < h; ++ky) {
    const double fy = axis_frequency(ky, h);
    for (int kx = 0; kx < w; ++kx) {
      if (ky == 0 && kx == 0) continue;
      const double f = std::hypot(fy, axis_frequency(kx, w));
      int b = static_cast<int>(std::floor(std::log(f / f0) / log_ratio + 1e-12));
      b = std::clamp(b, 0, nbins - 1);
      sum[b] += p[static_cast<std::size_t>(ky) * w + kx];
      ++cnt[b];
    }
  }

  const std::size_t min_count = std::max<std::size_t>(1, options.min_count);
  double acc = 0.0;
  std::size_t acc_n = 0;
  int first = -1;
  auto emit = [&](int last) {
    const double lo = f0 * std::pow(ratio, first);
    const double hi = std::min(f0 * std::pow(ratio, last + 1), f_top * (1.0 + 1e-12));
    s.f_lo.push_back(lo);
    s.f_hi.push_back(hi);
    s.f.push_back(std::sqrt(lo * hi));
    s.power.push_back(acc / static_cast<double>(acc_n));
    s.count.push_back(acc_n);
  };
  for (int b = 0; b < nbins; ++b) {
    if (cnt[b] == 0 && acc_n == 0) continue;
    if (first < 0) first = b;
    acc += sum[b];
    acc_n += cnt[b];
    if (acc_n >= min_count) {
      emit(b);
      acc = 0.0;
      acc_n = 0;
      first = -1;
    }
  }
  if (acc_n > 0) {
    if (s.bins() == 0) {
      emit(nbins - 1);
    } else {
      // Fold the short tail into the last reported bin.
      const std::size_t last = s.bins() - 1;
      const double merged = s.power[last] * static_cast<double>(s.count[last]) + acc;
      s.count[last] += acc_n;
      s.power[last] = merged / static_cast<double>(s.count[last]);
      s.f_hi[last] = f_top * (1.0 + 1e-12);
      s.f[last] = std::sqrt(s.f_lo[last] * s.f_hi[last]);
    }
  }
  return s;
}

PowerLawFit fit_power_law(const Spectrum& s, double f_lo, double f_hi) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (std::size_t i = 0; i < s.bins(); ++i) {
    if (s.f[i] < f_lo || s.f[i] > f_hi || !(s.power[i] > 0.0)) continue;
    const double x = std::log(s.f[i]);
    const double y = std::log(s.power[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++n;
  }
  if (n < 3) throw InvalidArgument("fit_power_law: fewer than 3 usable bins in [" + std::to_string(f_lo) + ", " +
                                   std::to_string(f_hi) + "]");
  const double denom = n * sxx - sx * sx;
  if (!(std::abs(denom) > 0.0)) throw InvalidArgument("fit_power_law: degenerate frequency range");
  const double slope = (n * sxy - sx * sy) / denom;
  return {-slope, (sy - slope * sx) / n, n};
}

Spectrum predict_downsampled(const Spectrum& s, int factor) {
  if (factor < 1) throw InvalidArgument("predict_downsampled: factor must be >= 1");
  Spectrum out = s;
  if (factor == 1) return out;
  const double cutoff = 1.0 / (2.0 * factor);
  const double gain = static_cast<double>(factor) * factor;
  for (std::size_t i = 0; i < out.bins(); ++i) out.power[i] = out.f[i] < cutoff ? gain * s.power[i] : 0.0;
  return out;
}

Spectrum predict_noised(const Spectrum& s, double sigma_n) {
  if (!(sigma_n >= 0.0)) throw InvalidArgument("predict_noised: sigma_n must be >= 0");
  Spectrum out = s;
  const double floor = sigma_n * sigma_n * static_cast<double>(s.n_pixels);
  for (double& p : out.power) p += floor;
  return out;
}

double hinge_frequency(const Spectrum& s, double sigma_n) {
  if (!(sigma_n > 0.0)) return std::numeric_limits<double>::infinity();
  const double floor = sigma_n * sigma_n * static_cast<double>(s.n_pixels);
  for (std::size_t i = 0; i < s.bins(); ++i)
    if (s.power[i] <= floor) return s.f[i];
  return std::numeric_limits<double>::infinity();
}

bool is_non_increasing(const Spectrum& s) {
  for (std::size_t i = 1; i < s.bins(); ++i)
    if (s.power[i] > s.power[i - 1]) return false;
  return true;
}

void write_spectrum_csv(const Spectrum& s, std::ostream& out) {
  out << "f,power,count\n";
  const auto old = out.precision(17);
  for (std::size_t i = 0; i < s.bins(); ++i) out << s.f[i] << ',' << s.power[i] << ',' << s.count[i] << '\n';
  out.precision(old);
}

}  // namespace hdd
