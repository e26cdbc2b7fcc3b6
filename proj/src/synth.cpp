#include "hdd/synth.hpp"

#include <fftw3.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <string>

#include "fft_lock.hpp"
#include "hdd/error.hpp"
#include "hdd/rng.hpp"

namespace hdd {
namespace {

double axis_frequency(int k, int n) { return static_cast<double>(k <= n / 2 ? k : k - n) / n; }

std::vector<double> synth_plane(double beta, int h, int w, rng::Stream& s) {
  const std::size_t n = static_cast<std::size_t>(h) * w;
  fftw_complex* buf = fftw_alloc_complex(n);
  if (!buf) throw std::bad_alloc();
  fftw_plan plan;
  {
    std::lock_guard lock(detail::fftw_planner_mutex());
    plan = fftw_plan_dft_2d(h, w, buf, buf, FFTW_BACKWARD, FFTW_ESTIMATE);
  }
  for (int ky = 0; ky < h; ++ky) {
    for (int kx = 0; kx < w; ++kx) {
      const std::size_t a = static_cast<std::size_t>(ky) * w + kx;
      const std::size_t b = static_cast<std::size_t>((h - ky) % h) * w + (w - kx) % w;
      if (b < a) continue;  // filled as the partner of an earlier bin
      if (a == 0) {
        buf[0][0] = buf[0][1] = 0.0;
        continue;
      }
      const double f = std::hypot(axis_frequency(ky, h), axis_frequency(kx, w));
      const double amp = std::pow(f, -0.5 * beta);
      if (a == b) {
        // Self-conjugate Nyquist bins must be real.
        buf[a][0] = s.uniform() < 0.5 ? -amp : amp;
        buf[a][1] = 0.0;
        continue;
      }
      const double phi = 2.0 * std::numbers::pi * s.uniform();
      buf[a][0] = amp * std::cos(phi);
      buf[a][1] = amp * std::sin(phi);
      buf[b][0] = buf[a][0];
      buf[b][1] = -buf[a][1];
    }
  }
  fftw_execute(plan);
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = buf[i][0];
  {
    std::lock_guard lock(detail::fftw_planner_mutex());
    fftw_destroy_plan(plan);
  }
  fftw_free(buf);
  return out;
}

}  // namespace

void PowerLawSpec::validate() const {
  if (!(beta >= 0.0) || !std::isfinite(beta)) throw InvalidArgument("synth: beta must be finite and >= 0");
  if (height < 2 || width < 2) throw InvalidArgument("synth: height and width must be >= 2");
  if (channels < 1) throw InvalidArgument("synth: channels must be >= 1");
  if (!(std > 0.0) || !std::isfinite(std)) throw InvalidArgument("synth: std must be finite and > 0");
  if (!std::isfinite(mean)) throw InvalidArgument("synth: mean must be finite");
}

Grid powerlaw_field(const PowerLawSpec& spec, std::uint64_t index) {
  spec.validate();
  std::vector<double> data;
  data.reserve(static_cast<std::size_t>(spec.channels) * spec.height * spec.width);
  for (int c = 0; c < spec.channels; ++c) {
    rng::Stream s = rng::make_stream(spec.seed, rng::Role::kSynth, index, static_cast<std::uint64_t>(c));
    std::vector<double> plane = synth_plane(spec.beta, spec.height, spec.width, s);
    double m = 0.0;
    for (double v : plane) m += v;
    m /= static_cast<double>(plane.size());
    double var = 0.0;
    for (double v : plane) var += (v - m) * (v - m);
    const double sd = std::sqrt(var / static_cast<double>(plane.size()));
    for (double& v : plane) v = (v - m) / sd * spec.std + spec.mean;
    data.insert(data.end(), plane.begin(), plane.end());
  }
  return Grid::from_data({spec.height, spec.width}, spec.channels, std::move(data));
}

std::vector<TrainingPair> make_pairs(const PowerLawSpec& spec, int factor, int count, std::uint64_t first_index) {
  spec.validate();
  if (factor < 1) throw InvalidArgument("make_pairs: factor must be >= 1");
  if (factor > spec.height || factor > spec.width)
    throw InvalidArgument("make_pairs: factor " + std::to_string(factor) + " exceeds the fine grid " +
                          std::to_string(spec.height) + "x" + std::to_string(spec.width));
  if (count < 0) throw InvalidArgument("make_pairs: count must be >= 0");
  const Shape coarse{spec.height / factor, spec.width / factor};
  std::vector<TrainingPair> out;
  out.reserve(count);
  for (int j = 0; j < count; ++j) {
    Grid fine = powerlaw_field(spec, first_index + static_cast<std::uint64_t>(j));
    Grid c = downsample(fine, coarse);
    out.push_back({std::move(c), std::move(fine)});
  }
  return out;
}

MonthlyClimatology monthly_toy_climatology(std::uint64_t seed, int height, int width, int wet_month, double amplitude) {
  if (wet_month < 1 || wet_month > 12) throw InvalidArgument("climatology: wet_month must be in 1..12");
  if (!(amplitude >= 0.0) || !std::isfinite(amplitude)) throw InvalidArgument("climatology: amplitude must be >= 0");
  PowerLawSpec spec;
  spec.height = height;
  spec.width = width;
  spec.seed = seed;
  spec.std = 1.0;
  const Grid texture = powerlaw_field(spec);
  const std::size_t n = texture.plane_size();
  std::vector<double> v(12 * n);
  for (int m = 0; m < 12; ++m) {
    const double cycle = 0.5 * (1.0 + std::cos(2.0 * std::numbers::pi * (m + 1 - wet_month) / 12.0));
    for (std::size_t i = 0; i < n; ++i) v[m * n + i] = 3.0 * std::exp(0.3 * texture.values()[i]) + amplitude * cycle;
  }
  return MonthlyClimatology({height, width}, std::move(v));
}

}  // namespace hdd
