#pragma once

#include <cstddef>
#include <iosfwd>
#include <vector>

#include "hdd/grid.hpp"

namespace hdd {

// Radially averaged power spectrum of an unnormalized 2-D DFT, P(k) = |X(k)|^2.
// Frequencies are in cycles per pixel (radial Nyquist sqrt(2)/2).
struct Spectrum {
  std::vector<double> f;       // bin centers (geometric mean of the edges)
  std::vector<double> f_lo;    // lower edges
  std::vector<double> f_hi;    // upper edges
  std::vector<double> power;   // mean P(k) over the annulus
  std::vector<std::size_t> count;

  double dc_power = 0.0;     // P(0)
  double total_power = 0.0;  // sum of P(k) over the whole plane, DC included
  double field_power = 0.0;  // N * sum x^2, the Parseval counterpart of total_power
  std::size_t n_pixels = 1;  // N_y * N_x; noise floors are sigma_n^2 * n_pixels

  std::size_t bins() const noexcept { return f.size(); }
};

struct RapsdOptions {
  int bins_per_decade = 12;
  // Adjacent log-spaced annuli are merged (low to high frequency) until each
  // reported bin holds at least this many coefficients.
  std::size_t min_count = 1;
};

// Full-plane |X(k)|^2 in FFT order, [h][w].
std::vector<double> power_spectrum_2d(const Grid& g, int channel);

Spectrum rapsd(const Grid& g, int channel, const RapsdOptions& options = {});

struct PowerLawFit {
  double alpha = 0.0;      // power ~ C * f^(-alpha)
  double intercept = 0.0;  // ln C
  int bins_used = 0;
};
PowerLawFit fit_power_law(const Spectrum& s, double f_lo, double f_hi);

// Ideal low-pass prediction for integer down-sampling by `factor`:
// factor^2 * power below 1/(2 factor), zero at and above.
Spectrum predict_downsampled(const Spectrum& s, int factor);
// Every bin raised by sigma_n^2 * n_pixels (the expected white-noise periodogram).
Spectrum predict_noised(const Spectrum& s, double sigma_n);
// Smallest bin center whose power is <= sigma_n^2 * n_pixels; +inf if none or sigma_n == 0.
double hinge_frequency(const Spectrum& s, double sigma_n);
bool is_non_increasing(const Spectrum& s);

// "f,power,count"
void write_spectrum_csv(const Spectrum& s, std::ostream& out);

}  // namespace hdd
