#pragma once

#include <cstdint>
#include <vector>

#include "hdd/diffusion.hpp"
#include "hdd/grid.hpp"
#include "hdd/metrics.hpp"

namespace hdd {

struct PowerLawSpec {
  double beta = 2.4;
  int height = 64;
  int width = 64;
  int channels = 1;
  std::uint64_t seed = 0;
  double mean = 0.0;
  double std = 0.5;

  void validate() const;
};

// Spectral synthesis: amplitudes ~ f^(-beta/2), uniform phases, Hermitian
// symmetric so the inverse DFT is real; rescaled to exactly (mean, std) per
// channel. `index` selects an independent field for the same seed.
Grid powerlaw_field(const PowerLawSpec& spec, std::uint64_t index = 0);

// Pair j uses powerlaw_field(spec, first_index + j); coarse = downsample(fine, fine / factor).
std::vector<TrainingPair> make_pairs(const PowerLawSpec& spec, int factor, int count, std::uint64_t first_index = 0);

// Textured base field plus a raised-cosine annual cycle peaking at wet_month.
MonthlyClimatology monthly_toy_climatology(std::uint64_t seed, int height, int width, int wet_month, double amplitude);

}  // namespace hdd
