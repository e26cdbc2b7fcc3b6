#pragma once

#include "hdd/grid.hpp"

namespace hdd {

// Predicts the noise component eps of a full-resolution noisy field x_tilde
// at noise level sigma, given the current native shape and the (pre-upsampled)
// coarse conditioning field.
class Denoiser {
 public:
  virtual ~Denoiser() = default;
  // Channels of the generated field (and of the returned noise estimate).
  virtual int channels() const = 0;
  virtual Grid predict(const Grid& x_tilde, double sigma, Shape shape, const Grid& conditioning) const = 0;
};

// Exact noise prediction for data ~ N(mu, sigma_data^2 I):
//   D(x; sigma) = (sigma_data^2 x + sigma^2 mu) / (sigma_data^2 + sigma^2),  eps = (x - D) / sigma.
// Shape and conditioning are ignored.
class GaussianOracleDenoiser final : public Denoiser {
 public:
  GaussianOracleDenoiser(Grid mu, double sigma_data);

  int channels() const override { return mu_.channels(); }
  Grid predict(const Grid& x_tilde, double sigma, Shape shape, const Grid& conditioning) const override;

  Grid posterior_mean(const Grid& x, double sigma) const;
  const Grid& mu() const noexcept { return mu_; }
  double sigma_data() const noexcept { return sigma_data_; }

 private:
  Grid mu_;
  double sigma_data_;
};

}  // namespace hdd
