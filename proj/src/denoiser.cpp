#include "hdd/denoiser.hpp"

#include <cmath>

#include "hdd/error.hpp"

namespace hdd {

GaussianOracleDenoiser::GaussianOracleDenoiser(Grid mu, double sigma_data) : mu_(std::move(mu)), sigma_data_(sigma_data) {
  if (!(sigma_data_ > 0.0) || !std::isfinite(sigma_data_)) throw InvalidArgument("oracle: sigma_data must be positive");
}

Grid GaussianOracleDenoiser::posterior_mean(const Grid& x, double sigma) const {
  if (!(sigma > 0.0)) throw InvalidArgument("oracle: sigma must be positive");
  if (x.shape() != mu_.shape() || x.channels() != mu_.channels()) throw InvalidArgument("oracle: input shape differs from mu");
  const double sd2 = sigma_data_ * sigma_data_;
  const double s2 = sigma * sigma;
  std::vector<double> d(x.size());
  const auto xv = x.values();
  const auto mv = mu_.values();
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = (sd2 * xv[i] + s2 * mv[i]) / (sd2 + s2);
  return x.with_data(std::move(d));
}

Grid GaussianOracleDenoiser::predict(const Grid& x_tilde, double sigma, Shape, const Grid&) const {
  const Grid d = posterior_mean(x_tilde, sigma);
  std::vector<double> eps(x_tilde.size());
  const auto xv = x_tilde.values();
  const auto dv = d.values();
  for (std::size_t i = 0; i < eps.size(); ++i) eps[i] = (xv[i] - dv[i]) / sigma;
  return x_tilde.with_data(std::move(eps));
}

}  // namespace hdd
