#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "hdd/denoiser.hpp"

namespace hdd {

struct ToyArchitecture {
  int target_channels = 1;
  int cond_channels = 1;
  int width = 32;
  double sigma_data = 0.5;

  // target + conditioning + (log sigma, h/H, w/W)
  int input_channels() const noexcept { return target_channels + cond_channels + 3; }
  std::size_t parameter_count() const noexcept;
  void validate() const;
  friend bool operator==(const ToyArchitecture&, const ToyArchitecture&) = default;
};

// Offsets of each parameter block inside the flat parameter vector.
struct ToyLayout {
  std::size_t w1, b1, w2, b2, w3, b3, end;
  static ToyLayout of(const ToyArchitecture& a) noexcept;
};

// Three 3x3 conv layers (zero padding) with softplus between them, wrapped in
// EDM-style preconditioning:
//   F = net(c_in * x, cond, log(sigma)/4, h/H, w/W)
//   D = m + c_skip * (x - m) + c_out * F,   eps_hat = (x - D) / sigma
// where m is the conditioning field when it has the target's channel count
// and zero otherwise.
// with c_skip = sd^2/(s^2+sd^2), c_out = s*sd/sqrt(s^2+sd^2), c_in = 1/sqrt(s^2+sd^2).
class ToyDenoiser final : public Denoiser {
 public:
  explicit ToyDenoiser(ToyArchitecture arch);
  ToyDenoiser(ToyArchitecture arch, std::vector<double> params);

  static ToyDenoiser initialized(ToyArchitecture arch, std::uint64_t seed);

  int channels() const override { return arch_.target_channels; }
  Grid predict(const Grid& x_tilde, double sigma, Shape shape, const Grid& conditioning) const override;

  // Loss weight * mean((eps_hat - target)^2) for one example; accumulates the
  // parameter gradient into grad (same length as params) when non-empty.
  double loss_and_gradient(const Grid& x_tilde, double sigma, Shape shape, const Grid& conditioning,
                           std::span<const double> target_eps, double weight, std::span<double> grad) const;

  const ToyArchitecture& architecture() const noexcept { return arch_; }
  std::span<const double> parameters() const noexcept { return params_; }
  std::span<double> mutable_parameters() noexcept { return params_; }

 private:
  struct Activations;
  void forward(const Grid& x_tilde, double sigma, Shape shape, const Grid& conditioning, Activations& act) const;

  ToyArchitecture arch_;
  std::vector<double> params_;
};

}  // namespace hdd
