#pragma once

#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "hdd/denoiser.hpp"
#include "hdd/rng.hpp"
#include "hdd/schedules.hpp"
#include "hdd/toy_denoiser.hpp"

namespace hdd {

// kVarianceExploding: z = x + sigma * eps (EDM).
// kLiteral: the DDPM-style update written with alpha-bar symbols, with
//   alpha_bar(sigma) = 1 / (1 + sigma^2).
enum class DiffusionMode { kVarianceExploding, kLiteral };

inline double alpha_bar(double sigma) noexcept { return 1.0 / (1.0 + sigma * sigma); }

struct Corrupted {
  Grid z;    // at the step's native shape (h_t, w_t)
  Grid eps;  // same shape as z
};

// x_t = D_t(x0); z = x_t + sigma_t eps (or sqrt(ab) x_t + sqrt(1-ab) eps in kLiteral).
Corrupted corrupt(const Grid& x0, int t, const NoiseSchedule& noise, const ShapeSchedule& shapes, rng::Stream& stream,
                  DiffusionMode mode = DiffusionMode::kVarianceExploding);

enum class LossWeighting {
  kEdmEpsilon,   // (sigma^2 + sd^2) / sd^2: EDM's lambda(sigma) expressed for an eps-space error
  kEdmDenoiser,  // (sigma^2 + sd^2) / (sigma sd)^2: EDM's lambda(sigma) applied verbatim
  kUnit,
};
LossWeighting parse_loss_weighting(const std::string& s);
std::string to_string(LossWeighting w);

double loss_weight(LossWeighting w, double sigma, double sigma_data);

struct LossSettings {
  LossWeighting weighting = LossWeighting::kEdmEpsilon;
  double sigma_data = 0.5;
};

// One draw of the hierarchical EDM loss:
//   w(sigma_t) * mean( (eps - f(U(D_t x0) + sigma_t eps, sigma_t, s_t))^2 ), eps at full resolution.
double hedm_loss(const Denoiser& f, const Grid& x0, const Grid& conditioning, int t, const NoiseSchedule& noise,
                 const ShapeSchedule& shapes, rng::Stream& stream, const LossSettings& settings = {});

// The network input and noise target for one loss draw; shared by hedm_loss and training.
struct LossExample {
  Grid input;               // U(D_t x0) + sigma_t eps
  std::vector<double> eps;  // full resolution
  double sigma;
  Shape shape;
};
LossExample make_loss_example(const Grid& x0, int t, const NoiseSchedule& noise, const ShapeSchedule& shapes,
                              rng::Stream& stream);

struct NetworkCall {
  int t;
  Shape shape;
  double sigma;
};

struct RunLog {
  Shape full;
  int steps = 0;
  std::vector<NetworkCall> calls;
};

struct PixelCount {
  unsigned long long total = 0;
  double alpha = 0.0;
};
PixelCount count_pixels(const RunLog& log);

struct SampleOptions {
  DiffusionMode mode = DiffusionMode::kVarianceExploding;
  RunLog* log = nullptr;
};

// Hierarchical reverse process. The latent lives at the step's native shape;
// each step upsamples it to full resolution, predicts eps, takes the update at
// full resolution and projects to the next (finer) step's shape.
Grid sample(const Denoiser& f, const Grid& conditioning, const NoiseSchedule& noise, const ShapeSchedule& shapes,
            const ChurnParams& churn, std::uint64_t seed, const SampleOptions& options = {});

// Non-hierarchical reference sampler (no resampling anywhere).
Grid vanilla_sample(const Denoiser& f, const Grid& conditioning, const NoiseSchedule& noise, const ChurnParams& churn,
                    std::uint64_t seed, const SampleOptions& options = {});

// Per-member seeds for ensembles; members are independent of evaluation order.
std::uint64_t member_seed(std::uint64_t seed, int member) noexcept;

struct TrainingPair {
  Grid coarse;
  Grid fine;
};

struct TrainConfig {
  int epochs = 20;
  int batch_size = 1;
  double learning_rate = 1e-2;
  std::uint64_t seed = 0;
  int steps = 50;
  ShapeKind shape_kind = ShapeKind::kEqual;
  int tandem_k = 1;
  double sigma_min = 0.002;
  double sigma_max = 80.0;
  double rho = 7.0;
  LossSettings loss{};

  void validate() const;
};

struct TrainResult {
  ToyDenoiser model;
  std::vector<double> loss_curve;  // mean loss per epoch
};

// Called after every epoch with (epoch index from 0, mean loss).
using EpochCallback = std::function<void(int, double)>;

TrainResult train(ToyDenoiser model, const std::vector<TrainingPair>& dataset, const TrainConfig& cfg,
                  const EpochCallback& on_epoch = {});

}  // namespace hdd
