#include "hdd/diffusion.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "hdd/error.hpp"
#include "hdd/kernels.hpp"

namespace hdd {
namespace {

void check_step(int t, const NoiseSchedule& noise, const ShapeSchedule& shapes) {
  if (noise.steps() != shapes.steps())
    throw InvalidArgument("noise and shape schedules have different lengths (" + std::to_string(noise.steps()) + " vs " +
                          std::to_string(shapes.steps()) + ")");
  if (t < 1 || t > shapes.steps())
    throw InvalidArgument("step t=" + std::to_string(t) + " outside 1.." + std::to_string(shapes.steps()));
}

std::vector<double> resampled(const std::vector<double>& x, int channels, Shape from, Shape to) {
  if (from == to) return x;
  std::vector<double> out(to.area() * channels);
  kernels::resample_bilinear(x, channels, from.h, from.w, out, to.h, to.w);
  return out;
}

// Output metadata follows the conditioning grid when the channel counts agree.
Grid make_output(std::vector<double> data, Shape shape, int channels, const Grid& conditioning) {
  if (conditioning.channels() == channels)
    return Grid(shape, conditioning.channel_names(), conditioning.extent(), std::move(data));
  return Grid::from_data(shape, channels, std::move(data), conditioning.extent());
}

Grid call_denoiser(const Denoiser& f, std::vector<double> x, Shape full, Shape native, double sigma,
                   const Grid& conditioning, int t, RunLog* log) {
  Grid input = [&] {
    try {
      return Grid::from_data(full, f.channels(), std::move(x));
    } catch (const NonFiniteValue&) {
      throw SamplingFailure(t, "sampler state became non-finite before step t=" + std::to_string(t));
    }
  }();
  if (log) log->calls.push_back({t, native, sigma});
  try {
    Grid eps = f.predict(input, sigma, native, conditioning);
    if (eps.shape() != full || eps.channels() != f.channels())
      throw SamplingFailure(t, "denoiser returned a wrongly shaped estimate at step t=" + std::to_string(t));
    return eps;
  } catch (const NonFiniteValue& e) {
    throw SamplingFailure(t, "denoiser returned non-finite values at step t=" + std::to_string(t) + ": " + e.what());
  }
}

void check_sampler_inputs(const Denoiser& f, const Grid& conditioning, const NoiseSchedule& noise,
                          const ShapeSchedule& shapes, const ChurnParams& churn) {
  shapes.validate();
  churn.validate();
  if (noise.steps() < 1) throw InvalidArgument("sample: empty noise schedule");
  if (noise.steps() != shapes.steps()) throw InvalidArgument("sample: noise and shape schedules have different lengths");
  if (conditioning.shape() != shapes.full)
    throw InvalidArgument("sample: conditioning must be at the full target resolution");
  if (f.channels() < 1) throw InvalidArgument("sample: denoiser reports no channels");
}

double churn_gamma(const ChurnParams& churn, double sigma, int steps) {
  if (!(sigma >= churn.s_min && sigma <= churn.s_max)) return 0.0;
  return std::min(churn.s_churn / steps, std::sqrt(2.0) - 1.0);
}

// x += scale * z, z ~ N(0, I) from the given stream.
void add_noise(std::vector<double>& x, double scale, rng::Stream stream) {
  for (double& v : x) v += scale * stream.normal();
}

void axpy(std::vector<double>& x, double a, std::span<const double> y) {
  for (std::size_t i = 0; i < x.size(); ++i) x[i] += a * y[i];
}

}  // namespace

Corrupted corrupt(const Grid& x0, int t, const NoiseSchedule& noise, const ShapeSchedule& shapes, rng::Stream& stream,
                  DiffusionMode mode) {
  check_step(t, noise, shapes);
  if (x0.shape() != shapes.full) throw InvalidArgument("corrupt: x0 must be at the schedule's full resolution");
  const Grid xt = downsample(x0, shapes.at_step(t));
  const double sigma = noise.at_step(t);
  std::vector<double> eps(xt.size());
  stream.fill_normal(eps);
  std::vector<double> z(xt.size());
  const auto xv = xt.values();
  if (mode == DiffusionMode::kVarianceExploding) {
    for (std::size_t i = 0; i < z.size(); ++i) z[i] = xv[i] + sigma * eps[i];
  } else {
    const double ab = alpha_bar(sigma);
    const double a = std::sqrt(ab), b = std::sqrt(1.0 - ab);
    for (std::size_t i = 0; i < z.size(); ++i) z[i] = a * xv[i] + b * eps[i];
  }
  return {xt.with_data(std::move(z)), xt.with_data(std::move(eps))};
}

LossWeighting parse_loss_weighting(const std::string& s) {
  if (s == "edm-eps") return LossWeighting::kEdmEpsilon;
  if (s == "edm") return LossWeighting::kEdmDenoiser;
  if (s == "unit") return LossWeighting::kUnit;
  throw InvalidArgument("unknown loss weighting '" + s + "' (edm-eps|edm|unit)");
}

std::string to_string(LossWeighting w) {
  switch (w) {
    case LossWeighting::kEdmEpsilon: return "edm-eps";
    case LossWeighting::kEdmDenoiser: return "edm";
    case LossWeighting::kUnit: return "unit";
  }
  return "?";
}

double loss_weight(LossWeighting w, double sigma, double sd) {
  switch (w) {
    case LossWeighting::kEdmEpsilon: return (sigma * sigma + sd * sd) / (sd * sd);
    case LossWeighting::kEdmDenoiser: return (sigma * sigma + sd * sd) / ((sigma * sd) * (sigma * sd));
    case LossWeighting::kUnit: return 1.0;
  }
  return 1.0;
}

LossExample make_loss_example(const Grid& x0, int t, const NoiseSchedule& noise, const ShapeSchedule& shapes,
                              rng::Stream& stream) {
  check_step(t, noise, shapes);
  if (x0.shape() != shapes.full) throw InvalidArgument("hedm_loss: x0 must be at the schedule's full resolution");
  const Shape s = shapes.at_step(t);
  const double sigma = noise.at_step(t);
  const Grid x_tilde = upsample(downsample(x0, s), shapes.full);
  std::vector<double> eps(x0.size());
  stream.fill_normal(eps);
  std::vector<double> in(x_tilde.values().begin(), x_tilde.values().end());
  for (std::size_t i = 0; i < in.size(); ++i) in[i] += sigma * eps[i];
  return {x0.with_data(std::move(in)), std::move(eps), sigma, s};
}

double hedm_loss(const Denoiser& f, const Grid& x0, const Grid& conditioning, int t, const NoiseSchedule& noise,
                 const ShapeSchedule& shapes, rng::Stream& stream, const LossSettings& settings) {
  if (conditioning.shape() != x0.shape())
    throw InvalidArgument("hedm_loss: conditioning shape differs from x0 shape");
  const LossExample ex = make_loss_example(x0, t, noise, shapes, stream);
  const Grid eps_hat = f.predict(ex.input, ex.sigma, ex.shape, conditioning);
  if (eps_hat.size() != ex.eps.size()) throw InvalidArgument("hedm_loss: denoiser output has the wrong size");
  const double sq = kernels::sum_squared_diff(ex.eps, eps_hat.values());
  return loss_weight(settings.weighting, ex.sigma, settings.sigma_data) * sq / static_cast<double>(ex.eps.size());
}

PixelCount count_pixels(const RunLog& log) {
  PixelCount pc;
  for (const NetworkCall& c : log.calls) pc.total += c.shape.area();
  const unsigned long long denom = static_cast<unsigned long long>(log.steps) * log.full.area();
  pc.alpha = denom == 0 ? 0.0 : static_cast<double>(pc.total) / static_cast<double>(denom);
  return pc;
}

std::uint64_t member_seed(std::uint64_t seed, int member) noexcept {
  return rng::stream_id({seed, static_cast<std::uint64_t>(rng::Role::kEnsemble), static_cast<std::uint64_t>(member)});
}

Grid sample(const Denoiser& f, const Grid& conditioning, const NoiseSchedule& noise, const ShapeSchedule& shapes,
            const ChurnParams& churn, std::uint64_t seed, const SampleOptions& options) {
  check_sampler_inputs(f, conditioning, noise, shapes, churn);
  const int T = noise.steps();
  const int C = f.channels();
  const Shape full = shapes.full;
  if (options.log) *options.log = RunLog{full, T, {}};

  Shape cur = shapes.at_step(T);
  std::vector<double> x(cur.area() * C);
  rng::make_stream(seed, rng::Role::kInit).fill_normal(x);
  if (options.mode == DiffusionMode::kVarianceExploding)
    for (double& v : x) v *= noise.sigmas.front();

  for (int i = 0; i < T; ++i) {
    const int t = T - i;
    const double sigma = noise.sigmas[i];
    const double sigma_next = i + 1 < T ? noise.sigmas[i + 1] : 0.0;
    std::vector<double> x_full;
    if (options.mode == DiffusionMode::kVarianceExploding) {
      const double gamma = churn_gamma(churn, sigma, T);
      const double sigma_hat = sigma * (1.0 + gamma);
      if (gamma > 0.0)
        add_noise(x, std::sqrt(sigma_hat * sigma_hat - sigma * sigma) * churn.s_noise,
                  rng::make_stream(seed, rng::Role::kChurn, i));
      x_full = resampled(x, C, cur, full);
      const Grid eps = call_denoiser(f, x_full, full, cur, sigma_hat, conditioning, t, options.log);
      axpy(x_full, sigma_next - sigma_hat, eps.values());
    } else {
      const double ab = alpha_bar(sigma);
      const double ab_prev = i + 1 < T ? alpha_bar(sigma_next) : 1.0;
      const double alpha = ab / ab_prev;
      x_full = resampled(x, C, cur, full);
      std::vector<double> ve_input(x_full);
      const double to_ve = 1.0 / std::sqrt(ab);
      for (double& v : ve_input) v *= to_ve;
      const Grid eps = call_denoiser(f, std::move(ve_input), full, cur, sigma, conditioning, t, options.log);
      const double c_eps = (1.0 - alpha) / std::sqrt(1.0 - ab);
      const double inv_sqrt_alpha = 1.0 / std::sqrt(alpha);
      const auto ev = eps.values();
      for (std::size_t j = 0; j < x_full.size(); ++j) x_full[j] = inv_sqrt_alpha * (x_full[j] - c_eps * ev[j]);
      if (t > 1) add_noise(x_full, std::sqrt(1.0 - alpha), rng::make_stream(seed, rng::Role::kAncestral, i));
    }
    for (double v : x_full)
      if (!std::isfinite(v)) throw SamplingFailure(t, "sampler state became non-finite at step t=" + std::to_string(t));
    const Shape next = t > 1 ? shapes.at_step(t - 1) : full;
    x = resampled(x_full, C, full, next);
    cur = next;
  }
  return make_output(std::move(x), full, C, conditioning);
}

Grid vanilla_sample(const Denoiser& f, const Grid& conditioning, const NoiseSchedule& noise, const ChurnParams& churn,
                    std::uint64_t seed, const SampleOptions& options) {
  churn.validate();
  const int T = noise.steps();
  if (T < 1) throw InvalidArgument("vanilla_sample: empty noise schedule");
  const int C = f.channels();
  const Shape full = conditioning.shape();
  if (options.log) *options.log = RunLog{full, T, {}};

  std::vector<double> x(full.area() * C);
  rng::make_stream(seed, rng::Role::kInit).fill_normal(x);
  if (options.mode == DiffusionMode::kVarianceExploding)
    for (double& v : x) v *= noise.sigmas.front();

  for (int i = 0; i < T; ++i) {
    const int t = T - i;
    const double sigma = noise.sigmas[i];
    const double sigma_next = i + 1 < T ? noise.sigmas[i + 1] : 0.0;
    if (options.mode == DiffusionMode::kVarianceExploding) {
      const double gamma = churn_gamma(churn, sigma, T);
      const double sigma_hat = sigma * (1.0 + gamma);
      if (gamma > 0.0)
        add_noise(x, std::sqrt(sigma_hat * sigma_hat - sigma * sigma) * churn.s_noise,
                  rng::make_stream(seed, rng::Role::kChurn, i));
      const Grid eps = call_denoiser(f, x, full, full, sigma_hat, conditioning, t, options.log);
      axpy(x, sigma_next - sigma_hat, eps.values());
    } else {
      const double ab = alpha_bar(sigma);
      const double ab_prev = i + 1 < T ? alpha_bar(sigma_next) : 1.0;
      const double alpha = ab / ab_prev;
      std::vector<double> ve_input(x);
      const double to_ve = 1.0 / std::sqrt(ab);
      for (double& v : ve_input) v *= to_ve;
      const Grid eps = call_denoiser(f, std::move(ve_input), full, full, sigma, conditioning, t, options.log);
      const double c_eps = (1.0 - alpha) / std::sqrt(1.0 - ab);
      const double inv_sqrt_alpha = 1.0 / std::sqrt(alpha);
      const auto ev = eps.values();
      for (std::size_t j = 0; j < x.size(); ++j) x[j] = inv_sqrt_alpha * (x[j] - c_eps * ev[j]);
      if (t > 1) add_noise(x, std::sqrt(1.0 - alpha), rng::make_stream(seed, rng::Role::kAncestral, i));
    }
    for (double v : x)
      if (!std::isfinite(v)) throw SamplingFailure(t, "sampler state became non-finite at step t=" + std::to_string(t));
  }
  return make_output(std::move(x), full, C, conditioning);
}

void TrainConfig::validate() const {
  if (epochs < 1 || batch_size < 1 || steps < 2) throw InvalidArgument("train: epochs, batch_size must be >= 1 and steps >= 2");
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) throw InvalidArgument("train: learning_rate must be >= 0");
  if (!(loss.sigma_data > 0.0)) throw InvalidArgument("train: sigma_data must be positive");
}

TrainResult train(ToyDenoiser model, const std::vector<TrainingPair>& dataset, const TrainConfig& cfg,
                  const EpochCallback& on_epoch) {
  cfg.validate();
  if (dataset.empty()) throw InvalidArgument("train: empty dataset");
  const Shape full = dataset.front().fine.shape();
  const Shape coarse = dataset.front().coarse.shape();
  for (const auto& p : dataset)
    if (p.fine.shape() != full || p.coarse.shape() != coarse) throw InvalidArgument("train: inconsistent pair shapes");
  const ToyArchitecture& arch = model.architecture();
  if (dataset.front().fine.channels() != arch.target_channels || dataset.front().coarse.channels() != arch.cond_channels)
    throw InvalidArgument("train: dataset channels do not match the architecture");

  const NoiseSchedule noise = karras_sigmas(cfg.sigma_min, cfg.sigma_max, cfg.rho, cfg.steps);
  const ShapeSchedule shapes = make_shapes(cfg.shape_kind, full.h, full.w, cfg.steps, cfg.tandem_k);
  std::vector<Grid> conditions;
  conditions.reserve(dataset.size());
  for (const auto& p : dataset) conditions.push_back(upsample(p.coarse, full));

  const std::size_t n = dataset.size();
  std::vector<std::size_t> order(n);
  std::vector<double> grad(model.parameters().size());
  TrainResult result{std::move(model), {}};
  std::span<double> params = result.model.mutable_parameters();

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    auto shuffle = rng::make_stream(cfg.seed, rng::Role::kShuffle, static_cast<std::uint64_t>(epoch));
    for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[shuffle.below(i)]);

    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < n; start += cfg.batch_size) {
      const std::size_t end = std::min(n, start + static_cast<std::size_t>(cfg.batch_size));
      std::fill(grad.begin(), grad.end(), 0.0);
      for (std::size_t k = start; k < end; ++k) {
        const std::size_t j = order[k];
        auto stream = rng::make_stream(cfg.seed, rng::Role::kTrainStep, static_cast<std::uint64_t>(epoch), j);
        const int t = 1 + static_cast<int>(stream.below(static_cast<std::uint64_t>(cfg.steps)));
        const LossExample ex = make_loss_example(dataset[j].fine, t, noise, shapes, stream);
        const double w = loss_weight(cfg.loss.weighting, ex.sigma, cfg.loss.sigma_data);
        epoch_loss += result.model.loss_and_gradient(ex.input, ex.sigma, ex.shape, conditions[j], ex.eps, w, grad);
      }
      const double scale = cfg.learning_rate / static_cast<double>(end - start);
      for (std::size_t p = 0; p < params.size(); ++p) params[p] -= scale * grad[p];
    }
    epoch_loss /= static_cast<double>(n);
    const bool params_finite = std::all_of(params.begin(), params.end(), [](double v) { return std::isfinite(v); });
    if (!std::isfinite(epoch_loss) || !params_finite)
      throw TrainingDiverged(epoch - 1, "training diverged in epoch " + std::to_string(epoch + 1) +
                                            " (last finite epoch: " + std::to_string(epoch) + ")");
    result.loss_curve.push_back(epoch_loss);
    if (on_epoch) on_epoch(epoch, epoch_loss);
  }
  return result;
}

}  // namespace hdd
