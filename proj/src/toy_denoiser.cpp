#include "hdd/toy_denoiser.hpp"

#include <cmath>

#include "hdd/error.hpp"
#include "hdd/kernels.hpp"
#include "hdd/rng.hpp"

namespace hdd {
namespace {

struct Precond {
  double c_in, c_skip, c_out;
  Precond(double sigma, double sd) {
    const double s2 = sigma * sigma, d2 = sd * sd;
    c_in = 1.0 / std::sqrt(s2 + d2);
    c_skip = d2 / (s2 + d2);
    c_out = sigma * sd / std::sqrt(s2 + d2);
  }
};

// The skip path is centred on the conditioning field when it matches the
// target, so an untrained network starts from a Gaussian posterior around it.
std::vector<double> centre_of(const ToyArchitecture& a, const Grid& cond, std::size_t n) {
  if (a.cond_channels != a.target_channels) return std::vector<double>(n, 0.0);
  return {cond.values().begin(), cond.values().end()};
}

}  // namespace

std::size_t ToyArchitecture::parameter_count() const noexcept { return ToyLayout::of(*this).end; }

void ToyArchitecture::validate() const {
  if (target_channels < 1 || cond_channels < 0 || width < 1) throw InvalidArgument("toy architecture: bad channel counts");
  if (!(sigma_data > 0.0)) throw InvalidArgument("toy architecture: sigma_data must be positive");
}

ToyLayout ToyLayout::of(const ToyArchitecture& a) noexcept {
  const std::size_t cin = a.input_channels(), w = a.width, c = a.target_channels;
  ToyLayout l{};
  l.w1 = 0;
  l.b1 = l.w1 + w * cin * 9;
  l.w2 = l.b1 + w;
  l.b2 = l.w2 + w * w * 9;
  l.w3 = l.b2 + w;
  l.b3 = l.w3 + c * w * 9;
  l.end = l.b3 + c;
  return l;
}

struct ToyDenoiser::Activations {
  int h = 0, w = 0;
  double sigma = 0.0;
  std::vector<double> in, a1, h1, a2, h2, f;
};

ToyDenoiser::ToyDenoiser(ToyArchitecture arch) : arch_(arch) {
  arch_.validate();
  params_.assign(arch_.parameter_count(), 0.0);
}

ToyDenoiser::ToyDenoiser(ToyArchitecture arch, std::vector<double> params) : arch_(arch), params_(std::move(params)) {
  arch_.validate();
  if (params_.size() != arch_.parameter_count())
    throw InvalidArgument("toy denoiser: parameter count " + std::to_string(params_.size()) + " does not match architecture (" +
                          std::to_string(arch_.parameter_count()) + ")");
  for (double p : params_)
    if (!std::isfinite(p)) throw NonFiniteValue("toy denoiser: non-finite parameter");
}

ToyDenoiser ToyDenoiser::initialized(ToyArchitecture arch, std::uint64_t seed) {
  ToyDenoiser net(arch);
  const ToyLayout l = ToyLayout::of(arch);
  auto stream = rng::make_stream(seed, rng::Role::kParamInit);
  auto fill = [&](std::size_t from, std::size_t to, double stddev) {
    for (std::size_t i = from; i < to; ++i) net.params_[i] = stddev * stream.normal();
  };
  fill(l.w1, l.b1, std::sqrt(1.0 / (9.0 * arch.input_channels())));
  fill(l.w2, l.b2, std::sqrt(1.0 / (9.0 * arch.width)));
  fill(l.w3, l.b3, 0.1 * std::sqrt(1.0 / (9.0 * arch.width)));
  return net;
}

void ToyDenoiser::forward(const Grid& x, double sigma, Shape shape, const Grid& cond, Activations& act) const {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw InvalidArgument("toy denoiser: sigma must be positive and finite");
  if (x.channels() != arch_.target_channels) throw InvalidArgument("toy denoiser: input channel count mismatch");
  if (cond.channels() != arch_.cond_channels && arch_.cond_channels > 0)
    throw InvalidArgument("toy denoiser: conditioning channel count mismatch");
  if (arch_.cond_channels > 0 && cond.shape() != x.shape())
    throw InvalidArgument("toy denoiser: conditioning must be at the input resolution");
  const int h = x.height(), w = x.width();
  const std::size_t plane = x.plane_size();
  const int C = arch_.target_channels, Cc = arch_.cond_channels, width = arch_.width;
  const Precond pc(sigma, arch_.sigma_data);
  act.h = h;
  act.w = w;
  act.sigma = sigma;
  act.in.assign(plane * arch_.input_channels(), 0.0);
  const auto xv = x.values();
  for (std::size_t i = 0; i < plane * C; ++i) act.in[i] = pc.c_in * xv[i];
  if (Cc > 0) std::copy(cond.values().begin(), cond.values().end(), act.in.begin() + plane * C);
  const double scalars[3] = {std::log(sigma) / 4.0, static_cast<double>(shape.h) / h, static_cast<double>(shape.w) / w};
  for (int s = 0; s < 3; ++s)
    std::fill_n(act.in.begin() + plane * (C + Cc + s), plane, scalars[s]);

  const ToyLayout l = ToyLayout::of(arch_);
  const std::span<const double> p(params_);
  act.a1.resize(plane * width);
  act.h1.resize(plane * width);
  act.a2.resize(plane * width);
  act.h2.resize(plane * width);
  act.f.resize(plane * C);
  kernels::conv3x3_forward(act.in, arch_.input_channels(), h, w, p.subspan(l.w1, l.b1 - l.w1), p.subspan(l.b1, width),
                           act.a1, width);
  kernels::softplus(act.a1, act.h1);
  kernels::conv3x3_forward(act.h1, width, h, w, p.subspan(l.w2, l.b2 - l.w2), p.subspan(l.b2, width), act.a2, width);
  kernels::softplus(act.a2, act.h2);
  kernels::conv3x3_forward(act.h2, width, h, w, p.subspan(l.w3, l.b3 - l.w3), p.subspan(l.b3, C), act.f, C);
}

Grid ToyDenoiser::predict(const Grid& x, double sigma, Shape shape, const Grid& cond) const {
  // Reused across calls; the buffers are a few MB at 64x64 and reallocating
  // them costs more than the first convolution.
  thread_local Activations act;
  forward(x, sigma, shape, cond, act);
  const Precond pc(sigma, arch_.sigma_data);
  const auto xv = x.values();
  const std::vector<double> mv = centre_of(arch_, cond, x.size());
  std::vector<double> eps(x.size());
  for (std::size_t i = 0; i < eps.size(); ++i)
    eps[i] = ((1.0 - pc.c_skip) * (xv[i] - mv[i]) - pc.c_out * act.f[i]) / sigma;
  return x.with_data(std::move(eps));
}

double ToyDenoiser::loss_and_gradient(const Grid& x, double sigma, Shape shape, const Grid& cond,
                                      std::span<const double> target, double weight, std::span<double> grad) const {
  if (target.size() != x.size()) throw InvalidArgument("toy denoiser: target size mismatch");
  thread_local Activations act;
  forward(x, sigma, shape, cond, act);
  const Precond pc(sigma, arch_.sigma_data);
  const auto xv = x.values();
  const std::size_t n = x.size();
  const std::vector<double> mv = centre_of(arch_, cond, x.size());
  std::vector<double> g_f(n);
  double sq = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double eps_hat = ((1.0 - pc.c_skip) * (xv[i] - mv[i]) - pc.c_out * act.f[i]) / sigma;
    const double r = eps_hat - target[i];
    sq += r * r;
    // d loss / d f = weight * 2 r / n * d eps_hat / d f
    g_f[i] = weight * 2.0 * r / static_cast<double>(n) * (-pc.c_out / sigma);
  }
  const double loss = weight * sq / static_cast<double>(n);
  if (grad.empty()) return loss;
  if (grad.size() != params_.size()) throw InvalidArgument("toy denoiser: gradient buffer size mismatch");

  const int h = act.h, w = act.w, C = arch_.target_channels, width = arch_.width;
  const ToyLayout l = ToyLayout::of(arch_);
  const std::span<const double> p(params_);
  thread_local std::vector<double> g_h2, g_h1;
  g_h2.resize(act.h2.size());
  g_h1.resize(act.h1.size());

  kernels::conv3x3_backward_params(act.h2, width, h, w, g_f, C, grad.subspan(l.w3, l.b3 - l.w3), grad.subspan(l.b3, C));
  kernels::conv3x3_backward_input(g_f, C, h, w, p.subspan(l.w3, l.b3 - l.w3), g_h2, width);
  kernels::scale_by_sigmoid(act.a2, g_h2);
  kernels::conv3x3_backward_params(act.h1, width, h, w, g_h2, width, grad.subspan(l.w2, l.b2 - l.w2),
                                   grad.subspan(l.b2, width));
  kernels::conv3x3_backward_input(g_h2, width, h, w, p.subspan(l.w2, l.b2 - l.w2), g_h1, width);
  kernels::scale_by_sigmoid(act.a1, g_h1);
  kernels::conv3x3_backward_params(act.in, arch_.input_channels(), h, w, g_h1, width, grad.subspan(l.w1, l.b1 - l.w1),
                                   grad.subspan(l.b1, width));
  return loss;
}

}  // namespace hdd
