#include <cmath>

#include "hdd/error.hpp"
#include "hdd/kernels.hpp"

// Built with -ffast-math so the loops below call the glibc vector math
// library. Nothing in this file tests for NaN or infinity.
namespace hdd::kernels {
namespace {

void check(std::size_t a, std::size_t b, const char* what) {
  if (a != b) throw InvalidArgument(std::string(what) + ": size mismatch");
}

}  // namespace

void softplus(std::span<const double> a, std::span<double> out) {
  check(a.size(), out.size(), "softplus");
  const double* x = a.data();
  double* y = out.data();
  const std::size_t n = a.size();
#pragma omp parallel for simd schedule(static) if (n > 65536)
  for (std::size_t i = 0; i < n; ++i) y[i] = std::fmax(x[i], 0.0) + std::log(1.0 + std::exp(-std::fabs(x[i])));
}

void scale_by_sigmoid(std::span<const double> a, std::span<double> g) {
  check(a.size(), g.size(), "scale_by_sigmoid");
  const double* x = a.data();
  double* y = g.data();
  const std::size_t n = a.size();
#pragma omp parallel for simd schedule(static) if (n > 65536)
  for (std::size_t i = 0; i < n; ++i) y[i] /= 1.0 + std::exp(-x[i]);
}

}  // namespace hdd::kernels
