#pragma once

#include <cstddef>
#include <span>
#include <vector>

// Data-parallel inner loops. The OpenMP versions live in hdd::kernels; the
// straightforward loops in hdd::kernels::serial are the reference the tests
// compare against.
namespace hdd::kernels {

// One axis of a cell-center bilinear map: out[i] = lerp(in[lo[i]], in[hi[i]], t[i]).
struct AxisTaps {
  std::vector<int> lo;
  std::vector<int> hi;
  std::vector<double> t;
};

AxisTaps bilinear_taps(int n_in, int n_out);

// planes x [h_in][w_in] -> planes x [h_out][w_out]
void resample_bilinear(std::span<const double> in, int planes, int h_in, int w_in, std::span<double> out,
                       int h_out, int w_out);

// 3x3 convolution, zero padding, stride 1.
// in [cin][h][w], weight [cout][cin][3][3], bias [cout], out [cout][h][w]
void conv3x3_forward(std::span<const double> in, int cin, int h, int w, std::span<const double> weight,
                     std::span<const double> bias, std::span<double> out, int cout);
// grad_in [cin][h][w] = conv^T(grad_out)
void conv3x3_backward_input(std::span<const double> grad_out, int cout, int h, int w,
                            std::span<const double> weight, std::span<double> grad_in, int cin);
// grad_weight, grad_bias accumulate (+=).
void conv3x3_backward_params(std::span<const double> in, int cin, int h, int w,
                             std::span<const double> grad_out, int cout, std::span<double> grad_weight,
                             std::span<double> grad_bias);

// Sum of w[i] * f(a[i], b[i]) style reductions used by the metrics.
double weighted_sum(std::span<const double> values, std::span<const double> weights);
double sum_squared_diff(std::span<const double> a, std::span<const double> b);

// out = softplus(a); vectorized, agrees with the serial form to a few ulp.
void softplus(std::span<const double> a, std::span<double> out);
// g *= sigmoid(a), the softplus derivative.
void scale_by_sigmoid(std::span<const double> a, std::span<double> g);

namespace serial {

void resample_bilinear(std::span<const double> in, int planes, int h_in, int w_in, std::span<double> out,
                       int h_out, int w_out);
void conv3x3_forward(std::span<const double> in, int cin, int h, int w, std::span<const double> weight,
                     std::span<const double> bias, std::span<double> out, int cout);
void conv3x3_backward_input(std::span<const double> grad_out, int cout, int h, int w,
                            std::span<const double> weight, std::span<double> grad_in, int cin);
void conv3x3_backward_params(std::span<const double> in, int cin, int h, int w,
                             std::span<const double> grad_out, int cout, std::span<double> grad_weight,
                             std::span<double> grad_bias);
double weighted_sum(std::span<const double> values, std::span<const double> weights);
double sum_squared_diff(std::span<const double> a, std::span<const double> b);
void softplus(std::span<const double> a, std::span<double> out);
void scale_by_sigmoid(std::span<const double> a, std::span<double> g);

}  // namespace serial
}  // namespace hdd::kernels
