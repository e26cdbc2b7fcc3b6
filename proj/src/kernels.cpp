#include "hdd/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <vector>

#include "hdd/error.hpp"

namespace hdd::kernels {
namespace {

// Reductions are chunked with a fixed chunk size and combined in index order,
// so the result does not depend on the thread count.
constexpr std::size_t kChunk = 4096;

}  // namespace

AxisTaps bilinear_taps(int n_in, int n_out) {
  if (n_in < 1 || n_out < 1) throw InvalidArgument("bilinear_taps: axis lengths must be positive");
  AxisTaps taps;
  taps.lo.resize(n_out);
  taps.hi.resize(n_out);
  taps.t.resize(n_out);
  const double scale = static_cast<double>(n_in) / static_cast<double>(n_out);
  for (int i = 0; i < n_out; ++i) {
    double src = (i + 0.5) * scale - 0.5;
    src = std::clamp(src, 0.0, static_cast<double>(n_in - 1));
    int lo = static_cast<int>(std::floor(src));
    lo = std::min(lo, n_in - 1);
    const int hi = std::min(lo + 1, n_in - 1);
    taps.lo[i] = lo;
    taps.hi[i] = hi;
    taps.t[i] = src - lo;
  }
  return taps;
}

void resample_bilinear(std::span<const double> in, int planes, int h_in, int w_in, std::span<double> out,
                       int h_out, int w_out) {
  const AxisTaps ry = bilinear_taps(h_in, h_out);
  const AxisTaps rx = bilinear_taps(w_in, w_out);
  const std::size_t in_plane = static_cast<std::size_t>(h_in) * w_in;
  const std::size_t out_plane = static_cast<std::size_t>(h_out) * w_out;
  const long rows = static_cast<long>(planes) * h_out;
#pragma omp parallel for schedule(static)
  for (long pr = 0; pr < rows; ++pr) {
    const long p = pr / h_out;
    const int i = static_cast<int>(pr % h_out);
    const double* top = in.data() + p * in_plane + static_cast<std::size_t>(ry.lo[i]) * w_in;
    const double* bot = in.data() + p * in_plane + static_cast<std::size_t>(ry.hi[i]) * w_in;
    const double ty = ry.t[i];
    double* o = out.data() + p * out_plane + static_cast<std::size_t>(i) * w_out;
    for (int j = 0; j < w_out; ++j) {
      const double a = top[rx.lo[j]] + rx.t[j] * (top[rx.hi[j]] - top[rx.lo[j]]);
      const double b = bot[rx.lo[j]] + rx.t[j] * (bot[rx.hi[j]] - bot[rx.lo[j]]);
      o[j] = a + ty * (b - a);
    }
  }
}

namespace {

constexpr int kLanes = 8;

int round_up(int n, int m) { return (n + m - 1) / m * m; }

// [c][h][w] -> zero-bordered [c][h + 2][stride] with stride = round_up(w, 8) + 2.
std::vector<double> pad_planes(std::span<const double> in, int c, int h, int w, int stride) {
  std::vector<double> pad(static_cast<std::size_t>(c) * (h + 2) * stride, 0.0);
  for (int ch = 0; ch < c; ++ch)
    for (int y = 0; y < h; ++y)
      std::copy_n(in.data() + (static_cast<std::size_t>(ch) * h + y) * w, w,
                  pad.data() + (static_cast<std::size_t>(ch) * (h + 2) + y + 1) * stride + 1);
  return pad;
}

// One output row for CB consecutive output channels. `packed` holds the
// weights as [ci][tap][CB].
// Eight doubles; GCC/Clang lower this to whatever vector width the target has.
typedef double Lanes __attribute__((vector_size(kLanes * sizeof(double))));

inline Lanes load_lanes(const double* p) {
  Lanes v;
  std::memcpy(&v, p, sizeof v);
  return v;
}

// One output row for CB consecutive output channels. `packed` holds the
// weights as [ci][tap][CB].
template <int CB>
void conv_row(const double* pad, int cin, int h, int stride, int wb, int y, const double* packed,
              const double* bias, double* row_out) {
  for (int xb = 0; xb < wb; xb += kLanes) {
    Lanes acc[CB];
    for (int c = 0; c < CB; ++c) acc[c] = Lanes{} + bias[c];
    for (int ci = 0; ci < cin; ++ci) {
      const double* base = pad + (static_cast<std::size_t>(ci) * (h + 2) + y) * stride + xb;
      const double* wk = packed + static_cast<std::size_t>(ci) * 9 * CB;
      for (int ky = 0; ky < 3; ++ky) {
        const double* r = base + static_cast<std::size_t>(ky) * stride;
        for (int kx = 0; kx < 3; ++kx) {
          const Lanes v = load_lanes(r + kx);
          const double* wt = wk + (ky * 3 + kx) * CB;
          for (int c = 0; c < CB; ++c) acc[c] += wt[c] * v;
        }
      }
    }
    for (int c = 0; c < CB; ++c) std::memcpy(row_out + static_cast<std::size_t>(c) * wb + xb, &acc[c], sizeof(Lanes));
  }
}

template <int CB>
void conv_block(const double* pad, int cin, int h, int w, std::span<const double> weight, std::span<const double> bias,
                double* out, int co0) {
  const int wb = round_up(w, kLanes);
  const int stride = wb + 2;
  std::vector<double> packed(static_cast<std::size_t>(cin) * 9 * CB);
  for (int ci = 0; ci < cin; ++ci)
    for (int tap = 0; tap < 9; ++tap)
      for (int c = 0; c < CB; ++c)
        packed[(static_cast<std::size_t>(ci) * 9 + tap) * CB + c] =
            weight[((static_cast<std::size_t>(co0 + c)) * cin + ci) * 9 + tap];
  double b[CB];
  for (int c = 0; c < CB; ++c) b[c] = bias.empty() ? 0.0 : bias[co0 + c];
  const std::size_t plane = static_cast<std::size_t>(h) * w;
#pragma omp parallel
  {
    std::vector<double> row(static_cast<std::size_t>(CB) * wb);
#pragma omp for schedule(static)
    for (int y = 0; y < h; ++y) {
      conv_row<CB>(pad, cin, h, stride, wb, y, packed.data(), b, row.data());
      for (int c = 0; c < CB; ++c)
        std::copy_n(row.data() + static_cast<std::size_t>(c) * wb, w,
                    out + (co0 + c) * plane + static_cast<std::size_t>(y) * w);
    }
  }
}

void conv_padded(const double* pad, int cin, int h, int w, std::span<const double> weight,
                 std::span<const double> bias, std::span<double> out, int cout) {
  int co = 0;
  for (; co + 8 <= cout; co += 8) conv_block<8>(pad, cin, h, w, weight, bias, out.data(), co);
  for (; co < cout; ++co) conv_block<1>(pad, cin, h, w, weight, bias, out.data(), co);
}

}  // namespace

void conv3x3_forward(std::span<const double> in, int cin, int h, int w, std::span<const double> weight,
                     std::span<const double> bias, std::span<double> out, int cout) {
  const int stride = round_up(w, kLanes) + 2;
  const std::vector<double> pad = pad_planes(in, cin, h, w, stride);
  conv_padded(pad.data(), cin, h, w, weight, bias, out, cout);
}

void conv3x3_backward_input(std::span<const double> grad_out, int cout, int h, int w,
                            std::span<const double> weight, std::span<double> grad_in, int cin) {
  // The adjoint of a zero-padded 3x3 correlation is the same correlation with
  // the kernel transposed over channels and rotated by 180 degrees.
  std::vector<double> flipped(weight.size());
  for (int co = 0; co < cout; ++co)
    for (int ci = 0; ci < cin; ++ci)
      for (int tap = 0; tap < 9; ++tap)
        flipped[(static_cast<std::size_t>(ci) * cout + co) * 9 + (8 - tap)] =
            weight[(static_cast<std::size_t>(co) * cin + ci) * 9 + tap];
  const int stride = round_up(w, kLanes) + 2;
  const std::vector<double> pad = pad_planes(grad_out, cout, h, w, stride);
  conv_padded(pad.data(), cout, h, w, flipped, {}, grad_in, cin);
}

void conv3x3_backward_params(std::span<const double> in, int cin, int h, int w,
                             std::span<const double> grad_out, int cout, std::span<double> grad_weight,
                             std::span<double> grad_bias) {
  const int wb = round_up(w, kLanes);
  const int stride = wb + 2;
  const std::vector<double> pad = pad_planes(in, cin, h, w, stride);
  // grad_out widened to wb columns; the zero lanes cancel the padding reads.
  std::vector<double> g(static_cast<std::size_t>(cout) * h * wb, 0.0);
  for (int co = 0; co < cout; ++co)
    for (int y = 0; y < h; ++y)
      std::copy_n(grad_out.data() + (static_cast<std::size_t>(co) * h + y) * w, w,
                  g.data() + (static_cast<std::size_t>(co) * h + y) * wb);
  const std::size_t plane = static_cast<std::size_t>(h) * w;
#pragma omp parallel for schedule(static)
  for (int co = 0; co < cout; ++co) {
    const double* go = grad_out.data() + co * plane;
    double gb = 0.0;
    for (std::size_t p = 0; p < plane; ++p) gb += go[p];
    grad_bias[co] += gb;
    const double* gw = g.data() + static_cast<std::size_t>(co) * h * wb;
    for (int ci = 0; ci < cin; ++ci) {
      Lanes acc[9] = {};
      for (int y = 0; y < h; ++y) {
        const double* grow = gw + static_cast<std::size_t>(y) * wb;
        const double* base = pad.data() + (static_cast<std::size_t>(ci) * (h + 2) + y) * stride;
        for (int xb = 0; xb < wb; xb += kLanes) {
          const Lanes gv = load_lanes(grow + xb);
          for (int ky = 0; ky < 3; ++ky)
            for (int kx = 0; kx < 3; ++kx)
              acc[ky * 3 + kx] += gv * load_lanes(base + static_cast<std::size_t>(ky) * stride + xb + kx);
        }
      }
      double* gk = grad_weight.data() + (static_cast<std::size_t>(co) * cin + ci) * 9;
      for (int tap = 0; tap < 9; ++tap) {
        double s = 0.0;
        for (int j = 0; j < kLanes; ++j) s += acc[tap][j];
        gk[tap] += s;
      }
    }
  }
}

double weighted_sum(std::span<const double> values, std::span<const double> weights) {
  const std::size_t n = values.size();
  const std::size_t chunks = (n + kChunk - 1) / kChunk;
  std::vector<double> partial(chunks, 0.0);
#pragma omp parallel for schedule(static)
  for (std::size_t c = 0; c < chunks; ++c) {
    double s = 0.0;
    const std::size_t end = std::min(n, (c + 1) * kChunk);
    for (std::size_t i = c * kChunk; i < end; ++i) s += values[i] * weights[i];
    partial[c] = s;
  }
  double total = 0.0;
  for (double s : partial) total += s;
  return total;
}

double sum_squared_diff(std::span<const double> a, std::span<const double> b) {
  const std::size_t n = a.size();
  const std::size_t chunks = (n + kChunk - 1) / kChunk;
  std::vector<double> partial(chunks, 0.0);
#pragma omp parallel for schedule(static)
  for (std::size_t c = 0; c < chunks; ++c) {
    double s = 0.0;
    const std::size_t end = std::min(n, (c + 1) * kChunk);
    for (std::size_t i = c * kChunk; i < end; ++i) {
      const double d = a[i] - b[i];
      s += d * d;
    }
    partial[c] = s;
  }
  double total = 0.0;
  for (double s : partial) total += s;
  return total;
}

namespace serial {

void resample_bilinear(std::span<const double> in, int planes, int h_in, int w_in, std::span<double> out,
                       int h_out, int w_out) {
  // Evaluates the cell-center bilinear interpolant point by point.
  auto coord = [](int i, int n_in, int n_out, int& lo, int& hi, double& t) {
    double src = (i + 0.5) * n_in / n_out - 0.5;
    if (src < 0) src = 0;
    if (src > n_in - 1) src = n_in - 1;
    lo = static_cast<int>(std::floor(src));
    if (lo > n_in - 1) lo = n_in - 1;
    hi = lo + 1 < n_in ? lo + 1 : n_in - 1;
    t = src - lo;
  };
  for (int p = 0; p < planes; ++p) {
    for (int i = 0; i < h_out; ++i) {
      int y0, y1;
      double ty;
      coord(i, h_in, h_out, y0, y1, ty);
      for (int j = 0; j < w_out; ++j) {
        int x0, x1;
        double tx;
        coord(j, w_in, w_out, x0, x1, tx);
        auto v = [&](int y, int x) { return in[(static_cast<std::size_t>(p) * h_in + y) * w_in + x]; };
        const double a = v(y0, x0) + tx * (v(y0, x1) - v(y0, x0));
        const double b = v(y1, x0) + tx * (v(y1, x1) - v(y1, x0));
        out[(static_cast<std::size_t>(p) * h_out + i) * w_out + j] = a + ty * (b - a);
      }
    }
  }
}

void conv3x3_forward(std::span<const double> in, int cin, int h, int w, std::span<const double> weight,
                     std::span<const double> bias, std::span<double> out, int cout) {
  for (int co = 0; co < cout; ++co)
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        double s = bias[co];
        for (int ci = 0; ci < cin; ++ci)
          for (int ky = 0; ky < 3; ++ky)
            for (int kx = 0; kx < 3; ++kx) {
              const int yy = y + ky - 1, xx = x + kx - 1;
              if (yy < 0 || yy >= h || xx < 0 || xx >= w) continue;
              s += weight[((static_cast<std::size_t>(co) * cin + ci) * 3 + ky) * 3 + kx] *
                   in[(static_cast<std::size_t>(ci) * h + yy) * w + xx];
            }
        out[(static_cast<std::size_t>(co) * h + y) * w + x] = s;
      }
}

void conv3x3_backward_input(std::span<const double> grad_out, int cout, int h, int w,
                            std::span<const double> weight, std::span<double> grad_in, int cin) {
  std::fill(grad_in.begin(), grad_in.end(), 0.0);
  for (int co = 0; co < cout; ++co)
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        const double g = grad_out[(static_cast<std::size_t>(co) * h + y) * w + x];
        for (int ci = 0; ci < cin; ++ci)
          for (int ky = 0; ky < 3; ++ky)
            for (int kx = 0; kx < 3; ++kx) {
              const int yy = y + ky - 1, xx = x + kx - 1;
              if (yy < 0 || yy >= h || xx < 0 || xx >= w) continue;
              grad_in[(static_cast<std::size_t>(ci) * h + yy) * w + xx] +=
                  g * weight[((static_cast<std::size_t>(co) * cin + ci) * 3 + ky) * 3 + kx];
            }
      }
}

void conv3x3_backward_params(std::span<const double> in, int cin, int h, int w,
                             std::span<const double> grad_out, int cout, std::span<double> grad_weight,
                             std::span<double> grad_bias) {
  for (int co = 0; co < cout; ++co)
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        const double g = grad_out[(static_cast<std::size_t>(co) * h + y) * w + x];
        grad_bias[co] += g;
        for (int ci = 0; ci < cin; ++ci)
          for (int ky = 0; ky < 3; ++ky)
            for (int kx = 0; kx < 3; ++kx) {
              const int yy = y + ky - 1, xx = x + kx - 1;
              if (yy < 0 || yy >= h || xx < 0 || xx >= w) continue;
              grad_weight[((static_cast<std::size_t>(co) * cin + ci) * 3 + ky) * 3 + kx] +=
                  g * in[(static_cast<std::size_t>(ci) * h + yy) * w + xx];
            }
      }
}

double weighted_sum(std::span<const double> values, std::span<const double> weights) {
  double s = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) s += values[i] * weights[i];
  return s;
}

double sum_squared_diff(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return s;
}

void softplus(std::span<const double> a, std::span<double> out) {
  if (a.size() != out.size()) throw InvalidArgument("softplus: size mismatch");
  for (std::size_t i = 0; i < a.size(); ++i)
    out[i] = a[i] > 0.0 ? a[i] + std::log1p(std::exp(-a[i])) : std::log1p(std::exp(a[i]));
}

void scale_by_sigmoid(std::span<const double> a, std::span<double> g) {
  if (a.size() != g.size()) throw InvalidArgument("scale_by_sigmoid: size mismatch");
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] >= 0.0) {
      g[i] /= 1.0 + std::exp(-a[i]);
    } else {
      const double e = std::exp(a[i]);
      g[i] *= e / (1.0 + e);
    }
  }
}

}  // namespace serial
}  // namespace hdd::kernels
