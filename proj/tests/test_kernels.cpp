#include <cmath>
#include <vector>

#include "doctest.h"
#include "hdd/error.hpp"
#include "hdd/kernels.hpp"
#include "hdd/rng.hpp"

using namespace hdd;

namespace {

std::vector<double> normals(std::size_t n, std::uint64_t seed) {
  std::vector<double> v(n);
  rng::make_stream(seed, rng::Role::kTest, 5).fill_normal(v);
  return v;
}

double max_rel(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]) / std::max(1.0, std::abs(b[i])));
  return m;
}

// Direct evaluation of one output of a zero-padded 3x3 convolution.
double conv_at(const std::vector<double>& in, int cin, int h, int w, const std::vector<double>& wt, int co, int y, int x) {
  double s = 0.0;
  for (int ci = 0; ci < cin; ++ci)
    for (int dy = -1; dy <= 1; ++dy)
      for (int dx = -1; dx <= 1; ++dx) {
        const int yy = y + dy, xx = x + dx;
        if (yy < 0 || yy >= h || xx < 0 || xx >= w) continue;
        s += wt[((co * cin + ci) * 3 + dy + 1) * 3 + dx + 1] * in[(ci * h + yy) * w + xx];
      }
  return s;
}

}  // namespace

TEST_SUITE("kernels") {
  TEST_CASE("serial convolution against direct evaluation") {
    const int cin = 3, cout = 2, h = 5, w = 7;
    const auto in = normals(cin * h * w, 1), wt = normals(cout * cin * 9, 2), b = normals(cout, 3);
    std::vector<double> out(cout * h * w);
    kernels::serial::conv3x3_forward(in, cin, h, w, wt, b, out, cout);
    for (int co = 0; co < cout; ++co)
      for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
          CHECK(out[(co * h + y) * w + x] == doctest::Approx(b[co] + conv_at(in, cin, h, w, wt, co, y, x)).epsilon(1e-13));
  }

  TEST_CASE("parallel convolution passes match the serial reference") {
    struct Dims {
      int cin, cout, h, w;
    };
    for (const Dims d : {Dims{5, 32, 64, 64}, Dims{32, 32, 17, 23}, Dims{32, 1, 9, 8}, Dims{3, 11, 1, 1}, Dims{1, 9, 2, 30}}) {
      const auto in = normals(d.cin * d.h * d.w, 4), wt = normals(d.cout * d.cin * 9, 5), b = normals(d.cout, 6);
      const auto g = normals(d.cout * d.h * d.w, 7);
      std::vector<double> a(d.cout * d.h * d.w), r(a.size());
      kernels::conv3x3_forward(in, d.cin, d.h, d.w, wt, b, a, d.cout);
      kernels::serial::conv3x3_forward(in, d.cin, d.h, d.w, wt, b, r, d.cout);
      CHECK(max_rel(a, r) < 1e-12);

      std::vector<double> gi(in.size()), gr(in.size());
      kernels::conv3x3_backward_input(g, d.cout, d.h, d.w, wt, gi, d.cin);
      kernels::serial::conv3x3_backward_input(g, d.cout, d.h, d.w, wt, gr, d.cin);
      CHECK(max_rel(gi, gr) < 1e-12);

      // Parameter gradients accumulate into pre-filled buffers.
      std::vector<double> gw(wt.size(), 0.5), gb(b.size(), -0.25), rw(gw), rb(gb);
      kernels::conv3x3_backward_params(in, d.cin, d.h, d.w, g, d.cout, gw, gb);
      kernels::serial::conv3x3_backward_params(in, d.cin, d.h, d.w, g, d.cout, rw, rb);
      CHECK(max_rel(gw, rw) < 1e-11);
      CHECK(max_rel(gb, rb) < 1e-12);
    }
  }

  TEST_CASE("backward input is the adjoint of forward") {
    const int cin = 4, cout = 3, h = 6, w = 9;
    const auto x = normals(cin * h * w, 8), y = normals(cout * h * w, 9), wt = normals(cout * cin * 9, 10);
    const std::vector<double> zero(cout, 0.0);
    std::vector<double> ax(y.size()), aty(x.size());
    kernels::conv3x3_forward(x, cin, h, w, wt, zero, ax, cout);
    kernels::conv3x3_backward_input(y, cout, h, w, wt, aty, cin);
    double lhs = 0.0, rhs = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) lhs += ax[i] * y[i];
    for (std::size_t i = 0; i < x.size(); ++i) rhs += x[i] * aty[i];
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
  }

  TEST_CASE("activations") {
    std::vector<double> a = normals(100000, 11);
    for (double& v : a) v *= 20.0;
    a[0] = 0.0;
    a[1] = -700.0;
    a[2] = 700.0;
    std::vector<double> p(a.size()), r(a.size());
    kernels::softplus(a, p);
    kernels::serial::softplus(a, r);
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(std::abs(p[i] - r[i]) <= 1e-14 * std::max(1.0, r[i]));
    CHECK(p[0] == doctest::Approx(std::log(2.0)).epsilon(1e-15));

    std::vector<double> gp(a.size(), 3.0), gr(a.size(), 3.0);
    kernels::scale_by_sigmoid(a, gp);
    kernels::serial::scale_by_sigmoid(a, gr);
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(std::abs(gp[i] - gr[i]) <= 1e-14 * 3.0);
    CHECK(gp[0] == 1.5);
    std::vector<double> short_out(3);
    CHECK_THROWS_AS(kernels::softplus(a, short_out), InvalidArgument);
  }

  TEST_CASE("reductions") {
    const auto v = normals(10001, 12), w = normals(10001, 13);
    CHECK(kernels::weighted_sum(v, w) == doctest::Approx(kernels::serial::weighted_sum(v, w)).epsilon(1e-12));
    CHECK(kernels::sum_squared_diff(v, w) == doctest::Approx(kernels::serial::sum_squared_diff(v, w)).epsilon(1e-12));
  }
}
