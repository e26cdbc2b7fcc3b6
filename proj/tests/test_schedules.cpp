#include <boost/multiprecision/cpp_dec_float.hpp>
#include <cmath>
#include <sstream>

#include "doctest.h"
#include "hdd/error.hpp"
#include "hdd/rng.hpp"
#include "hdd/schedules.hpp"

using namespace hdd;
using Big = boost::multiprecision::cpp_dec_float_50;

namespace {

std::vector<Shape> shapes_of(std::initializer_list<std::pair<int, int>> l) {
  std::vector<Shape> v;
  for (auto [h, w] : l) v.push_back({h, w});
  return v;
}

// Independent integer evaluation of H - (t-1)/(T-1)*(H-1), rounded half up.
int ramp(int H, int t, int T) {
  const long num = static_cast<long>(H) * (T - 1) - static_cast<long>(t - 1) * (H - 1);
  const long den = T - 1;
  return std::max(1L, (2 * num + den) / (2 * den));
}

}  // namespace

TEST_SUITE("schedules") {
  TEST_CASE("karras endpoints and monotonicity") {
    const NoiseSchedule s = karras_sigmas(0.002, 80, 7, 50);
    CHECK(s.steps() == 50);
    CHECK(s.sigmas.front() == 80.0);
    CHECK(s.sigmas.back() == 0.002);
    for (int i = 1; i < 50; ++i) CHECK(s.sigmas[i] < s.sigmas[i - 1]);
    CHECK(s.at_step(50) == 80.0);
    CHECK(s.at_step(1) == 0.002);
    const double eps = 1e-6;
    const NoiseSchedule two = karras_sigmas(1.0, 1.0 + eps, 7, 2);
    CHECK(two.sigmas == std::vector<double>{1.0 + eps, 1.0});
  }

  TEST_CASE("karras interior values match a 50-digit evaluation") {
    const NoiseSchedule s = karras_sigmas(0.002, 80, 7, 50);
    const Big inv_rho = Big(1) / 7;
    const Big a = boost::multiprecision::pow(Big(80), inv_rho);
    const Big b = boost::multiprecision::pow(Big("0.002"), inv_rho);
    for (int i = 0; i < 50; ++i) {
      const Big ref = boost::multiprecision::pow(a + Big(i) / 49 * (b - a), Big(7));
      CHECK(s.sigmas[i] == doctest::Approx(ref.convert_to<double>()).epsilon(1e-13));
    }
  }

  TEST_CASE("karras rejects bad arguments") {
    CHECK_THROWS_AS(karras_sigmas(0.002, 80, 7, 1), InvalidArgument);
    CHECK_THROWS_AS(karras_sigmas(0.0, 80, 7, 10), InvalidArgument);
    CHECK_THROWS_AS(karras_sigmas(5, 1, 7, 10), InvalidArgument);
  }

  TEST_CASE("equally spaced ramp") {
    CHECK(equally_spaced_shapes(5, 5, 3).shapes == shapes_of({{5, 5}, {3, 3}, {1, 1}}));
    CHECK(equally_spaced_shapes(9, 4, 2).shapes == shapes_of({{9, 4}, {1, 1}}));
    const ShapeSchedule s = equally_spaced_shapes(144, 272, 50);
    CHECK(s.full == Shape{144, 272});
    for (int t = 1; t <= 50; ++t) {
      CHECK(s.at_step(t).h == ramp(144, t, 50));
      CHECK(s.at_step(t).w == ramp(272, t, 50));
    }
    CHECK_THROWS_AS(equally_spaced_shapes(5, 5, 1), InvalidArgument);
  }

  TEST_CASE("unit shrink") {
    const ShapeSchedule s = unit_shrink_shapes(144, 272, 50);
    CHECK(s.at_step(1) == Shape{144, 272});
    CHECK(s.at_step(50) == Shape{95, 223});
    for (int t = 2; t <= 50; ++t) {
      CHECK(s.at_step(t - 1).h - s.at_step(t).h == 1);
      CHECK(s.at_step(t - 1).w - s.at_step(t).w == 1);
    }
    CHECK(unit_shrink_shapes(3, 3, 5).shapes == shapes_of({{3, 3}, {2, 2}, {1, 1}, {1, 1}, {1, 1}}));
    CHECK(unit_shrink_shapes(7, 2, 1).shapes == shapes_of({{7, 2}}));
  }

  TEST_CASE("tandem grouping") {
    CHECK(tandem_shapes(144, 272, 50, 1).shapes == equally_spaced_shapes(144, 272, 50).shapes);
    CHECK(tandem_shapes(6, 5, 4, 4).shapes == shapes_of({{6, 5}, {6, 5}, {6, 5}, {6, 5}}));
    // Three levels on the ramp 8 -> 1: 8, 4.5 -> 5 (half up), 1.
    CHECK(tandem_shapes(8, 8, 6, 2).shapes == shapes_of({{8, 8}, {8, 8}, {5, 5}, {5, 5}, {1, 1}, {1, 1}}));
    // Short last group.
    CHECK(tandem_shapes(8, 8, 5, 2).shapes == shapes_of({{8, 8}, {8, 8}, {5, 5}, {5, 5}, {1, 1}}));
    CHECK_THROWS_AS(tandem_shapes(8, 8, 5, 6), InvalidArgument);
  }

  TEST_CASE("identity") {
    const ShapeSchedule s = identity_shapes(4, 4, 3);
    CHECK(s.shapes == shapes_of({{4, 4}, {4, 4}, {4, 4}}));
    CHECK(normalized_mean_area(s) == 1.0);
    CHECK(speedup(s) == 1.0);
  }

  TEST_CASE("normalized mean area and speedup") {
    const ShapeSchedule e = equally_spaced_shapes(5, 5, 3);
    CHECK(total_area(e) == 35);
    CHECK(normalized_mean_area(e) == doctest::Approx(7.0 / 15.0).epsilon(1e-15));
    CHECK(normalized_mean_area(equally_spaced_shapes(144, 272, 1000)) == doctest::Approx(1.0 / 3.0).epsilon(0.03));
    CHECK(std::abs(normalized_mean_area(equally_spaced_shapes(144, 272, 1000)) - 1.0 / 3.0) < 0.01);
    const ShapeSchedule u = unit_shrink_shapes(144, 272, 50);
    CHECK(std::abs(normalized_mean_area(u) - 0.760) < 0.001);
    CHECK(std::abs(speedup(u) - 1.32) < 0.01);
  }

  TEST_CASE("speedup times alpha is one") {
    for (auto s : {equally_spaced_shapes(31, 17, 9), unit_shrink_shapes(12, 40, 20), tandem_shapes(64, 64, 50, 3)})
      CHECK(speedup(s) * normalized_mean_area(s) == doctest::Approx(1.0).epsilon(1e-15));
  }

  TEST_CASE("unit-shrink closed form equals the brute-force area sum") {
    CHECK(unit_shrink_speedup_closed_form(144, 272, 50) == doctest::Approx(speedup(unit_shrink_shapes(144, 272, 50))).epsilon(1e-9));
    CHECK(unit_shrink_speedup_closed_form(7, 9, 1) == 1.0);
    {
      unsigned long long sum = 0;
      for (int t = 1; t <= 5; ++t) sum += static_cast<unsigned long long>(10 - (t - 1)) * (10 - (t - 1));
      CHECK(unit_shrink_speedup_closed_form(10, 10, 5) == doctest::Approx(5.0 * 100 / sum).epsilon(1e-12));
    }
    auto s = rng::make_stream(11, rng::Role::kCampaign, 1);
    for (int k = 0; k < 300; ++k) {
      const int H = 1 + static_cast<int>(s.below(200)), W = 1 + static_cast<int>(s.below(200));
      const int T = 1 + static_cast<int>(s.below(std::min(H, W)));
      CHECK(unit_shrink_speedup_closed_form(H, W, T) == doctest::Approx(speedup(unit_shrink_shapes(H, W, T))).epsilon(1e-9));
    }
    CHECK_THROWS_AS(unit_shrink_speedup_closed_form(10, 20, 11), InvalidArgument);
  }

  TEST_CASE("every constructor is monotone and starts at full resolution") {
    auto s = rng::make_stream(12, rng::Role::kCampaign, 2);
    for (int k = 0; k < 200; ++k) {
      const int H = 1 + static_cast<int>(s.below(80)), W = 1 + static_cast<int>(s.below(80));
      const int T = 2 + static_cast<int>(s.below(60));
      const int kk = 1 + static_cast<int>(s.below(T));
      for (const ShapeSchedule& sc : {equally_spaced_shapes(H, W, T), unit_shrink_shapes(H, W, T),
                                      tandem_shapes(H, W, T, kk), identity_shapes(H, W, T)}) {
        REQUIRE(sc.steps() == T);
        CHECK(sc.at_step(1) == Shape{H, W});
        for (int t = 2; t <= T; ++t) {
          CHECK(sc.at_step(t).h <= sc.at_step(t - 1).h);
          CHECK(sc.at_step(t).w <= sc.at_step(t - 1).w);
          CHECK(sc.at_step(t).h >= 1);
          CHECK(sc.at_step(t).w >= 1);
        }
      }
    }
  }

  TEST_CASE("kind parsing and schedule table") {
    CHECK(parse_shape_kind("tandem") == ShapeKind::kTandem);
    CHECK(to_string(ShapeKind::kUnit) == "unit");
    CHECK_THROWS_AS(parse_shape_kind("spiral"), InvalidArgument);
    std::ostringstream os;
    write_schedule_table(os, equally_spaced_shapes(5, 5, 3), karras_sigmas(0.002, 80, 7, 3));
    std::istringstream is(os.str());
    std::string header;
    std::getline(is, header);
    CHECK(header == "t h w sigma");
    int t, h, w;
    double sigma;
    is >> t >> h >> w >> sigma;
    CHECK(t == 1);
    CHECK(h == 5);
    CHECK(sigma == doctest::Approx(0.002));
  }

  TEST_CASE("churn validation") {
    ChurnParams p;
    CHECK_NOTHROW(p.validate());
    p.s_min = 5;
    p.s_max = 1;
    CHECK_THROWS_AS(p.validate(), InvalidArgument);
  }
}
