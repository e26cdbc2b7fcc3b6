#include <cmath>
#include <numbers>
#include <vector>

#include "doctest.h"
#include "hdd/error.hpp"
#include "hdd/metrics.hpp"
#include "hdd/rng.hpp"
#include "oracles.hpp"

using namespace hdd;

namespace {

std::vector<double> draw(rng::Stream& s, std::size_t n, double lo, double hi) {
  std::vector<double> v(n);
  for (double& x : v) x = lo + (hi - lo) * s.uniform();
  return v;
}

Grid field(Shape sh, std::vector<double> v) { return Grid::from_data(sh, 1, std::move(v)); }

std::vector<std::vector<double>> months_of(const MonthlyClimatology& c) {
  std::vector<std::vector<double>> m(12);
  for (int k = 0; k < 12; ++k)
    for (std::size_t i = 0; i < c.shape().area(); ++i) m[k].push_back(c.at(k, i));
  return m;
}

MonthlyClimatology random_clim(rng::Stream& s, Shape sh) { return MonthlyClimatology(sh, draw(s, 12 * sh.area(), 0.0, 10.0)); }

}  // namespace

TEST_SUITE("metrics") {
  TEST_CASE("rmse and psnr examples") {
    const Grid o = field({3, 4}, std::vector<double>(12, 0.3));
    CHECK(rmse(o, o) == 0.0);
    CHECK(psnr(o, o, 1.0) == kPsnrCap);
    const Grid p = field({3, 4}, std::vector<double>(12, 0.4));
    CHECK(rmse(p, o) == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(psnr(p, o, 1.0) == doctest::Approx(20.0).epsilon(1e-12));
    CHECK_THROWS_AS(rmse(p, field({4, 3}, std::vector<double>(12))), InvalidArgument);
    // Constant observations have no default range.
    CHECK_THROWS_AS(psnr(p, o), InvalidArgument);
  }

  TEST_CASE("pixel metrics match the brute-force references") {
    auto s = rng::make_stream(1, rng::Role::kTest);
    for (int k = 0; k < 100; ++k) {
      const Shape sh{1 + static_cast<int>(s.below(7)), 1 + static_cast<int>(s.below(7))};
      if (sh.area() < 2) continue;
      const auto pv = draw(s, sh.area(), -2, 2), ov = draw(s, sh.area(), -2, 2);
      const Grid p = field(sh, pv), o = field(sh, ov);
      CHECK(std::abs(rmse(p, o) - static_cast<double>(oracle::rmse(pv, ov))) < 1e-12);
      const auto [lo, hi] = std::minmax_element(ov.begin(), ov.end());
      CHECK(std::abs(psnr(p, o) - static_cast<double>(oracle::psnr(pv, ov, *hi - *lo))) < 1e-12);
    }
  }

  TEST_CASE("crps examples") {
    const Grid o = field({1, 1}, {0.0});
    const std::vector<Grid> two{field({1, 1}, {0.0}), field({1, 1}, {1.0})};
    CHECK(crps(two, o) == doctest::Approx(0.25).epsilon(1e-15));
    const std::vector<Grid> same(5, field({2, 2}, {1, 2, 3, 4}));
    CHECK(crps(same, field({2, 2}, {1, 2, 3, 4})) == 0.0);
    CHECK_THROWS_AS(crps(std::vector<Grid>{o}, o), InvalidArgument);

    // Large Gaussian ensemble against the closed form E|X-y| - E|X-X'|/2.
    auto s = rng::make_stream(2, rng::Role::kTest);
    std::vector<Grid> members;
    for (int k = 0; k < 10000; ++k) members.push_back(field({1, 1}, {s.normal()}));
    const double expect = (std::numbers::sqrt2 - 1.0) / std::sqrt(std::numbers::pi);
    CHECK(crps(members, o) == doctest::Approx(expect).epsilon(0.02));
  }

  TEST_CASE("crps matches the pairwise reference") {
    auto s = rng::make_stream(3, rng::Role::kTest);
    for (int k = 0; k < 100; ++k) {
      const Shape sh{1 + static_cast<int>(s.below(5)), 1 + static_cast<int>(s.below(5))};
      const int m = 2 + static_cast<int>(s.below(9));
      std::vector<std::vector<double>> raw;
      std::vector<Grid> ens;
      for (int j = 0; j < m; ++j) {
        raw.push_back(draw(s, sh.area(), -1, 1));
        ens.push_back(field(sh, raw.back()));
      }
      const auto ov = draw(s, sh.area(), -1, 1);
      const auto w = draw(s, sh.area(), 0.1, 1.0);
      const double got = crps(ens, field(sh, ov), w);
      CHECK(std::abs(got - static_cast<double>(oracle::crps(raw, ov, w))) < 1e-12);
      CHECK(got >= 0.0);
    }
  }

  TEST_CASE("mape examples and errors") {
    const std::vector<double> w{1, 2, 3, 4};
    const Grid o = field({2, 2}, {1, 2, 3, 4});
    CHECK(mape(o, o, w) == 0.0);
    CHECK(mape(field({2, 2}, {1.5, 3, 4.5, 6}), o, w) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(mape(field({2, 2}, {3, 6, 9, 12}), o, w) == doctest::Approx(2.0).epsilon(1e-15));
    try {
      mape(o, field({2, 2}, {1, 2, 0, 4}), w);
      FAIL("expected DivisionByZero");
    } catch (const DivisionByZero& e) {
      CHECK(e.row() == 1);
      CHECK(e.col() == 0);
    }
    CHECK_THROWS_AS(mape(o, o, std::vector<double>{1, 2}), InvalidArgument);
    CHECK_THROWS_AS(mape(o, o, std::vector<double>{0, 0, 0, 0}), InvalidArgument);
  }

  TEST_CASE("scor examples") {
    const std::vector<double> w{1, 1, 2, 0.5, 3, 1};
    const std::vector<double> ov{1, 4, 2, 8, 5, 7};
    const Grid o = field({2, 3}, ov);
    std::vector<double> affine(ov), neg(ov);
    for (double& v : affine) v = 3.0 * v - 2.0;
    for (double& v : neg) v = -v;
    CHECK(scor(o, o, w) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(scor(field({2, 3}, affine), o, w) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(scor(field({2, 3}, neg), o, w) == doctest::Approx(-1.0).epsilon(1e-14));
    CHECK_THROWS_AS(scor(field({2, 3}, std::vector<double>(6, 2.0)), o, w), DegenerateField);
  }

  TEST_CASE("mape and scor match the brute-force references") {
    auto s = rng::make_stream(4, rng::Role::kTest);
    for (int k = 0; k < 100; ++k) {
      const Shape sh{2 + static_cast<int>(s.below(6)), 2 + static_cast<int>(s.below(6))};
      const auto pv = draw(s, sh.area(), 0.1, 5), ov = draw(s, sh.area(), 0.1, 5), w = draw(s, sh.area(), 0.0, 1.0);
      CHECK(std::abs(mape(field(sh, pv), field(sh, ov), w) - static_cast<double>(oracle::mape(pv, ov, w))) < 1e-12);
      CHECK(std::abs(scor(field(sh, pv), field(sh, ov), w) - static_cast<double>(oracle::scor(pv, ov, w))) < 1e-12);
    }
  }

  TEST_CASE("climatology derived fields") {
    std::vector<double> v(12 * 2, 1.0);
    v[3 * 2 + 0] = 5.0;   // cell 0 peaks in April
    v[0 * 2 + 1] = 4.0;   // cell 1 ties January and November
    v[10 * 2 + 1] = 4.0;
    const MonthlyClimatology c({1, 2}, v);
    CHECK(c.phase() == std::vector<int>{4, 1});
    CHECK(c.amplitude()[0] == doctest::Approx(5.0 - 16.0 / 12.0));
    const Grid annual = c.annual_total();
    CHECK(annual.values()[0] == doctest::Approx(365.0 + 4.0 * 30));
    CHECK(annual.values()[1] == doctest::Approx(365.0 + 3.0 * 31 + 3.0 * 30));
    const Grid g = c.to_grid();
    CHECK(g.channels() == 12);
    CHECK(g.channel_names().front() == "m01");
    CHECK(g.channel_names().back() == "m12");
    CHECK(MonthlyClimatology::from_grid(g).values().size() == v.size());
    v[5] = -1.0;
    CHECK_THROWS_AS(MonthlyClimatology({1, 2}, v), InvalidArgument);
    CHECK_THROWS_AS(MonthlyClimatology({1, 2}, std::vector<double>(5)), InvalidArgument);
  }

  TEST_CASE("amplitude nrmse") {
    auto s = rng::make_stream(5, rng::Role::kTest);
    const MonthlyClimatology a = random_clim(s, {3, 3});
    const std::vector<double> w(9, 1.0);
    CHECK(amplitude_nrmse(a, a, w) == 0.0);

    // Uniform observed amplitude a_obs, predicted twice as large.
    std::vector<double> obs(12, 1.0), pred(12, 1.0);
    obs[6] = 1.0 + 12.0 / 11.0 * 0.5;  // amplitude 0.5
    pred[6] = 1.0 + 12.0 / 11.0 * 1.0;
    const MonthlyClimatology o({1, 1}, obs), p({1, 1}, pred);
    REQUIRE(o.amplitude()[0] == doctest::Approx(0.5));
    CHECK(amplitude_nrmse(p, o, std::vector<double>{1.0}) == doctest::Approx(1.0 / 0.5));
    CHECK(amplitude_nrmse(p, o, std::vector<double>{1.0}, NrmseMode::kRms) == doctest::Approx(1.0));
    CHECK_THROWS_AS(amplitude_nrmse(p, MonthlyClimatology({1, 1}, std::vector<double>(12, 2.0)), std::vector<double>{1.0}),
                    DegenerateField);
    CHECK(parse_nrmse_mode("rms") == NrmseMode::kRms);
    CHECK_THROWS_AS(parse_nrmse_mode("mean"), InvalidArgument);
  }

  TEST_CASE("phase distance") {
    CHECK(circular_month_distance(1, 12) == 1);
    CHECK(circular_month_distance(1, 7) == 6);
    CHECK(circular_month_distance(3, 3) == 0);
    std::vector<double> jan(12, 0.0), dec(12, 0.0), jul(12, 0.0);
    jan[0] = dec[11] = jul[6] = 1.0;
    const std::vector<double> w{1.0};
    CHECK(phase_mad(MonthlyClimatology({1, 1}, jan), MonthlyClimatology({1, 1}, dec), w) == 1.0);
    CHECK(phase_mad(MonthlyClimatology({1, 1}, jan), MonthlyClimatology({1, 1}, jul), w) == 6.0);
  }

  TEST_CASE("climatology metrics match the brute-force references") {
    auto s = rng::make_stream(6, rng::Role::kTest);
    for (int k = 0; k < 100; ++k) {
      const Shape sh{1 + static_cast<int>(s.below(5)), 1 + static_cast<int>(s.below(5))};
      const MonthlyClimatology p = random_clim(s, sh), o = random_clim(s, sh);
      const auto w = draw(s, sh.area(), 0.1, 1.0);
      const auto pm = months_of(p), om = months_of(o);
      for (bool rms : {false, true}) {
        const double got = amplitude_nrmse(p, o, w, rms ? NrmseMode::kRms : NrmseMode::kPrinted);
        CHECK(std::abs(got - static_cast<double>(oracle::nrmse(pm, om, w, rms))) < 1e-12);
      }
      const double mad = phase_mad(p, o, w);
      CHECK(std::abs(mad - static_cast<double>(oracle::mad(pm, om, w))) < 1e-12);
      CHECK(mad == doctest::Approx(phase_mad(o, p, w)));
      CHECK(mad >= 0.0);
      CHECK(mad <= 6.0);
    }
  }

  TEST_CASE("scorecard thresholds are inclusive") {
    const Scorecard edge = grade(0.75, 0.7, 0.6, 2.0);
    CHECK(edge.mape_pass);
    CHECK(edge.scor_pass);
    CHECK(edge.nrmse_pass);
    CHECK(edge.mad_pass);
    CHECK(edge.overall);
    const Scorecard off = grade(std::nextafter(0.75, 1.0), std::nextafter(0.7, 0.0), std::nextafter(0.6, 1.0),
                                std::nextafter(2.0, 3.0));
    CHECK(off.passed() == 0);
    CHECK(!off.overall);

    auto s = rng::make_stream(7, rng::Role::kTest);
    const MonthlyClimatology o = random_clim(s, {4, 4});
    const std::vector<double> w(16, 1.0);
    const Scorecard same = scorecard(o, o, w);
    CHECK(same.overall);
    CHECK(same.mape == 0.0);
    CHECK(same.scor == doctest::Approx(1.0));
    CHECK(same.nrmse == 0.0);
    CHECK(same.mad == 0.0);

    std::vector<double> tripled(o.values().begin(), o.values().end());
    for (double& v : tripled) v *= 3.0;
    const Scorecard bad = scorecard(MonthlyClimatology({4, 4}, tripled), o, w);
    CHECK(bad.mape == doctest::Approx(2.0));
    CHECK(!bad.mape_pass);
  }
}
