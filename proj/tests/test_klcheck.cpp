#include <boost/multiprecision/cpp_dec_float.hpp>
#include <cmath>
#include <limits>

#include "doctest.h"
#include "hdd/error.hpp"
#include "hdd/klcheck.hpp"

using hdd::InvalidArgument;
namespace rng = hdd::rng;
using namespace hdd::kl;

namespace {

using Big = boost::multiprecision::cpp_dec_float_50;

Big big_kl(const std::vector<double>& q, const std::vector<double>& p) {
  Big s = 0;
  for (std::size_t i = 0; i < q.size(); ++i)
    if (q[i] > 0) s += Big(q[i]) * boost::multiprecision::log(Big(q[i]) / Big(p[i]));
  return s;
}

}  // namespace

TEST_SUITE("klcheck") {
  TEST_CASE("kl examples") {
    const DiscreteDist a({0.25, 0.25, 0.5});
    CHECK(kl(a, a) == 0.0);
    CHECK(kl(DiscreteDist({1.0, 0.0}), DiscreteDist({0.5, 0.5})) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
    CHECK(kl(DiscreteDist({0.5, 0.5}), DiscreteDist({1.0, 0.0})) == std::numeric_limits<double>::infinity());
    CHECK_THROWS_AS(DiscreteDist({0.5, 0.6}), InvalidArgument);
    CHECK_THROWS_AS(DiscreteDist({1.5, -0.5}), InvalidArgument);
    CHECK_THROWS_AS(kl(a, DiscreteDist({0.5, 0.5})), InvalidArgument);
  }

  TEST_CASE("kl matches a 50-digit reference") {
    auto s = rng::make_stream(1, rng::Role::kTest);
    for (int k = 0; k < 200; ++k) {
      const Instance in = random_instance(s, 64);
      const double got = kl(in.q, in.p);
      const double ref = static_cast<double>(big_kl(in.q.probs(), in.p.probs()));
      CHECK(std::abs(got - ref) < 1e-12);
      CHECK(got >= 0.0);
    }
  }

  TEST_CASE("pushforward examples") {
    const DiscreteDist q({0.1, 0.2, 0.3, 0.4});
    CHECK(pushforward(q, CoarseningMap::identity(4)).probs() == q.probs());
    CHECK(pushforward(q, CoarseningMap::all_to_one(4)).probs() == std::vector<double>{1.0});
    const DiscreteDist pair = pushforward(q, CoarseningMap({0, 0, 1, 1}, 2));
    CHECK(pair[0] == doctest::Approx(0.3).epsilon(1e-15));
    CHECK(pair[1] == doctest::Approx(0.7).epsilon(1e-15));
    CHECK_THROWS_AS(CoarseningMap({0, 0, 2}, 3), InvalidArgument);  // not surjective
    CHECK_THROWS_AS(pushforward(q, CoarseningMap::identity(3)), InvalidArgument);
  }

  TEST_CASE("chain rule by enumeration") {
    const DiscreteDist q({0.1, 0.2, 0.3, 0.4}), p({0.25, 0.25, 0.25, 0.25});
    const CoarseningMap m({0, 0, 1, 1}, 2);
    const ChainRuleTerms t = chain_rule_terms(q, p, m);
    // Both sides written out by hand for this instance.
    const double fine = 0.1 * std::log(0.4) + 0.2 * std::log(0.8) + 0.3 * std::log(1.2) + 0.4 * std::log(1.6);
    const double coarse = 0.3 * std::log(0.6) + 0.7 * std::log(1.4);
    const double cond = 0.3 * ((1.0 / 3) * std::log((1.0 / 3) / 0.5) + (2.0 / 3) * std::log((2.0 / 3) / 0.5)) +
                        0.7 * ((3.0 / 7) * std::log((3.0 / 7) / 0.5) + (4.0 / 7) * std::log((4.0 / 7) / 0.5));
    CHECK(t.fine == doctest::Approx(fine).epsilon(1e-14));
    CHECK(t.coarse == doctest::Approx(coarse).epsilon(1e-14));
    CHECK(t.conditional == doctest::Approx(cond).epsilon(1e-14));
    CHECK(std::abs(t.residual) < 1e-12);

    const ChainRuleTerms id = chain_rule_terms(q, p, CoarseningMap::identity(4));
    CHECK(id.conditional == 0.0);
    CHECK(id.residual == 0.0);
  }

  TEST_CASE("zero coarse mass contributes nothing") {
    const DiscreteDist q({0.5, 0.5, 0.0, 0.0}), p({0.1, 0.2, 0.3, 0.4});
    const ChainRuleTerms t = chain_rule_terms(q, p, CoarseningMap({0, 0, 1, 1}, 2));
    CHECK(std::abs(t.residual) < 1e-14);
    CHECK_THROWS_AS(chain_rule_terms(p, q, CoarseningMap({0, 0, 1, 1}, 2)), InvalidArgument);
  }

  TEST_CASE("telescoping chains") {
    const DiscreteDist q({0.1, 0.2, 0.3, 0.4}), p({0.4, 0.3, 0.2, 0.1});
    const TelescopingReport one = telescoping_check(q, p, {CoarseningMap::identity(4)});
    REQUIRE(one.summands.size() == 1);
    CHECK(one.summands[0] == 0.0);
    CHECK(std::abs(one.residual) < 1e-15);

    auto s = rng::make_stream(2, rng::Role::kTest);
    std::vector<double> w(8);
    for (double& v : w) v = s.uniform();
    const DiscreteDist q0 = DiscreteDist::normalized(w), p0 = DiscreteDist::normalized(std::vector<double>(8, 1.0));
    const TelescopingReport r = telescoping_check(q0, p0, {CoarseningMap({0, 0, 1, 1, 2, 2, 3, 3}, 4), CoarseningMap::all_to_one(4)});
    REQUIRE(r.level_kl.size() == 3);
    CHECK(r.terminal == 0.0);
    CHECK(std::abs(r.residual) < 1e-10);
    CHECK(r.min_summand >= -1e-12);
    CHECK(r.total == doctest::Approx(r.level_kl[0]));
    for (std::size_t t = 0; t < r.summands.size(); ++t) CHECK(r.summands[t] == doctest::Approx(r.conditional[t]).epsilon(1e-10));

    CHECK_THROWS_AS(telescoping_check(q0, p0, {CoarseningMap::all_to_one(8), CoarseningMap::identity(4)}), InvalidArgument);
  }

  TEST_CASE("random campaign") {
    const CampaignSummary c = run_campaign(1000, 64, 7);
    CHECK(c.instances == 1000);
    CHECK(c.max_abs_residual < 1e-10);
    CHECK(c.max_abs_telescoping_residual < 1e-10);
    CHECK(c.min_summand >= -1e-12);
    CHECK(c.dpi_violations == 0);
    // Independent of thread scheduling.
    const CampaignSummary again = run_campaign(1000, 64, 7);
    CHECK(again.max_abs_residual == c.max_abs_residual);
  }

  TEST_CASE("data processing inequality on random maps") {
    auto s = rng::make_stream(3, rng::Role::kTest);
    for (int k = 0; k < 300; ++k) {
      const Instance in = random_instance(s, 32);
      CHECK(kl(pushforward(in.q, in.map), pushforward(in.p, in.map)) <= kl(in.q, in.p) + 1e-12);
      const DiscreteDist coarse = pushforward(in.q, in.map);
      double mass = 0.0;
      for (double v : coarse.probs()) mass += v;
      CHECK(mass == doctest::Approx(1.0).epsilon(1e-14));
    }
  }
}
