#include <cmath>
#include <sstream>

#include "doctest.h"
#include "hdd/config.hpp"
#include "hdd/error.hpp"
#include "hdd/parse.hpp"

using namespace hdd;

TEST_SUITE("config") {
  TEST_CASE("strict scalar parsing") {
    CHECK(parse_double(" 2.5 ", "x") == 2.5);
    CHECK(std::isinf(parse_double("inf", "x")));
    CHECK_THROWS_AS(parse_double("2.5x", "x"), InvalidArgument);
    CHECK_THROWS_AS(parse_double("", "x"), InvalidArgument);
    CHECK(parse_int("-3", "x") == -3);
    CHECK_THROWS_AS(parse_int("3.0", "x"), InvalidArgument);
    CHECK(parse_u64("18446744073709551615", "x") == 18446744073709551615ull);
    CHECK_THROWS_AS(parse_u64("-1", "x"), InvalidArgument);
    CHECK(parse_bool("true", "x"));
    CHECK_THROWS_AS(parse_bool("maybe", "x"), InvalidArgument);
  }

  TEST_CASE("key-value files") {
    std::istringstream in("# comment\nseed = 4  # trailing\n\n  noise.steps=12\n");
    const auto kv = read_key_values(in, "test.cfg");
    REQUIRE(kv.size() == 2);
    CHECK(kv[0].key == "seed");
    CHECK(kv[0].value == "4");
    CHECK(kv[1].line == 4);
    std::istringstream bad("seed 4\n");
    try {
      read_key_values(bad, "bad.cfg");
      FAIL("expected InvalidArgument");
    } catch (const InvalidArgument& e) {
      CHECK(std::string(e.what()).find("bad.cfg:1") != std::string::npos);
    }
  }

  TEST_CASE("defaults, overrides and typed views") {
    Config c;
    CHECK(c.integer("noise.steps") == 50);
    CHECK(c.real("noise.sigma_max") == 80.0);
    CHECK(std::isinf(c.real("sampler.s_max")));
    std::istringstream in("noise.steps = 8\ntrain.steps = 8\nshapes.kind = unit\nsampler.mode = literal\nfootprint.power.H100 = 0.7\n");
    c.load(in, "run.cfg");
    const NoiseSchedule n = noise_from(c);
    CHECK(n.steps() == 8);
    CHECK(shapes_from(c, 16, 16, 8).at_step(8) == Shape{9, 9});
    CHECK(mode_from(c) == DiffusionMode::kLiteral);
    CHECK(factors_from(c).power("H100") == 0.7);
    CHECK(train_from(c).steps == 8);
    CHECK(architecture_from(c, 1, 1).width == 32);
    CHECK(synth_from(c).beta == 2.4);
    CHECK(rapsd_from(c).bins_per_decade == 12);
  }

  TEST_CASE("rejections") {
    Config c;
    CHECK_THROWS_AS(c.set("noise.stepz", "3"), InvalidArgument);
    CHECK_THROWS_AS(c.set("noise.steps", "three"), InvalidArgument);
    CHECK_THROWS_AS(c.set("seed", "-1"), InvalidArgument);
    CHECK_THROWS_AS(c.get("nope"), InvalidArgument);
    std::istringstream in("seed = 1\nbogus.key = 2\n");
    try {
      c.load(in, "x.cfg");
      FAIL("expected InvalidArgument");
    } catch (const InvalidArgument& e) {
      CHECK(std::string(e.what()).find("x.cfg:2") != std::string::npos);
    }
    c.set("shapes.kind", "spiral");
    CHECK_THROWS_AS(shapes_from(c, 8, 8, 4), InvalidArgument);
  }

  TEST_CASE("printed configs reload to the same values") {
    Config a;
    a.set("seed", "99");
    a.set("eval.nrmse_mode", "rms");
    std::ostringstream os;
    a.print(os);
    Config b;
    std::istringstream in(os.str());
    b.load(in, "printed");
    CHECK(a.values() == b.values());
    for (const KeySpec& k : config_keys()) CHECK(b.has(k.key));
  }
}
