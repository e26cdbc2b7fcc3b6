#include <cmath>
#include <sstream>

#include "doctest.h"
#include "hdd/error.hpp"
#include "hdd/footprint.hpp"

using namespace hdd;

TEST_SUITE("footprint") {
  TEST_CASE("per-hour device rows") {
    const Emissions a100 = gpu_hours_emissions("A100", 1.0);
    CHECK(a100.kwh == doctest::Approx(1.05625).epsilon(1e-12));
    CHECK(a100.kg == doctest::Approx(0.7710625).epsilon(1e-12));
    const Emissions v100 = gpu_hours_emissions("V100", 1.0);
    CHECK(v100.kwh == doctest::Approx(0.52).epsilon(1e-12));
    CHECK(v100.kg == doctest::Approx(0.3796).epsilon(1e-12));
    CHECK(std::abs(gpu_hours_emissions("cpu", 1.0).kg - 0.014) < 0.01);
    const Emissions zero = gpu_hours_emissions("A100", 0.0);
    CHECK(zero.kwh == 0.0);
    CHECK(zero.kg == 0.0);
    CHECK_THROWS_AS(gpu_hours_emissions("TPU", 1.0), InvalidArgument);
    CHECK_THROWS_AS(gpu_hours_emissions("A100", -1.0), InvalidArgument);
  }

  TEST_CASE("service units") {
    const Emissions one = cpu_ksu_emissions(1.0);
    CHECK(one.kwh == doctest::Approx(9.25).epsilon(1e-12));
    CHECK(one.kg == doctest::Approx(6.7525).epsilon(1e-12));
    // Quoted to one decimal place as 6.8 kg.
    CHECK(std::round(one.kg * 10) / 10 == doctest::Approx(6.8));
    CHECK(cpu_ksu_emissions(2.0).kg == doctest::Approx(13.505).epsilon(1e-12));
    CHECK(cpu_ksu_emissions(0.0).kg == 0.0);
  }

  TEST_CASE("run logs") {
    std::istringstream in("# training runs\ndevice,hours\nA100,1\n");
    const auto log = read_run_log(in);
    REQUIRE(log.size() == 1);
    CHECK(run_emissions(log).kg == doctest::Approx(0.7710625));
    CHECK(run_emissions(log, {}, 0.30).kg == doctest::Approx(1.00238125));
    CHECK(run_emissions({}).kg == 0.0);

    std::istringstream two("device,hours\nA100,2\nV100,3.5\n");
    const auto l2 = read_run_log(two);
    CHECK(run_emissions(l2).kg == doctest::Approx(2 * 0.7710625 + 3.5 * 0.3796));

    std::istringstream bad_header("gpu,hours\nA100,1\n"), bad_row("device,hours\nA100\n"), bad_num("device,hours\nA100,x\n");
    CHECK_THROWS_AS(read_run_log(bad_header), InvalidArgument);
    CHECK_THROWS_AS(read_run_log(bad_row), InvalidArgument);
    CHECK_THROWS_AS(read_run_log(bad_num), InvalidArgument);
  }

  TEST_CASE("factor overrides") {
    EmissionFactors f;
    apply_factor_overrides(f, {{"gamma", "0.5"}, {"power.H100", "0.7"}});
    CHECK(f.gamma == 0.5);
    CHECK(gpu_hours_emissions("H100", 1.0, f).kg == doctest::Approx(0.7 * 1.3 * 0.5));
    CHECK_THROWS_AS(apply_factor_overrides(f, {{"watts", "1"}}), InvalidArgument);
    CHECK_THROWS_AS(apply_factor_overrides(f, {{"pue", "0.5"}}), InvalidArgument);
  }

  TEST_CASE("linearity") {
    for (double h : {0.5, 2.0, 7.25}) {
      CHECK(gpu_hours_emissions("V100", h).kg == doctest::Approx(h * gpu_hours_emissions("V100", 1.0).kg));
      CHECK(cpu_ksu_emissions(h).kg == doctest::Approx(h * cpu_ksu_emissions(1.0).kg));
    }
  }
}
