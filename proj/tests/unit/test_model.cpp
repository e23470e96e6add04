#include <doctest.h>

#include "gesched/errors.hpp"
#include "gesched/model.hpp"

using namespace gesched;

namespace {

ModelParams channel(double p01, double p11) {
  ModelParams p;
  p.p01 = p01;
  p.p11 = p11;
  return p;
}

}  // namespace

TEST_SUITE("model") {
  TEST_CASE("default parameters validate") {
    const auto v = validate(ModelParams{});
    CHECK(v.a() == 0.9);
    CHECK(v.p01() == 0.3);
    CHECK(v.p11() == 0.8);
    CHECK(v.lambda() == 1.0);
    CHECK(v.beta() == 0.9);
    CHECK(v.threshold_structure_guaranteed());
  }

  TEST_CASE("unstable source is rejected with the stability assumption") {
    ModelParams p;
    p.a = 1.5;
    try {
      validate(p);
      FAIL("expected AssumptionViolation");
    } catch (const AssumptionViolation& e) {
      CHECK(e.which() == Assumption::stability);
      CHECK(e.observed() == doctest::Approx(1.575));
      CHECK(std::string(e.what()).find("Assumption 1") != std::string::npos);
    }
  }

  TEST_CASE("memoryless-violating channel is rejected unless overridden") {
    ModelParams p = channel(0.8, 0.3);
    try {
      validate(p);
      FAIL("expected AssumptionViolation");
    } catch (const AssumptionViolation& e) {
      CHECK(e.which() == Assumption::channel_memory);
    }
    p.allow_memoryless_violation = true;
    const auto v = validate(p);
    CHECK_FALSE(v.threshold_structure_guaranteed());
  }

  TEST_CASE("range errors are configuration errors") {
    ModelParams p;
    p.beta = 1.0;
    CHECK_THROWS_AS(validate(p), ConfigError);
    p = ModelParams{};
    p.beta = 0.0;
    CHECK_THROWS_AS(validate(p), ConfigError);
    p = ModelParams{};
    p.p01 = 0.0;
    CHECK_THROWS_AS(validate(p), ConfigError);
    p = ModelParams{};
    p.p11 = 1.2;
    CHECK_THROWS_AS(validate(p), ConfigError);
    p = ModelParams{};
    p.lambda = -0.1;
    CHECK_THROWS_AS(validate(p), ConfigError);
  }

  TEST_CASE("validation is idempotent") {
    const auto once = validate(ModelParams{});
    const auto twice = validate(once.raw());
    CHECK(once == twice);
  }

  TEST_CASE("stationary belief") {
    CHECK(stationary_belief(validate(channel(0.2, 0.8))) == doctest::Approx(0.5));
    CHECK(stationary_belief(validate(channel(0.3, 0.9))) == doctest::Approx(0.75));
    CHECK(stationary_belief(validate(channel(0.5, 0.5))) == doctest::Approx(0.5));
  }

  TEST_CASE("stationary belief is a fixed point of the belief map") {
    for (double p01 : {0.05, 0.2, 0.3, 0.7}) {
      for (double p11 : {0.7, 0.8, 0.95, 1.0}) {
        const auto v = validate(channel(p01, p11));
        const double s = stationary_belief(v);
        CHECK(std::abs(belief_map(s, v) - s) <= 1e-12);
        CHECK(s >= 0.0);
        CHECK(s <= 1.0);
      }
    }
  }

  TEST_CASE("solver config ranges") {
    SolverConfig c;
    CHECK_NOTHROW(validate(c));
    c.n_error = 2;
    CHECK_THROWS_AS(validate(c), ConfigError);
    c = SolverConfig{};
    c.n_belief = 1;
    CHECK_THROWS_AS(validate(c), ConfigError);
    c = SolverConfig{};
    c.e_max = 0.0;
    CHECK_THROWS_AS(validate(c), ConfigError);
    c = SolverConfig{};
    c.vi_tolerance = 0.0;
    CHECK_THROWS_AS(validate(c), ConfigError);
  }
}
