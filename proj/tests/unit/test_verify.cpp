#include <doctest.h>

#include <cmath>
#include <functional>
#include <string>

#include "gesched/log.hpp"
#include "gesched/verify.hpp"

using namespace gesched;

namespace {

const ValidatedParams& defaults() {
  static const ValidatedParams v = validate(ModelParams{});
  return v;
}

SolverConfig medium_config() {
  SolverConfig c;
  c.n_error = 121;
  c.n_belief = 21;
  return c;
}

ValueTable table(GridMode mode, const std::function<double(double, double)>& f) {
  const Grids g = build_grids(medium_config(), defaults(), mode);
  ValueTable v{g, Table2D(g.error.size(), g.belief.size()), 0, 0.0};
  for (std::size_t i = 0; i < g.error.size(); ++i) {
    for (std::size_t j = 0; j < g.belief.size(); ++j) {
      v.values(i, j) = f(g.error.points[i], g.belief.points[j]);
    }
  }
  return v;
}

struct QuietWarnings {
  QuietWarnings() : previous(set_warning_sink([](std::string_view) {})) {}
  ~QuietWarnings() { set_warning_sink(previous); }
  WarningSink previous;
};

}  // namespace

TEST_SUITE("verify") {
  TEST_CASE("evenness of an even and an odd table") {
    const auto even = verify_evenness(table(GridMode::original, [](double e, double) { return e * e; }));
    CHECK(even.pass);
    CHECK(even.violation == 0.0);

    const auto odd = verify_evenness(table(GridMode::original, [](double e, double) { return e * e * e; }));
    CHECK_FALSE(odd.pass);
    CHECK(odd.violation == doctest::Approx(2000.0));
    CHECK(odd.location.find("e=-10") != std::string::npos);
  }

  TEST_CASE("evenness needs an original-grid table") {
    CHECK_THROWS_AS(verify_evenness(table(GridMode::folded, [](double, double) { return 0.0; })),
                    std::invalid_argument);
  }

  TEST_CASE("fold equivalence after one step") {
    QuietWarnings quiet;
    SolverConfig c = medium_config();
    c.max_iterations = 1;
    const SolveOptions once{.throw_on_nonconvergence = false};
    const auto folded = solve(defaults(), c, GridMode::folded, once);
    const auto original = solve(defaults(), c, GridMode::original, once);
    const auto r = verify_fold_equivalence(original, folded);
    CHECK(r.pass);
    CHECK(r.violation == 0.0);
  }

  TEST_CASE("constant table passes the shape checks with zero violation") {
    const auto v = table(GridMode::folded, [](double, double) { return 3.0; });
    CHECK(verify_monotone_error(v).violation == 0.0);
    CHECK(verify_monotone_belief(v).violation == 0.0);
    CHECK(std::abs(verify_concave_belief(v).violation) <= 1e-15);
    const auto c = verify_inequality_c(v, 1.0);
    CHECK(c.pass);
    CHECK(c.violation <= 0.0);
  }

  TEST_CASE("affine-in-belief table passes the shape checks") {
    const auto v = table(GridMode::folded, [](double e, double b) { return e * e * (1 - b); });
    CHECK(verify_monotone_error(v).pass);
    CHECK(verify_monotone_belief(v).pass);
    CHECK(verify_concave_belief(v).pass);
    CHECK(verify_inequality_c(v, 1.0).pass);
    // With lambda = 0 the inequality is tight along the affine rows.
    CHECK(std::abs(verify_inequality_c(v, 0.0).violation) <= 1e-9);
  }

  TEST_CASE("shape checks catch their corruptions") {
    CHECK_FALSE(verify_monotone_error(table(GridMode::folded, [](double e, double) { return -e; })).pass);
    CHECK_FALSE(verify_monotone_belief(table(GridMode::folded, [](double, double b) { return b; })).pass);
    CHECK_FALSE(verify_concave_belief(
                    table(GridMode::folded, [](double, double b) { return (b - 0.5) * (b - 0.5); }))
                    .pass);
    CHECK_FALSE(verify_inequality_c(
                    table(GridMode::folded, [](double, double b) { return 100 * b * (1 - b); }), 1.0)
                    .pass);
  }

  TEST_CASE("lemmas hold with equality on a constant table") {
    const auto v = table(GridMode::folded, [](double, double) { return 5.0; });
    const BellmanOperator op(defaults(), v.grids);
    for (const auto& r : {verify_lemma_a1(v, op), verify_lemma_a2(v, op), verify_remark_a3(v, op)}) {
      CHECK(r.pass);
      CHECK(std::abs(r.violation) <= 1e-12);
    }
  }

  TEST_CASE("lemma A2 at e = 0 follows from monotonicity in the belief") {
    const auto v = table(GridMode::folded, [](double e, double b) { return e * e + 2 * (1 - b); });
    const BellmanOperator op(defaults(), v.grids);
    const auto r = verify_lemma_a2(v, op);
    CHECK(r.pass);
    // At e = 0 the difference is exactly 2 (V(., p01) - V(., p11)) = 2 * 0.5.
    CHECK(r.violation <= -1.0 + 1e-9);
  }

  TEST_CASE("threshold check counts non-suffix rows") {
    QTable q{Table2D(2, 4, 0.0), Table2D(2, 4, 1.0)};
    CHECK(verify_threshold(q).pass);
    q.q1(1, 1) = -1.0;
    const auto r = verify_threshold(q);
    CHECK_FALSE(r.pass);
    CHECK(r.violation == 1.0);
  }

  TEST_CASE("all checks pass on a converged solve") {
    QuietWarnings quiet;
    const auto report = run_all(defaults(), medium_config());
    CHECK(report.checks.size() == 10);
    for (const auto& c : report.checks) {
      INFO(c.name, " violation ", c.violation, " at ", c.location);
      CHECK(c.pass);
    }
    CHECK(report.overall());
  }

  TEST_CASE("override is noted in the report") {
    QuietWarnings quiet;
    ModelParams p;
    p.p01 = 0.6;
    p.p11 = 0.5;
    p.allow_memoryless_violation = true;
    const auto v = validate(p);
    SolverConfig c = medium_config();
    c.n_error = 41;
    const auto report = run_all(v, c);
    CHECK(report.to_text().find("not guaranteed") != std::string::npos);
  }

  TEST_CASE("fault injection catches every corruption") {
    QuietWarnings quiet;
    const auto report = fault_injection_selftest(defaults(), medium_config());
    CHECK(report.checks.size() == 10);
    for (const auto& c : report.checks) {
      INFO(c.name);
      CHECK(c.pass);
    }
  }

  TEST_CASE("report serialisation") {
    VerificationReport r;
    r.checks.push_back(make_check("a", 0.5, "here", 1.0));
    r.checks.push_back(make_check("b", 2.0, "there", 1.0, "note"));
    CHECK_FALSE(r.overall());
    CHECK(r.find("a")->pass);
    CHECK(r.find("missing") == nullptr);
    const auto j = r.to_json();
    CHECK(j["overall"] == false);
    CHECK(j["checks"]["a"]["violation"] == 0.5);
    CHECK(j["checks"]["b"]["location"] == "there");
    CHECK(j["checks"]["b"]["tolerance"] == 1.0);
    CHECK(r.to_text().find("FAIL b") != std::string::npos);
  }
}
