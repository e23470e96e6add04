// Acceptance suite at the default instance. Prints one PASS/FAIL line per
// criterion; `--only N` runs a single criterion. Exit status is nonzero when
// any selected criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "gesched/io.hpp"
#include "gesched/log.hpp"
#include "gesched/sim.hpp"
#include "gesched/solver.hpp"
#include "gesched/verify.hpp"

using namespace gesched;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

const ValidatedParams& params() {
  static const ValidatedParams p = validate(ModelParams{});
  return p;
}

const SolverConfig& config() {
  static const SolverConfig c;
  return c;
}

const SolveResult& folded() {
  static const SolveResult r = solve(params(), config(), GridMode::folded);
  return r;
}

const SolveResult& original() {
  static const SolveResult r = solve(params(), config(), GridMode::original);
  return r;
}

std::string fmt(double v) { return format_number(v); }

std::string describe(const CheckResult& c) {
  return c.name + " violation=" + fmt(c.violation) + " tol=" + fmt(c.tolerance) + " at " +
         c.location;
}

Outcome criterion_1() {
  const auto t0 = Clock::now();
  const SolveResult r = solve(params(), config(), GridMode::folded);
  const double elapsed = seconds_since(t0);
  const double beta = params().beta();
  const auto& res = r.residuals;

  double worst = -std::numeric_limits<double>::infinity();
  std::size_t worst_n = 0;
  for (std::size_t n = 1; n < res.size(); ++n) {
    const double excess = res[n] - (beta * res[n - 1] + 1e-9);
    if (excess > worst) {
      worst = excess;
      worst_n = n + 1;
    }
  }
  const double r1 = res.front();
  const int bound =
      static_cast<int>(std::ceil(std::log(config().vi_tolerance / r1) / std::log(beta))) + 5;
  const bool contraction = worst <= 0.0;
  const bool reached = res.back() <= 1e-6 && r.value.iteration <= bound;
  const bool fast = elapsed < 60.0;

  std::ostringstream os;
  os << "iterations=" << r.value.iteration << " bound=" << bound << " r1=" << fmt(r1)
     << " final residual=" << fmt(res.back()) << " worst contraction excess=" << fmt(worst)
     << " (n=" << worst_n << ") runtime=" << fmt(elapsed) << "s";
  return {contraction && reached && fast, os.str()};
}

Outcome criterion_2() {
  const BellmanOperator op(params(), build_grids(config(), params(), GridMode::folded));
  const auto& g = op.grids();
  const double a = params().a();
  const double beta = params().beta();
  const double lambda = params().lambda();
  const double e_max = config().e_max;

  const auto s1 = iterate(op, 1);
  double v1_err = 0.0;
  for (std::size_t i = 0; i < g.error.size(); ++i) {
    const double e = g.error.points[i];
    for (double v : s1.value.values.row(i)) v1_err = std::max(v1_err, std::abs(v - e * e));
  }

  const auto s2 = iterate(op, 2);
  // Hand-derived second iterate: the power price is paid now, so it sits
  // outside the discount.
  auto closed_form = [&](double e, double b) {
    const double drift = a * a * e * e + 1.0;
    return e * e + std::min(beta * drift, lambda + beta * (b + (1 - b) * drift));
  };
  // Same expression with the power price inside the discount.
  auto literal_form = [&](double e, double b) {
    const double drift = a * a * e * e + 1.0;
    return e * e + beta * std::min(drift, lambda + b + (1 - b) * drift);
  };

  double interior_err = 0.0;
  double full_err = 0.0;
  double literal_err = 0.0;
  std::size_t interior_rows = 0;
  double max_cell = 0.0;
  for (std::size_t j = 1; j < g.belief.size(); ++j) {
    max_cell = std::max(max_cell, g.belief.points[j] - g.belief.points[j - 1]);
  }

  const ThresholdProfile profile2 = extract_thresholds(s2.q, g);
  double threshold_err = 0.0;
  std::string threshold_where = "-";
  for (std::size_t i = 0; i < g.error.size(); ++i) {
    const double e = g.error.points[i];
    const bool interior = a * e + 6.0 <= e_max;
    interior_rows += interior;
    for (std::size_t j = 0; j < g.belief.size(); ++j) {
      const double b = g.belief.points[j];
      const double d = std::abs(s2.value.values(i, j) - closed_form(e, b));
      full_err = std::max(full_err, d);
      if (interior) {
        interior_err = std::max(interior_err, d);
        literal_err = std::max(literal_err, std::abs(s2.value.values(i, j) - literal_form(e, b)));
      }
    }
    if (!interior) continue;
    // Transmit iff b > lambda / (beta a^2 e^2); never beyond b = 1. Both
    // never-transmit cases sit one cell past the end of the grid.
    const double never = 1.0 + max_cell;
    const double expected =
        e == 0.0 ? never : std::min(never, lambda / (beta * a * a * e * e));
    const double got = profile2.b_star[i].value_or(never);
    const double d = std::abs(got - expected);
    if (d > threshold_err) {
      threshold_err = d;
      threshold_where = "e=" + fmt(e);
    }
  }

  const bool pass = v1_err <= 1e-12 && interior_err <= 1e-4 && threshold_err <= max_cell;
  std::ostringstream os;
  os << "max|V1-e^2|=" << fmt(v1_err) << " max|V2-closed form|=" << fmt(interior_err)
     << " on " << interior_rows << " interior rows (|a e|+6<=e_max; whole grid "
     << fmt(full_err) << ", truncated kernel near e_max)"
     << " threshold error=" << fmt(threshold_err) << " at " << threshold_where
     << " cell=" << fmt(max_cell) << "; power price inside the discount would deviate by "
     << fmt(literal_err);
  return {pass, os.str()};
}

Outcome criterion_3() {
  const auto c = verify_evenness(original().value, original().q, 1e-6);
  return {c.pass, describe(c)};
}

Outcome criterion_4() {
  const auto c = verify_fold_equivalence(original(), folded(), 1e-6);
  return {c.pass, describe(c) + " " + c.note};
}

Outcome criterion_5() {
  const auto& v = folded().value;
  const std::vector<CheckResult> checks = {
      verify_monotone_error(v, 1e-6),
      verify_monotone_belief(v, 1e-6),
      verify_concave_belief(v, 1e-8),
      verify_inequality_c(v, params().lambda(), {true, 10000, 20240521}, 1e-5),
      verify_threshold(folded().q),
  };
  bool pass = true;
  std::string detail;
  for (const auto& c : checks) {
    pass = pass && c.pass;
    detail += (detail.empty() ? "" : "; ") + describe(c);
  }
  return {pass, detail};
}

Outcome criterion_6() {
  const BellmanOperator op(params(), folded().value.grids);
  const auto& v = folded().value;
  const std::vector<CheckResult> checks = {
      verify_lemma_a1(v, op, 1e-6),
      verify_lemma_a2(v, op, 1e-6),
      verify_remark_a3(v, op, 1e-6),
  };
  bool pass = true;
  std::string detail;
  for (const auto& c : checks) {
    pass = pass && c.pass;
    detail += (detail.empty() ? "" : "; ") + describe(c);
  }
  return {pass, detail};
}

Outcome criterion_7() {
  const auto grid = build_error_grid(config(), GridMode::folded);
  const QuadratureSet quad(grid, params());
  double worst = 0.0;
  std::size_t worst_i = 0;
  std::size_t failing = 0;
  std::optional<std::size_t> first_bad;
  double above_one = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double m = quad.raw_mass(i);
    above_one = std::max(above_one, m - 1.0);
    // The upper end allows for rounding in the trapezoid sum only.
    const double excess = std::max((1.0 - 1e-6) - m, m - (1.0 + 1e-12));
    if (excess > 0.0) {
      ++failing;
      if (!first_bad) first_bad = i;
    }
    if (excess > worst) {
      worst = excess;
      worst_i = i;
    }
  }
  std::ostringstream os;
  os << failing << " of " << grid.size() << " nodes outside [1-1e-6, 1]; largest mass above one "
     << fmt(above_one);
  if (failing > 0) {
    os << "; worst mass " << fmt(quad.raw_mass(worst_i)) << " at e=" << fmt(grid.points[worst_i])
       << "; holds for e <= " << fmt(*first_bad > 0 ? grid.points[*first_bad - 1] : -1.0)
       << " (drift a*e pushes kernel mass past e_max=" << fmt(config().e_max) << ")";
  }
  return {failing == 0, os.str()};
}

Outcome criterion_8() {
  const auto t0 = Clock::now();
  const auto check = verify_stability_bound(params(), 200, 10000, 8081, 0.0);
  const double elapsed = seconds_since(t0);
  std::ostringstream os;
  os << "bound=" << fmt(check.bound) << " cost bound=" << fmt(check.cost_bound)
     << " max E e(t)^2=" << fmt(*std::max_element(check.stats.mse.begin(), check.stats.mse.end()))
     << " mean cost=" << fmt(check.stats.mean_cost) << " +/- " << fmt(check.stats.std_error)
     << "; " << describe(check.second_moment) << "; " << describe(check.discounted_cost)
     << " runtime=" << fmt(elapsed) << "s";
  return {check.second_moment.pass && check.discounted_cost.pass && elapsed < 30.0, os.str()};
}

PolicySpec optimal_policy() {
  return PolicySpec::threshold_table(extract_thresholds(folded().q, folded().value.grids));
}

Outcome criterion_9() {
  const auto policy = optimal_policy();
  const auto& g = folded().value.grids;
  const auto& p = params();
  struct Start {
    double e0;
    double b0;
  };
  const Start starts[] = {{0.0, stationary_belief(p)}, {1.5, p.p01()}, {3.0, p.p11()},
                          {5.0, 0.0},                  {8.0, 1.0}};
  bool pass = true;
  std::ostringstream os;
  std::uint64_t seed = 9001;
  for (const auto& s : starts) {
    const double bound = (stability_bound(p, s.e0) + p.lambda()) / (1.0 - p.beta());
    const int horizon = horizon_for(p, bound, 1e-3);
    const auto stats = estimate_cost(policy, p, horizon, 10000, seed++, StartState{s.e0, s.b0});
    const auto i = g.error.index_of(std::abs(s.e0)).value();
    const auto j = g.belief.index_of(s.b0).value();
    const double v = folded().value.values(i, j);
    const double gap = std::abs(stats.mean_cost - v);
    const double allowed = 3.0 * stats.std_error + 0.05 * v;
    pass = pass && gap <= allowed;
    os << "(e0=" << fmt(s.e0) << ",b0=" << fmt(s.b0) << " h=" << horizon << " MC=" << fmt(stats.mean_cost)
       << " V=" << fmt(v) << " gap=" << fmt(gap) << " allowed=" << fmt(allowed) << ") ";
  }
  return {pass, os.str()};
}

Outcome criterion_10() {
  const auto& p = params();
  const double bound = (stability_bound(p) + p.lambda()) / (1.0 - p.beta());
  const int horizon = horizon_for(p, bound, 1e-3);
  const std::vector<PolicySpec> policies = {
      optimal_policy(),       PolicySpec::always(),     PolicySpec::never(),
      PolicySpec::periodic(2), PolicySpec::periodic(5), PolicySpec::error_threshold(1.0)};
  const auto c = compare_policies(policies, p, horizon, 10000, 1010);
  bool pass = true;
  std::ostringstream os;
  os << "h=" << horizon << " optimal=" << fmt(c.stats[0].mean_cost) << "; ";
  for (std::size_t k = 1; k < policies.size(); ++k) {
    const bool ok = c.diff_mean[k] >= -3.0 * c.diff_se[k];
    pass = pass && ok;
    os << c.stats[k].policy << " " << fmt(c.stats[k].mean_cost) << " diff=" << fmt(c.diff_mean[k])
       << " se=" << fmt(c.diff_se[k]) << (ok ? "" : " VIOLATION") << "; ";
  }
  return {pass, os.str()};
}

// Fractional position of b on a belief grid; past the end for never-transmit.
double position(const BeliefGrid& g, const std::optional<double>& b) {
  if (!b) return static_cast<double>(g.size());
  const auto br = g.locate(*b);
  return static_cast<double>(br.lo) + br.t;
}

Outcome criterion_11() {
  SolverConfig fine_config = config();
  fine_config.n_error = 2 * config().n_error - 1;
  fine_config.n_belief = 2 * config().n_belief - 1;
  const auto t0 = Clock::now();
  const SolveResult fine = solve(params(), fine_config, GridMode::folded);
  const double elapsed = seconds_since(t0);

  const auto& gc = folded().value.grids;
  const auto& gf = fine.value.grids;
  double worst_rel = 0.0;
  std::string rel_where = "-";
  std::size_t shared = 0;
  for (std::size_t i = 0; i < gc.error.size(); ++i) {
    const auto fi = gf.error.index_of(gc.error.points[i]);
    if (!fi) continue;
    for (std::size_t j = 0; j < gc.belief.size(); ++j) {
      const auto fj = gf.belief.index_of(gc.belief.points[j]);
      if (!fj) continue;
      ++shared;
      const double vc = folded().value.values(i, j);
      const double rel = std::abs(fine.value.values(*fi, *fj) - vc) / std::max(1e-12, std::abs(vc));
      if (rel > worst_rel) {
        worst_rel = rel;
        rel_where = "e=" + fmt(gc.error.points[i]) + ",b=" + fmt(gc.belief.points[j]);
      }
    }
  }

  const auto coarse_profile = extract_thresholds(folded().q, gc);
  const auto fine_profile = extract_thresholds(fine.q, gf);
  double worst_cells = 0.0;
  std::string cell_where = "-";
  for (std::size_t i = 0; i < gc.error.size(); ++i) {
    const auto fi = gf.error.index_of(gc.error.points[i]);
    if (!fi) continue;
    const double d = std::abs(position(gc.belief, coarse_profile.b_star[i]) -
                              position(gc.belief, fine_profile.b_star[*fi]));
    if (d > worst_cells) {
      worst_cells = d;
      cell_where = "e=" + fmt(gc.error.points[i]);
    }
  }
  std::ostringstream os;
  os << "fine grid " << gf.error.size() << "x" << gf.belief.size() << " (" << fmt(elapsed)
     << "s); " << shared << " shared points; max relative change in V=" << fmt(worst_rel)
     << " at " << rel_where << "; max threshold shift=" << fmt(worst_cells)
     << " coarse cells at " << cell_where;
  return {worst_rel <= 0.01 && worst_cells <= 2.0, os.str()};
}

Outcome criterion_12() {
  const auto report = fault_injection_selftest(params(), config());
  std::ostringstream os;
  bool pass = report.checks.size() == 10;
  for (const auto& c : report.checks) {
    pass = pass && c.pass;
    os << c.name << (c.pass ? " caught" : " MISSED") << " (" << fmt(c.violation) << ") ";
  }
  return {pass, os.str()};
}

struct Criterion {
  int id;
  const char* title;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  std::optional<int> only;
  for (int k = 1; k < argc; ++k) {
    const std::string arg = argv[k];
    if (arg == "--only" && k + 1 < argc) {
      only = std::atoi(argv[++k]);
    } else {
      std::cerr << "usage: acceptance [--only N]\n";
      return 2;
    }
  }
  // The kernel-mass warning is itself the subject of criterion 7; keep the
  // report readable.
  std::vector<std::string> warnings;
  set_warning_sink([&](std::string_view m) { warnings.emplace_back(m); });

  const std::vector<Criterion> criteria = {
      {1, "value iteration converges at the contraction rate", criterion_1},
      {2, "first and second iterates match closed forms", criterion_2},
      {3, "evenness of the original-grid solve", criterion_3},
      {4, "fold equivalence", criterion_4},
      {5, "monotonicity, concavity, mixing inequality, threshold structure", criterion_5},
      {6, "integral lemmas", criterion_6},
      {7, "kernel quadrature mass before renormalisation", criterion_7},
      {8, "always-transmit stability bound", criterion_8},
      {9, "dynamic programming agrees with Monte Carlo", criterion_9},
      {10, "optimal policy dominates the baselines", criterion_10},
      {11, "grid refinement stability", criterion_11},
      {12, "fault injection catches every corruption", criterion_12},
  };

  int failures = 0;
  int ran = 0;
  for (const auto& c : criteria) {
    if (only && *only != c.id) continue;
    ++ran;
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << c.id << " (" << c.title
              << "): " << o.detail << std::endl;
  }
  if (ran == 0) {
    std::cerr << "no criterion selected\n";
    return 2;
  }
  for (const auto& w : warnings) std::cout << "note: " << w << '\n';
  return failures == 0 ? 0 : 1;
}
