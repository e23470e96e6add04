#include "gesched/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>

#include "gesched/io.hpp"

namespace gesched {

namespace {

constexpr double kNone = -std::numeric_limits<double>::infinity();

std::string at(const Grids& g, std::size_t i, std::size_t j) {
  return "e=" + format_number(g.error.points[i]) +
         ", b=" + format_number(g.belief.points[j]);
}

// Tracks the worst (largest) violation seen and where.
struct Worst {
  double value = kNone;
  std::string where = "-";

  template <typename Where>
  void offer(double v, Where&& describe) {
    if (v > value) {
      value = v;
      where = describe();
    }
  }
  double or_zero() const { return value == kNone ? 0.0 : value; }
};

void require_mode(const ValueTable& v, GridMode mode, const char* check) {
  if (v.grids.error.mode != mode) {
    throw std::invalid_argument(std::string(check) + " expects a " +
                                to_string(mode) + "-grid table");
  }
}

}  // namespace

CheckResult verify_evenness(const ValueTable& v, const QTable& q, double tol) {
  require_mode(v, GridMode::original, "verify_evenness");
  const auto& g = v.grids;
  Worst worst;
  auto scan = [&](const Table2D& t, const char* name) {
    if (t.rows() == 0) return;
    for (std::size_t i = 0; i < g.error.size(); ++i) {
      const std::size_t mi = g.error.mirror_index(i);
      for (std::size_t j = 0; j < g.belief.size(); ++j) {
        worst.offer(std::abs(t(i, j) - t(mi, j)),
                    [&] { return std::string(name) + " " + at(g, i, j); });
      }
    }
  };
  scan(v.values, "V");
  scan(q.q0, "Q0");
  scan(q.q1, "Q1");
  return make_check("evenness", worst.or_zero(), worst.where, tol);
}

CheckResult verify_evenness(const ValueTable& v, double tol) {
  return verify_evenness(v, QTable{}, tol);
}

CheckResult verify_fold_equivalence(const SolveResult& original,
                                    const SolveResult& folded, double tol) {
  require_mode(original.value, GridMode::original, "verify_fold_equivalence");
  require_mode(folded.value, GridMode::folded, "verify_fold_equivalence");
  const auto& go = original.value.grids;
  const auto& gf = folded.value.grids;
  const std::size_t zero = go.error.zero_index();
  if (go.error.size() != 2 * gf.error.size() - 1 ||
      go.belief.points != gf.belief.points) {
    throw std::invalid_argument("fold equivalence needs aligned grids");
  }

  Worst worst;
  std::size_t policy_mismatch = 0;
  for (std::size_t i = 0; i < gf.error.size(); ++i) {
    const std::size_t io = zero + i;
    if (go.error.points[io] != gf.error.points[i]) {
      throw std::invalid_argument("fold equivalence needs aligned error nodes");
    }
    for (std::size_t j = 0; j < gf.belief.size(); ++j) {
      const double dv = std::abs(original.value.values(io, j) - folded.value.values(i, j));
      const double d0 = std::abs(original.q.q0(io, j) - folded.q.q0(i, j));
      const double d1 = std::abs(original.q.q1(io, j) - folded.q.q1(i, j));
      worst.offer(std::max({dv, d0, d1}), [&] { return at(gf, i, j); });
      if (original.policy.at(io, j) != folded.policy.at(i, j)) ++policy_mismatch;
    }
  }
  auto check = make_check("fold_equivalence", worst.or_zero(), worst.where, tol,
                          "policy mismatches: " + std::to_string(policy_mismatch));
  check.pass = check.pass && policy_mismatch == 0;
  return check;
}

CheckResult verify_monotone_error(const ValueTable& v, double tol) {
  const auto& g = v.grids;
  Worst worst;
  for (std::size_t i = 0; i + 1 < g.error.size(); ++i) {
    for (std::size_t j = 0; j < g.belief.size(); ++j) {
      worst.offer(v.values(i, j) - v.values(i + 1, j), [&] { return at(g, i, j); });
    }
  }
  return make_check("monotone_error", worst.or_zero(), worst.where, tol);
}

CheckResult verify_monotone_belief(const ValueTable& v, double tol) {
  const auto& g = v.grids;
  Worst worst;
  for (std::size_t i = 0; i < g.error.size(); ++i) {
    for (std::size_t j = 0; j + 1 < g.belief.size(); ++j) {
      worst.offer(v.values(i, j + 1) - v.values(i, j), [&] { return at(g, i, j); });
    }
  }
  return make_check("monotone_belief", worst.or_zero(), worst.where, tol);
}

CheckResult verify_concave_belief(const ValueTable& v, double relative_tol) {
  const auto& g = v.grids;
  const auto& b = g.belief.points;
  Worst worst;
  for (std::size_t i = 0; i < g.error.size(); ++i) {
    const auto row = v.values.row(i);
    for (std::size_t j = 1; j + 1 < b.size(); ++j) {
      const double left = b[j] - b[j - 1];
      const double right = b[j + 1] - b[j];
      const double chord = (right * row[j - 1] + left * row[j + 1]) / (left + right);
      const double excess = (chord - row[j]) / std::max(1.0, std::abs(row[j]));
      worst.offer(excess, [&] { return at(g, i, j); });
    }
  }
  return make_check("concave_belief", worst.or_zero(), worst.where, relative_tol,
                    "relative to max(1, |V|)");
}

CheckResult verify_inequality_c(const ValueTable& v, double lambda,
                                const InequalityCSamples& samples, double tol) {
  const auto& g = v.grids;
  const auto& b = g.belief.points;
  const std::size_t m = b.size();
  Worst worst;

  auto describe = [&](std::size_t i, double x, double y, double mix) {
    return "e=" + format_number(g.error.points[i]) + ", x=" + format_number(x) +
           ", y=" + format_number(y) + ", b=" + format_number(mix);
  };

  if (samples.grid_triples) {
    for (std::size_t i = 0; i < g.error.size(); ++i) {
      const auto row = v.values.row(i);
      for (std::size_t xi = 0; xi < m; ++xi) {
        for (std::size_t yi = 0; yi <= xi; ++yi) {
          const double x = b[xi];
          const double y = b[yi];
          // z sweeps from y to x as the mixing weight runs over the grid, so
          // the bracket only ever moves right.
          std::size_t lo = std::min(yi, m - 2);
          for (std::size_t k = 0; k < m; ++k) {
            const double mix = b[k];
            const double z = std::clamp(mix * x + (1.0 - mix) * y, 0.0, 1.0);
            while (lo + 2 < m && b[lo + 1] <= z) ++lo;
            const double t = (z - b[lo]) / (b[lo + 1] - b[lo]);
            const double vz = t == 0.0 ? row[lo] : (1.0 - t) * row[lo] + t * row[lo + 1];
            const double lhs = (1.0 - mix) * lambda + mix * row[xi] + (1.0 - mix) * row[yi];
            worst.offer(vz - lhs, [&] { return describe(i, x, y, mix); });
          }
        }
      }
    }
  }

  std::mt19937_64 rng(samples.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> pick_row(0, g.error.size() - 1);
  for (int s = 0; s < samples.random_triples; ++s) {
    const std::size_t i = pick_row(rng);
    double x = unit(rng);
    double y = unit(rng);
    const double mix = unit(rng);
    if (x < y) std::swap(x, y);
    const double z = std::clamp(mix * x + (1.0 - mix) * y, 0.0, 1.0);
    const double lhs = (1.0 - mix) * lambda +
                       mix * interp_belief(v.values, g.belief, i, x) +
                       (1.0 - mix) * interp_belief(v.values, g.belief, i, y);
    worst.offer(interp_belief(v.values, g.belief, i, z) - lhs,
                [&] { return describe(i, x, y, mix); });
  }
  return make_check("inequality_c", worst.or_zero(), worst.where, tol);
}

CheckResult verify_threshold(const QTable& q) {
  const auto rows = non_threshold_rows(q);
  std::string where = "-";
  if (!rows.empty()) {
    where = "row " + std::to_string(rows.front()) + " " + row_pattern(q, rows.front());
  }
  return make_check("threshold", static_cast<double>(rows.size()), where, 0.0,
                    "violation counts non-suffix rows");
}

CheckResult verify_threshold(const PolicyTable& policy) {
  const std::size_t n = policy.grids.error.size();
  const std::size_t m = policy.grids.belief.size();
  std::size_t bad = 0;
  std::string where = "-";
  for (std::size_t i = 0; i < n; ++i) {
    bool seen_tx = false;
    for (std::size_t j = 0; j < m; ++j) {
      const bool tx = policy.at(i, j);
      if (seen_tx && !tx) {
        if (bad++ == 0) where = "row " + std::to_string(i);
        break;
      }
      seen_tx = seen_tx || tx;
    }
  }
  return make_check("threshold", static_cast<double>(bad), where, 0.0,
                    "violation counts non-suffix rows");
}

CheckResult verify_lemma_a1(const ValueTable& v, const BellmanOperator& op,
                            double tol) {
  const Table2D integral = op.idle_expectations(v.values);
  const auto& g = v.grids;
  Worst worst;
  for (std::size_t j = 0; j < g.belief.size(); ++j) {
    double running = integral(0, j);
    for (std::size_t i = 1; i < g.error.size(); ++i) {
      worst.offer(running - integral(i, j), [&] { return at(g, i, j); });
      running = std::max(running, integral(i, j));
    }
  }
  return make_check("lemma_a1", worst.or_zero(), worst.where, tol);
}

CheckResult verify_lemma_a2(const ValueTable& v, const BellmanOperator& op,
                            double tol) {
  const auto& g = v.grids;
  const auto reset = op.quadrature().weights(g.error.zero_index());
  double ack = 0.0;
  for (std::size_t k = 0; k < g.error.size(); ++k) {
    ack += reset[k] * v.values(k, g.belief.p11_index);
  }
  const auto nack = op.column_expectations(v.values, g.belief.p01_index);
  Worst worst;
  for (std::size_t i = 0; i < g.error.size(); ++i) {
    worst.offer(ack - nack[i],
                [&] { return "e=" + format_number(g.error.points[i]); });
  }
  return make_check("lemma_a2", worst.or_zero(), worst.where, tol);
}

CheckResult verify_remark_a3(const ValueTable& v, const BellmanOperator& op,
                             double tol) {
  const auto& g = v.grids;
  const auto reset = op.quadrature().weights(g.error.zero_index());
  Worst worst;
  for (std::size_t j = 0; j < g.belief.size(); ++j) {
    double ack = 0.0;
    for (std::size_t k = 0; k < g.error.size(); ++k) ack += reset[k] * v.values(k, j);
    const auto drift = op.column_expectations(v.values, j);
    for (std::size_t i = 0; i < g.error.size(); ++i) {
      worst.offer(ack - drift[i], [&] { return at(g, i, j); });
    }
  }
  return make_check("remark_a3", worst.or_zero(), worst.where, tol);
}

VerificationReport run_all(const ValidatedParams& params, const SolverConfig& config,
                           const VerifyTolerances& tol) {
  const BellmanOperator folded_op(params, build_grids(config, params, GridMode::folded));
  const SolveResult folded = solve(folded_op, config);
  const SolveResult original = solve(params, config, GridMode::original,
                                     {.throw_on_nonconvergence = true,
                                      .warn_on_mass_drift = false});
  const double lambda = params.lambda();

  VerificationReport report;
  report.checks.push_back(verify_evenness(original.value, original.q, tol.evenness));
  report.checks.push_back(verify_fold_equivalence(original, folded, tol.fold_equivalence));
  report.checks.push_back(verify_monotone_error(folded.value, tol.monotone));
  report.checks.push_back(verify_monotone_belief(folded.value, tol.monotone));
  report.checks.push_back(verify_concave_belief(folded.value, tol.concavity_relative));
  report.checks.push_back(verify_inequality_c(folded.value, lambda, {}, tol.inequality_c));
  report.checks.push_back(verify_threshold(folded.q));
  report.checks.push_back(verify_lemma_a1(folded.value, folded_op, tol.lemma));
  report.checks.push_back(verify_lemma_a2(folded.value, folded_op, tol.lemma));
  report.checks.push_back(verify_remark_a3(folded.value, folded_op, tol.lemma));

  if (!params.threshold_structure_guaranteed()) {
    for (auto& c : report.checks) {
      if (c.name != "evenness" && c.name != "fold_equivalence") {
        c.note += c.note.empty() ? "" : "; ";
        c.note += "p11 < p01 override: property not guaranteed";
      }
    }
  }
  return report;
}

namespace {

ValueTable table_from(const Grids& grids, auto&& f) {
  ValueTable v{grids, Table2D(grids.error.size(), grids.belief.size()), 0, 0.0};
  for (std::size_t i = 0; i < grids.error.size(); ++i) {
    for (std::size_t j = 0; j < grids.belief.size(); ++j) {
      v.values(i, j) = f(grids.error.points[i], grids.belief.points[j]);
    }
  }
  return v;
}

CheckResult expect_failure(const CheckResult& c, std::string corruption) {
  CheckResult out = c;
  out.pass = !c.pass;
  out.note = std::move(corruption);
  return out;
}

}  // namespace

VerificationReport fault_injection_selftest(const ValidatedParams& params,
                                            const SolverConfig& config,
                                            const VerifyTolerances& tol) {
  const Grids folded = build_grids(config, params, GridMode::folded);
  const Grids original = build_grids(config, params, GridMode::original);
  const BellmanOperator op(params, folded);
  const double e_max = config.e_max;
  VerificationReport r;

  r.checks.push_back(expect_failure(
      verify_evenness(table_from(original, [](double e, double) { return e * e * e; }),
                      tol.evenness),
      "V = e^3"));

  {
    ModelParams shifted = params.raw();
    shifted.beta = params.beta() * 0.95;
    const SolveResult good = solve(params, config, GridMode::original,
                                   {.warn_on_mass_drift = false});
    const SolveResult bad = solve(validate(shifted), config, GridMode::folded,
                                  {.warn_on_mass_drift = false});
    r.checks.push_back(expect_failure(verify_fold_equivalence(good, bad, tol.fold_equivalence),
                                      "folded solve with beta * 0.95"));
  }

  const auto decreasing = table_from(
      folded, [e_max](double e, double) { return e_max * e_max - e * e; });
  r.checks.push_back(expect_failure(verify_monotone_error(decreasing, tol.monotone),
                                    "V = e_max^2 - e^2"));
  r.checks.push_back(expect_failure(
      verify_monotone_belief(table_from(folded, [](double, double b) { return b; }),
                             tol.monotone),
      "V = b"));
  r.checks.push_back(expect_failure(
      verify_concave_belief(
          table_from(folded, [](double, double b) { return (b - 0.5) * (b - 0.5); }),
          tol.concavity_relative),
      "V = (b - 1/2)^2"));
  r.checks.push_back(expect_failure(
      verify_inequality_c(
          table_from(folded, [](double, double b) { return 100.0 * b * (1.0 - b); }),
          params.lambda(), {.grid_triples = true, .random_triples = 1000},
          tol.inequality_c),
      "V = 100 b (1 - b)"));
  {
    const std::size_t n = folded.error.size();
    const std::size_t m = folded.belief.size();
    QTable q{Table2D(n, m, 0.0), Table2D(n, m, 1.0)};
    for (std::size_t j = m / 3; j < 2 * m / 3; ++j) q.q1(n / 2, j) = -1.0;
    r.checks.push_back(expect_failure(verify_threshold(q), "row pattern (+,-,+)"));
  }
  r.checks.push_back(expect_failure(verify_lemma_a1(decreasing, op, tol.lemma),
                                    "V = e_max^2 - e^2"));
  r.checks.push_back(expect_failure(
      verify_lemma_a2(table_from(folded, [](double e, double b) { return 10.0 * b + e * e; }),
                      op, tol.lemma),
      "V = 10 b + e^2"));
  r.checks.push_back(expect_failure(verify_remark_a3(decreasing, op, tol.lemma),
                                    "V = e_max^2 - e^2"));
  return r;
}

}  // namespace gesched
