#include "gesched/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "gesched/errors.hpp"
#include "gesched/log.hpp"

namespace gesched {

BellmanOperator::BellmanOperator(const ValidatedParams& params, Grids grids)
    : params_(params), grids_(std::move(grids)), quad_(grids_.error, params_) {
  next_belief_.reserve(grids_.belief.size());
  for (double b : grids_.belief.points) {
    next_belief_.push_back(grids_.belief.locate(belief_map(b, params_)));
  }
}

ValueTable BellmanOperator::zero() const {
  return {grids_, Table2D(grids_.error.size(), grids_.belief.size(), 0.0), 0, 0.0};
}

double BellmanOperator::backup_q0(const ValueTable& v, std::size_t i,
                                  std::size_t j) const {
  const double e = grids_.error.points[i];
  const double next_b = belief_map(grids_.belief.points[j], params_);
  const auto w = quad_.weights(i);
  double expect = 0.0;
  for (std::size_t k = 0; k < w.size(); ++k) {
    expect += w[k] * interp_belief(v.values, grids_.belief, k, next_b);
  }
  return e * e + params_.beta() * expect;
}

double BellmanOperator::backup_q1(const ValueTable& v, std::size_t i,
                                  std::size_t j) const {
  const double e = grids_.error.points[i];
  const double b = grids_.belief.points[j];
  const auto reset = quad_.weights(grids_.error.zero_index());
  const auto drift = quad_.weights(i);
  const std::size_t good = grids_.belief.p11_index;
  const std::size_t bad = grids_.belief.p01_index;
  double ack = 0.0;
  double nack = 0.0;
  for (std::size_t k = 0; k < drift.size(); ++k) {
    ack += reset[k] * v.values(k, good);
    nack += drift[k] * v.values(k, bad);
  }
  return e * e + params_.lambda() + params_.beta() * (b * ack + (1.0 - b) * nack);
}

Table2D BellmanOperator::idle_expectations(const Table2D& values) const {
  const std::size_t n = grids_.error.size();
  const std::size_t m = grids_.belief.size();

  // V(e_k, T(b_j)) for every k, j.
  Table2D shifted(n, m);
  for (std::size_t k = 0; k < n; ++k) {
    const auto src = values.row(k);
    auto dst = shifted.row(k);
    for (std::size_t j = 0; j < m; ++j) {
      const auto [lo, t] = next_belief_[j];
      dst[j] = t == 0.0 ? src[lo] : (1.0 - t) * src[lo] + t * src[lo + 1];
    }
  }

  Table2D out(n, m, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto w = quad_.weights(i);
    double* acc = out.row(i).data();
    for (std::size_t k = 0; k < n; ++k) {
      const double wk = w[k];
      if (wk == 0.0) continue;
      const double* src = shifted.row(k).data();
      for (std::size_t j = 0; j < m; ++j) acc[j] += wk * src[j];
    }
  }
  return out;
}

std::vector<double> BellmanOperator::column_expectations(
    const Table2D& values, std::size_t column) const {
  const std::size_t n = grids_.error.size();
  std::vector<double> out(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto w = quad_.weights(i);
    double s = 0.0;
    for (std::size_t k = 0; k < n; ++k) s += w[k] * values(k, column);
    out[i] = s;
  }
  return out;
}

BellmanOperator::Step BellmanOperator::step(const ValueTable& v) const {
  const std::size_t n = grids_.error.size();
  const std::size_t m = grids_.belief.size();
  const double beta = params_.beta();
  const double lambda = params_.lambda();

  const Table2D idle = idle_expectations(v.values);
  const std::vector<double> nack =
      column_expectations(v.values, grids_.belief.p01_index);
  const double ack = [&] {
    const auto w0 = quad_.weights(grids_.error.zero_index());
    double s = 0.0;
    for (std::size_t k = 0; k < n; ++k) s += w0[k] * v.values(k, grids_.belief.p11_index);
    return s;
  }();

  Step out;
  out.q.q0 = Table2D(n, m);
  out.q.q1 = Table2D(n, m);
  out.value = ValueTable{grids_, Table2D(n, m), v.iteration + 1, 0.0};
  double residual = 0.0;
  double min_inc = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    const double e = grids_.error.points[i];
    const double e2 = e * e;
    for (std::size_t j = 0; j < m; ++j) {
      const double b = grids_.belief.points[j];
      const double q0 = e2 + beta * idle(i, j);
      const double q1 = e2 + lambda + beta * (b * ack + (1.0 - b) * nack[i]);
      out.q.q0(i, j) = q0;
      out.q.q1(i, j) = q1;
      const double next = q1 < q0 ? q1 : q0;
      out.value.values(i, j) = next;
      const double inc = next - v.values(i, j);
      residual = std::max(residual, std::abs(inc));
      min_inc = std::min(min_inc, inc);
    }
  }
  out.value.residual = residual;
  out.min_increment = min_inc;
  return out;
}

BellmanOperator::Step iterate(const BellmanOperator& op, int n) {
  BellmanOperator::Step s{op.zero(), {}, 0.0};
  for (int k = 0; k < n; ++k) s = op.step(s.value);
  return s;
}

SolveResult solve(const ValidatedParams& params, const SolverConfig& config,
                  GridMode mode, SolveOptions options) {
  validate(config);
  return solve(BellmanOperator(params, build_grids(config, params, mode)), config,
               options);
}

SolveResult solve(const BellmanOperator& op, const SolverConfig& config,
                  SolveOptions options) {
  validate(config);
  SolveResult result;
  result.max_mass_deficit = op.quadrature().max_deficit();
  result.drift_nodes = op.quadrature().count_drift_above(kMassDriftWarning);
  result.threshold_structure_guaranteed =
      op.params().threshold_structure_guaranteed();
  if (options.warn_on_mass_drift && result.drift_nodes > 0) {
    std::ostringstream os;
    os << "kernel mass drift above " << kMassDriftWarning << " at "
       << result.drift_nodes << " of " << op.grids().error.size()
       << " error nodes (worst deficit " << result.max_mass_deficit
       << "); e_max may be too small for the drift a*e";
    warn(os.str());
  }

  BellmanOperator::Step s{op.zero(), {}, 0.0};
  result.min_increment = std::numeric_limits<double>::infinity();
  do {
    s = op.step(s.value);
    result.residuals.push_back(s.value.residual);
    result.min_increment = std::min(result.min_increment, s.min_increment);
  } while (s.value.residual > config.vi_tolerance &&
           s.value.iteration < config.max_iterations);

  if (s.value.residual > config.vi_tolerance && options.throw_on_nonconvergence) {
    throw NonConvergence(s.value.residual, s.value.iteration);
  }
  const double beta = op.params().beta();
  result.error_bound = s.value.residual * beta / (1.0 - beta);
  result.policy = extract_policy(s.q, op.grids());
  result.value = std::move(s.value);
  result.q = std::move(s.q);
  return result;
}

PolicyTable extract_policy(const QTable& q, const Grids& grids) {
  PolicyTable p;
  p.grids = grids;
  p.transmit.resize(q.q0.rows() * q.q0.cols());
  for (std::size_t i = 0; i < q.q0.rows(); ++i) {
    for (std::size_t j = 0; j < q.q0.cols(); ++j) {
      p.transmit[i * q.q0.cols() + j] = prefers_transmit(q.q0(i, j), q.q1(i, j)) ? 1 : 0;
    }
  }
  return p;
}

std::string row_pattern(const QTable& q, std::size_t row) {
  std::string out = "(";
  char last = 0;
  for (std::size_t j = 0; j < q.q0.cols(); ++j) {
    const char sign = prefers_transmit(q.q0(row, j), q.q1(row, j)) ? '-' : '+';
    if (sign == last) continue;
    if (last != 0) out += ',';
    out += sign;
    last = sign;
  }
  return out + ")";
}

namespace {

// First transmit column of a row, or cols() if none; second member is false if
// an idle column follows a transmit column.
std::pair<std::size_t, bool> scan_row(const QTable& q, std::size_t row) {
  const std::size_t m = q.q0.cols();
  std::size_t first = m;
  for (std::size_t j = 0; j < m; ++j) {
    const bool tx = prefers_transmit(q.q0(row, j), q.q1(row, j));
    if (tx && first == m) first = j;
    if (!tx && first != m) return {first, false};
  }
  return {first, true};
}

}  // namespace

std::vector<std::size_t> non_threshold_rows(const QTable& q) {
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < q.q0.rows(); ++i) {
    if (!scan_row(q, i).second) rows.push_back(i);
  }
  return rows;
}

ThresholdProfile extract_thresholds(const QTable& q, const Grids& grids) {
  ThresholdProfile profile;
  profile.grids = grids;
  profile.b_star.reserve(q.q0.rows());
  for (std::size_t i = 0; i < q.q0.rows(); ++i) {
    const auto [first, ok] = scan_row(q, i);
    if (!ok) throw StructureViolation(i, row_pattern(q, i));
    if (first == q.q0.cols()) {
      profile.b_star.emplace_back(std::nullopt);
    } else {
      profile.b_star.emplace_back(grids.belief.points[first]);
    }
  }
  return profile;
}

namespace {

ErrorGrid mirror(const ErrorGrid& folded) {
  ErrorGrid g;
  g.h = folded.h;
  g.mode = GridMode::original;
  g.points.reserve(2 * folded.size() - 1);
  for (std::size_t k = folded.size() - 1; k > 0; --k) g.points.push_back(-folded.points[k]);
  g.points.insert(g.points.end(), folded.points.begin(), folded.points.end());
  return g;
}

// Folded row feeding signed row r of the mirrored grid.
std::size_t folded_row(std::size_t r, std::size_t folded_size) {
  const std::size_t zero = folded_size - 1;
  return r >= zero ? r - zero : zero - r;
}

Table2D unfold_table(const Table2D& t) {
  const std::size_t n = t.rows();
  Table2D out(2 * n - 1, t.cols());
  for (std::size_t r = 0; r < out.rows(); ++r) {
    const auto src = t.row(folded_row(r, n));
    std::copy(src.begin(), src.end(), out.row(r).begin());
  }
  return out;
}

void require_folded(const Grids& g) {
  if (g.error.mode != GridMode::folded) {
    throw std::invalid_argument("unfold expects a folded-grid object");
  }
}

}  // namespace

ValueTable unfold(const ValueTable& folded) {
  require_folded(folded.grids);
  return {{mirror(folded.grids.error), folded.grids.belief},
          unfold_table(folded.values),
          folded.iteration,
          folded.residual};
}

QTable unfold(const QTable& folded, const Grids& folded_grids) {
  require_folded(folded_grids);
  return {unfold_table(folded.q0), unfold_table(folded.q1)};
}

PolicyTable unfold(const PolicyTable& folded) {
  require_folded(folded.grids);
  const std::size_t n = folded.grids.error.size();
  const std::size_t m = folded.grids.belief.size();
  PolicyTable out;
  out.grids = {mirror(folded.grids.error), folded.grids.belief};
  out.tie_rule = folded.tie_rule;
  out.transmit.resize((2 * n - 1) * m);
  for (std::size_t r = 0; r < 2 * n - 1; ++r) {
    const std::size_t src = folded_row(r, n);
    std::copy_n(folded.transmit.begin() + static_cast<std::ptrdiff_t>(src * m), m,
                out.transmit.begin() + static_cast<std::ptrdiff_t>(r * m));
  }
  return out;
}

ThresholdProfile unfold(const ThresholdProfile& folded) {
  require_folded(folded.grids);
  const std::size_t n = folded.grids.error.size();
  ThresholdProfile out;
  out.grids = {mirror(folded.grids.error), folded.grids.belief};
  out.b_star.reserve(2 * n - 1);
  for (std::size_t r = 0; r < 2 * n - 1; ++r) {
    out.b_star.push_back(folded.b_star[folded_row(r, n)]);
  }
  return out;
}

}  // namespace gesched
