#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gesched/grid.hpp"
#include "gesched/model.hpp"

namespace gesched {

/// Value function (or an iterate of it) sampled on an error x belief grid.
struct ValueTable {
  Grids grids;
  Table2D values;
  int iteration = 0;
  double residual = 0.0;  // sup-norm change of the last step
};

struct QTable {
  Table2D q0;  // idle
  Table2D q1;  // transmit
};

enum class TieRule { idle };

/// Q values closer than this, relative to max(1, |q0|), are a tie. Exact ties
/// (for instance probing at zero error when power is free) otherwise come out
/// of the two summation orders with random signs.
inline constexpr double kTieTolerance = 1e-12;

/// Strict preference for transmitting; ties go to idle.
inline bool prefers_transmit(double q0, double q1) noexcept {
  const double scale = q0 < 0.0 ? -q0 : q0;
  return q1 < q0 - kTieTolerance * (scale > 1.0 ? scale : 1.0);
}

struct PolicyTable {
  Grids grids;
  std::vector<std::uint8_t> transmit;  // row-major [error][belief]
  TieRule tie_rule = TieRule::idle;

  bool at(std::size_t i, std::size_t j) const {
    return transmit[i * grids.belief.size() + j] != 0;
  }
};

/// Per error node, the smallest grid belief at which transmitting is optimal;
/// nullopt means never transmit on that row.
struct ThresholdProfile {
  Grids grids;
  std::vector<std::optional<double>> b_star;
};

/// The discretised Bellman operator of either the folded or the original
/// problem. Holds the quadrature rules and the belief brackets of T(b_j) so
/// repeated steps only do the arithmetic.
class BellmanOperator {
 public:
  BellmanOperator(const ValidatedParams& params, Grids grids);

  const ValidatedParams& params() const noexcept { return params_; }
  const Grids& grids() const noexcept { return grids_; }
  const QuadratureSet& quadrature() const noexcept { return quad_; }

  ValueTable zero() const;

  /// e^2 + beta * sum_k w_ik V(e_k, T(b_j)).
  double backup_q0(const ValueTable& v, std::size_t i, std::size_t j) const;
  /// e^2 + lambda + beta [b_j sum_k w0_k V(e_k, p11) + (1-b_j) sum_k w_ik V(e_k, p01)].
  double backup_q1(const ValueTable& v, std::size_t i, std::size_t j) const;

  struct Step {
    ValueTable value;
    QTable q;
    double min_increment = 0.0;  // min over the grid of V_{n+1} - V_n
  };
  Step step(const ValueTable& v) const;

  /// E[V(e+, T(b_j)) | e_i] for every node, i.e. the integral inside Q(.;0).
  Table2D idle_expectations(const Table2D& values) const;
  /// E[V(e+, column) | e_i] for one belief column of `values`.
  std::vector<double> column_expectations(const Table2D& values,
                                          std::size_t column) const;

 private:
  ValidatedParams params_;
  Grids grids_;
  QuadratureSet quad_;
  std::vector<BeliefGrid::Bracket> next_belief_;  // bracket of T(b_j)
};

struct SolveResult {
  ValueTable value;
  QTable q;
  PolicyTable policy;
  std::vector<double> residuals;  // residuals[n-1] = |V_n - V_{n-1}|
  double min_increment = 0.0;     // smallest V_{n+1} - V_n over all steps
  double error_bound = 0.0;       // residual * beta / (1 - beta)
  double max_mass_deficit = 0.0;
  std::size_t drift_nodes = 0;    // nodes with kernel mass drift above 1e-6
  bool threshold_structure_guaranteed = true;
};

struct SolveOptions {
  bool throw_on_nonconvergence = true;
  bool warn_on_mass_drift = true;
};

/// Value iteration from V_0 = 0 until the sup-norm residual drops to
/// config.vi_tolerance. Throws NonConvergence after max_iterations unless
/// told otherwise.
SolveResult solve(const ValidatedParams& params, const SolverConfig& config,
                  GridMode mode = GridMode::folded, SolveOptions options = {});
SolveResult solve(const BellmanOperator& op, const SolverConfig& config,
                  SolveOptions options = {});

/// Runs exactly n steps from V_0 = 0 and returns the last step.
BellmanOperator::Step iterate(const BellmanOperator& op, int n);

PolicyTable extract_policy(const QTable& q, const Grids& grids);

/// Sign pattern of q1 - q0 along a row, run-length collapsed, e.g. "(+,-,+)".
std::string row_pattern(const QTable& q, std::size_t row);

/// Rows whose transmit set is not a suffix of the belief grid.
std::vector<std::size_t> non_threshold_rows(const QTable& q);

/// Throws StructureViolation on the first non-threshold row.
ThresholdProfile extract_thresholds(const QTable& q, const Grids& grids);

/// Symmetric extension of folded objects onto the signed error axis via |e|.
ValueTable unfold(const ValueTable& folded);
QTable unfold(const QTable& folded, const Grids& folded_grids);
PolicyTable unfold(const PolicyTable& folded);
ThresholdProfile unfold(const ThresholdProfile& folded);

}  // namespace gesched
