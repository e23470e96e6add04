#pragma once

#include "gesched/errors.hpp"

namespace gesched {

/// Raw problem parameters: AR source, Gilbert-Elliott channel, power price
/// and discount.
struct ModelParams {
  double a = 0.9;       // AR coefficient
  double p01 = 0.3;     // P(good next | bad now)
  double p11 = 0.8;     // P(good next | good now)
  double lambda = 1.0;  // power cost per transmission attempt
  double beta = 0.9;    // discount factor

  // Accept p11 < p01. The solver still converges but the threshold structure
  // is no longer guaranteed, and reports say so.
  bool allow_memoryless_violation = false;

  bool operator==(const ModelParams&) const = default;
};

/// Parameters that passed validate(). Only validate() can make one, so
/// holding a ValidatedParams is proof that the stability assumption holds.
class ValidatedParams {
 public:
  const ModelParams& raw() const noexcept { return params_; }

  double a() const noexcept { return params_.a; }
  double p01() const noexcept { return params_.p01; }
  double p11() const noexcept { return params_.p11; }
  double lambda() const noexcept { return params_.lambda; }
  double beta() const noexcept { return params_.beta; }

  /// False when p11 < p01 was let through by the override flag.
  bool threshold_structure_guaranteed() const noexcept {
    return params_.p11 >= params_.p01;
  }

  bool operator==(const ValidatedParams&) const = default;

 private:
  explicit ValidatedParams(const ModelParams& p) : params_(p) {}
  friend ValidatedParams validate(const ModelParams& params);

  ModelParams params_;
};

/// Checks the range invariants (ConfigError) and both modelling assumptions
/// (AssumptionViolation).
ValidatedParams validate(const ModelParams& params);

/// One-step belief propagation without probing: b p11 + (1 - b) p01.
double belief_map(double b, const ValidatedParams& params) noexcept;

/// Fixed point of belief_map: p01 / (1 - p11 + p01).
double stationary_belief(const ValidatedParams& params) noexcept;

enum class Quadrature { grid_trapezoid };

struct SolverConfig {
  double e_max = 10.0;
  int n_error = 401;  // points on the folded half-line [0, e_max]
  int n_belief = 101;  // uniform points on [0, 1] before distinguished beliefs
  double vi_tolerance = 1e-6;
  int max_iterations = 5000;
  Quadrature quadrature = Quadrature::grid_trapezoid;

  bool operator==(const SolverConfig&) const = default;
};

/// Throws ConfigError on an out-of-range field.
void validate(const SolverConfig& config);

}  // namespace gesched
