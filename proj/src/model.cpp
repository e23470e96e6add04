#include "gesched/model.hpp"

#include <cmath>
#include <sstream>

namespace gesched {

const char* to_string(Assumption which) {
  switch (which) {
    case Assumption::stability:
      return "Assumption 1 (a^2 (1 - p01) < 1)";
    case Assumption::channel_memory:
      return "Assumption 2 (p11 >= p01)";
  }
  return "unknown assumption";
}

namespace {

std::string violation_message(Assumption which, double observed) {
  std::ostringstream os;
  os << "assumption violated: " << to_string(which) << ", observed ";
  if (which == Assumption::stability) {
    os << "a^2 (1 - p01) = " << observed;
  } else {
    os << "p11 - p01 = " << observed;
  }
  return os.str();
}

std::string with_line(const std::string& what, std::size_t line) {
  if (line == 0) return what;
  return "line " + std::to_string(line) + ": " + what;
}

void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError(what);
}

}  // namespace

AssumptionViolation::AssumptionViolation(Assumption which, double observed)
    : std::runtime_error(violation_message(which, observed)),
      which_(which),
      observed_(observed) {}

ConfigError::ConfigError(const std::string& what, std::size_t line)
    : std::runtime_error(with_line(what, line)), line_(line) {}

NonConvergence::NonConvergence(double residual, int iterations)
    : std::runtime_error("value iteration did not converge: residual " +
                         std::to_string(residual) + " after " +
                         std::to_string(iterations) + " iterations"),
      residual_(residual),
      iterations_(iterations) {}

StructureViolation::StructureViolation(std::size_t error_index,
                                       std::string pattern)
    : std::runtime_error("transmit set of error row " +
                         std::to_string(error_index) +
                         " is not a belief suffix: " + pattern),
      error_index_(error_index),
      pattern_(std::move(pattern)) {}

ValidatedParams validate(const ModelParams& p) {
  require(std::isfinite(p.a), "a must be finite");
  require(p.p01 > 0.0 && p.p01 <= 1.0, "p01 must lie in (0, 1]");
  require(p.p11 > 0.0 && p.p11 <= 1.0, "p11 must lie in (0, 1]");
  require(p.beta > 0.0 && p.beta < 1.0, "beta must lie in (0, 1)");
  require(std::isfinite(p.lambda) && p.lambda >= 0.0,
          "lambda must be finite and >= 0");

  const double drift = p.a * p.a * (1.0 - p.p01);
  if (!(drift < 1.0)) throw AssumptionViolation(Assumption::stability, drift);
  if (p.p11 < p.p01 && !p.allow_memoryless_violation) {
    throw AssumptionViolation(Assumption::channel_memory, p.p11 - p.p01);
  }
  return ValidatedParams(p);
}

double belief_map(double b, const ValidatedParams& params) noexcept {
  return b * params.p11() + (1.0 - b) * params.p01();
}

double stationary_belief(const ValidatedParams& params) noexcept {
  return params.p01() / (1.0 - params.p11() + params.p01());
}

void validate(const SolverConfig& c) {
  require(std::isfinite(c.e_max) && c.e_max > 0.0, "e_max must be > 0");
  require(c.n_error >= 3, "n_error must be >= 3");
  require(c.n_belief >= 2, "n_belief must be >= 2");
  require(c.vi_tolerance > 0.0, "vi_tolerance must be > 0");
  require(c.max_iterations >= 1, "max_iterations must be >= 1");
}

}  // namespace gesched
