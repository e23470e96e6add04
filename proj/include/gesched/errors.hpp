#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace gesched {

// Which modelling assumption a parameter set broke.
enum class Assumption {
  stability,       // a^2 (1 - p01) < 1
  channel_memory,  // p11 >= p01
};

const char* to_string(Assumption which);

class AssumptionViolation : public std::runtime_error {
 public:
  AssumptionViolation(Assumption which, double observed);

  Assumption which() const noexcept { return which_; }
  double observed() const noexcept { return observed_; }

 private:
  Assumption which_;
  double observed_;
};

// Out-of-range parameter or malformed configuration. line() is 0 when the
// error did not come from a config file.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what, std::size_t line = 0);

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class NonConvergence : public std::runtime_error {
 public:
  NonConvergence(double residual, int iterations);

  double residual() const noexcept { return residual_; }
  int iterations() const noexcept { return iterations_; }

 private:
  double residual_;
  int iterations_;
};

// A policy row whose transmit set is not a suffix of the belief grid.
class StructureViolation : public std::runtime_error {
 public:
  StructureViolation(std::size_t error_index, std::string pattern);

  std::size_t error_index() const noexcept { return error_index_; }
  const std::string& pattern() const noexcept { return pattern_; }

 private:
  std::size_t error_index_;
  std::string pattern_;
};

}  // namespace gesched
