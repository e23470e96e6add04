#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "gesched/model.hpp"

namespace gesched {

enum class GridMode { folded, original };

const char* to_string(GridMode mode);

/// Dense row-major matrix indexed [error][belief].
class Table2D {
 public:
  Table2D() = default;
  Table2D(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const {
    return data_[i * cols_ + j];
  }

  std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
  std::span<const double> row(std::size_t i) const {
    return {data_.data() + i * cols_, cols_};
  }

  std::span<const double> data() const noexcept { return data_; }
  std::span<double> data() noexcept { return data_; }

  bool operator==(const Table2D&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// Uniform error grid. Folded: 0, h, ..., e_max. Original: the mirror image,
/// -e_max, ..., 0, ..., e_max, with negatives stored as exact negations.
struct ErrorGrid {
  std::vector<double> points;
  double h = 0.0;
  GridMode mode = GridMode::folded;

  std::size_t size() const noexcept { return points.size(); }
  std::size_t zero_index() const noexcept {
    return mode == GridMode::folded ? 0 : points.size() / 2;
  }
  /// Index of -points[i] (original mode), or i itself (folded mode).
  std::size_t mirror_index(std::size_t i) const noexcept {
    return mode == GridMode::folded ? i : points.size() - 1 - i;
  }
  /// Index of the node equal to e within 1e-9 h, if any.
  std::optional<std::size_t> index_of(double e) const;
};

/// Uniform belief grid plus p01, p11 and the stationary belief inserted
/// exactly.
struct BeliefGrid {
  std::vector<double> points;
  std::size_t p01_index = 0;
  std::size_t p11_index = 0;
  std::size_t stationary_index = 0;

  std::size_t size() const noexcept { return points.size(); }
  std::optional<std::size_t> index_of(double b) const;

  /// Bracket of b for linear interpolation: value = (1-t) v[lo] + t v[lo+1].
  struct Bracket {
    std::size_t lo = 0;
    double t = 0.0;
  };
  Bracket locate(double b) const;
};

struct Grids {
  ErrorGrid error;
  BeliefGrid belief;
};

ErrorGrid build_error_grid(const SolverConfig& config, GridMode mode);
BeliefGrid build_belief_grid(const SolverConfig& config,
                             const ValidatedParams& params);
Grids build_grids(const SolverConfig& config, const ValidatedParams& params,
                  GridMode mode);

/// Piecewise-linear interpolation of one row in the belief coordinate.
/// Exact at grid points; throws std::domain_error for b outside [0, 1].
double interp_belief(std::span<const double> row, const BeliefGrid& grid,
                     double b);
double interp_belief(const Table2D& values, const BeliefGrid& grid,
                     std::size_t e_index, double b);

/// Probability weights over all error-grid nodes approximating the law of e+
/// given e for an idle slot.
struct QuadratureRule {
  std::vector<double> weights;  // sum to one, nonnegative
  double raw_mass = 0.0;        // trapezoid mass before renormalisation
};

/// Trapezoid weights times the transition kernel at node e_index, renormalised.
/// Folded grids use the folded kernel, original grids the plain Gaussian.
QuadratureRule quadrature_for(std::size_t e_index, const ErrorGrid& grid,
                              const ValidatedParams& params);

/// Rules for every node, stored as a row-stochastic matrix.
class QuadratureSet {
 public:
  QuadratureSet(const ErrorGrid& grid, const ValidatedParams& params);

  std::size_t size() const noexcept { return n_; }
  std::span<const double> weights(std::size_t i) const {
    return {weights_.data() + i * n_, n_};
  }
  double raw_mass(std::size_t i) const { return raw_mass_[i]; }
  std::span<const double> raw_masses() const noexcept { return raw_mass_; }

  /// Largest 1 - raw_mass over all nodes.
  double max_deficit() const noexcept;
  /// Number of nodes whose |1 - raw_mass| exceeds tol.
  std::size_t count_drift_above(double tol) const noexcept;

 private:
  std::size_t n_ = 0;
  std::vector<double> weights_;
  std::vector<double> raw_mass_;
};

/// Pre-renormalisation drift above which quadrature warns that e_max is too
/// small for the kernel mass at some nodes.
inline constexpr double kMassDriftWarning = 1e-6;

}  // namespace gesched
