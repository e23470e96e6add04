#include "gesched/grid.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "gesched/dynamics.hpp"

namespace gesched {

const char* to_string(GridMode mode) {
  return mode == GridMode::folded ? "folded" : "original";
}

std::optional<std::size_t> ErrorGrid::index_of(double e) const {
  auto it = std::lower_bound(points.begin(), points.end(), e - 1e-9 * h);
  if (it == points.end() || std::abs(*it - e) > 1e-9 * h) return std::nullopt;
  return static_cast<std::size_t>(it - points.begin());
}

std::optional<std::size_t> BeliefGrid::index_of(double b) const {
  auto it = std::lower_bound(points.begin(), points.end(), b - 1e-12);
  if (it == points.end() || std::abs(*it - b) > 1e-12) return std::nullopt;
  return static_cast<std::size_t>(it - points.begin());
}

BeliefGrid::Bracket BeliefGrid::locate(double b) const {
  if (!(b >= 0.0 && b <= 1.0)) {
    throw std::domain_error("belief must lie in [0, 1]");
  }
  auto it = std::upper_bound(points.begin(), points.end(), b);
  std::size_t lo = it == points.begin() ? 0 : static_cast<std::size_t>(it - points.begin()) - 1;
  lo = std::min(lo, points.size() - 2);
  const double width = points[lo + 1] - points[lo];
  return {lo, (b - points[lo]) / width};
}

ErrorGrid build_error_grid(const SolverConfig& config, GridMode mode) {
  validate(config);
  const auto n = static_cast<std::size_t>(config.n_error);
  std::vector<double> half(n);
  for (std::size_t k = 0; k < n; ++k) {
    half[k] = config.e_max * static_cast<double>(k) / static_cast<double>(n - 1);
  }
  half.back() = config.e_max;

  ErrorGrid grid;
  grid.h = config.e_max / static_cast<double>(n - 1);
  grid.mode = mode;
  if (mode == GridMode::folded) {
    grid.points = std::move(half);
    return grid;
  }
  grid.points.reserve(2 * n - 1);
  for (std::size_t k = n - 1; k > 0; --k) grid.points.push_back(-half[k]);
  grid.points.insert(grid.points.end(), half.begin(), half.end());
  return grid;
}

BeliefGrid build_belief_grid(const SolverConfig& config,
                             const ValidatedParams& params) {
  validate(config);
  const auto n = static_cast<std::size_t>(config.n_belief);
  std::vector<double> pts(n);
  for (std::size_t j = 0; j < n; ++j) {
    pts[j] = static_cast<double>(j) / static_cast<double>(n - 1);
  }

  const double special[] = {params.p01(), params.p11(), stationary_belief(params)};
  for (double s : special) {
    // Snap an existing node onto the exact value rather than adding a sliver
    // cell next to it.
    auto near = std::find_if(pts.begin(), pts.end(),
                             [s](double p) { return std::abs(p - s) <= 1e-12; });
    if (near != pts.end()) {
      *near = s;
    } else {
      pts.push_back(s);
    }
  }
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());

  BeliefGrid grid;
  grid.points = std::move(pts);
  auto exact = [&grid](double s) {
    auto it = std::lower_bound(grid.points.begin(), grid.points.end(), s);
    return static_cast<std::size_t>(it - grid.points.begin());
  };
  grid.p01_index = exact(special[0]);
  grid.p11_index = exact(special[1]);
  grid.stationary_index = exact(special[2]);
  return grid;
}

Grids build_grids(const SolverConfig& config, const ValidatedParams& params,
                  GridMode mode) {
  return {build_error_grid(config, mode), build_belief_grid(config, params)};
}

double interp_belief(std::span<const double> row, const BeliefGrid& grid,
                     double b) {
  const auto [lo, t] = grid.locate(b);
  if (t == 0.0) return row[lo];
  if (t == 1.0) return row[lo + 1];
  return (1.0 - t) * row[lo] + t * row[lo + 1];
}

double interp_belief(const Table2D& values, const BeliefGrid& grid,
                     std::size_t e_index, double b) {
  return interp_belief(values.row(e_index), grid, b);
}

namespace {

// Fills `out` with trapezoid-times-kernel weights for node i and returns
// their sum.
double raw_weights(std::size_t i, const ErrorGrid& grid,
                   const ValidatedParams& params, std::span<double> out) {
  const std::size_t n = grid.size();
  const double e = grid.points[i];
  double mass = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double trap = (k == 0 || k == n - 1) ? 0.5 * grid.h : grid.h;
    const double kernel = grid.mode == GridMode::folded
                              ? folded_kernel_no_ack(grid.points[k], e, params)
                              : kernel_no_ack(grid.points[k], e, params);
    out[k] = trap * kernel;
    mass += out[k];
  }
  return mass;
}

}  // namespace

QuadratureRule quadrature_for(std::size_t e_index, const ErrorGrid& grid,
                              const ValidatedParams& params) {
  QuadratureRule rule;
  rule.weights.resize(grid.size());
  rule.raw_mass = raw_weights(e_index, grid, params, rule.weights);
  for (double& w : rule.weights) w /= rule.raw_mass;
  return rule;
}

QuadratureSet::QuadratureSet(const ErrorGrid& grid, const ValidatedParams& params)
    : n_(grid.size()), weights_(n_ * n_), raw_mass_(n_) {
  for (std::size_t i = 0; i < n_; ++i) {
    std::span<double> row(weights_.data() + i * n_, n_);
    raw_mass_[i] = raw_weights(i, grid, params, row);
    for (double& w : row) w /= raw_mass_[i];
  }
}

double QuadratureSet::max_deficit() const noexcept {
  double worst = -1.0;
  for (double m : raw_mass_) worst = std::max(worst, 1.0 - m);
  return worst;
}

std::size_t QuadratureSet::count_drift_above(double tol) const noexcept {
  return static_cast<std::size_t>(std::count_if(
      raw_mass_.begin(), raw_mass_.end(),
      [tol](double m) { return std::abs(1.0 - m) > tol; }));
}

}  // namespace gesched
