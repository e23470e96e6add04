#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "gesched/dynamics.hpp"
#include "gesched/model.hpp"
#include "gesched/report.hpp"
#include "gesched/solver.hpp"

// Closed-loop Monte Carlo of sensor, Gilbert-Elliott channel, ACK feedback,
// linear estimator and belief filter.

namespace gesched {

enum class PolicyKind { threshold_table, always, never, periodic, error_threshold };

/// A scheduling rule. Decisions see the slot index, the current error and the
/// current belief, nothing else.
class PolicySpec {
 public:
  /// Transmit iff b >= b*(|e|); b* is interpolated linearly between error
  /// nodes when both neighbours have a threshold, otherwise taken from the
  /// nearest node. Errors beyond the grid use the last node.
  static PolicySpec threshold_table(ThresholdProfile folded_profile);
  static PolicySpec always();
  static PolicySpec never();
  /// Transmit on slots t = 0, k, 2k, ...
  static PolicySpec periodic(int k);
  /// Transmit iff |e| >= theta.
  static PolicySpec error_threshold(double theta);

  /// Parses "optimal"/"threshold", "always", "never", "periodic-K",
  /// "error-threshold-THETA". The threshold kinds need `profile`.
  static PolicySpec parse(std::string_view text,
                          std::shared_ptr<const ThresholdProfile> profile = nullptr);

  Action decide(int t, double e, double b) const;
  std::string name() const;
  PolicyKind kind() const noexcept { return kind_; }

  /// Interpolated threshold at |e|; nullopt = never transmit.
  std::optional<double> threshold_at(double e) const;

 private:
  PolicySpec(PolicyKind kind) : kind_(kind) {}

  PolicyKind kind_;
  std::shared_ptr<const ThresholdProfile> profile_;
  int period_ = 1;
  double theta_ = 0.0;
};

/// Initial condition: x(0) = e0, xhat(0) = 0, b(0) = b0 (stationary belief by
/// default), c(0) ~ Bernoulli(b0).
struct StartState {
  double e0 = 0.0;
  std::optional<double> b0;
};

struct StepRecord {
  int t = 0;
  double x = 0.0;
  double xhat = 0.0;
  double e = 0.0;
  Channel c = Channel::bad;
  double b = 0.0;
  Action u = Action::idle;
  std::optional<Channel> z;  // ACK/NACK, empty when nothing was sent
  double cost = 0.0;
};

struct EpisodeTrace {
  std::vector<StepRecord> steps;
  std::uint64_t seed = 0;
  std::uint64_t episode = 0;
  int horizon = 0;
};

/// Independent random streams of one episode, derived from
/// (base_seed, episode, stream id).
struct EpisodeStreams {
  EpisodeStreams(std::uint64_t base_seed, std::uint64_t episode);

  std::mt19937_64 noise;
  std::mt19937_64 channel;
};

/// Next channel state: good with probability p11 from good, p01 from bad.
Channel step_channel(Channel c, const ValidatedParams& params, std::mt19937_64& rng);

EpisodeTrace run_episode(const PolicySpec& policy, const ValidatedParams& params,
                         int horizon, std::uint64_t base_seed,
                         std::uint64_t episode = 0, const StartState& start = {});

struct SimStats {
  std::string policy;
  int n_episodes = 0;
  int horizon = 0;
  double mean_cost = 0.0;
  double std_error = 0.0;
  double mean_estimation_cost = 0.0;
  double mean_power_cost = 0.0;
  double transmit_rate = 0.0;
  std::vector<double> mse;     // mean e(t)^2 per slot
  std::vector<double> mse_se;  // its standard error
  std::vector<double> episode_costs;
  // beta^h / (1 - beta) * (stability bound + lambda): the truncated tail of any
  // policy that does no worse than always transmitting.
  double tail_bound = 0.0;
};

/// Monte Carlo estimate of the discounted cost over `horizon` slots.
/// Deterministic given base_seed.
SimStats estimate_cost(const PolicySpec& policy, const ValidatedParams& params,
                       int horizon, int n_episodes, std::uint64_t base_seed,
                       const StartState& start = {});

/// (1 + e0^2) / ((1 - p01) (1 - a^2 (1 - p01))): bound on E e(t)^2 under
/// always-transmit.
double stability_bound(const ValidatedParams& params, double e0 = 0.0);

/// Smallest h with beta^h * bound <= tol.
int horizon_for(const ValidatedParams& params, double bound, double tol);

struct StabilityCheck {
  double bound = 0.0;
  double cost_bound = 0.0;
  CheckResult second_moment;
  CheckResult discounted_cost;
  SimStats stats;
};

/// Always-transmit from e0: empirical E e(t)^2 <= bound + 3 SE at every slot,
/// and discounted cost <= (bound + lambda) / (1 - beta) + 3 SE.
StabilityCheck verify_stability_bound(const ValidatedParams& params, int horizon,
                                      int n_episodes, std::uint64_t seed,
                                      double e0 = 0.0);

struct Comparison {
  std::vector<SimStats> stats;
  // Paired differences against stats[0] under common random numbers.
  std::vector<double> diff_mean;
  std::vector<double> diff_se;
};

Comparison compare_policies(const std::vector<PolicySpec>& policies,
                            const ValidatedParams& params, int horizon,
                            int n_episodes, std::uint64_t seed,
                            const StartState& start = {});

}  // namespace gesched
