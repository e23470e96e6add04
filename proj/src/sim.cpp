#include "gesched/sim.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "gesched/io.hpp"

namespace gesched {

PolicySpec PolicySpec::threshold_table(ThresholdProfile folded_profile) {
  if (folded_profile.grids.error.mode != GridMode::folded) {
    throw std::invalid_argument("threshold policy needs a folded profile");
  }
  PolicySpec p(PolicyKind::threshold_table);
  p.profile_ = std::make_shared<const ThresholdProfile>(std::move(folded_profile));
  return p;
}

PolicySpec PolicySpec::always() { return PolicySpec(PolicyKind::always); }
PolicySpec PolicySpec::never() { return PolicySpec(PolicyKind::never); }

PolicySpec PolicySpec::periodic(int k) {
  if (k < 1) throw std::invalid_argument("periodic policy needs k >= 1");
  PolicySpec p(PolicyKind::periodic);
  p.period_ = k;
  return p;
}

PolicySpec PolicySpec::error_threshold(double theta) {
  if (!(theta >= 0.0)) throw std::invalid_argument("error threshold must be >= 0");
  PolicySpec p(PolicyKind::error_threshold);
  p.theta_ = theta;
  return p;
}

PolicySpec PolicySpec::parse(std::string_view text,
                             std::shared_ptr<const ThresholdProfile> profile) {
  auto suffix_number = [&](std::string_view prefix) {
    const std::string_view rest = text.substr(prefix.size());
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(rest.data(), rest.data() + rest.size(), v);
    if (ec != std::errc() || ptr != rest.data() + rest.size()) {
      throw std::invalid_argument("bad policy parameter in '" + std::string(text) + "'");
    }
    return v;
  };
  if (text == "optimal" || text == "threshold") {
    if (!profile) throw std::invalid_argument("threshold policy needs a solved profile");
    PolicySpec p(PolicyKind::threshold_table);
    p.profile_ = std::move(profile);
    return p;
  }
  if (text == "always") return always();
  if (text == "never") return never();
  if (text.starts_with("periodic-")) {
    const double k = suffix_number("periodic-");
    if (k != std::floor(k)) throw std::invalid_argument("periodic period must be an integer");
    return periodic(static_cast<int>(k));
  }
  if (text.starts_with("error-threshold-")) return error_threshold(suffix_number("error-threshold-"));
  throw std::invalid_argument("unknown policy '" + std::string(text) + "'");
}

std::optional<double> PolicySpec::threshold_at(double e) const {
  const auto& grid = profile_->grids.error;
  const auto& b_star = profile_->b_star;
  const double pos = std::abs(e) / grid.h;
  const std::size_t last = grid.size() - 1;
  if (pos >= static_cast<double>(last)) return b_star[last];
  const auto lo = static_cast<std::size_t>(pos);
  const double t = pos - static_cast<double>(lo);
  const auto& left = b_star[lo];
  const auto& right = b_star[lo + 1];
  if (left && right) return (1.0 - t) * *left + t * *right;
  return t < 0.5 ? left : right;
}

Action PolicySpec::decide(int t, double e, double b) const {
  bool tx = false;
  switch (kind_) {
    case PolicyKind::threshold_table: {
      const auto threshold = threshold_at(e);
      tx = threshold && b >= *threshold;
      break;
    }
    case PolicyKind::always:
      tx = true;
      break;
    case PolicyKind::never:
      tx = false;
      break;
    case PolicyKind::periodic:
      tx = t % period_ == 0;
      break;
    case PolicyKind::error_threshold:
      tx = std::abs(e) >= theta_;
      break;
  }
  return tx ? Action::transmit : Action::idle;
}

std::string PolicySpec::name() const {
  switch (kind_) {
    case PolicyKind::threshold_table:
      return "optimal";
    case PolicyKind::always:
      return "always";
    case PolicyKind::never:
      return "never";
    case PolicyKind::periodic:
      return "periodic-" + std::to_string(period_);
    case PolicyKind::error_threshold:
      return "error-threshold-" + format_number(theta_);
  }
  return "unknown";
}

EpisodeStreams::EpisodeStreams(std::uint64_t base_seed, std::uint64_t episode) {
  auto make = [&](std::uint32_t stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(base_seed),
                      static_cast<std::uint32_t>(base_seed >> 32),
                      static_cast<std::uint32_t>(episode),
                      static_cast<std::uint32_t>(episode >> 32), stream};
    return std::mt19937_64(seq);
  };
  noise = make(1);
  channel = make(2);
}

namespace {

bool bernoulli(double p, std::mt19937_64& rng) {
  // 53-bit uniform on [0, 1); p = 1 always succeeds, p = 0 never does.
  const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  return u < p;
}

// Runs one episode and hands every StepRecord to `visit`. All simulation
// paths go through here so traces and statistics see identical dynamics.
template <typename Visit>
void simulate(const PolicySpec& policy, const ValidatedParams& params, int horizon,
              std::uint64_t base_seed, std::uint64_t episode, const StartState& start,
              Visit&& visit) {
  EpisodeStreams rng(base_seed, episode);
  std::normal_distribution<double> noise(0.0, 1.0);
  const double a = params.a();

  double x = start.e0;
  double xhat = 0.0;
  double b = start.b0.value_or(stationary_belief(params));
  Channel c = bernoulli(b, rng.channel) ? Channel::good : Channel::bad;

  for (int t = 0; t < horizon; ++t) {
    StepRecord r;
    r.t = t;
    r.x = x;
    r.xhat = xhat;
    r.e = x - xhat;
    r.c = c;
    r.b = b;
    r.u = policy.decide(t, r.e, b);
    if (r.u == Action::transmit) r.z = c;
    r.cost = instantaneous_cost(r.e, r.u, params);
    visit(r);

    // Draw both sources every slot so streams stay aligned across policies.
    const double w = noise(rng.noise);
    const Channel c_next = step_channel(c, params, rng.channel);
    const bool delivered = r.u == Action::transmit && c == Channel::good;
    xhat = a * (delivered ? x : xhat);
    x = a * x + w;
    b = r.u == Action::transmit ? belief_next_tx(c, params) : belief_map(b, params);
    c = c_next;
  }
}

}  // namespace

Channel step_channel(Channel c, const ValidatedParams& params, std::mt19937_64& rng) {
  const double p = c == Channel::good ? params.p11() : params.p01();
  return bernoulli(p, rng) ? Channel::good : Channel::bad;
}

EpisodeTrace run_episode(const PolicySpec& policy, const ValidatedParams& params,
                         int horizon, std::uint64_t base_seed, std::uint64_t episode,
                         const StartState& start) {
  if (horizon < 1) throw std::invalid_argument("horizon must be >= 1");
  EpisodeTrace trace;
  trace.seed = base_seed;
  trace.episode = episode;
  trace.horizon = horizon;
  trace.steps.reserve(static_cast<std::size_t>(horizon));
  simulate(policy, params, horizon, base_seed, episode, start,
           [&](const StepRecord& r) { trace.steps.push_back(r); });
  return trace;
}

double stability_bound(const ValidatedParams& params, double e0) {
  const double q = 1.0 - params.p01();
  return (1.0 + e0 * e0) / (q * (1.0 - params.a() * params.a() * q));
}

int horizon_for(const ValidatedParams& params, double bound, double tol) {
  if (bound <= tol) return 1;
  return std::max(1, static_cast<int>(std::ceil(std::log(tol / bound) /
                                                std::log(params.beta()))));
}

SimStats estimate_cost(const PolicySpec& policy, const ValidatedParams& params,
                       int horizon, int n_episodes, std::uint64_t base_seed,
                       const StartState& start) {
  if (horizon < 1 || n_episodes < 2) {
    throw std::invalid_argument("need horizon >= 1 and at least two episodes");
  }
  const double beta = params.beta();
  const auto h = static_cast<std::size_t>(horizon);
  SimStats s;
  s.policy = policy.name();
  s.n_episodes = n_episodes;
  s.horizon = horizon;
  s.episode_costs.reserve(static_cast<std::size_t>(n_episodes));
  std::vector<double> sum_e2(h, 0.0);
  std::vector<double> sum_e4(h, 0.0);
  double est = 0.0;
  double power = 0.0;
  long long transmissions = 0;

  for (int ep = 0; ep < n_episodes; ++ep) {
    double total = 0.0;
    double discount = 1.0;
    simulate(policy, params, horizon, base_seed, static_cast<std::uint64_t>(ep), start,
             [&](const StepRecord& r) {
               const double e2 = r.e * r.e;
               const auto t = static_cast<std::size_t>(r.t);
               sum_e2[t] += e2;
               sum_e4[t] += e2 * e2;
               total += discount * r.cost;
               est += discount * e2;
               if (r.u == Action::transmit) {
                 power += discount * params.lambda();
                 ++transmissions;
               }
               discount *= beta;
             });
    s.episode_costs.push_back(total);
  }

  const double n = n_episodes;
  double mean = 0.0;
  for (double c : s.episode_costs) mean += c;
  mean /= n;
  double var = 0.0;
  for (double c : s.episode_costs) var += (c - mean) * (c - mean);
  var /= n - 1.0;
  s.mean_cost = mean;
  s.std_error = std::sqrt(var / n);
  s.mean_estimation_cost = est / n;
  s.mean_power_cost = power / n;
  s.transmit_rate = static_cast<double>(transmissions) / (n * horizon);
  s.mse.resize(h);
  s.mse_se.resize(h);
  for (std::size_t t = 0; t < h; ++t) {
    const double m = sum_e2[t] / n;
    const double v = std::max(0.0, (sum_e4[t] - n * m * m) / (n - 1.0));
    s.mse[t] = m;
    s.mse_se[t] = std::sqrt(v / n);
  }
  s.tail_bound = std::pow(beta, horizon) / (1.0 - beta) *
                 (stability_bound(params, start.e0) + params.lambda());
  return s;
}

StabilityCheck verify_stability_bound(const ValidatedParams& params, int horizon,
                                      int n_episodes, std::uint64_t seed, double e0) {
  StabilityCheck out;
  out.bound = stability_bound(params, e0);
  out.cost_bound = (out.bound + params.lambda()) / (1.0 - params.beta());
  out.stats = estimate_cost(PolicySpec::always(), params, horizon, n_episodes, seed,
                            {.e0 = e0, .b0 = std::nullopt});

  double worst = -std::numeric_limits<double>::infinity();
  std::size_t worst_t = 0;
  for (std::size_t t = 0; t < out.stats.mse.size(); ++t) {
    const double v = out.stats.mse[t] - 3.0 * out.stats.mse_se[t] - out.bound;
    if (v > worst) {
      worst = v;
      worst_t = t;
    }
  }
  out.second_moment = make_check(
      "stability_second_moment", worst, "t=" + std::to_string(worst_t), 0.0,
      "E e(t)^2 - 3 SE - bound, bound=" + format_number(out.bound));
  out.discounted_cost = make_check(
      "stability_discounted_cost",
      out.stats.mean_cost - 3.0 * out.stats.std_error - out.cost_bound, "-", 0.0,
      "mean - 3 SE - bound, bound=" + format_number(out.cost_bound));
  return out;
}

Comparison compare_policies(const std::vector<PolicySpec>& policies,
                            const ValidatedParams& params, int horizon, int n_episodes,
                            std::uint64_t seed, const StartState& start) {
  if (policies.empty()) throw std::invalid_argument("no policies to compare");
  Comparison out;
  for (const auto& p : policies) {
    out.stats.push_back(estimate_cost(p, params, horizon, n_episodes, seed, start));
  }
  const auto& ref = out.stats.front().episode_costs;
  const double n = n_episodes;
  for (const auto& s : out.stats) {
    double mean = 0.0;
    for (std::size_t k = 0; k < ref.size(); ++k) mean += s.episode_costs[k] - ref[k];
    mean /= n;
    double var = 0.0;
    for (std::size_t k = 0; k < ref.size(); ++k) {
      const double d = s.episode_costs[k] - ref[k] - mean;
      var += d * d;
    }
    var /= n - 1.0;
    out.diff_mean.push_back(mean);
    out.diff_se.push_back(std::sqrt(var / n));
  }
  return out;
}

}  // namespace gesched
