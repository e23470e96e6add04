#pragma once

#include <cstdint>

#include "gesched/model.hpp"

// Single-step dynamics of the remote estimation loop. Everything here is a
// pure function of its arguments.

namespace gesched {

enum class Channel : std::uint8_t { bad = 0, good = 1 };

enum class Action : std::uint8_t { idle = 0, transmit = 1 };

/// Estimation error and channel belief, e in R, b in [0, 1].
struct SystemState {
  double e = 0.0;
  double b = 0.0;
};

/// State of the folded problem, e >= 0.
struct FoldedState {
  double e = 0.0;
  double b = 0.0;
};

FoldedState fold(const SystemState& s) noexcept;

/// Standard normal density.
double gaussian_pdf(double z) noexcept;

/// Belief after an idle slot. Throws std::domain_error for b outside [0, 1].
double belief_next_no_tx(double b, const ValidatedParams& params);

/// Belief after a transmission whose ACK/NACK revealed `ack`.
double belief_next_tx(Channel ack, const ValidatedParams& params) noexcept;

/// e(t+1): reset to the fresh noise on a delivered packet, drift otherwise.
double error_next(double e, Action u, Channel c, double w,
                  const ValidatedParams& params) noexcept;

double instantaneous_cost(double e, Action u,
                          const ValidatedParams& params) noexcept;

/// Density of e+ given e for an idle slot (or a dropped packet), original
/// problem: phi(e+ - a e).
double kernel_no_ack(double e_plus, double e,
                     const ValidatedParams& params) noexcept;

/// Joint density of (e+, ack) after a transmission from (e, b): the good branch
/// is b phi(e+), the bad branch (1 - b) phi(e+ - a e).
double kernel_tx(double e_plus, Channel ack, double e, double b,
                 const ValidatedParams& params) noexcept;

/// Folded density phi(e+ - a e) + phi(e+ + a e) on e+ >= 0. Integrates to one
/// over the half-line. Throws std::domain_error on negative inputs.
double folded_kernel_no_ack(double e_plus, double e,
                            const ValidatedParams& params);

}  // namespace gesched
