#include "gesched/dynamics.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace gesched {

FoldedState fold(const SystemState& s) noexcept { return {std::abs(s.e), s.b}; }

double gaussian_pdf(double z) noexcept {
  static const double norm = 1.0 / std::sqrt(2.0 * std::numbers::pi);
  return norm * std::exp(-0.5 * z * z);
}

double belief_next_no_tx(double b, const ValidatedParams& params) {
  if (!(b >= 0.0 && b <= 1.0)) {
    throw std::domain_error("belief must lie in [0, 1]");
  }
  return belief_map(b, params);
}

double belief_next_tx(Channel ack, const ValidatedParams& params) noexcept {
  return ack == Channel::good ? params.p11() : params.p01();
}

double error_next(double e, Action u, Channel c, double w,
                  const ValidatedParams& params) noexcept {
  if (u == Action::transmit && c == Channel::good) return w;
  return params.a() * e + w;
}

double instantaneous_cost(double e, Action u,
                          const ValidatedParams& params) noexcept {
  return e * e + (u == Action::transmit ? params.lambda() : 0.0);
}

double kernel_no_ack(double e_plus, double e,
                     const ValidatedParams& params) noexcept {
  return gaussian_pdf(e_plus - params.a() * e);
}

double kernel_tx(double e_plus, Channel ack, double e, double b,
                 const ValidatedParams& params) noexcept {
  if (ack == Channel::good) return b * gaussian_pdf(e_plus);
  return (1.0 - b) * gaussian_pdf(e_plus - params.a() * e);
}

double folded_kernel_no_ack(double e_plus, double e,
                            const ValidatedParams& params) {
  if (e_plus < 0.0 || e < 0.0) {
    throw std::domain_error("folded kernel is defined on e, e+ >= 0");
  }
  const double m = params.a() * e;
  return gaussian_pdf(e_plus - m) + gaussian_pdf(e_plus + m);
}

}  // namespace gesched
