#pragma once

// Closed-form queueing quantities of the cooperative PU/SU system.
//
// Every quantity depends on the admission probability a only through the PU
// service rate mu_p, so the core functions take (mu_p, b) directly; the
// Policy overloads map a -> mu_p first. The optimizer scans mu_p and uses the
// mu_p forms.

#include <cmath>
#include <string>

#include "coopcr/types.hpp"

namespace coopcr {

inline constexpr double kDenominatorEps = 1e-12;

namespace detail {

inline double checked_div(double num, double den, const char* where) {
  if (!(std::abs(den) >= kDenominatorEps)) throw ModelError(Failure::near_singular, where);
  return num / den;
}

inline void require_primary_stable(const NetworkParams& p, double mu_p, const char* where) {
  if (!(p.lambda_p < mu_p)) throw ModelError(Failure::primary_unstable, where);
}

// Relay queue receives nothing when no packet is ever admitted.
inline bool relay_idle(const NetworkParams& p, double mu_p) {
  return p.lambda_p == 0.0 || mu_p - p.h_pd <= 0.0;
}

// mu_p * (mu_sp - lambda_sp); positive iff the relay queue is stable.
inline double relay_margin(const NetworkParams& p, double mu_p, double b) {
  return (1.0 - b) * p.h_sd * (mu_p - p.lambda_p) - p.lambda_p * (mu_p - p.h_pd);
}

}  // namespace detail

inline double service_rate_p(const NetworkParams& p, double a) {
  return p.h_pd + (1.0 - p.h_pd) * p.h_ps * a;
}

// Inverse of service_rate_p, clamped against rounding at the interval ends.
inline double admission_for(const NetworkParams& p, double mu_p) {
  const double width = (1.0 - p.h_pd) * p.h_ps;
  if (width <= 0.0) return 0.0;
  const double a = (mu_p - p.h_pd) / width;
  return a < 0.0 ? 0.0 : (a > 1.0 ? 1.0 : a);
}

inline DerivedRates derived_rates_at(const NetworkParams& p, double mu_p, double b) {
  detail::require_primary_stable(p, mu_p, "derived_rates");
  const double idle = 1.0 - p.lambda_p / mu_p;
  DerivedRates r;
  r.mu_p = mu_p;
  r.mu_s = b * p.h_sd * idle;
  r.mu_sp = (1.0 - b) * p.h_sd * idle;
  r.lambda_sp = (mu_p - p.h_pd) * p.lambda_p / mu_p;
  return r;
}

// Throws ModelError(primary_unstable) when lambda_p >= mu_p: the SU rates are
// meaningless then.
inline DerivedRates derived_rates(const NetworkParams& p, const Policy& pol) {
  return derived_rates_at(p, service_rate_p(p, pol.a), pol.b);
}

// Strict Loynes conditions. A queue with zero arrival rate is stable.
inline Stability stability(const NetworkParams& p, const DerivedRates& r) {
  Stability s;
  s.primary = p.lambda_p < r.mu_p;
  s.secondary = p.lambda_s == 0.0 || p.lambda_s < r.mu_s;
  s.relay = r.lambda_sp == 0.0 || r.lambda_sp < r.mu_sp;
  return s;
}

inline Stability stability(const NetworkParams& p, const Policy& pol) {
  const double mu_p = service_rate_p(p, pol.a);
  if (!(p.lambda_p < mu_p)) return {};
  return stability(p, derived_rates_at(p, mu_p, pol.b));
}

// Stability with an interior margin, used by sweeps and the baseline.
inline Stability stability_with_margin(const NetworkParams& p, const DerivedRates& r,
                                       double eps) {
  Stability s;
  s.primary = p.lambda_p < r.mu_p - eps;
  s.secondary = p.lambda_s == 0.0 || p.lambda_s < r.mu_s - eps;
  s.relay = r.lambda_sp == 0.0 || r.lambda_sp < r.mu_sp - eps;
  return s;
}

// --- average queue lengths -------------------------------------------------

// Geo/Geo/1 queue fed at lambda_p, served at mu_p.
inline double pu_queue_length(const NetworkParams& p, double mu_p) {
  detail::require_primary_stable(p, mu_p, "pu_queue_length");
  const double lp = p.lambda_p;
  return detail::checked_div(lp - lp * lp, mu_p - lp, "pu_queue_length");
}

namespace detail {

// Bracketed factor of the relay-queue numerator (without the lambda_p (mu_p - h_pd) prefix).
inline double relay_numerator_core(const NetworkParams& p, double mu_p, double b) {
  const double lp = p.lambda_p;
  const double bbar = 1.0 - b;
  return bbar * p.h_sd * (1.0 - mu_p) * lp - (mu_p - p.h_pd) * mu_p * lp - p.h_pd * lp +
         mu_p * mu_p;
}

inline double relay_denominator(const NetworkParams& p, double mu_p, double b) {
  return mu_p * (mu_p - p.lambda_p) * relay_margin(p, mu_p, b);
}

}  // namespace detail

inline double relay_queue_length(const NetworkParams& p, double mu_p, double b) {
  detail::require_primary_stable(p, mu_p, "relay_queue_length");
  if (detail::relay_idle(p, mu_p)) return 0.0;
  if (!(detail::relay_margin(p, mu_p, b) > 0.0))
    throw ModelError(Failure::relay_unstable, "relay_queue_length");
  const double num =
      p.lambda_p * (mu_p - p.h_pd) * detail::relay_numerator_core(p, mu_p, b);
  return detail::checked_div(num, detail::relay_denominator(p, mu_p, b), "relay_queue_length");
}

namespace detail {

// Numerator of N_s with one factor of lambda_s removed.
inline double su_numerator_per_arrival(const NetworkParams& p, double mu_p, double b) {
  const double lp = p.lambda_p;
  const double ls = p.lambda_s;
  return b * p.h_sd * lp * (1.0 - mu_p) + (1.0 - ls) * (mu_p - lp) * mu_p;
}

// mu_p * (mu_p - lambda_p) * (mu_s - lambda_s).
inline double su_denominator(const NetworkParams& p, double mu_p, double b) {
  const double gap = mu_p - p.lambda_p;
  return gap * (b * p.h_sd * gap - p.lambda_s * mu_p);
}

inline void require_su_stable(const NetworkParams& p, double mu_p, double b, const char* where) {
  require_primary_stable(p, mu_p, where);
  const double mu_s = b * p.h_sd * (1.0 - p.lambda_p / mu_p);
  if (p.lambda_s == 0.0 ? !(mu_s > 0.0) : !(p.lambda_s < mu_s))
    throw ModelError(Failure::secondary_unstable, where);
}

}  // namespace detail

// Mean length of the SU's own queue. This is the orientation whose b-derivative
// is the closed-form ds_derivative below and which agrees with the simulator.
inline double su_queue_length(const NetworkParams& p, double mu_p, double b) {
  if (p.lambda_s == 0.0) {
    detail::require_primary_stable(p, mu_p, "su_queue_length");
    return 0.0;
  }
  detail::require_su_stable(p, mu_p, b, "su_queue_length");
  const double num = p.lambda_s * detail::su_numerator_per_arrival(p, mu_p, b);
  return detail::checked_div(num, detail::su_denominator(p, mu_p, b), "su_queue_length");
}

// --- delays ------------------------------------------------------------------

// End-to-end PU delay (direct or via relay). At lambda_p = 0 this is the
// light-traffic limit seen by a single tagged packet.
inline double pu_delay_at(const NetworkParams& p, double mu_p, double b) {
  const double lp = p.lambda_p;
  if (lp > 0.0)
    return (pu_queue_length(p, mu_p) + relay_queue_length(p, mu_p, b)) / lp;

  detail::require_primary_stable(p, mu_p, "pu_delay");
  const double direct = detail::checked_div(1.0, mu_p, "pu_delay");
  if (mu_p - p.h_pd <= 0.0) return direct;
  const double num = (mu_p - p.h_pd) * detail::relay_numerator_core(p, mu_p, b);
  return direct + detail::checked_div(num, detail::relay_denominator(p, mu_p, b), "pu_delay");
}

inline double su_delay_at(const NetworkParams& p, double mu_p, double b) {
  if (p.lambda_s > 0.0) return su_queue_length(p, mu_p, b) / p.lambda_s;
  detail::require_su_stable(p, mu_p, b, "su_delay");
  return detail::checked_div(detail::su_numerator_per_arrival(p, mu_p, b),
                             detail::su_denominator(p, mu_p, b), "su_delay");
}

inline double pu_delay(const NetworkParams& p, const Policy& pol) {
  return pu_delay_at(p, service_rate_p(p, pol.a), pol.b);
}

inline double su_delay(const NetworkParams& p, const Policy& pol) {
  return su_delay_at(p, service_rate_p(p, pol.a), pol.b);
}

// Requires all three queues stable; the ModelError names the failing queue.
inline QueueMetrics queue_metrics(const NetworkParams& p, const Policy& pol) {
  const double mu_p = service_rate_p(p, pol.a);
  const double b = pol.b;
  QueueMetrics m;
  m.n_p = pu_queue_length(p, mu_p);
  m.n_sp = relay_queue_length(p, mu_p, b);
  m.n_s = su_queue_length(p, mu_p, b);
  m.d_p = pu_delay_at(p, mu_p, b);
  m.d_s = su_delay_at(p, mu_p, b);
  return m;
}

// --- PU delay constraint as an affine function of b --------------------------

// phi <= 0 iff D_p <= psi on the relay-stable region. Equal to
// relay_denominator * lambda_p * (D_p - psi) there.
inline double phi_at(const NetworkParams& p, double mu_p, double b, double psi) {
  detail::require_primary_stable(p, mu_p, "phi");
  const double lp = p.lambda_p;
  const double slack = lp * psi - pu_queue_length(p, mu_p);
  return lp * (mu_p - p.h_pd) * detail::relay_numerator_core(p, mu_p, b) -
         detail::relay_denominator(p, mu_p, b) * slack;
}

inline double phi(const NetworkParams& p, const Policy& pol, const DelaySpec& spec) {
  return phi_at(p, service_rate_p(p, pol.a), pol.b, spec.psi());
}

// dD_s/db. Negative wherever Q_s is stable.
inline double ds_derivative_at(const NetworkParams& p, double mu_p, double b) {
  detail::require_su_stable(p, mu_p, b, "ds_derivative");
  const double lp = p.lambda_p;
  const double ls = p.lambda_s;
  const double gap = mu_p - lp;
  const double inner = ls * mu_p * gap - p.h_sd * gap * gap * b;
  // The common factor lambda_s is cancelled from numerator and denominator so
  // the value stays finite as lambda_s -> 0.
  const double num =
      -p.h_sd * mu_p * (lp * ls * (1.0 - mu_p) * gap + (1.0 - ls) * gap * gap * gap);
  return detail::checked_div(num, inner * inner, "ds_derivative");
}

inline double ds_derivative(const NetworkParams& p, const Policy& pol) {
  return ds_derivative_at(p, service_rate_p(p, pol.a), pol.b);
}

}  // namespace coopcr
