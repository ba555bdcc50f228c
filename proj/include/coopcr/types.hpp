#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace coopcr {

// A value in [0,1]. Validated on construction so formula code never sees
// out-of-range inputs.
class Probability {
public:
  constexpr Probability() = default;
  Probability(double v) : value_(v) {  // NOLINT(google-explicit-constructor)
    if (!(v >= 0.0 && v <= 1.0))
      throw std::invalid_argument("probability out of range [0,1]: " + std::to_string(v));
  }
  constexpr operator double() const { return value_; }
  constexpr double value() const { return value_; }

private:
  double value_ = 0.0;
};

// Arrival rates and link success probabilities of the PU/SU/destination triangle.
struct NetworkParams {
  Probability lambda_p;
  Probability lambda_s;
  Probability h_pd;
  Probability h_ps;
  Probability h_sd;

  // Relaying through the SU cannot help when its own link is no better than
  // the direct one. Not an error, callers may warn.
  bool cooperation_degenerate() const { return h_sd <= h_pd; }

  // Upper end of the achievable PU service rate (a = 1).
  double mu_p_max() const { return h_pd + (1.0 - h_pd) * h_ps; }
};

// a: admission probability into the relay queue.
// b: probability the SU picks its own queue when the PU is idle.
struct Policy {
  Probability a;
  Probability b;
};

// Bound on the average PU packet delay, in slots. Infinity means unconstrained.
class DelaySpec {
public:
  explicit DelaySpec(double psi) : psi_(psi) {
    if (!(psi > 0.0))
      throw std::invalid_argument("delay bound psi must be > 0");
  }
  static DelaySpec unbounded() { return DelaySpec(std::numeric_limits<double>::infinity()); }

  double psi() const { return psi_; }
  bool is_unbounded() const { return std::isinf(psi_); }

private:
  double psi_;
};

struct DerivedRates {
  double mu_p = 0;
  double mu_s = 0;
  double mu_sp = 0;
  double lambda_sp = 0;
};

struct QueueMetrics {
  double n_p = 0;
  double n_sp = 0;
  double n_s = 0;
  double d_p = 0;
  double d_s = 0;
};

struct Stability {
  bool primary = false;
  bool secondary = false;
  bool relay = false;

  bool all() const { return primary && secondary && relay; }
};

enum class Failure {
  primary_unstable,
  secondary_unstable,
  relay_unstable,
  near_singular,
};

inline const char* to_string(Failure f) {
  switch (f) {
    case Failure::primary_unstable: return "primary queue unstable";
    case Failure::secondary_unstable: return "secondary queue unstable";
    case Failure::relay_unstable: return "relay queue unstable";
    case Failure::near_singular: return "near-singular denominator";
  }
  return "unknown";
}

// Raised when a closed form is evaluated outside its domain.
class ModelError : public std::runtime_error {
public:
  explicit ModelError(Failure f, const std::string& where = {})
      : std::runtime_error(where.empty() ? std::string(to_string(f))
                                         : where + ": " + to_string(f)),
        failure_(f) {}
  Failure failure() const { return failure_; }

private:
  Failure failure_;
};

}  // namespace coopcr
