#pragma once

// SU throughput / delay optimization under a PU delay bound.
//
// For a fixed PU service rate mu_p the problem in b alone is a linear program
// whose optimum has a closed form (b_star). The outer problem is a line search
// over a uniform mu_p grid covering every admission probability a in [0,1].

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include "coopcr/analytic_model.hpp"
#include "coopcr/types.hpp"

namespace coopcr {

enum class TieBreak {
  smallest_mu_p,  // least relaying burden
  largest_mu_p,
};

struct SearchConfig {
  double delta = 1e-4;     // mu_p grid increment
  double eps_stab = 1e-6;  // interior margin for stability checks
  TieBreak tie_break = TieBreak::smallest_mu_p;

  void validate() const {
    if (!(delta > 0.0)) throw std::invalid_argument("search delta must be > 0");
    if (!(eps_stab >= 0.0)) throw std::invalid_argument("eps_stab must be >= 0");
  }
};

// Objective values within this distance of the best count as ties.
inline constexpr double kTieTolerance = 1e-9;

enum class OptStatus { feasible, infeasible };

enum class Objective { throughput, delay };

struct OptResult {
  OptStatus status = OptStatus::infeasible;
  Policy policy{};
  double objective = std::numeric_limits<double>::quiet_NaN();  // mu_s or D_s
  double mu_p_star = std::numeric_limits<double>::quiet_NaN();
  double mu_s = std::numeric_limits<double>::quiet_NaN();
  double d_p = std::numeric_limits<double>::quiet_NaN();
  std::optional<double> d_s;  // empty when Q_s is unstable at the optimum
  // Baseline only: b sits on the relay stability boundary, so D_p is only
  // finite because of eps_stab.
  bool relay_bound_active = false;

  bool feasible() const { return status == OptStatus::feasible; }
};

// The second argument of the min in the closed-form inner optimum, written
// out term by term. Only meaningful when its denominator is positive.
struct ClosedFormBound {
  double numerator;
  double denominator;
  double value() const { return 1.0 - numerator / denominator; }
};

inline ClosedFormBound b_bound_terms(const NetworkParams& p, double mu_p, double psi) {
  const double lp = p.lambda_p;
  const double hp = p.h_pd;
  const double slack = lp * psi - pu_queue_length(p, mu_p);
  const double admitted = mu_p - hp;
  ClosedFormBound t{};
  t.numerator = lp * lp * admitted * (-hp / mu_p - admitted) + lp * mu_p * admitted -
                slack * admitted * (lp * lp - lp * mu_p);
  t.denominator = -p.h_sd * (lp * lp / mu_p * admitted * (1.0 - mu_p) -
                             slack * (lp * lp - 2.0 * lp * mu_p + mu_p * mu_p));
  return t;
}

// Largest b keeping the relay queue stable (supremum, not attained, when
// packets are being admitted).
inline double relay_stability_limit(const NetworkParams& p, double mu_p) {
  if (detail::relay_idle(p, mu_p)) return 1.0;
  return 1.0 - p.lambda_p * (mu_p - p.h_pd) / (p.h_sd * (mu_p - p.lambda_p));
}

// Optimal b for a fixed mu_p: the largest b with D_p <= psi. Empty when no b
// in [0,1] meets the bound at this mu_p. Throws ModelError when the PU queue
// itself is unstable.
inline std::optional<double> b_star(const NetworkParams& p, double mu_p, const DelaySpec& spec) {
  detail::require_primary_stable(p, mu_p, "b_star");
  // Full relay service (b = 0) must already keep up with admissions.
  if (!detail::relay_idle(p, mu_p) && !(detail::relay_margin(p, mu_p, 0.0) > 0.0))
    return std::nullopt;
  if (spec.is_unbounded()) return relay_stability_limit(p, mu_p);

  const ClosedFormBound t = b_bound_terms(p, mu_p, spec.psi());
  if (t.denominator > kDenominatorEps) {
    const double f = t.value();
    if (f < 0.0) return std::nullopt;
    return std::min(1.0, f);
  }
  // The constraint does not bound b from above here; it either holds
  // everywhere or nowhere on the relay-stable region.
  if (phi_at(p, mu_p, 0.0, spec.psi()) <= 0.0) return 1.0;
  return std::nullopt;
}

// Uniform grid h_pd, h_pd + delta, ... with the upper end always included.
inline std::vector<double> mu_p_grid(const NetworkParams& p, double delta) {
  const double lo = p.h_pd;
  const double hi = p.mu_p_max();
  std::vector<double> grid;
  const double steps = std::floor((hi - lo) / delta + 1e-9);
  const auto n = static_cast<std::size_t>(steps);
  grid.reserve(n + 2);
  for (std::size_t i = 0; i <= n; ++i) grid.push_back(lo + static_cast<double>(i) * delta);
  if (hi - grid.back() > 1e-12) grid.push_back(hi);
  return grid;
}

namespace detail {

struct Candidate {
  double mu_p;
  double b;
  double cost;  // minimized
};

// Two-pass reduction: find the best cost, then apply the tie rule among
// candidates within kTieTolerance of it. Identical to any evaluation order.
template <class Eval>
std::optional<Candidate> line_search(const std::vector<double>& grid, TieBreak tie, Eval&& eval) {
  std::vector<Candidate> found;
  found.reserve(grid.size());
  for (double mu_p : grid)
    if (auto c = eval(mu_p)) found.push_back(*c);
  if (found.empty()) return std::nullopt;

  double best = found.front().cost;
  for (const auto& c : found) best = std::min(best, c.cost);

  std::optional<Candidate> pick;
  for (const auto& c : found) {
    if (c.cost > best + kTieTolerance) continue;
    if (!pick || (tie == TieBreak::smallest_mu_p ? c.mu_p < pick->mu_p : c.mu_p > pick->mu_p))
      pick = c;
  }
  return pick;
}

inline double su_service(const NetworkParams& p, double mu_p, double b) {
  return b * p.h_sd * (1.0 - p.lambda_p / mu_p);
}

inline bool su_stable_with_margin(const NetworkParams& p, double mu_s, double eps) {
  return p.lambda_s == 0.0 ? mu_s > eps : p.lambda_s < mu_s - eps;
}

inline std::optional<double> try_su_delay(const NetworkParams& p, double mu_p, double b) {
  try {
    return su_delay_at(p, mu_p, b);
  } catch (const ModelError&) {
    return std::nullopt;
  }
}

inline OptResult assemble(const NetworkParams& p, const std::optional<Candidate>& c,
                          Objective obj) {
  OptResult r;
  if (!c) return r;
  r.status = OptStatus::feasible;
  r.mu_p_star = c->mu_p;
  r.policy = Policy{admission_for(p, c->mu_p), std::clamp(c->b, 0.0, 1.0)};
  r.mu_s = su_service(p, c->mu_p, c->b);
  try {
    r.d_p = pu_delay_at(p, c->mu_p, c->b);
  } catch (const ModelError&) {
    r.d_p = std::numeric_limits<double>::infinity();
  }
  r.d_s = try_su_delay(p, c->mu_p, c->b);
  r.objective = obj == Objective::throughput ? r.mu_s : c->cost;
  return r;
}

}  // namespace detail

// Maximize SU throughput mu_s subject to D_p <= psi.
inline OptResult solve_p1(const NetworkParams& p, const DelaySpec& spec,
                          const SearchConfig& cfg = {}) {
  cfg.validate();
  const auto grid = mu_p_grid(p, cfg.delta);
  auto best = detail::line_search(grid, cfg.tie_break,
                                  [&](double mu_p) -> std::optional<detail::Candidate> {
    if (!(p.lambda_p < mu_p - cfg.eps_stab)) return std::nullopt;
    const auto b = b_star(p, mu_p, spec);
    if (!b) return std::nullopt;
    return detail::Candidate{mu_p, *b, -detail::su_service(p, mu_p, *b)};
  });
  return detail::assemble(p, best, Objective::throughput);
}

// Minimize SU delay D_s subject to D_p <= psi. The inner optimum is the same
// b_star as for throughput because D_s decreases in b.
inline OptResult solve_p3(const NetworkParams& p, const DelaySpec& spec,
                          const SearchConfig& cfg = {}) {
  cfg.validate();
  const auto grid = mu_p_grid(p, cfg.delta);
  auto best = detail::line_search(grid, cfg.tie_break,
                                  [&](double mu_p) -> std::optional<detail::Candidate> {
    if (!(p.lambda_p < mu_p - cfg.eps_stab)) return std::nullopt;
    const auto b = b_star(p, mu_p, spec);
    if (!b) return std::nullopt;
    if (!detail::su_stable_with_margin(p, detail::su_service(p, mu_p, *b), cfg.eps_stab))
      return std::nullopt;
    const auto ds = detail::try_su_delay(p, mu_p, *b);
    if (!ds) return std::nullopt;
    return detail::Candidate{mu_p, *b, *ds};
  });
  return detail::assemble(p, best, Objective::delay);
}

// Largest b with the relay queue stable by at least eps; empty if none.
inline std::optional<double> b_baseline(const NetworkParams& p, double mu_p, double eps) {
  if (detail::relay_idle(p, mu_p)) return 1.0;
  const double idle = 1.0 - p.lambda_p / mu_p;
  const double lambda_sp = (mu_p - p.h_pd) * p.lambda_p / mu_p;
  const double b = 1.0 - (lambda_sp + eps) / (p.h_sd * idle);
  if (b < 0.0) return std::nullopt;
  return b;
}

// Same objectives with only the queue stability constraints.
inline OptResult solve_baseline(const NetworkParams& p, Objective objective,
                                const SearchConfig& cfg = {}) {
  cfg.validate();
  const auto grid = mu_p_grid(p, cfg.delta);
  auto best = detail::line_search(grid, cfg.tie_break,
                                  [&](double mu_p) -> std::optional<detail::Candidate> {
    if (!(p.lambda_p < mu_p - cfg.eps_stab)) return std::nullopt;
    const auto b = b_baseline(p, mu_p, cfg.eps_stab);
    if (!b) return std::nullopt;
    const double mu_s = detail::su_service(p, mu_p, *b);
    if (objective == Objective::throughput) return detail::Candidate{mu_p, *b, -mu_s};
    if (!detail::su_stable_with_margin(p, mu_s, cfg.eps_stab)) return std::nullopt;
    const auto ds = detail::try_su_delay(p, mu_p, *b);
    if (!ds) return std::nullopt;
    return detail::Candidate{mu_p, *b, *ds};
  });
  OptResult r = detail::assemble(p, best, objective);
  if (r.feasible()) r.relay_bound_active = !detail::relay_idle(p, r.mu_p_star);
  return r;
}

}  // namespace coopcr
