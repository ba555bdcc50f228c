#include <gtest/gtest.h>

#include <cmath>
#include <optional>
#include <random>

#include "coopcr/analytic_model.hpp"
#include "coopcr/policy_optimizer.hpp"
#include "test_support.hpp"

using namespace coopcr;
using coopcr::testing::random_params;
using coopcr::testing::rel_err;
using coopcr::testing::uniform;

namespace {

const NetworkParams kRef{0.2, 0.2, 0.3, 0.4, 0.8};

// D_p <= psi checked through the delay formula itself, independent of phi
// and of the closed-form bound.
bool meets_delay_bound(const NetworkParams& p, double mu_p, double b, double psi) {
  if (!(p.lambda_p < mu_p)) return false;
  if (!detail::relay_idle(p, mu_p) && !(detail::relay_margin(p, mu_p, b) > 0)) return false;
  try {
    return pu_delay_at(p, mu_p, b) <= psi;
  } catch (const ModelError&) {
    return false;
  }
}

// Best b on a uniform grid for fixed mu_p.
std::optional<double> brute_force_b(const NetworkParams& p, double mu_p, double psi, int n) {
  std::optional<double> best;
  for (int i = 0; i <= n; ++i) {
    const double b = static_cast<double>(i) / n;
    if (meets_delay_bound(p, mu_p, b, psi)) best = b;  // objective increases in b
  }
  return best;
}

struct Instance {
  NetworkParams params;
  double mu_p;
  double psi;
};

Instance random_instance(std::mt19937_64& g) {
  for (;;) {
    const auto p = random_params(g);
    const double mu_p = uniform(g, p.h_pd, p.mu_p_max());
    if (!(p.lambda_p < mu_p - 1e-3)) continue;
    const double psi = uniform(g, 1, 60);
    return {p, mu_p, psi};
  }
}

// Random params with a psi for which the throughput problem is feasible.
std::pair<NetworkParams, double> feasible_case(std::mt19937_64& g) {
  SearchConfig cfg;
  cfg.delta = 1e-2;
  for (;;) {
    auto p = random_params(g, 0.05, 0.9);
    p.lambda_p = uniform(g, 0.02, 0.9) * p.mu_p_max();
    const double psi = uniform(g, 3, 40);
    if (solve_p1(p, DelaySpec(psi), cfg).feasible()) return {p, psi};
  }
}

}  // namespace

TEST(BStar, ClosedFormIsTheRootOfPhi) {
  std::mt19937_64 g(101);
  int checked = 0;
  while (checked < 500) {
    const auto [p, mu_p, psi] = random_instance(g);
    const auto t = b_bound_terms(p, mu_p, psi);
    if (!(t.denominator > 1e-9)) continue;
    const double f0 = phi_at(p, mu_p, 0, psi), f1 = phi_at(p, mu_p, 1, psi);
    const double root = -f0 / (f1 - f0);
    EXPECT_NEAR(t.value(), root, 1e-9 * (1 + std::abs(root)));
    ++checked;
  }
}

TEST(BStar, MatchesGridSearchOracle) {
  std::mt19937_64 g(102);
  int feasible = 0, infeasible = 0;
  for (int k = 0; k < 300; ++k) {
    const auto [p, mu_p, psi] = random_instance(g);
    const auto closed = b_star(p, mu_p, DelaySpec(psi));
    const auto brute = brute_force_b(p, mu_p, psi, 10000);
    if (!brute) {
      // Infeasible on the grid: closed form must say infeasible or give b < 1e-4.
      if (closed) {
        EXPECT_LT(*closed, 1e-4);
      }
      ++infeasible;
      continue;
    }
    ASSERT_TRUE(closed.has_value()) << "closed form infeasible where grid found b=" << *brute;
    EXPECT_GE(*closed + 1e-12, *brute);
    EXPECT_LE(*closed - *brute, 1e-4 + 1e-12);
    ++feasible;
  }
  EXPECT_GT(feasible, 100);
  EXPECT_GT(infeasible, 10);
}

TEST(BStar, ConstraintIsActiveBelowOne) {
  std::mt19937_64 g(103);
  int checked = 0;
  while (checked < 300) {
    const auto [p, mu_p, psi] = random_instance(g);
    const auto b = b_star(p, mu_p, DelaySpec(psi));
    if (!b || *b >= 1.0) continue;
    const double scale = std::abs(phi_at(p, mu_p, 0, psi)) + std::abs(phi_at(p, mu_p, 1, psi));
    EXPECT_NEAR(phi_at(p, mu_p, *b, psi) / scale, 0.0, 1e-10);
    EXPECT_NEAR(pu_delay_at(p, mu_p, *b), psi, 1e-6 * psi);
    ++checked;
  }
}

TEST(BStar, LooseBoundOnlyLimitedByRelayStability) {
  // Without admissions the relay queue stays empty and b* = 1.
  EXPECT_EQ(b_star(kRef, kRef.h_pd, DelaySpec(1e9)).value(), 1.0);
  // With admissions, b* approaches the relay stability limit from below.
  const double mu_p = 0.5;
  const double limit = relay_stability_limit(kRef, mu_p);
  const double b = b_star(kRef, mu_p, DelaySpec(1e9)).value();
  EXPECT_LT(b, limit);
  EXPECT_NEAR(b, limit, 1e-6);
  EXPECT_LT(limit, 1.0);
}

TEST(BStar, InfeasibleWhenEvenFullRelayServiceMissesTheBound) {
  // D_p at b = 0 already exceeds psi.
  const double mu_p = 0.45;
  const double psi = 0.5 * pu_delay_at(kRef, mu_p, 0.0);
  EXPECT_FALSE(b_star(kRef, mu_p, DelaySpec(psi)).has_value());
}

TEST(BStar, PrimaryUnstableIsAnError) {
  NetworkParams p{0.5, 0.2, 0.3, 0.4, 0.8};
  EXPECT_THROW(b_star(p, 0.4, DelaySpec(10)), ModelError);
}

TEST(Grid, CoversTheServiceRateInterval) {
  const auto grid = mu_p_grid(kRef, 1e-2);
  EXPECT_EQ(grid.front(), 0.3);
  EXPECT_NEAR(grid.back(), 0.58, 1e-15);
  EXPECT_EQ(grid.size(), 29u);
  const auto coarse = mu_p_grid(kRef, 0.5);
  ASSERT_EQ(coarse.size(), 2u);
  EXPECT_EQ(coarse.back(), kRef.mu_p_max());
}

TEST(SolveP1, InfeasibleWhenPrimaryCannotBeStabilized) {
  NetworkParams p{0.6, 0.2, 0.3, 0.4, 0.8};
  const auto r = solve_p1(p, DelaySpec(20));
  EXPECT_FALSE(r.feasible());
  EXPECT_FALSE(solve_baseline(p, Objective::throughput).feasible());
}

TEST(SolveP1, MatchesTwoDimensionalBruteForce) {
  std::mt19937_64 g(104);
  std::vector<std::pair<NetworkParams, double>> cases{{kRef, 20.0}, {kRef, 10.0}};
  while (cases.size() < 8) cases.push_back(feasible_case(g));
  int compared = 0;
  for (const auto& [p, psi] : cases) {
    double best = -1;
    for (int i = 0; i <= 200; ++i) {
      const double mu_p = service_rate_p(p, i / 200.0);
      for (int j = 0; j <= 200; ++j) {
        const double b = j / 200.0;
        if (!meets_delay_bound(p, mu_p, b, psi)) continue;
        best = std::max(best, b * p.h_sd * (1 - p.lambda_p / mu_p));
      }
    }
    const auto r = solve_p1(p, DelaySpec(psi));
    if (best < 0) {
      EXPECT_TRUE(!r.feasible() || r.objective < 2e-3);
      continue;
    }
    ASSERT_TRUE(r.feasible());
    EXPECT_NEAR(r.objective, best, 2e-3);
    EXPECT_GE(r.objective, best - 1e-12);
    ++compared;
  }
  EXPECT_EQ(compared, 8);
}

TEST(SolveP1, InnerSolutionIsOptimalOnEveryGridPoint) {
  std::mt19937_64 g(105);
  int compared = 0;
  for (int k = 0; k < 10; ++k) {
    const auto [p, psi] = feasible_case(g);
    for (double mu_p : mu_p_grid(p, 0.02)) {
      if (!(p.lambda_p < mu_p - 1e-6)) continue;
      const auto b = b_star(p, mu_p, DelaySpec(psi));
      if (!b) continue;
      const double best = *b * p.h_sd * (1 - p.lambda_p / mu_p);
      for (int j = 0; j <= 2000; ++j) {
        const double bb = j / 2000.0;
        if (!meets_delay_bound(p, mu_p, bb, psi)) continue;
        EXPECT_LE(bb * p.h_sd * (1 - p.lambda_p / mu_p), best + 1e-6);
      }
      ++compared;
    }
  }
  EXPECT_GE(compared, 50);
}

TEST(SolveP1, ReferenceRegionPoint) {
  const auto r20 = solve_p1(kRef, DelaySpec(20));
  const auto r10 = solve_p1(kRef, DelaySpec(10));
  const auto bl = solve_baseline(kRef, Objective::throughput);
  ASSERT_TRUE(r20.feasible() && r10.feasible() && bl.feasible());
  EXPECT_GT(bl.objective, r20.objective);
  EXPECT_GT(r20.objective, r10.objective);
  EXPECT_LE(r20.d_p, 20 + 1e-9);
  EXPECT_NEAR(r20.d_p, 20, 2e-2);
  EXPECT_GE(r20.policy.a, 0.0);
  EXPECT_LE(r20.policy.a, 1.0);
}

TEST(SolveP1, IdlePrimaryGivesFullSecondaryService) {
  NetworkParams p{0.0, 0.2, 0.3, 0.4, 0.8};
  const auto r = solve_p1(p, DelaySpec(20));
  ASSERT_TRUE(r.feasible());
  EXPECT_DOUBLE_EQ(r.objective, 0.8);
  EXPECT_EQ(r.policy.b, 1.0);
  // Every mu_p ties; the rule picks the least relaying.
  EXPECT_EQ(r.policy.a, 0.0);
  SearchConfig cfg;
  cfg.tie_break = TieBreak::largest_mu_p;
  EXPECT_EQ(solve_p1(p, DelaySpec(20), cfg).policy.a, 1.0);
}

TEST(SolveP1, GridRefinementIsStable) {
  std::mt19937_64 g(106);
  for (int k = 0; k < 20; ++k) {
    const auto [p, psi] = feasible_case(g);
    SearchConfig coarse, fine;
    coarse.delta = 1e-3;
    fine.delta = 5e-4;
    const auto a = solve_p1(p, DelaySpec(psi), coarse);
    const auto b = solve_p1(p, DelaySpec(psi), fine);
    ASSERT_EQ(a.feasible(), b.feasible());
    if (a.feasible()) {
      EXPECT_LT(std::abs(a.objective - b.objective), 10 * coarse.delta * p.h_sd);
    }
  }
}

TEST(SolveP1, TighterBoundNeverHelps) {
  std::mt19937_64 g(107);
  SearchConfig cfg;
  cfg.delta = 1e-3;
  int delay_checked = 0;
  for (int k = 0; k < 40; ++k) {
    const auto [p, psi1] = feasible_case(g);
    const double psi2 = psi1 + uniform(g, 0.5, 30);
    const auto r1 = solve_p1(p, DelaySpec(psi1), cfg);
    const auto r2 = solve_p1(p, DelaySpec(psi2), cfg);
    ASSERT_TRUE(r1.feasible() && r2.feasible());
    EXPECT_LE(r1.objective, r2.objective + 1e-12);
    const auto d1 = solve_p3(p, DelaySpec(psi1), cfg);
    const auto d2 = solve_p3(p, DelaySpec(psi2), cfg);
    if (d1.feasible()) {
      ASSERT_TRUE(d2.feasible());
      EXPECT_GE(d1.objective, d2.objective - 1e-9);
      ++delay_checked;
    }
  }
  EXPECT_GE(delay_checked, 10);
}

TEST(SolveP3, DelayBoundHoldsWithEqualityAtReference) {
  for (double psi : {10.0, 20.0}) {
    for (double ls : {0.1, 0.2, 0.3}) {
      NetworkParams p{0.2, ls, 0.3, 0.4, 0.8};
      const auto r = solve_p3(p, DelaySpec(psi));
      ASSERT_TRUE(r.feasible()) << psi << " " << ls;
      EXPECT_NEAR(r.d_p, psi, 1e-3 * psi);
      EXPECT_LE(r.d_p, psi * (1 + 1e-12));
      ASSERT_TRUE(r.d_s.has_value());
      EXPECT_DOUBLE_EQ(*r.d_s, r.objective);
    }
  }
}

TEST(SolveP3, SameInnerOptimumAsThroughputProblem) {
  // For a fixed mu_p, the delay-minimizing b on a dense grid is b*.
  std::mt19937_64 g(108);
  int checked = 0;
  while (checked < 200) {
    const auto [p, mu_p, psi] = random_instance(g);
    const auto b = b_star(p, mu_p, DelaySpec(psi));
    if (!b) continue;
    const double mu_s = *b * p.h_sd * (1 - p.lambda_p / mu_p);
    if (!(p.lambda_s < mu_s - 1e-3)) continue;
    double best_b = -1, best_ds = std::numeric_limits<double>::infinity();
    for (int j = 0; j <= 10000; ++j) {
      const double bb = j / 10000.0;
      if (!meets_delay_bound(p, mu_p, bb, psi)) continue;
      if (!(p.lambda_s < bb * p.h_sd * (1 - p.lambda_p / mu_p))) continue;
      const double ds = su_delay_at(p, mu_p, bb);
      if (ds < best_ds) best_ds = ds, best_b = bb;
    }
    ASSERT_GE(best_b, 0);
    EXPECT_NEAR(best_b, *b, 1e-4 + 1e-12);
    ++checked;
  }
}

TEST(SolveP3, AgreesWithThroughputSolverAtReference) {
  for (double psi : {10.0, 20.0}) {
    for (double ls : {0.1, 0.2, 0.3}) {
      NetworkParams p{0.2, ls, 0.3, 0.4, 0.8};
      const auto a = solve_p1(p, DelaySpec(psi));
      const auto b = solve_p3(p, DelaySpec(psi));
      EXPECT_NEAR(a.policy.a, b.policy.a, 1e-6);
      EXPECT_NEAR(a.policy.b, b.policy.b, 1e-6);
    }
  }
}

TEST(SolveP3, InfeasibilityIsMonotoneInPrimaryLoad) {
  std::mt19937_64 g(109);
  SearchConfig cfg;
  cfg.delta = 1e-3;
  for (int k = 0; k < 15; ++k) {
    auto p = random_params(g, 0.05, 0.9);
    p.lambda_s = uniform(g, 0.02, 0.3);
    const double psi = uniform(g, 3, 30);
    bool seen_infeasible = false;
    for (int i = 1; i <= 60; ++i) {
      p.lambda_p = i / 100.0;
      const bool feasible = solve_p3(p, DelaySpec(psi), cfg).feasible();
      if (seen_infeasible) {
        EXPECT_FALSE(feasible) << "lambda_p=" << i / 100.0;
      }
      seen_infeasible = seen_infeasible || !feasible;
    }
  }
}

TEST(SolveP3, InfeasibleWhenSecondaryCannotBeServed) {
  NetworkParams p{0.2, 0.9, 0.3, 0.4, 0.8};
  EXPECT_FALSE(solve_p3(p, DelaySpec(20)).feasible());
}

TEST(Baseline, DominatesConstrainedSolutions) {
  std::mt19937_64 g(110);
  SearchConfig cfg;
  cfg.delta = 1e-3;
  int delay_checked = 0;
  for (int k = 0; k < 40; ++k) {
    auto [p, psi] = feasible_case(g);
    const auto c1 = solve_p1(p, DelaySpec(psi), cfg);
    const auto b1 = solve_baseline(p, Objective::throughput, cfg);
    ASSERT_TRUE(c1.feasible() && b1.feasible());
    EXPECT_GE(b1.objective, c1.objective - 1e-12);
    p.lambda_s = uniform(g, 0.1, 0.9) * c1.objective;
    const auto c3 = solve_p3(p, DelaySpec(psi), cfg);
    const auto b3 = solve_baseline(p, Objective::delay, cfg);
    if (c3.feasible()) {
      ASSERT_TRUE(b3.feasible());
      EXPECT_LE(b3.objective, c3.objective + 1e-9);
      ++delay_checked;
    }
  }
  EXPECT_GE(delay_checked, 10);
}

TEST(Baseline, PrimaryDelayExceedsBoundAtReference) {
  for (double ls : {0.1, 0.2, 0.3}) {
    NetworkParams p{0.2, ls, 0.3, 0.4, 0.8};
    const auto r = solve_baseline(p, Objective::delay);
    ASSERT_TRUE(r.feasible());
    EXPECT_TRUE(r.relay_bound_active);
    EXPECT_GT(r.d_p, 20.0);
    const auto s = stability_with_margin(p, derived_rates(p, r.policy), 0.0);
    EXPECT_TRUE(s.all());
  }
  const auto t = solve_baseline(kRef, Objective::throughput);
  EXPECT_GT(t.d_p, 20.0);
}

TEST(Solvers, Deterministic) {
  const auto a = solve_p3(kRef, DelaySpec(20));
  const auto b = solve_p3(kRef, DelaySpec(20));
  EXPECT_EQ(a.policy.a.value(), b.policy.a.value());
  EXPECT_EQ(a.policy.b.value(), b.policy.b.value());
  EXPECT_EQ(a.objective, b.objective);
}

TEST(Solvers, RejectsBadSearchConfig) {
  SearchConfig cfg;
  cfg.delta = 0;
  EXPECT_THROW(solve_p1(kRef, DelaySpec(20), cfg), std::invalid_argument);
}
