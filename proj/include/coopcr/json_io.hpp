#pragma once

// JSON forms of results and reports. Field names are part of the external
// interface; non-finite numbers are written as null.

#include <cmath>
#include <string>

#include "json.hpp"

#include "coopcr/policy_optimizer.hpp"
#include "coopcr/slot_simulator.hpp"
#include "coopcr/types.hpp"

namespace coopcr {

namespace detail {
inline nlohmann::json finite_or_null(double v) {
  return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
}
}  // namespace detail

inline nlohmann::json to_json(const NetworkParams& p) {
  return {{"lambda_p", p.lambda_p.value()},
          {"lambda_s", p.lambda_s.value()},
          {"h_pd", p.h_pd.value()},
          {"h_ps", p.h_ps.value()},
          {"h_sd", p.h_sd.value()}};
}

inline nlohmann::json to_json(const OptResult& r) {
  nlohmann::json j;
  j["status"] = r.feasible() ? "feasible" : "infeasible";
  if (!r.feasible()) return j;
  j["a"] = r.policy.a.value();
  j["b"] = r.policy.b.value();
  j["mu_p"] = r.mu_p_star;
  j["objective"] = detail::finite_or_null(r.objective);
  j["mu_s"] = detail::finite_or_null(r.mu_s);
  j["d_p"] = detail::finite_or_null(r.d_p);
  j["d_s"] = r.d_s ? detail::finite_or_null(*r.d_s) : nlohmann::json(nullptr);
  j["relay_bound_active"] = r.relay_bound_active;
  return j;
}

inline nlohmann::json to_json(const SimReport& r) {
  using detail::finite_or_null;
  return {
      {"slots", r.slots},
      {"warmup", r.warmup},
      {"seed", r.seed},
      {"pu_delay_mean", finite_or_null(r.pu_delay_mean)},
      {"pu_delay_stderr", finite_or_null(r.pu_delay_stderr)},
      {"pu_delay_samples", r.pu_delay_samples},
      {"su_delay_mean", finite_or_null(r.su_delay_mean)},
      {"su_delay_stderr", finite_or_null(r.su_delay_stderr)},
      {"su_delay_samples", r.su_delay_samples},
      {"su_throughput", r.su_throughput},
      {"pu_throughput", r.pu_throughput},
      {"mean_len_p", r.mean_len_p},
      {"mean_len_sp", r.mean_len_sp},
      {"mean_len_s", r.mean_len_s},
      {"pu_arrivals", r.pu_arrivals},
      {"su_arrivals", r.su_arrivals},
      {"pu_departed", r.pu_departed},
      {"su_departed", r.su_departed},
      {"relay_departed", r.relay_departed},
      {"relay_admissions", r.relay_admissions},
      {"wasted_slots", r.wasted_slots},
      {"pu_tx_slots", r.pu_tx_slots},
      {"pu_direct_successes", r.pu_direct_successes},
      {"relay_eligible", r.relay_eligible},
      {"su_access_slots", r.su_access_slots},
      {"su_selected_own", r.su_selected_own},
      {"final_len_p", r.final_len_p},
      {"final_len_sp", r.final_len_sp},
      {"final_len_s", r.final_len_s},
  };
}

}  // namespace coopcr
