#pragma once

// JSON sweep configuration for the command-line tool. Every object is checked
// against its allowed keys before anything runs.
//
//   {
//     "experiment": "throughput_region" | "delay_tradeoff_su" |
//                   "pu_delay_check" | "delay_tradeoff_pu",
//     "params":   {"lambda_p": .., "lambda_s": .., "h_pd": .., "h_ps": .., "h_sd": ..},
//     "psi":      [20, 10],
//     "baseline": true,
//     "grid":     {"from": 0.01, "to": 0.4, "step": 0.01},
//     "search":   {"delta": 1e-4, "eps_stab": 1e-6},
//     "simulate": {"slots": 100000, "seed": 1},
//     "output":   "out.csv"
//   }
//
// Omitted fields take the reference values used for the published figures.

#include <initializer_list>
#include <optional>
#include <stdexcept>
#include <string>

#include "json.hpp"

#include "coopcr/experiments.hpp"

namespace coopcr {

class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  std::string experiment;
  SweepSpec sweep;
  std::optional<std::string> output;
};

namespace detail {

inline void require_keys(const nlohmann::json& j, const std::string& where,
                         std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& [key, _] : j.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) throw ConfigError(where + ": unknown key '" + key + "'");
  }
}

inline double number_at(const nlohmann::json& j, const char* key, const std::string& where) {
  const auto& v = j.at(key);
  if (!v.is_number()) throw ConfigError(where + "." + key + ": expected a number");
  return v.get<double>();
}

template <class T>
T integer_at(const nlohmann::json& j, const char* key, const std::string& where) {
  const auto& v = j.at(key);
  if (!v.is_number_integer() || (v.is_number_integer() && v.get<long long>() < 0))
    throw ConfigError(where + "." + key + ": expected a non-negative integer");
  return v.get<T>();
}

}  // namespace detail

inline RunConfig parse_run_config(const nlohmann::json& j) {
  using detail::number_at;
  detail::require_keys(j, "config",
                       {"experiment", "params", "psi", "baseline", "grid", "search", "simulate",
                        "output"});
  if (!j.contains("experiment") || !j["experiment"].is_string())
    throw ConfigError("config.experiment: required string");

  RunConfig rc;
  rc.experiment = j["experiment"].get<std::string>();
  auto& s = rc.sweep;
  const bool known_su = rc.experiment == "delay_tradeoff_su" || rc.experiment == "pu_delay_check";
  if (rc.experiment == "throughput_region") {
    s = figure_spec(Figure::fig2, std::nullopt);
  } else if (known_su) {
    s = figure_spec(Figure::fig3, std::nullopt);
  } else if (rc.experiment == "delay_tradeoff_pu") {
    s = figure_spec(Figure::fig5, std::nullopt);
  } else {
    throw ConfigError("config.experiment: unknown experiment '" + rc.experiment + "'");
  }
  s.simulate.reset();

  try {
    if (j.contains("params")) {
      const auto& p = j["params"];
      detail::require_keys(p, "params", {"lambda_p", "lambda_s", "h_pd", "h_ps", "h_sd"});
      if (p.contains("lambda_p")) s.base.lambda_p = number_at(p, "lambda_p", "params");
      if (p.contains("lambda_s")) s.base.lambda_s = number_at(p, "lambda_s", "params");
      if (p.contains("h_pd")) s.base.h_pd = number_at(p, "h_pd", "params");
      if (p.contains("h_ps")) s.base.h_ps = number_at(p, "h_ps", "params");
      if (p.contains("h_sd")) s.base.h_sd = number_at(p, "h_sd", "params");
    }
    if (j.contains("psi")) {
      if (!j["psi"].is_array()) throw ConfigError("psi: expected an array of numbers");
      s.psi_list.clear();
      for (const auto& v : j["psi"]) {
        if (!v.is_number()) throw ConfigError("psi: expected an array of numbers");
        s.psi_list.push_back(DelaySpec(v.get<double>()).psi());
      }
    }
    if (j.contains("baseline")) {
      if (!j["baseline"].is_boolean()) throw ConfigError("baseline: expected a boolean");
      s.baseline = j["baseline"].get<bool>();
    }
    if (j.contains("grid")) {
      const auto& g = j["grid"];
      detail::require_keys(g, "grid", {"from", "to", "step"});
      if (g.contains("from")) s.range.from = number_at(g, "from", "grid");
      if (g.contains("to")) s.range.to = number_at(g, "to", "grid");
      if (g.contains("step")) s.range.step = number_at(g, "step", "grid");
    }
    s.range.validate();
    if (j.contains("search")) {
      const auto& g = j["search"];
      detail::require_keys(g, "search", {"delta", "eps_stab"});
      if (g.contains("delta")) s.search.delta = number_at(g, "delta", "search");
      if (g.contains("eps_stab")) s.search.eps_stab = number_at(g, "eps_stab", "search");
    }
    s.search.validate();
    if (j.contains("simulate")) {
      if (rc.experiment == "throughput_region")
        throw ConfigError("simulate: not supported for throughput_region");
      const auto& g = j["simulate"];
      detail::require_keys(g, "simulate", {"slots", "seed"});
      SimAttach sim;
      if (g.contains("slots")) sim.horizon = detail::integer_at<std::int64_t>(g, "slots", "simulate");
      if (g.contains("seed")) sim.base_seed = detail::integer_at<std::uint64_t>(g, "seed", "simulate");
      if (sim.horizon < 2) throw ConfigError("simulate.slots: must be >= 2");
      s.simulate = sim;
    }
    if (j.contains("output")) {
      if (!j["output"].is_string()) throw ConfigError("output: expected a string");
      rc.output = j["output"].get<std::string>();
    }
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return rc;
}

}  // namespace coopcr
