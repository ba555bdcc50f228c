#pragma once

// Parameter sweeps behind the throughput-region and delay-tradeoff figures,
// optionally validated against the slot simulator, and their CSV form.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "coopcr/analytic_model.hpp"
#include "coopcr/policy_optimizer.hpp"
#include "coopcr/slot_simulator.hpp"
#include "coopcr/types.hpp"

namespace coopcr {

enum class Solver { p1, p3 };
enum class SweptVariable { lambda_p, lambda_s };

// Inclusive arithmetic grid; values are from + i*step, not accumulated.
struct Range {
  double from = 0;
  double to = 0;
  double step = 0.01;

  void validate() const {
    if (!(step > 0.0)) throw std::invalid_argument("sweep step must be > 0");
    if (!(from >= 0.0 && to <= 1.0 && from <= to))
      throw std::invalid_argument("sweep range must satisfy 0 <= from <= to <= 1");
  }

  std::vector<double> values() const {
    validate();
    std::vector<double> v;
    const auto n = static_cast<std::int64_t>(std::floor((to - from) / step + 1e-9));
    for (std::int64_t i = 0; i <= n; ++i) {
      // Snap to 1e-12 so 0.01*29 prints and compares as 0.29.
      const double x = std::round((from + static_cast<double>(i) * step) * 1e12) / 1e12;
      v.push_back(x);
    }
    return v;
  }
};

struct SimAttach {
  std::int64_t horizon = 100000;
  std::uint64_t base_seed = 1;
};

struct SweepSpec {
  SweptVariable swept = SweptVariable::lambda_p;
  Range range;
  NetworkParams base;
  std::vector<double> psi_list;
  bool baseline = true;
  Solver solver = Solver::p3;
  std::optional<SimAttach> simulate;
  SearchConfig search;
};

struct SweepRow {
  double swept = 0;
  std::optional<double> psi;  // empty for the baseline series
  OptResult result;
  std::optional<SimReport> sim;
  std::optional<std::uint64_t> seed;

  bool is_baseline() const { return !psi.has_value(); }
};

inline NetworkParams with_swept(NetworkParams p, SweptVariable v, double x) {
  if (v == SweptVariable::lambda_p)
    p.lambda_p = x;
  else
    p.lambda_s = x;
  return p;
}

// Rows ordered by swept value, then psi_list order, then the baseline.
inline std::vector<SweepRow> run_sweep(const SweepSpec& spec) {
  for (double psi : spec.psi_list) (void)DelaySpec{psi};  // validates
  const auto xs = spec.range.values();
  std::vector<SweepRow> rows;
  std::uint64_t sim_index = 0;
  for (double x : xs) {
    const NetworkParams p = with_swept(spec.base, spec.swept, x);
    for (double psi : spec.psi_list) {
      SweepRow row;
      row.swept = x;
      row.psi = psi;
      row.result = spec.solver == Solver::p1 ? solve_p1(p, DelaySpec{psi}, spec.search)
                                             : solve_p3(p, DelaySpec{psi}, spec.search);
      if (spec.simulate && row.result.feasible()) {
        SimConfig sc{p, row.result.policy, spec.simulate->horizon, std::nullopt,
                     spec.simulate->base_seed + sim_index++};
        row.sim = run(sc);
        row.seed = sc.seed;
      }
      rows.push_back(std::move(row));
    }
    if (spec.baseline) {
      SweepRow row;
      row.swept = x;
      row.result = solve_baseline(
          p, spec.solver == Solver::p1 ? Objective::throughput : Objective::delay, spec.search);
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

// Maximum SU throughput vs lambda_p (region boundary); objective column holds
// the largest sustainable lambda_s.
inline std::vector<SweepRow> throughput_region(const NetworkParams& base,
                                               const std::vector<double>& psi_list,
                                               const Range& lambda_p_grid,
                                               const SearchConfig& search = {}) {
  return run_sweep({SweptVariable::lambda_p, lambda_p_grid, base, psi_list, true, Solver::p1,
                    std::nullopt, search});
}

// SU delay vs lambda_s at fixed lambda_p.
inline std::vector<SweepRow> delay_tradeoff_su(const NetworkParams& base,
                                               const std::vector<double>& psi_list,
                                               const Range& lambda_s_grid,
                                               std::optional<SimAttach> sim = std::nullopt,
                                               const SearchConfig& search = {}) {
  return run_sweep({SweptVariable::lambda_s, lambda_s_grid, base, psi_list, true, Solver::p3, sim,
                    search});
}

// PU delay vs lambda_s; same runs as delay_tradeoff_su, read through d_p.
inline std::vector<SweepRow> pu_delay_check(const NetworkParams& base,
                                            const std::vector<double>& psi_list,
                                            const Range& lambda_s_grid,
                                            std::optional<SimAttach> sim = std::nullopt,
                                            const SearchConfig& search = {}) {
  return delay_tradeoff_su(base, psi_list, lambda_s_grid, sim, search);
}

// PU delay vs lambda_p at fixed lambda_s.
inline std::vector<SweepRow> delay_tradeoff_pu(const NetworkParams& base,
                                               const std::vector<double>& psi_list,
                                               const Range& lambda_p_grid,
                                               std::optional<SimAttach> sim = std::nullopt,
                                               const SearchConfig& search = {}) {
  return run_sweep({SweptVariable::lambda_p, lambda_p_grid, base, psi_list, true, Solver::p3, sim,
                    search});
}

// Rows of one series (psi value, or the baseline when psi is empty).
inline std::vector<SweepRow> series(const std::vector<SweepRow>& rows, std::optional<double> psi) {
  std::vector<SweepRow> out;
  for (const auto& r : rows)
    if (r.psi == psi) out.push_back(r);
  return out;
}

struct Onset {
  double last_feasible;
  double first_infeasible;
};

// First feasible -> infeasible transition along one series.
inline std::optional<Onset> infeasibility_onset(const std::vector<SweepRow>& rows,
                                                std::optional<double> psi) {
  const auto s = series(rows, psi);
  for (std::size_t i = 1; i < s.size(); ++i)
    if (s[i - 1].result.feasible() && !s[i].result.feasible())
      return Onset{s[i - 1].swept, s[i].swept};
  return std::nullopt;
}

// --- CSV -------------------------------------------------------------------

inline constexpr const char* kCsvHeader =
    "swept,psi,status,a,b,mu_p,objective,d_p_analytic,d_s_analytic,mu_s_analytic,d_p_sim,"
    "d_s_sim,thr_sim,seed";

inline constexpr const char* kUnboundedDelay = "unbounded";

inline std::string format_g6(double v) {
  if (!std::isfinite(v)) return {};
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

inline std::string csv_line(const SweepRow& row) {
  const auto& r = row.result;
  std::ostringstream os;
  os << format_g6(row.swept) << ',' << (row.psi ? format_g6(*row.psi) : std::string("BL")) << ','
     << (r.feasible() ? "feasible" : "infeasible") << ',';
  if (r.feasible()) {
    os << format_g6(r.policy.a) << ',' << format_g6(r.policy.b) << ',' << format_g6(r.mu_p_star)
       << ',' << format_g6(r.objective) << ',';
    if (row.is_baseline() && r.relay_bound_active)
      os << kUnboundedDelay;
    else
      os << format_g6(r.d_p);
    os << ',' << (r.d_s ? format_g6(*r.d_s) : std::string()) << ',' << format_g6(r.mu_s) << ',';
  } else {
    os << ",,,,,,,";
  }
  if (row.sim) {
    os << format_g6(row.sim->pu_delay_mean) << ',' << format_g6(row.sim->su_delay_mean) << ','
       << format_g6(row.sim->su_throughput) << ',' << *row.seed;
  } else {
    os << ",,,";
  }
  return os.str();
}

inline std::string to_csv(const std::vector<SweepRow>& rows) {
  std::string out = kCsvHeader;
  out += '\n';
  for (const auto& r : rows) {
    out += csv_line(r);
    out += '\n';
  }
  return out;
}

// Writes via a sibling temp file and rename so readers never see a partial file.
inline void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    f << content;
    f.flush();
    if (!f) throw std::runtime_error("write failed: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

// --- presets for the published figures ---------------------------------------

enum class Figure { fig2, fig3, fig4, fig5 };

inline NetworkParams reference_params() { return NetworkParams{0.2, 0.2, 0.3, 0.4, 0.8}; }

inline const std::vector<double>& reference_psi() {
  static const std::vector<double> psi{20.0, 10.0};
  return psi;
}

inline const char* figure_name(Figure f) {
  switch (f) {
    case Figure::fig2: return "fig2";
    case Figure::fig3: return "fig3";
    case Figure::fig4: return "fig4";
    case Figure::fig5: return "fig5";
  }
  return "";
}

inline std::optional<Figure> parse_figure(const std::string& s) {
  if (s == "fig2") return Figure::fig2;
  if (s == "fig3") return Figure::fig3;
  if (s == "fig4") return Figure::fig4;
  if (s == "fig5") return Figure::fig5;
  return std::nullopt;
}

// Sweep definition for one figure. Simulation is attached to the delay figures.
inline SweepSpec figure_spec(Figure f, std::optional<SimAttach> sim) {
  SweepSpec s;
  s.base = reference_params();
  s.psi_list = reference_psi();
  s.baseline = true;
  switch (f) {
    case Figure::fig2:
      s.swept = SweptVariable::lambda_p;
      s.range = {0.0, 0.58, 0.01};
      s.solver = Solver::p1;
      break;
    case Figure::fig3:
    case Figure::fig4:
      s.swept = SweptVariable::lambda_s;
      s.range = {0.01, 0.45, 0.01};
      s.solver = Solver::p3;
      s.simulate = sim;
      break;
    case Figure::fig5:
      s.swept = SweptVariable::lambda_p;
      s.range = {0.01, 0.40, 0.01};
      s.solver = Solver::p3;
      s.simulate = sim;
      break;
  }
  return s;
}

}  // namespace coopcr
