// Command-line front end: solve, simulate, sweep, reproduce.
//
// Exit codes: 0 success (feasible), 2 infeasible, 1 usage/validation/I-O error.

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "coopcr/experiments.hpp"
#include "coopcr/json_io.hpp"
#include "coopcr/policy_optimizer.hpp"
#include "coopcr/run_config.hpp"
#include "coopcr/slot_simulator.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitInfeasible = 2;

constexpr const char* kOutDirEnv = "COOPCR_OUT_DIR";

struct ParamFlags {
  double lp = 0.2, ls = 0.2, hpd = 0.3, hps = 0.4, hsd = 0.8;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--lp", lp, "PU arrival rate lambda_p")->capture_default_str();
    cmd->add_option("--ls", ls, "SU arrival rate lambda_s")->capture_default_str();
    cmd->add_option("--hpd", hpd, "PU->destination success probability")->capture_default_str();
    cmd->add_option("--hps", hps, "PU->SU success probability")->capture_default_str();
    cmd->add_option("--hsd", hsd, "SU->destination success probability")->capture_default_str();
  }

  coopcr::NetworkParams build() const {
    coopcr::NetworkParams p{lp, ls, hpd, hps, hsd};
    if (p.cooperation_degenerate())
      std::cerr << "warning: h_sd <= h_pd, relaying through the SU cannot help the PU\n";
    return p;
  }
};

int cmd_solve(const std::string& problem, const ParamFlags& flags, double psi,
              const coopcr::SearchConfig& search) {
  using namespace coopcr;
  const NetworkParams p = flags.build();
  OptResult r;
  nlohmann::json out;
  out["problem"] = problem;
  if (problem == "p1") {
    r = solve_p1(p, DelaySpec(psi), search);
    out["psi"] = psi;
  } else if (problem == "p3") {
    r = solve_p3(p, DelaySpec(psi), search);
    out["psi"] = psi;
  } else if (problem == "bl-throughput") {
    r = solve_baseline(p, Objective::throughput, search);
  } else {
    r = solve_baseline(p, Objective::delay, search);
  }
  out["params"] = to_json(p);
  out["result"] = to_json(r);
  std::cout << out.dump(2) << '\n';
  return r.feasible() ? kExitOk : kExitInfeasible;
}

int cmd_simulate(const ParamFlags& flags, double a, double b, std::int64_t slots,
                 std::optional<std::int64_t> warmup, std::uint64_t seed) {
  using namespace coopcr;
  SimConfig cfg{flags.build(), Policy{a, b}, slots, warmup, seed};
  const SimReport rep = run(cfg);
  nlohmann::json out = to_json(rep);
  out["params"] = to_json(cfg.params);
  out["policy"] = {{"a", cfg.policy.a.value()}, {"b", cfg.policy.b.value()}};
  std::cout << out.dump(2) << '\n';
  return kExitOk;
}

int cmd_sweep(const std::string& config_path, const std::string& out_override) {
  using namespace coopcr;
  std::ifstream in(config_path);
  if (!in) {
    std::cerr << "error: cannot open config " << config_path << '\n';
    return kExitError;
  }
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    std::cerr << "error: " << config_path << ": " << e.what() << '\n';
    return kExitError;
  }
  const RunConfig rc = parse_run_config(j);
  const std::string csv = to_csv(run_sweep(rc.sweep));
  std::string target = out_override.empty() ? rc.output.value_or("") : out_override;
  if (target.empty()) {
    std::cout << csv;
  } else {
    write_file_atomic(target, csv);
    std::cerr << "wrote " << target << '\n';
  }
  return kExitOk;
}

int cmd_reproduce(const std::string& figure, std::string out_dir, std::int64_t slots,
                  std::uint64_t seed, bool no_sim) {
  using namespace coopcr;
  if (out_dir.empty()) {
    const char* env = std::getenv(kOutDirEnv);
    out_dir = env ? env : ".";
  }
  std::vector<Figure> figs;
  if (figure == "all") {
    figs = {Figure::fig2, Figure::fig3, Figure::fig4, Figure::fig5};
  } else if (auto f = parse_figure(figure)) {
    figs = {*f};
  } else {
    std::cerr << "error: unknown figure '" << figure << "'\n";
    return kExitError;
  }
  std::optional<SimAttach> sim;
  if (!no_sim) sim = SimAttach{slots, seed};
  for (Figure f : figs) {
    const auto path = std::filesystem::path(out_dir) / (std::string(figure_name(f)) + ".csv");
    write_file_atomic(path, to_csv(run_sweep(figure_spec(f, sim))));
    std::cerr << "wrote " << path.string() << '\n';
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cooperative cognitive radio queueing: optimizer, simulator and sweeps"};
  app.require_subcommand(1);

  ParamFlags flags;
  coopcr::SearchConfig search;

  auto* solve = app.add_subcommand("solve", "Optimize the cooperation policy; prints JSON");
  std::string problem = "p3";
  double psi = 20.0;
  solve->add_option("--problem", problem, "p1 | p3 | bl-throughput | bl-delay")
      ->check(CLI::IsMember({"p1", "p3", "bl-throughput", "bl-delay"}))
      ->capture_default_str();
  flags.add_to(solve);
  solve->add_option("--psi", psi, "PU delay bound in slots")->capture_default_str();
  solve->add_option("--delta", search.delta, "mu_p grid increment")->capture_default_str();
  solve->add_option("--eps-stab", search.eps_stab, "stability margin")->capture_default_str();

  auto* simulate = app.add_subcommand("simulate", "Run the slot simulator; prints JSON");
  double a = 1.0, b = 0.5;
  std::int64_t slots = 100000;
  std::int64_t warmup = -1;
  std::uint64_t seed = 1;
  flags.add_to(simulate);
  simulate->add_option("--a", a, "admission probability")->capture_default_str();
  simulate->add_option("--b", b, "own-queue selection probability")->capture_default_str();
  simulate->add_option("--slots", slots, "horizon in slots")->capture_default_str();
  simulate->add_option("--warmup", warmup, "slots excluded from statistics (default 10%)");
  simulate->add_option("--seed", seed, "RNG seed")->capture_default_str();

  auto* sweep = app.add_subcommand("sweep", "Run a sweep from a JSON config; writes CSV");
  std::string config_path, sweep_out;
  sweep->add_option("--config", config_path, "JSON sweep config")->required();
  sweep->add_option("--out", sweep_out, "CSV path (overrides config; default stdout)");

  auto* reproduce = app.add_subcommand("reproduce", "Write the CSVs behind the reference figures");
  std::string figure = "all", out_dir;
  std::int64_t repro_slots = 100000;
  std::uint64_t repro_seed = 1;
  bool no_sim = false;
  reproduce->add_option("--figure", figure, "fig2 | fig3 | fig4 | fig5 | all")
      ->capture_default_str();
  reproduce->add_option("--out", out_dir,
                        std::string("output directory (default $") + kOutDirEnv + " or .)");
  reproduce->add_option("--slots", repro_slots, "simulation horizon per row")
      ->capture_default_str();
  reproduce->add_option("--seed", repro_seed, "base seed")->capture_default_str();
  reproduce->add_flag("--no-sim", no_sim, "skip simulation columns");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitError;
  }

  try {
    if (*solve) return cmd_solve(problem, flags, psi, search);
    if (*simulate)
      return cmd_simulate(flags, a, b, slots,
                          warmup < 0 ? std::nullopt : std::optional<std::int64_t>(warmup), seed);
    if (*sweep) return cmd_sweep(config_path, sweep_out);
    if (*reproduce) return cmd_reproduce(figure, out_dir, repro_slots, repro_seed, no_sim);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitError;
  }
  return kExitError;
}
