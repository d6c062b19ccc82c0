// congestexp command-line driver. Talks to the library only through the C API.
#include <cstdio>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "congestexp/congestexp.h"

namespace {

int report(cx_status st) {
  if (st != CX_OK) std::fprintf(stderr, "error: %s\n", cx_last_error());
  return static_cast<int>(st);
}

int find_nash(const std::string& game_path, uint64_t budget) {
  cx_game* game = nullptr;
  if (cx_status st = cx_game_load(game_path.c_str(), &game); st != CX_OK) return report(st);
  cx_nash_list* list = nullptr;
  cx_status st = cx_find_nash(game, budget, &list);
  cx_game_free(game);
  if (st != CX_OK) return report(st);
  size_t needed = 0;
  cx_nash_list_to_json(list, nullptr, 0, &needed);
  std::vector<char> buf(needed);
  st = cx_nash_list_to_json(list, buf.data(), buf.size(), &needed);
  cx_nash_list_free(list);
  if (st != CX_OK) return report(st);
  std::fputs(buf.data(), stdout);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Online congestion game simulator (CongestEXP)"};
  app.require_subcommand(1);
  app.set_version_flag("--version", cx_version());

  std::string config, grid, out = "out", game, trace, report_path;
  uint64_t seed = 0, budget = 0;
  size_t threads = 0;
  double lambda = 0.0, mu = 0.0;

  auto* simulate = app.add_subcommand("simulate", "Run one seeded simulation");
  simulate->add_option("--config", config, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
  simulate->add_option("--seed", seed, "Master seed")->required();
  simulate->add_option("--out", out, "Output directory")->capture_default_str();

  auto* sweep = app.add_subcommand("sweep", "Regret-scaling sweep over a grid");
  sweep->add_option("--config", config, "Base experiment config (JSON)")->required()->check(CLI::ExistingFile);
  sweep->add_option("--grid", grid, "Sweep grid (JSON)")->required()->check(CLI::ExistingFile);
  sweep->add_option("--out", out, "Output directory")->capture_default_str();
  sweep->add_option("--threads", threads, "Worker threads (overrides the grid file)");

  auto* nash = app.add_subcommand("find-nash", "Enumerate pure Nash equilibria");
  nash->add_option("--game", game, "Game file (JSON)")->required()->check(CLI::ExistingFile);
  nash->add_option("--budget", budget, "Enumeration budget (profiles)");

  auto* analyze = app.add_subcommand("analyze", "Recompute regret and welfare from a trace");
  analyze->add_option("--trace", trace, "Trace CSV")->required()->check(CLI::ExistingFile);
  analyze->add_option("--game", game, "Game file; defaults to game.json next to the trace");
  auto* lambda_opt = analyze->add_option("--lambda", lambda, "Smoothness lambda");
  auto* mu_opt = analyze->add_option("--mu", mu, "Smoothness mu");
  lambda_opt->needs(mu_opt);
  mu_opt->needs(lambda_opt);
  analyze->add_option("--out", report_path, "Report path; defaults to report.json next to the trace");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // Usage errors share the validation exit code.
    const int rc = app.exit(e);
    return rc == 0 ? 0 : static_cast<int>(CX_ERR_VALIDATION);
  }

  if (*simulate) return report(cx_simulate(config.c_str(), seed, out.c_str()));
  if (*sweep) return report(cx_sweep(config.c_str(), grid.c_str(), out.c_str(), threads));
  if (*nash) return find_nash(game, budget);
  if (*analyze) {
    const bool smooth = lambda_opt->count() > 0;
    return report(cx_analyze(trace.c_str(), game.empty() ? nullptr : game.c_str(), lambda, mu,
                             smooth ? 1 : 0, report_path.empty() ? nullptr : report_path.c_str()));
  }
  return 0;
}
