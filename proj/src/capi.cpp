#include "congestexp/congestexp.h"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <exception>
#include <filesystem>
#include <memory>
#include <new>
#include <string>

#include "congestexp/config.hpp"
#include "congestexp/equilibrium.hpp"
#include "congestexp/error.hpp"
#include "congestexp/factored_policy.hpp"
#include "congestexp/harness.hpp"
#include "json.hpp"

struct cx_game {
  congestexp::CongestionGame game;
};
struct cx_policy {
  congestexp::FactoredPolicy policy;
};
struct cx_rng {
  congestexp::Rng rng;
};
struct cx_nash_list {
  std::size_t num_players;
  std::vector<congestexp::NashCertificate> certs;
};

namespace {

thread_local std::string g_last_error;

cx_status to_status(congestexp::ErrorCode code) {
  switch (code) {
    case congestexp::ErrorCode::kValidation: return CX_ERR_VALIDATION;
    case congestexp::ErrorCode::kBudget: return CX_ERR_BUDGET;
    case congestexp::ErrorCode::kIo: return CX_ERR_IO;
    case congestexp::ErrorCode::kInvariant: return CX_ERR_INVARIANT;
  }
  return CX_ERR_INTERNAL;
}

template <typename F>
cx_status guarded(F&& body) {
  g_last_error.clear();
  try {
    body();
    return CX_OK;
  } catch (const congestexp::Error& e) {
    g_last_error = e.what();
    return to_status(e.code());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
  } catch (const std::exception& e) {
    g_last_error = e.what();
  } catch (...) {
    g_last_error = "unknown error";
  }
  return CX_ERR_INTERNAL;
}

cx_status invalid(const char* what) {
  g_last_error = what;
  return CX_ERR_INVALID_ARGUMENT;
}

cx_status copy_out(const std::string& text, char* buf, std::size_t cap, std::size_t* needed) {
  if (needed) *needed = text.size() + 1;
  if (buf && cap >= text.size() + 1) {
    std::memcpy(buf, text.data(), text.size());
    buf[text.size()] = '\0';
    return CX_OK;
  }
  if (buf == nullptr && needed != nullptr) return CX_OK;
  return invalid("output buffer too small");
}

congestexp::JointAction joint_from(const uint64_t* actions, std::size_t n) {
  congestexp::JointAction joint;
  for (std::size_t i = 0; i < n; ++i) joint.emplace_back(actions[i]);
  return joint;
}

}  // namespace

extern "C" {

const char* cx_version(void) { return "0.1.0"; }

const char* cx_last_error(void) { return g_last_error.c_str(); }

cx_status cx_game_load(const char* path, cx_game** out) {
  if (!path || !out) return invalid("null argument");
  return guarded([&] { *out = new cx_game{congestexp::load_game_file(path)}; });
}

cx_status cx_game_from_json(const char* text, cx_game** out) {
  if (!text || !out) return invalid("null argument");
  return guarded([&] { *out = new cx_game{congestexp::game_from_json(text)}; });
}

void cx_game_free(cx_game* game) { delete game; }

cx_status cx_game_dims(const cx_game* game, size_t* num_players, size_t* num_facilities,
                       size_t* k) {
  if (!game) return invalid("null game");
  if (num_players) *num_players = game->game.num_players();
  if (num_facilities) *num_facilities = game->game.num_facilities();
  if (k) *k = game->game.k();
  return CX_OK;
}

cx_status cx_game_to_json(const cx_game* game, char* buf, size_t cap, size_t* needed) {
  if (!game) return invalid("null game");
  std::string text;
  const cx_status st = guarded([&] { text = congestexp::game_to_json(game->game); });
  return st == CX_OK ? copy_out(text, buf, cap, needed) : st;
}

cx_status cx_game_player_reward(const cx_game* game, size_t player, const uint64_t* actions,
                                size_t num_players, double* out) {
  if (!game || !actions || !out) return invalid("null argument");
  if (num_players != game->game.num_players()) return invalid("joint action has the wrong size");
  return guarded([&] {
    *out = congestexp::player_reward(game->game, player, joint_from(actions, num_players));
  });
}

cx_status cx_game_expected_welfare(const cx_game* game, const double* marginals, size_t len,
                                   double* out) {
  if (!game || !marginals || !out) return invalid("null argument");
  const std::size_t n = game->game.num_players(), nf = game->game.num_facilities();
  if (len != n * nf) return invalid("marginals must have n * F entries");
  return guarded([&] {
    congestexp::MarginalProfile q(n);
    for (std::size_t i = 0; i < n; ++i) q[i].assign(marginals + i * nf, marginals + (i + 1) * nf);
    *out = congestexp::expected_welfare(game->game, q);
  });
}

cx_status cx_find_nash(const cx_game* game, uint64_t budget, cx_nash_list** out) {
  if (!game || !out) return invalid("null argument");
  return guarded([&] {
    auto certs = congestexp::find_pure_nash(
        game->game, budget == 0 ? congestexp::kDefaultEnumerationBudget : budget);
    *out = new cx_nash_list{game->game.num_players(), std::move(certs)};
  });
}

void cx_nash_list_free(cx_nash_list* list) { delete list; }

size_t cx_nash_list_size(const cx_nash_list* list) { return list ? list->certs.size() : 0; }

cx_status cx_nash_list_get(const cx_nash_list* list, size_t index, uint64_t* actions,
                           size_t num_players, int* strict, double* gap) {
  if (!list) return invalid("null list");
  if (index >= list->certs.size()) return invalid("index out of range");
  const auto& cert = list->certs[index];
  if (actions) {
    if (num_players != list->num_players) return invalid("joint action has the wrong size");
    for (std::size_t i = 0; i < num_players; ++i) actions[i] = cert.profile[i].mask();
  }
  if (strict) *strict = cert.strict ? 1 : 0;
  if (gap) *gap = cert.gap;
  return CX_OK;
}

cx_status cx_nash_list_to_json(const cx_nash_list* list, char* buf, size_t cap, size_t* needed) {
  if (!list) return invalid("null list");
  std::string text;
  const cx_status st = guarded([&] {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& cert : list->certs) {
      nlohmann::json profile = nlohmann::json::array();
      for (auto a : cert.profile) profile.push_back(a.facilities());
      nlohmann::json c;
      c["profile"] = std::move(profile);
      c["strict"] = cert.strict;
      c["gap"] = std::isfinite(cert.gap) ? nlohmann::json(cert.gap) : nlohmann::json(nullptr);
      c["epsilon"] = std::isfinite(cert.epsilon) ? nlohmann::json(cert.epsilon)
                                                          : nlohmann::json(nullptr);
      out.push_back(std::move(c));
    }
    text = nlohmann::json{{"equilibria", std::move(out)}}.dump(2) + "\n";
  });
  return st == CX_OK ? copy_out(text, buf, cap, needed) : st;
}

cx_status cx_rng_create(uint64_t master_seed, uint64_t stream_index, cx_rng** out) {
  if (!out) return invalid("null argument");
  return guarded([&] { *out = new cx_rng{congestexp::Rng(master_seed, stream_index)}; });
}

void cx_rng_free(cx_rng* rng) { delete rng; }

cx_status cx_policy_create(const double* scores, size_t num_facilities, size_t k,
                           cx_policy** out) {
  if (!scores || !out) return invalid("null argument");
  return guarded([&] {
    *out = new cx_policy{congestexp::FactoredPolicy(
        std::vector<double>(scores, scores + num_facilities), k)};
  });
}

void cx_policy_free(cx_policy* policy) { delete policy; }

cx_status cx_policy_marginals(const cx_policy* policy, double* out, size_t len) {
  if (!policy || !out) return invalid("null argument");
  if (len != policy->policy.num_facilities()) return invalid("output must have F entries");
  return guarded([&] {
    const auto q = policy->policy.marginals();
    std::copy(q.begin(), q.end(), out);
  });
}

cx_status cx_policy_log_normalizer(const cx_policy* policy, double* out) {
  if (!policy || !out) return invalid("null argument");
  return guarded([&] { *out = policy->policy.log_normalizer(); });
}

cx_status cx_policy_action_probability(const cx_policy* policy, uint64_t action, double* out) {
  if (!policy || !out) return invalid("null argument");
  return guarded([&] { *out = policy->policy.action_probability(congestexp::Action(action)); });
}

cx_status cx_policy_sample(const cx_policy* policy, cx_rng* rng, uint64_t* out) {
  if (!policy || !rng || !out) return invalid("null argument");
  return guarded([&] { *out = policy->policy.sample_action(rng->rng).mask(); });
}

cx_status cx_simulate(const char* config_path, uint64_t seed, const char* out_dir) {
  if (!config_path) return invalid("null config path");
  return guarded([&] {
    const auto config = congestexp::load_experiment_file(config_path);
    const auto record = congestexp::run(config, seed);
    congestexp::emit_run(record, config.game, out_dir ? out_dir : ".");
  });
}

cx_status cx_sweep(const char* config_path, const char* grid_path, const char* out_dir,
                   size_t threads) {
  if (!config_path || !grid_path) return invalid("null path");
  return guarded([&] {
    const auto config = congestexp::load_experiment_file(config_path);
    auto grid = congestexp::load_sweep_grid_file(grid_path);
    if (threads != 0) grid.threads = threads;
    const std::filesystem::path dir = out_dir ? out_dir : ".";
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) {
      throw congestexp::Error(congestexp::ErrorCode::kIo,
                              "cannot create directory " + dir.string() + ": " + ec.message());
    }
    const auto summary = congestexp::sweep_regret_scaling(config, grid, dir / "traces");
    congestexp::write_text_file(dir / "sweep_summary.csv", congestexp::sweep_summary_csv(summary));
    congestexp::write_text_file(dir / "sweep_summary.json",
                                congestexp::sweep_summary_json(summary));
  });
}

cx_status cx_analyze(const char* trace_path, const char* game_path, double lambda, double mu,
                     int has_smoothness, const char* out_path) {
  if (!trace_path) return invalid("null trace path");
  return guarded([&] {
    const std::filesystem::path trace(trace_path);
    const std::filesystem::path game_file =
        game_path ? std::filesystem::path(game_path) : trace.parent_path() / "game.json";
    const auto game = congestexp::load_game_file(game_file);
    const auto rows = congestexp::parse_trace_csv(congestexp::read_text_file(trace),
                                                  game.num_players(), game.num_facilities());
    std::optional<double> l, m;
    if (has_smoothness) {
      l = lambda;
      m = mu;
    }
    const auto report = congestexp::analyze_trace(game, rows, l, m);
    const std::filesystem::path out =
        out_path ? std::filesystem::path(out_path) : trace.parent_path() / "report.json";
    congestexp::write_text_file(out, congestexp::analysis_report_json(report));
  });
}

}  // extern "C"
