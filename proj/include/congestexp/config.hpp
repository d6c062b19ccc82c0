#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "congestexp/game.hpp"
#include "congestexp/learners.hpp"

// Structured-text (JSON) schemas for games and experiment configs.
//
// Game:
//   { "n": 2, "F": 2, "k": 1,
//     "action_space": "all_k_subsets" | [[[0], [1]], [[0], [1]]],
//     "rewards": [[1.0, 0.2], [0.8, 0.3]],   // rewards[f][m-1] = r^f(m)
//     "kernel": "bernoulli" | "deterministic" }
// "rewards" may be replaced by "affine": {"c": [...], "d": [...]} or by
// "random": {"seed": 7}. Serialization always writes explicit tables.
//
// Experiment:
//   { "game": {...} | "game_file": "relative/or/absolute.json",
//     "learner": LearnerConfig | "learners": [LearnerConfig, ...],
//     "T": 1000, "seeds": [1, 2], "trace_every": 1,
//     "reference_equilibrium": "auto" | "none" | [[0], [1]],
//     "monitor_margin": 4.0, "enumeration_budget": 10000000 }
//
// LearnerConfig:
//   { "mode": "semi_bandit" | "full_info_expected" | "full_info_stochastic",
//     "schedule": {"variant": "constant"[, "eta": x]}
//               | {"variant": "power_decay", "alpha": a, "beta": b}
//               | {"variant": "power_decay", "alpha": a, "auto_beta": {"delta": d, "M": m}},
//     "init": "uniform" | {"near_ne": {"M": m}} }
// A constant schedule without "eta" uses 1/sqrt(T).

namespace congestexp {

struct RandomGameSpec {
  std::size_t num_players = 0;
  std::size_t num_facilities = 0;
  std::size_t k = 0;
  std::uint64_t seed = 0;
  RewardKernel kernel = RewardKernel::kBernoulli;
};

struct ScheduleSpec {
  enum class Variant { kConstant, kPowerDecay } variant = Variant::kConstant;
  std::optional<double> eta;  // constant; 1/sqrt(T) when absent
  double alpha = 0.75;
  std::optional<double> beta;
  std::optional<double> auto_beta_delta;
  std::optional<double> auto_beta_margin;

  LearningRateSchedule resolve(const CongestionGame& game, std::size_t horizon) const;
};

struct InitSpec {
  bool near_equilibrium = false;
  double margin = 0.0;
};

struct LearnerConfig {
  FeedbackMode mode = FeedbackMode::kSemiBandit;
  ScheduleSpec schedule;
  InitSpec init;
};

enum class ReferenceMode { kAuto, kNone, kExplicit };

struct ExperimentConfig {
  explicit ExperimentConfig(CongestionGame g) : game(std::move(g)) {}

  CongestionGame game;
  std::optional<RandomGameSpec> random_game;  // set when the game is generated
  std::vector<LearnerConfig> learners;        // size 1 (shared) or n
  std::size_t horizon = 1;
  std::vector<std::uint64_t> seeds;
  std::size_t trace_every = 1;
  ReferenceMode reference_mode = ReferenceMode::kAuto;
  JointAction reference;
  std::optional<double> monitor_margin;
  std::uint64_t enumeration_budget = 10'000'000;

  const LearnerConfig& learner_for(std::size_t player) const {
    return learners.size() == 1 ? learners.front() : learners.at(player);
  }
};

struct SweepGrid {
  std::vector<std::size_t> horizons;
  std::vector<std::size_t> facility_counts;  // empty: keep the base game's F
  std::vector<std::size_t> subset_sizes;     // empty: keep the base game's k
  std::vector<std::uint64_t> seeds;          // empty: the base config's seeds
  std::size_t threads = 1;
  bool write_traces = false;
};

const char* to_string(FeedbackMode mode);
const char* to_string(RewardKernel kernel);

std::string game_to_json(const CongestionGame& game);
CongestionGame game_from_json(const std::string& text);
CongestionGame load_game_file(const std::filesystem::path& path);
void save_game_file(const CongestionGame& game, const std::filesystem::path& path);

JointAction joint_action_from_json(const std::string& text, const CongestionGame& game);
std::string joint_action_to_json(const JointAction& joint);

// base_dir resolves relative "game_file" references.
ExperimentConfig experiment_from_json(const std::string& text,
                                      const std::filesystem::path& base_dir = {});
ExperimentConfig load_experiment_file(const std::filesystem::path& path);
SweepGrid sweep_grid_from_json(const std::string& text);
SweepGrid load_sweep_grid_file(const std::filesystem::path& path);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace congestexp
