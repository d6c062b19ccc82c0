#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "congestexp/config.hpp"
#include "congestexp/equilibrium.hpp"
#include "congestexp/learners.hpp"

namespace congestexp {

// One traced round. Policies are the ones used to play round t (before
// that round's update); regrets include round t.
struct RoundRow {
  std::size_t t = 0;
  JointAction actions;
  std::vector<double> rewards;                // realized R^f, 0 for unused facilities
  std::vector<std::vector<double>> scores;    // [player][f]
  std::vector<std::vector<double>> marginals; // [player][f]
  std::vector<double> regret;                 // [player]
  std::vector<double> nash_distance;          // [player], NaN without a reference
  std::vector<bool> in_region;                // [player], z~_i <= -M
  double welfare = 0.0;

  friend bool operator==(const RoundRow&, const RoundRow&) = default;
};

struct RunRecord {
  std::uint64_t seed = 0;
  std::size_t horizon = 0;
  std::size_t trace_every = 1;
  std::vector<RoundRow> rows;
  // Exact over all rounds regardless of thinning.
  std::vector<RegretTrace> regrets;
  std::vector<double> sampled_regrets;
  std::vector<double> welfare_trace;
  std::optional<JointAction> reference;
  double monitor_margin = 0.0;
  // Per-player distance to the reference after the final update.
  std::vector<double> final_nash_distance;
  std::vector<std::string> warnings;
};

// Plays T rounds of (sample -> realize -> estimate -> update) with one RNG
// stream derived from `seed`.
RunRecord run(const ExperimentConfig& config, std::uint64_t seed);

// Trace CSV: one row per (t, player) with columns
//   t,player,action_bitmask,regret_so_far,nash_distance,welfare,in_UM,
//   reward_0..reward_{F-1},score_0..score_{F-1},q_0..q_{F-1}
// Reals use 17 significant digits.
std::string trace_csv(const RunRecord& record, std::size_t num_players, std::size_t num_facilities);
std::vector<RoundRow> parse_trace_csv(const std::string& text, std::size_t num_players,
                                      std::size_t num_facilities);
std::string run_summary_json(const RunRecord& record, const CongestionGame& game);

// Writes trace.csv, summary.json and game.json into out_dir.
void emit_run(const RunRecord& record, const CongestionGame& game,
              const std::filesystem::path& out_dir);

// 17-significant-digit text for a real.
std::string format_real(double x);

struct SweepPoint {
  std::size_t num_facilities = 0;
  std::size_t k = 0;
  std::size_t horizon = 0;
  std::vector<double> max_regrets;  // per seed, max over players
  double mean = 0.0;
  double stderr_ = 0.0;
  // max over seeds and players of Regret_i(T) / (k F sqrt(T)).
  double max_constant = 0.0;
};

struct SweepExponent {
  std::size_t num_facilities = 0;
  std::size_t k = 0;
  // Least-squares slope of log(mean regret) against log(T); NaN if undefined.
  double exponent = 0.0;
};

struct SweepSummary {
  std::vector<SweepPoint> points;
  std::vector<SweepExponent> exponents;
};

// Runs every (F, k, T, seed) combination; F/k overrides regenerate the
// base config's random game. Work is spread over grid.threads threads and
// results do not depend on the thread count.
SweepSummary sweep_regret_scaling(const ExperimentConfig& base, const SweepGrid& grid,
                                  const std::optional<std::filesystem::path>& trace_dir = {});

std::string sweep_summary_csv(const SweepSummary& summary);
std::string sweep_summary_json(const SweepSummary& summary);

// Least-squares slope of log(y) against log(x).
double fit_log_log_slope(const std::vector<double>& x, const std::vector<double>& y);

enum class ConvergenceMode { kExpected, kStochastic };

struct ConvergenceRow {
  std::uint64_t seed = 0;
  std::size_t t = 0;  // number of updates applied
  std::size_t player = 0;
  double distance = 0.0;
  double bound = 0.0;       // 2kF exp(-M - eps * sum of applied rates)
  double bound_plus = 0.0;  // 2kF exp(-M + eps * sum of applied rates)
  double max_gap = 0.0;     // max_a z~_i(a)
  double gap_bound = 0.0;   // -M - eps * sum of applied rates
  bool in_region = false;
  bool violation = false;   // distance above bound
  bool gap_violation = false;
};

struct ConvergenceSeedSummary {
  std::uint64_t seed = 0;
  std::size_t distance_violations = 0;
  std::size_t gap_violations = 0;
  std::size_t region_exits = 0;
};

struct ConvergenceTable {
  NashCertificate certificate;
  double margin = 0.0;
  double epsilon = 0.0;
  std::vector<ConvergenceRow> rows;
  std::vector<ConvergenceSeedSummary> seeds;
  double fraction_clean = 0.0;  // seeds with zero distance violations
};

// ceil(|log(eps / (2kF))|) + 1.
double convergence_margin(double epsilon, std::size_t k, std::size_t num_facilities);

// Initializes every player near `certificate.profile` (score offset M for the
// expected mode, 2M for the stochastic mode), runs `rounds` updates per seed
// and compares the distance ||omega_i^t - omega_i^*||_1 with the bound.
ConvergenceTable run_convergence_study(const CongestionGame& game, ConvergenceMode mode,
                                       const NashCertificate& certificate, double margin,
                                       const LearningRateSchedule& schedule,
                                       const std::vector<std::uint64_t>& seeds,
                                       std::size_t rounds, bool keep_rows = true);

std::string convergence_csv(const ConvergenceTable& table);

struct AnalysisReport {
  std::size_t rounds = 0;
  bool contiguous = false;  // every round present, so regrets can be recomputed
  std::vector<double> stored_regret;
  std::vector<double> recomputed_regret;
  double max_regret_mismatch = 0.0;
  double max_welfare_mismatch = 0.0;
  double max_marginal_mismatch = 0.0;
  double average_welfare = 0.0;
  std::optional<double> opt;
  std::optional<SmoothnessResult> smoothness;
  std::optional<WelfareReport> welfare;
};

// Recomputes policies, marginals, welfare and regrets from a stored trace.
AnalysisReport analyze_trace(const CongestionGame& game, const std::vector<RoundRow>& rows,
                             std::optional<double> lambda, std::optional<double> mu,
                             std::uint64_t budget = kDefaultEnumerationBudget);
std::string analysis_report_json(const AnalysisReport& report);

}  // namespace congestexp
