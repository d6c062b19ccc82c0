#include "congestexp/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <limits>
#include <memory>
#include <sstream>
#include <thread>

#include "congestexp/error.hpp"
#include "json.hpp"

namespace congestexp {
namespace {

using nlohmann::json;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::optional<JointAction> resolve_reference(const ExperimentConfig& config,
                                             std::vector<std::string>& warnings) {
  switch (config.reference_mode) {
    case ReferenceMode::kNone:
      return std::nullopt;
    case ReferenceMode::kExplicit: {
      const double gap = deviation_gap(config.game, config.reference);
      if (!(gap > kTieTolerance)) {
        warnings.push_back("reference equilibrium is not a strict Nash equilibrium");
      }
      return config.reference;
    }
    case ReferenceMode::kAuto:
      break;
  }
  if (profile_count(config.game) > config.enumeration_budget) {
    warnings.push_back("reference equilibrium skipped: profile space exceeds enumeration budget");
    return std::nullopt;
  }
  const auto certs = find_pure_nash(config.game, config.enumeration_budget);
  if (auto strict = best_strict_nash(certs)) return strict->profile;
  warnings.push_back("no strict Nash equilibrium; using a non-strict one as reference");
  return certs.front().profile;
}

std::vector<Learner> build_learners(const ExperimentConfig& config,
                                    const std::optional<JointAction>& reference) {
  const CongestionGame& game = config.game;
  std::vector<Learner> out;
  for (std::size_t i = 0; i < game.num_players(); ++i) {
    const LearnerConfig& lc = config.learner_for(i);
    const LearningRateSchedule schedule = lc.schedule.resolve(game, config.horizon);
    if (lc.init.near_equilibrium) {
      if (!reference) fail_validation("config.learner.init.near_ne: no reference equilibrium available");
      out.push_back(init_near_equilibrium(game, *reference, lc.init.margin, schedule, lc.mode)[i]);
    } else {
      out.push_back(init_uniform(game, schedule, lc.mode)[i]);
    }
  }
  return out;
}

MarginalProfile current_marginals(const std::vector<Learner>& learners) {
  MarginalProfile q;
  q.reserve(learners.size());
  for (const auto& l : learners) q.push_back(l.policy().marginals());
  return q;
}

EstimateVector estimate_for(const Learner& learner, const CongestionGame& game,
                            const JointAction& joint, const std::vector<double>& realized,
                            const MarginalProfile& marginals, Rng& rng) {
  const std::size_t i = learner.player();
  switch (learner.mode()) {
    case FeedbackMode::kSemiBandit:
      return estimate_semibandit(joint[i], realized, marginals[i]);
    case FeedbackMode::kFullInfoExpected:
      return estimate_fullinfo_expected(game, i, marginals);
    case FeedbackMode::kFullInfoStochastic:
      return estimate_fullinfo_stochastic(
          sample_counterfactual_rewards(game, i, joint, realized, rng));
  }
  fail_invariant("unknown feedback mode");
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = s.find(sep, start);
    if (pos == std::string::npos) {
      out.push_back(s.substr(start));
      return out;
    }
    out.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

double parse_real(const std::string& field, std::size_t line) {
  char* end = nullptr;
  const double v = std::strtod(field.c_str(), &end);
  if (field.empty() || end != field.c_str() + field.size()) {
    fail_validation("trace line " + std::to_string(line) + ": bad number '" + field + "'");
  }
  return v;
}

std::uint64_t parse_unsigned(const std::string& field, std::size_t line) {
  char* end = nullptr;
  const unsigned long long v = std::strtoull(field.c_str(), &end, 10);
  if (field.empty() || end != field.c_str() + field.size()) {
    fail_validation("trace line " + std::to_string(line) + ": bad integer '" + field + "'");
  }
  return v;
}

json action_json(Action a) {
  json out = json::array();
  for (std::size_t f : a.facilities()) out.push_back(f);
  return out;
}

// NaN and infinities are not representable in JSON.
json real_json(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

void ensure_directory(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot create directory " + dir.string() + ": " + ec.message());
}

}  // namespace

std::string format_real(double x) {
  if (std::isnan(x)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

RunRecord run(const ExperimentConfig& config, std::uint64_t seed) {
  const CongestionGame& game = config.game;
  const std::size_t n = game.num_players();
  RunRecord record;
  record.seed = seed;
  record.horizon = config.horizon;
  record.trace_every = config.trace_every;
  record.reference = resolve_reference(config, record.warnings);

  std::vector<Learner> learners = build_learners(config, record.reference);
  if (game.action_space() == ActionSpaceKind::kExplicitLists && record.reference) {
    record.warnings.push_back("explicit action lists: convergence guarantees do not apply");
  }
  const LearnerConfig& first = config.learner_for(0);
  record.monitor_margin = config.monitor_margin.value_or(
      first.init.near_equilibrium ? first.init.margin : 0.0);
  std::optional<NashConvergenceMonitor> monitor;
  if (record.reference) monitor.emplace(*record.reference, record.monitor_margin);

  std::vector<RegretTracker> trackers;
  std::vector<SampledRegretTracker> sampled;
  for (std::size_t i = 0; i < n; ++i) {
    trackers.emplace_back(game, i);
    sampled.emplace_back(game, i);
  }
  record.welfare_trace.reserve(config.horizon);

  Rng rng(seed, 0);
  for (std::size_t t = 0; t < config.horizon; ++t) {
    const MarginalProfile q = current_marginals(learners);
    for (auto& tr : trackers) tr.add_round(q);
    const double w = expected_welfare(game, q);
    record.welfare_trace.push_back(w);

    JointAction joint(n);
    for (std::size_t i = 0; i < n; ++i) joint[i] = learners[i].policy().sample_action(rng);
    const std::vector<double> realized = sample_stochastic_rewards(game, joint, rng);
    for (auto& s : sampled) s.add_round(joint);

    if (t % config.trace_every == 0) {
      RoundRow row;
      row.t = t;
      row.actions = joint;
      row.rewards = realized;
      row.welfare = w;
      row.marginals = q;
      for (std::size_t i = 0; i < n; ++i) {
        const FactoredPolicy& policy = learners[i].policy();
        row.scores.push_back(policy.scores());
        row.regret.push_back(trackers[i].trace().regret);
        if (monitor) {
          row.nash_distance.push_back(policy.l1_distance_to_pure((*record.reference)[i]));
          row.in_region.push_back(monitor->player_in_region(i, policy));
        } else {
          row.nash_distance.push_back(kNaN);
          row.in_region.push_back(false);
        }
      }
      record.rows.push_back(std::move(row));
    }

    std::vector<EstimateVector> estimates;
    estimates.reserve(n);
    for (const auto& learner : learners) {
      estimates.push_back(estimate_for(learner, game, joint, realized, q, rng));
    }
    for (std::size_t i = 0; i < n; ++i) learners[i] = learners[i].updated(estimates[i]);
  }

  for (std::size_t i = 0; i < n; ++i) {
    record.regrets.push_back(trackers[i].trace());
    record.sampled_regrets.push_back(sampled[i].regret());
    record.final_nash_distance.push_back(
        record.reference ? learners[i].policy().l1_distance_to_pure((*record.reference)[i]) : kNaN);
  }
  return record;
}

std::string trace_csv(const RunRecord& record, std::size_t num_players,
                      std::size_t num_facilities) {
  std::string out = "t,player,action_bitmask,regret_so_far,nash_distance,welfare,in_UM";
  for (const char* prefix : {"reward_", "score_", "q_"}) {
    for (std::size_t f = 0; f < num_facilities; ++f) out += "," + std::string(prefix) + std::to_string(f);
  }
  out += "\n";
  for (const auto& row : record.rows) {
    for (std::size_t i = 0; i < num_players; ++i) {
      out += std::to_string(row.t) + "," + std::to_string(i) + "," +
             std::to_string(row.actions[i].mask()) + "," + format_real(row.regret[i]) + "," +
             format_real(row.nash_distance[i]) + "," + format_real(row.welfare) + "," +
             (row.in_region[i] ? "1" : "0");
      for (double v : row.rewards) out += "," + format_real(v);
      for (double v : row.scores[i]) out += "," + format_real(v);
      for (double v : row.marginals[i]) out += "," + format_real(v);
      out += "\n";
    }
  }
  return out;
}

std::vector<RoundRow> parse_trace_csv(const std::string& text, std::size_t num_players,
                                      std::size_t num_facilities) {
  std::vector<std::string> lines = split(text, '\n');
  if (!lines.empty() && lines.back().empty()) lines.pop_back();
  if (lines.empty()) fail_validation("trace: missing header");
  const std::size_t columns = 7 + 3 * num_facilities;
  if (split(lines[0], ',').size() != columns) fail_validation("trace: header does not match the game");
  std::vector<RoundRow> rows;
  for (std::size_t ln = 1; ln < lines.size(); ++ln) {
    const auto fields = split(lines[ln], ',');
    if (fields.size() != columns) {
      fail_validation("trace line " + std::to_string(ln + 1) + ": expected " +
                      std::to_string(columns) + " columns");
    }
    const std::size_t t = parse_unsigned(fields[0], ln + 1);
    const std::size_t player = parse_unsigned(fields[1], ln + 1);
    if (player == 0) {
      RoundRow row;
      row.t = t;
      row.welfare = parse_real(fields[5], ln + 1);
      for (std::size_t f = 0; f < num_facilities; ++f) row.rewards.push_back(parse_real(fields[7 + f], ln + 1));
      rows.push_back(std::move(row));
    }
    if (rows.empty() || rows.back().t != t || player != rows.back().actions.size() ||
        player >= num_players) {
      fail_validation("trace line " + std::to_string(ln + 1) + ": rows out of order");
    }
    RoundRow& row = rows.back();
    row.actions.emplace_back(parse_unsigned(fields[2], ln + 1));
    row.regret.push_back(parse_real(fields[3], ln + 1));
    row.nash_distance.push_back(parse_real(fields[4], ln + 1));
    row.in_region.push_back(fields[6] == "1");
    std::vector<double> scores;
    std::vector<double> q;
    for (std::size_t f = 0; f < num_facilities; ++f) {
      scores.push_back(parse_real(fields[7 + num_facilities + f], ln + 1));
      q.push_back(parse_real(fields[7 + 2 * num_facilities + f], ln + 1));
    }
    row.scores.push_back(std::move(scores));
    row.marginals.push_back(std::move(q));
  }
  for (const auto& row : rows) {
    if (row.actions.size() != num_players) fail_validation("trace: incomplete round " + std::to_string(row.t));
  }
  return rows;
}

std::string run_summary_json(const RunRecord& record, const CongestionGame& game) {
  json s;
  s["seed"] = record.seed;
  s["T"] = record.horizon;
  s["trace_every"] = record.trace_every;
  const double scale = static_cast<double>(game.k() * game.num_facilities()) *
                       std::sqrt(static_cast<double>(record.horizon));
  json players = json::array();
  for (std::size_t i = 0; i < record.regrets.size(); ++i) {
    const auto& r = record.regrets[i];
    players.push_back({{"player", i},
                       {"regret", r.regret},
                       {"regret_constant", r.regret / scale},
                       {"sampled_regret", record.sampled_regrets[i]},
                       {"cumulative_value", r.cumulative_value},
                       {"best_value", r.best_value},
                       {"best_action", action_json(r.best_action)},
                       {"final_nash_distance", real_json(record.final_nash_distance[i])}});
  }
  s["players"] = std::move(players);
  s["kF_sqrt_T"] = scale;
  double avg = 0.0;
  for (double w : record.welfare_trace) avg += w;
  s["average_welfare"] = record.welfare_trace.empty() ? 0.0 : avg / record.welfare_trace.size();
  if (record.reference) {
    json ref = json::array();
    for (Action a : *record.reference) ref.push_back(action_json(a));
    s["reference_equilibrium"] = std::move(ref);
  } else {
    s["reference_equilibrium"] = nullptr;
  }
  s["monitor_margin"] = record.monitor_margin;
  s["warnings"] = record.warnings;
  return s.dump(2) + "\n";
}

void emit_run(const RunRecord& record, const CongestionGame& game,
              const std::filesystem::path& out_dir) {
  ensure_directory(out_dir);
  write_text_file(out_dir / "trace.csv", trace_csv(record, game.num_players(), game.num_facilities()));
  write_text_file(out_dir / "summary.json", run_summary_json(record, game));
  save_game_file(game, out_dir / "game.json");
}

double fit_log_log_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) return kNaN;
  double mx = 0.0, my = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) {
    if (!(x[j] > 0.0) || !(y[j] > 0.0)) return kNaN;
    mx += std::log(x[j]);
    my += std::log(y[j]);
  }
  mx /= x.size();
  my /= y.size();
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) {
    const double dx = std::log(x[j]) - mx;
    sxy += dx * (std::log(y[j]) - my);
    sxx += dx * dx;
  }
  return sxx > 0.0 ? sxy / sxx : kNaN;
}

SweepSummary sweep_regret_scaling(const ExperimentConfig& base, const SweepGrid& grid,
                                  const std::optional<std::filesystem::path>& trace_dir) {
  const auto facility_counts = grid.facility_counts.empty()
                                   ? std::vector<std::size_t>{base.game.num_facilities()}
                                   : grid.facility_counts;
  const auto subset_sizes =
      grid.subset_sizes.empty() ? std::vector<std::size_t>{base.game.k()} : grid.subset_sizes;
  const auto& seeds = grid.seeds.empty() ? base.seeds : grid.seeds;
  if (seeds.empty()) fail_validation("sweep: no seeds");

  struct Cell {
    std::shared_ptr<ExperimentConfig> config;
    std::size_t num_facilities, k;
  };
  std::vector<Cell> cells;
  for (std::size_t num_f : facility_counts) {
    for (std::size_t k : subset_sizes) {
      auto cfg = std::make_shared<ExperimentConfig>(base);
      if (num_f != base.game.num_facilities() || k != base.game.k()) {
        if (!base.random_game) {
          fail_validation("sweep: F/k overrides need a random base game (config.game.random)");
        }
        const auto& r = *base.random_game;
        cfg->game = make_random_game(r.num_players, num_f, k, r.seed, r.kernel);
      }
      // Resolve the reference once per game rather than once per run.
      if (cfg->reference_mode == ReferenceMode::kAuto &&
          profile_count(cfg->game) <= cfg->enumeration_budget) {
        const auto certs = find_pure_nash(cfg->game, cfg->enumeration_budget);
        const auto strict = best_strict_nash(certs);
        cfg->reference = strict ? strict->profile : certs.front().profile;
        cfg->reference_mode = ReferenceMode::kExplicit;
      }
      cells.push_back({cfg, num_f, k});
    }
  }

  struct Job {
    std::size_t cell, horizon_index, seed_index;
  };
  std::vector<Job> jobs;
  for (std::size_t c = 0; c < cells.size(); ++c) {
    for (std::size_t h = 0; h < grid.horizons.size(); ++h) {
      for (std::size_t s = 0; s < seeds.size(); ++s) jobs.push_back({c, h, s});
    }
  }
  if (trace_dir && grid.write_traces) ensure_directory(*trace_dir);

  std::vector<std::vector<double>> per_player(jobs.size());
  std::vector<std::exception_ptr> errors(jobs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t j = next++; j < jobs.size(); j = next++) {
      try {
        const Job& job = jobs[j];
        const Cell& cell = cells[job.cell];
        ExperimentConfig cfg = *cell.config;
        cfg.horizon = grid.horizons[job.horizon_index];
        if (!grid.write_traces) cfg.trace_every = cfg.horizon;
        const std::uint64_t seed = seeds[job.seed_index];
        RunRecord rec = run(cfg, seed);
        for (const auto& r : rec.regrets) per_player[j].push_back(r.regret);
        if (trace_dir && grid.write_traces) {
          const std::string name = "trace_F" + std::to_string(cell.num_facilities) + "_k" +
                                   std::to_string(cell.k) + "_T" + std::to_string(cfg.horizon) +
                                   "_seed" + std::to_string(seed) + ".csv";
          write_text_file(*trace_dir / name,
                          trace_csv(rec, cfg.game.num_players(), cfg.game.num_facilities()));
        }
      } catch (...) {
        errors[j] = std::current_exception();
      }
    }
  };
  const std::size_t threads = std::max<std::size_t>(1, std::min(grid.threads, jobs.size()));
  std::vector<std::thread> pool;
  for (std::size_t w = 1; w < threads; ++w) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  SweepSummary summary;
  std::size_t j = 0;
  for (const Cell& cell : cells) {
    std::vector<double> xs, ys;
    for (std::size_t horizon : grid.horizons) {
      SweepPoint p;
      p.num_facilities = cell.num_facilities;
      p.k = cell.k;
      p.horizon = horizon;
      const double scale = static_cast<double>(cell.k * cell.num_facilities) *
                           std::sqrt(static_cast<double>(horizon));
      for (std::size_t s = 0; s < seeds.size(); ++s, ++j) {
        const auto& regrets = per_player[j];
        const double worst = *std::max_element(regrets.begin(), regrets.end());
        p.max_regrets.push_back(worst);
        p.max_constant = std::max(p.max_constant, worst / scale);
      }
      for (double r : p.max_regrets) p.mean += r;
      p.mean /= p.max_regrets.size();
      if (p.max_regrets.size() > 1) {
        double var = 0.0;
        for (double r : p.max_regrets) var += (r - p.mean) * (r - p.mean);
        var /= (p.max_regrets.size() - 1);
        p.stderr_ = std::sqrt(var / p.max_regrets.size());
      }
      xs.push_back(static_cast<double>(horizon));
      ys.push_back(p.mean);
      summary.points.push_back(std::move(p));
    }
    summary.exponents.push_back({cell.num_facilities, cell.k, fit_log_log_slope(xs, ys)});
  }
  return summary;
}

std::string sweep_summary_csv(const SweepSummary& summary) {
  std::string out = "F,k,T,mean_max_regret,stderr,max_constant\n";
  for (const auto& p : summary.points) {
    out += std::to_string(p.num_facilities) + "," + std::to_string(p.k) + "," +
           std::to_string(p.horizon) + "," + format_real(p.mean) + "," + format_real(p.stderr_) +
           "," + format_real(p.max_constant) + "\n";
  }
  return out;
}

std::string sweep_summary_json(const SweepSummary& summary) {
  json s;
  json points = json::array();
  for (const auto& p : summary.points) {
    points.push_back({{"F", p.num_facilities},
                      {"k", p.k},
                      {"T", p.horizon},
                      {"mean_max_regret", p.mean},
                      {"stderr", p.stderr_},
                      {"max_constant", p.max_constant},
                      {"max_regrets", p.max_regrets}});
  }
  json exps = json::array();
  for (const auto& e : summary.exponents) {
    exps.push_back({{"F", e.num_facilities}, {"k", e.k}, {"exponent", real_json(e.exponent)}});
  }
  s["points"] = std::move(points);
  s["exponents"] = std::move(exps);
  return s.dump(2) + "\n";
}

double convergence_margin(double epsilon, std::size_t k, std::size_t num_facilities) {
  const double kf = static_cast<double>(k * num_facilities);
  return std::ceil(std::abs(std::log(epsilon / (2.0 * kf)))) + 1.0;
}

ConvergenceTable run_convergence_study(const CongestionGame& game, ConvergenceMode mode,
                                       const NashCertificate& certificate, double margin,
                                       const LearningRateSchedule& schedule,
                                       const std::vector<std::uint64_t>& seeds,
                                       std::size_t rounds, bool keep_rows) {
  if (!certificate.strict) {
    fail_validation("convergence study: the reference profile is not a strict Nash equilibrium");
  }
  game.check_joint_action(certificate.profile);
  const double eps = certificate.epsilon;
  const double kf = static_cast<double>(game.k() * game.num_facilities());
  if (std::isfinite(eps) && margin < std::abs(std::log(eps / (2.0 * kf)))) {
    fail_validation("convergence study: M is below |log(eps / (2kF))|");
  }
  if (seeds.empty()) fail_validation("convergence study: no seeds");

  ConvergenceTable table;
  table.certificate = certificate;
  table.margin = margin;
  table.epsilon = eps;
  const FeedbackMode feedback = mode == ConvergenceMode::kExpected
                                    ? FeedbackMode::kFullInfoExpected
                                    : FeedbackMode::kFullInfoStochastic;
  const double init_margin = mode == ConvergenceMode::kExpected ? margin : 2.0 * margin;
  const NashConvergenceMonitor monitor(certificate.profile, margin);
  const std::size_t n = game.num_players();

  for (std::uint64_t seed : seeds) {
    ConvergenceSeedSummary ss;
    ss.seed = seed;
    Rng rng(seed, 0);
    auto learners =
        init_near_equilibrium(game, certificate.profile, init_margin, schedule, feedback);
    double applied = 0.0;
    for (std::size_t t = 0;; ++t) {
      const double decay = std::isfinite(eps) ? eps * applied : 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const FactoredPolicy& policy = learners[i].policy();
        ConvergenceRow row;
        row.seed = seed;
        row.t = t;
        row.player = i;
        row.distance = policy.l1_distance_to_pure(certificate.profile[i]);
        row.bound = std::isfinite(eps) ? 2.0 * kf * std::exp(-margin - decay) : 0.0;
        row.bound_plus = std::isfinite(eps) ? 2.0 * kf * std::exp(-margin + decay) : 0.0;
        row.max_gap = monitor.max_score_gap(i, policy);
        row.gap_bound = -margin - decay;
        row.in_region = row.max_gap <= -margin;
        row.violation = row.distance > row.bound * (1.0 + 1e-9);
        if (mode == ConvergenceMode::kExpected) {
          row.gap_violation = row.max_gap > row.gap_bound + 1e-9 * (1.0 + std::abs(row.gap_bound));
        }
        ss.distance_violations += row.violation;
        ss.gap_violations += row.gap_violation;
        ss.region_exits += !row.in_region;
        if (keep_rows) table.rows.push_back(row);
      }
      if (t == rounds) break;

      const MarginalProfile q = current_marginals(learners);
      std::vector<EstimateVector> estimates;
      if (mode == ConvergenceMode::kExpected) {
        for (std::size_t i = 0; i < n; ++i) estimates.push_back(estimate_fullinfo_expected(game, i, q));
      } else {
        JointAction joint(n);
        for (std::size_t i = 0; i < n; ++i) joint[i] = learners[i].policy().sample_action(rng);
        const auto realized = sample_stochastic_rewards(game, joint, rng);
        for (std::size_t i = 0; i < n; ++i) {
          estimates.push_back(estimate_fullinfo_stochastic(
              sample_counterfactual_rewards(game, i, joint, realized, rng)));
        }
      }
      applied += schedule.rate(t);
      for (std::size_t i = 0; i < n; ++i) learners[i] = learners[i].updated(estimates[i]);
    }
    table.seeds.push_back(ss);
  }
  std::size_t clean = 0;
  for (const auto& ss : table.seeds) clean += ss.distance_violations == 0;
  table.fraction_clean = static_cast<double>(clean) / static_cast<double>(table.seeds.size());
  return table;
}

std::string convergence_csv(const ConvergenceTable& table) {
  std::string out =
      "seed,t,player,distance,bound,bound_plus,max_gap,gap_bound,in_UM,violation,gap_violation\n";
  for (const auto& r : table.rows) {
    out += std::to_string(r.seed) + "," + std::to_string(r.t) + "," + std::to_string(r.player) +
           "," + format_real(r.distance) + "," + format_real(r.bound) + "," +
           format_real(r.bound_plus) + "," + format_real(r.max_gap) + "," +
           format_real(r.gap_bound) + "," + (r.in_region ? "1" : "0") + "," +
           (r.violation ? "1" : "0") + "," + (r.gap_violation ? "1" : "0") + "\n";
  }
  return out;
}

AnalysisReport analyze_trace(const CongestionGame& game, const std::vector<RoundRow>& rows,
                             std::optional<double> lambda, std::optional<double> mu,
                             std::uint64_t budget) {
  const std::size_t n = game.num_players();
  AnalysisReport rep;
  rep.rounds = rows.size();
  rep.contiguous = !rows.empty();
  for (std::size_t j = 0; j < rows.size(); ++j) rep.contiguous = rep.contiguous && rows[j].t == j;

  std::vector<RegretTracker> trackers;
  for (std::size_t i = 0; i < n; ++i) trackers.emplace_back(game, i);
  std::vector<std::shared_ptr<const std::vector<Action>>> lists(n);
  if (game.action_space() == ActionSpaceKind::kExplicitLists) {
    for (std::size_t i = 0; i < n; ++i) lists[i] = std::make_shared<const std::vector<Action>>(game.actions(i));
  }
  std::vector<double> welfare;
  for (const auto& row : rows) {
    MarginalProfile q;
    for (std::size_t i = 0; i < n; ++i) {
      const FactoredPolicy policy = lists[i] ? FactoredPolicy(row.scores[i], game.k(), lists[i])
                                             : FactoredPolicy(row.scores[i], game.k());
      q.push_back(policy.marginals());
      for (std::size_t f = 0; f < game.num_facilities(); ++f) {
        rep.max_marginal_mismatch =
            std::max(rep.max_marginal_mismatch, std::abs(q[i][f] - row.marginals[i][f]));
      }
    }
    const double w = expected_welfare(game, q);
    rep.max_welfare_mismatch = std::max(rep.max_welfare_mismatch, std::abs(w - row.welfare));
    welfare.push_back(row.welfare);
    if (rep.contiguous) {
      for (std::size_t i = 0; i < n; ++i) {
        trackers[i].add_round(q);
        rep.max_regret_mismatch =
            std::max(rep.max_regret_mismatch, std::abs(trackers[i].trace().regret - row.regret[i]));
      }
    }
  }
  for (double w : welfare) rep.average_welfare += w;
  if (!welfare.empty()) rep.average_welfare /= welfare.size();
  if (!rows.empty()) rep.stored_regret = rows.back().regret;
  if (rep.contiguous) {
    for (const auto& tr : trackers) rep.recomputed_regret.push_back(tr.trace().regret);
  }
  if (profile_count(game) <= budget) rep.opt = welfare_optimum(game, budget).value;
  if (lambda && mu) {
    rep.smoothness = verify_smoothness(game, *lambda, *mu, budget);
    if (rep.contiguous) {
      rep.welfare = welfare_report(rep.smoothness->opt, welfare, *lambda, *mu, rep.recomputed_regret);
    }
  }
  return rep;
}

std::string analysis_report_json(const AnalysisReport& report) {
  json r;
  r["rounds"] = report.rounds;
  r["contiguous"] = report.contiguous;
  r["stored_regret"] = report.stored_regret;
  r["recomputed_regret"] = report.recomputed_regret;
  r["max_regret_mismatch"] = report.max_regret_mismatch;
  r["max_welfare_mismatch"] = report.max_welfare_mismatch;
  r["max_marginal_mismatch"] = report.max_marginal_mismatch;
  r["average_welfare"] = report.average_welfare;
  r["opt"] = report.opt ? json(*report.opt) : json(nullptr);
  if (report.smoothness) {
    json sm;
    sm["holds"] = report.smoothness->holds;
    sm["best_slack"] = real_json(report.smoothness->best_slack);
    if (report.smoothness->witness) {
      json w = json::array();
      for (Action a : *report.smoothness->witness) w.push_back(action_json(a));
      sm["witness"] = std::move(w);
    } else {
      sm["witness"] = nullptr;
    }
    r["smoothness"] = std::move(sm);
  }
  if (report.welfare) {
    const auto& w = *report.welfare;
    r["welfare_bound"] = {{"lambda", w.lambda},         {"mu", w.mu},
                          {"opt", w.opt},               {"rounds", w.rounds},
                          {"average_welfare", w.average_welfare},
                          {"regret_sum", w.regret_sum}, {"bound", w.bound},
                          {"slack", w.slack}};
  }
  return r.dump(2) + "\n";
}

}  // namespace congestexp
