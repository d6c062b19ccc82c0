#include "congestexp/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "congestexp/error.hpp"
#include "json.hpp"

namespace congestexp {
namespace {

using nlohmann::json;

json parse_json(const std::string& text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    fail_validation(what + ": " + e.what());
  }
}

const json& require(const json& obj, const char* key, const std::string& path) {
  if (!obj.is_object() || !obj.contains(key)) fail_validation(path + "." + key + ": missing");
  return obj.at(key);
}

std::size_t as_count(const json& v, const std::string& path) {
  if (!v.is_number_integer() || v.get<long long>() < 0) {
    fail_validation(path + ": expected a non-negative integer");
  }
  return v.get<std::size_t>();
}

std::uint64_t as_u64(const json& v, const std::string& path) {
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer() && v.get<long long>() >= 0) return v.get<std::uint64_t>();
  fail_validation(path + ": expected an unsigned 64-bit integer");
}

double as_real(const json& v, const std::string& path) {
  if (!v.is_number()) fail_validation(path + ": expected a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) fail_validation(path + ": expected a finite number");
  return x;
}

std::vector<double> as_reals(const json& v, const std::string& path) {
  if (!v.is_array()) fail_validation(path + ": expected an array of numbers");
  std::vector<double> out;
  for (std::size_t j = 0; j < v.size(); ++j) {
    out.push_back(as_real(v[j], path + "[" + std::to_string(j) + "]"));
  }
  return out;
}

Action action_from(const json& v, const std::string& path) {
  if (!v.is_array()) fail_validation(path + ": expected a facility list");
  std::vector<std::size_t> facilities;
  for (std::size_t j = 0; j < v.size(); ++j) {
    facilities.push_back(as_count(v[j], path + "[" + std::to_string(j) + "]"));
  }
  try {
    return Action::from_facilities(facilities);
  } catch (const Error& e) {
    fail_validation(path + ": " + e.what());
  }
}

json action_to(Action a) {
  json out = json::array();
  for (std::size_t f : a.facilities()) out.push_back(f);
  return out;
}

RewardKernel kernel_from(const json& v, const std::string& path) {
  if (v == "bernoulli") return RewardKernel::kBernoulli;
  if (v == "deterministic") return RewardKernel::kDeterministic;
  fail_validation(path + ": expected \"bernoulli\" or \"deterministic\"");
}

struct ParsedGame {
  CongestionGame game;
  std::optional<RandomGameSpec> random;
};

ParsedGame game_from(const json& g, const std::string& path) {
  if (!g.is_object()) fail_validation(path + ": expected an object");
  const std::size_t n = as_count(require(g, "n", path), path + ".n");
  const std::size_t num_f = as_count(require(g, "F", path), path + ".F");
  const std::size_t k = as_count(require(g, "k", path), path + ".k");
  const RewardKernel kernel =
      g.contains("kernel") ? kernel_from(g["kernel"], path + ".kernel") : RewardKernel::kBernoulli;

  std::optional<RandomGameSpec> random;
  std::vector<FacilityRewardTable> tables;
  const int sources = int(g.contains("rewards")) + int(g.contains("affine")) + int(g.contains("random"));
  if (sources != 1) fail_validation(path + ": exactly one of rewards, affine, random is required");
  if (g.contains("rewards")) {
    const json& r = g["rewards"];
    if (!r.is_array()) fail_validation(path + ".rewards: expected an array of tables");
    for (std::size_t f = 0; f < r.size(); ++f) {
      tables.push_back({as_reals(r[f], path + ".rewards[" + std::to_string(f) + "]")});
    }
  } else if (g.contains("affine")) {
    const std::string ap = path + ".affine";
    AffineRewardSpec spec{as_reals(require(g["affine"], "c", ap), ap + ".c"),
                          as_reals(require(g["affine"], "d", ap), ap + ".d")};
    try {
      tables = make_affine_tables(spec, n);
    } catch (const Error& e) {
      fail_validation(ap + ": " + e.what());
    }
  } else {
    const std::string rp = path + ".random";
    random = RandomGameSpec{n, num_f, k, as_u64(require(g["random"], "seed", rp), rp + ".seed"),
                            kernel};
  }

  bool explicit_lists = false;
  std::vector<std::vector<Action>> lists;
  if (g.contains("action_space")) {
    const json& as = g["action_space"];
    if (as.is_string()) {
      if (as != "all_k_subsets") fail_validation(path + ".action_space: unknown mode");
    } else if (as.is_array()) {
      explicit_lists = true;
      for (std::size_t i = 0; i < as.size(); ++i) {
        const std::string lp = path + ".action_space[" + std::to_string(i) + "]";
        if (!as[i].is_array()) fail_validation(lp + ": expected a list of actions");
        std::vector<Action> list;
        for (std::size_t j = 0; j < as[i].size(); ++j) {
          list.push_back(action_from(as[i][j], lp + "[" + std::to_string(j) + "]"));
        }
        lists.push_back(std::move(list));
      }
    } else {
      fail_validation(path + ".action_space: expected \"all_k_subsets\" or per-player lists");
    }
  }

  try {
    if (random) {
      if (explicit_lists) fail_validation("random games use all_k_subsets");
      return {make_random_game(n, num_f, k, random->seed, kernel), random};
    }
    if (explicit_lists) return {CongestionGame(n, num_f, k, std::move(lists), std::move(tables), kernel), {}};
    return {CongestionGame(n, num_f, k, std::move(tables), kernel), {}};
  } catch (const Error& e) {
    fail_validation(path + ": " + e.what());
  }
}

json game_to(const CongestionGame& game) {
  json g;
  g["n"] = game.num_players();
  g["F"] = game.num_facilities();
  g["k"] = game.k();
  if (game.action_space() == ActionSpaceKind::kAllKSubsets) {
    g["action_space"] = "all_k_subsets";
  } else {
    json lists = json::array();
    for (const auto& list : game.explicit_action_lists()) {
      json l = json::array();
      for (Action a : list) l.push_back(action_to(a));
      lists.push_back(std::move(l));
    }
    g["action_space"] = std::move(lists);
  }
  json r = json::array();
  for (const auto& table : game.rewards()) r.push_back(table.values);
  g["rewards"] = std::move(r);
  g["kernel"] = to_string(game.kernel());
  return g;
}

JointAction joint_from(const json& v, const CongestionGame& game, const std::string& path) {
  if (!v.is_array()) fail_validation(path + ": expected one facility list per player");
  JointAction joint;
  for (std::size_t i = 0; i < v.size(); ++i) {
    joint.push_back(action_from(v[i], path + "[" + std::to_string(i) + "]"));
  }
  try {
    game.check_joint_action(joint);
  } catch (const Error& e) {
    fail_validation(path + ": " + e.what());
  }
  return joint;
}

ScheduleSpec schedule_from(const json& s, const std::string& path) {
  ScheduleSpec spec;
  const json& variant = require(s, "variant", path);
  if (variant == "constant") {
    spec.variant = ScheduleSpec::Variant::kConstant;
    if (s.contains("eta")) {
      spec.eta = as_real(s["eta"], path + ".eta");
      if (!(*spec.eta > 0.0)) fail_validation(path + ".eta: must be positive");
    }
  } else if (variant == "power_decay") {
    spec.variant = ScheduleSpec::Variant::kPowerDecay;
    spec.alpha = as_real(require(s, "alpha", path), path + ".alpha");
    if (!(spec.alpha > 0.5 && spec.alpha < 1.0)) fail_validation(path + ".alpha: must lie in (1/2, 1)");
    if (s.contains("beta") == s.contains("auto_beta")) {
      fail_validation(path + ": exactly one of beta, auto_beta is required");
    }
    if (s.contains("beta")) {
      spec.beta = as_real(s["beta"], path + ".beta");
      if (!(*spec.beta > 0.0)) fail_validation(path + ".beta: must be positive");
    } else {
      const std::string ap = path + ".auto_beta";
      spec.auto_beta_delta = as_real(require(s["auto_beta"], "delta", ap), ap + ".delta");
      spec.auto_beta_margin = as_real(require(s["auto_beta"], "M", ap), ap + ".M");
    }
  } else {
    fail_validation(path + ".variant: expected \"constant\" or \"power_decay\"");
  }
  return spec;
}

LearnerConfig learner_from(const json& l, const std::string& path) {
  if (!l.is_object()) fail_validation(path + ": expected an object");
  LearnerConfig cfg;
  const json& mode = require(l, "mode", path);
  if (mode == "semi_bandit") {
    cfg.mode = FeedbackMode::kSemiBandit;
  } else if (mode == "full_info_expected") {
    cfg.mode = FeedbackMode::kFullInfoExpected;
  } else if (mode == "full_info_stochastic") {
    cfg.mode = FeedbackMode::kFullInfoStochastic;
  } else {
    fail_validation(path + ".mode: unknown feedback mode");
  }
  if (l.contains("schedule")) cfg.schedule = schedule_from(l["schedule"], path + ".schedule");
  if (l.contains("init")) {
    const json& init = l["init"];
    if (init == "uniform") {
      cfg.init.near_equilibrium = false;
    } else if (init.is_object() && init.contains("near_ne")) {
      const std::string np = path + ".init.near_ne";
      cfg.init.near_equilibrium = true;
      cfg.init.margin = as_real(require(init["near_ne"], "M", np), np + ".M");
      if (!(cfg.init.margin >= 0.0)) fail_validation(np + ".M: must be >= 0");
    } else {
      fail_validation(path + ".init: expected \"uniform\" or {\"near_ne\": {\"M\": m}}");
    }
  }
  return cfg;
}

std::vector<std::uint64_t> seeds_from(const json& v, const std::string& path) {
  if (!v.is_array() || v.empty()) fail_validation(path + ": expected a non-empty array");
  std::vector<std::uint64_t> out;
  for (std::size_t j = 0; j < v.size(); ++j) out.push_back(as_u64(v[j], path + "[" + std::to_string(j) + "]"));
  return out;
}

std::vector<std::size_t> counts_from(const json& v, const std::string& path) {
  if (!v.is_array()) fail_validation(path + ": expected an array");
  std::vector<std::size_t> out;
  for (std::size_t j = 0; j < v.size(); ++j) out.push_back(as_count(v[j], path + "[" + std::to_string(j) + "]"));
  return out;
}

}  // namespace

LearningRateSchedule ScheduleSpec::resolve(const CongestionGame& game, std::size_t horizon) const {
  if (variant == Variant::kConstant) {
    return eta ? LearningRateSchedule::constant(*eta)
               : LearningRateSchedule::constant_for_horizon(horizon);
  }
  if (beta) return LearningRateSchedule::power_decay(*beta, alpha);
  return LearningRateSchedule::power_decay(
      stochastic_beta(*auto_beta_delta, *auto_beta_margin, game.k(), game.num_players(),
                      game.num_facilities(), alpha),
      alpha);
}

const char* to_string(FeedbackMode mode) {
  switch (mode) {
    case FeedbackMode::kSemiBandit: return "semi_bandit";
    case FeedbackMode::kFullInfoExpected: return "full_info_expected";
    case FeedbackMode::kFullInfoStochastic: return "full_info_stochastic";
  }
  return "?";
}

const char* to_string(RewardKernel kernel) {
  return kernel == RewardKernel::kBernoulli ? "bernoulli" : "deterministic";
}

std::string game_to_json(const CongestionGame& game) { return game_to(game).dump(2) + "\n"; }

CongestionGame game_from_json(const std::string& text) {
  return game_from(parse_json(text, "game"), "game").game;
}

CongestionGame load_game_file(const std::filesystem::path& path) {
  return game_from_json(read_text_file(path));
}

void save_game_file(const CongestionGame& game, const std::filesystem::path& path) {
  write_text_file(path, game_to_json(game));
}

JointAction joint_action_from_json(const std::string& text, const CongestionGame& game) {
  return joint_from(parse_json(text, "joint action"), game, "joint_action");
}

std::string joint_action_to_json(const JointAction& joint) {
  json out = json::array();
  for (Action a : joint) out.push_back(action_to(a));
  return out.dump();
}

ExperimentConfig experiment_from_json(const std::string& text,
                                      const std::filesystem::path& base_dir) {
  const json c = parse_json(text, "config");
  const std::string path = "config";
  if (!c.is_object()) fail_validation("config: expected an object");
  if (c.contains("game") == c.contains("game_file")) {
    fail_validation("config: exactly one of game, game_file is required");
  }
  std::optional<ParsedGame> parsed;
  if (c.contains("game")) {
    parsed.emplace(game_from(c["game"], "config.game"));
  } else {
    if (!c["game_file"].is_string()) fail_validation("config.game_file: expected a path");
    std::filesystem::path file = c["game_file"].get<std::string>();
    if (file.is_relative()) file = base_dir / file;
    if (!std::filesystem::exists(file)) {
      fail_validation("config.game_file: " + file.string() + " does not exist");
    }
    parsed.emplace(game_from(parse_json(read_text_file(file), file.string()), "config.game_file"));
  }
  ExperimentConfig cfg(std::move(parsed->game));
  cfg.random_game = parsed->random;

  if (c.contains("learner") == c.contains("learners")) {
    fail_validation("config: exactly one of learner, learners is required");
  }
  if (c.contains("learner")) {
    cfg.learners.push_back(learner_from(c["learner"], "config.learner"));
  } else {
    const json& ls = c["learners"];
    if (!ls.is_array() || ls.size() != cfg.game.num_players()) {
      fail_validation("config.learners: expected one entry per player");
    }
    for (std::size_t i = 0; i < ls.size(); ++i) {
      cfg.learners.push_back(learner_from(ls[i], "config.learners[" + std::to_string(i) + "]"));
    }
  }
  cfg.horizon = as_count(require(c, "T", path), "config.T");
  if (cfg.horizon < 1) fail_validation("config.T: must be at least 1");
  cfg.seeds = c.contains("seeds") ? seeds_from(c["seeds"], "config.seeds")
                                  : std::vector<std::uint64_t>{0};
  if (c.contains("trace_every")) {
    cfg.trace_every = as_count(c["trace_every"], "config.trace_every");
    if (cfg.trace_every < 1) fail_validation("config.trace_every: must be at least 1");
  }
  if (c.contains("reference_equilibrium")) {
    const json& r = c["reference_equilibrium"];
    if (r == "auto") {
      cfg.reference_mode = ReferenceMode::kAuto;
    } else if (r == "none") {
      cfg.reference_mode = ReferenceMode::kNone;
    } else {
      cfg.reference_mode = ReferenceMode::kExplicit;
      cfg.reference = joint_from(r, cfg.game, "config.reference_equilibrium");
    }
  }
  if (c.contains("monitor_margin")) {
    cfg.monitor_margin = as_real(c["monitor_margin"], "config.monitor_margin");
  }
  if (c.contains("enumeration_budget")) {
    cfg.enumeration_budget = as_u64(c["enumeration_budget"], "config.enumeration_budget");
  }
  for (std::size_t i = 0; i < cfg.learners.size(); ++i) {
    if (cfg.learners[i].init.near_equilibrium && cfg.reference_mode == ReferenceMode::kNone) {
      fail_validation("config.learner.init.near_ne: needs a reference equilibrium");
    }
  }
  return cfg;
}

ExperimentConfig load_experiment_file(const std::filesystem::path& path) {
  return experiment_from_json(read_text_file(path), path.parent_path());
}

SweepGrid sweep_grid_from_json(const std::string& text) {
  const json g = parse_json(text, "grid");
  if (!g.is_object()) fail_validation("grid: expected an object");
  SweepGrid grid;
  grid.horizons = counts_from(require(g, "T", "grid"), "grid.T");
  if (grid.horizons.empty()) fail_validation("grid.T: must not be empty");
  for (std::size_t t : grid.horizons) {
    if (t < 1) fail_validation("grid.T: horizons must be at least 1");
  }
  if (g.contains("F")) grid.facility_counts = counts_from(g["F"], "grid.F");
  if (g.contains("k")) grid.subset_sizes = counts_from(g["k"], "grid.k");
  if (g.contains("seeds")) grid.seeds = seeds_from(g["seeds"], "grid.seeds");
  if (g.contains("threads")) grid.threads = std::max<std::size_t>(1, as_count(g["threads"], "grid.threads"));
  if (g.contains("write_traces")) {
    if (!g["write_traces"].is_boolean()) fail_validation("grid.write_traces: expected a boolean");
    grid.write_traces = g["write_traces"].get<bool>();
  }
  return grid;
}

SweepGrid load_sweep_grid_file(const std::filesystem::path& path) {
  return sweep_grid_from_json(read_text_file(path));
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string() + " for reading");
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw Error(ErrorCode::kIo, "error while reading " + path.string());
  return buf.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot open " + path.string() + " for writing");
  out << text;
  out.flush();
  if (!out) throw Error(ErrorCode::kIo, "error while writing " + path.string());
}

}  // namespace congestexp
