#include "congestexp/equilibrium.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "congestexp/error.hpp"

namespace congestexp {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// r_i when player i switches to `alt`, given the current loads.
double deviation_reward(const CongestionGame& game, const std::vector<std::size_t>& loads,
                        Action current, Action alt) {
  double total = 0.0;
  for (std::size_t f : alt.facilities()) {
    const std::size_t load = loads[f] - (current.contains(f) ? 1 : 0) + 1;
    total += game.reward(f, load);
  }
  return total;
}

double reward_at_loads(const CongestionGame& game, const std::vector<std::size_t>& loads,
                       Action a) {
  double total = 0.0;
  for (std::size_t f : a.facilities()) total += game.reward(f, loads[f]);
  return total;
}

double welfare_at_loads(const CongestionGame& game, const std::vector<std::size_t>& loads) {
  double total = 0.0;
  for (std::size_t f = 0; f < loads.size(); ++f) {
    if (loads[f] > 0) total += static_cast<double>(loads[f]) * game.reward(f, loads[f]);
  }
  return total;
}

double gap_at(const CongestionGame& game, const JointAction& profile,
              const std::vector<std::size_t>& loads) {
  double gap = kInf;
  for (std::size_t i = 0; i < profile.size(); ++i) {
    const double current = reward_at_loads(game, loads, profile[i]);
    for (Action alt : game.actions(i)) {
      if (alt == profile[i]) continue;
      gap = std::min(gap, current - deviation_reward(game, loads, profile[i], alt));
    }
  }
  return gap;
}

}  // namespace

std::uint64_t profile_count(const CongestionGame& game) {
  std::uint64_t count = 1;
  for (std::size_t i = 0; i < game.num_players(); ++i) {
    const std::uint64_t a = game.num_actions(i);
    if (count > std::numeric_limits<std::uint64_t>::max() / a) {
      return std::numeric_limits<std::uint64_t>::max();
    }
    count *= a;
  }
  return count;
}

void check_budget(std::uint64_t required, std::uint64_t budget, const char* what) {
  if (required > budget) {
    throw Error(ErrorCode::kBudget, std::string(what) + " needs " + std::to_string(required) +
                                        " evaluations, budget is " + std::to_string(budget));
  }
}

JointAction decode_profile(const CongestionGame& game, std::uint64_t index) {
  JointAction joint(game.num_players());
  for (std::size_t i = 0; i < game.num_players(); ++i) {
    const auto& list = game.actions(i);
    joint[i] = list[index % list.size()];
    index /= list.size();
  }
  return joint;
}

double deviation_gap(const CongestionGame& game, const JointAction& profile) {
  game.check_joint_action(profile);
  return gap_at(game, profile, facility_loads(game, profile));
}

std::vector<NashCertificate> find_pure_nash(const CongestionGame& game, std::uint64_t budget) {
  const std::uint64_t count = profile_count(game);
  check_budget(count, budget, "find_pure_nash");
  std::vector<NashCertificate> out;
  for (std::uint64_t index = 0; index < count; ++index) {
    JointAction profile = decode_profile(game, index);
    const auto loads = facility_loads(game, profile);
    const double gap = gap_at(game, profile, loads);
    if (gap >= -kTieTolerance) {
      NashCertificate cert;
      cert.profile = std::move(profile);
      cert.strict = gap > kTieTolerance;
      cert.gap = cert.strict ? gap : 0.0;
      cert.epsilon = cert.gap / 2.0;
      out.push_back(std::move(cert));
    }
  }
  if (out.empty()) fail_invariant("find_pure_nash: no pure equilibrium found in a congestion game");
  return out;
}

std::optional<NashCertificate> best_strict_nash(const std::vector<NashCertificate>& certs) {
  std::optional<NashCertificate> best;
  for (const auto& c : certs) {
    if (c.strict && (!best || c.gap > best->gap)) best = c;
  }
  return best;
}

double rosenthal_potential(const CongestionGame& game, const JointAction& joint) {
  game.check_joint_action(joint);
  const auto loads = facility_loads(game, joint);
  double phi = 0.0;
  for (std::size_t f = 0; f < loads.size(); ++f) {
    for (std::size_t m = 1; m <= loads[f]; ++m) phi += game.reward(f, m);
  }
  return phi;
}

Action best_response(const CongestionGame& game, std::size_t player, const JointAction& joint) {
  game.check_joint_action(joint);
  const auto loads = facility_loads(game, joint);
  Action best = joint[player];
  double best_value = -kInf;
  for (Action alt : game.actions(player)) {
    const double v = deviation_reward(game, loads, joint[player], alt);
    if (v > best_value) {
      best_value = v;
      best = alt;
    }
  }
  return best;
}

JointAction best_response_dynamics(const CongestionGame& game, JointAction start,
                                   std::size_t max_iters) {
  if (max_iters < 1) fail_validation("best_response_dynamics: max_iters must be >= 1");
  game.check_joint_action(start);
  JointAction current = std::move(start);
  double phi = rosenthal_potential(game, current);
  std::size_t moves = 0;
  for (;;) {
    bool moved = false;
    for (std::size_t i = 0; i < game.num_players(); ++i) {
      const auto loads = facility_loads(game, current);
      const double now = reward_at_loads(game, loads, current[i]);
      const Action br = best_response(game, i, current);
      if (deviation_reward(game, loads, current[i], br) > now + kTieTolerance) {
        if (moves == max_iters) {
          fail_invariant("best_response_dynamics: no convergence within " +
                         std::to_string(max_iters) + " moves");
        }
        current[i] = br;
        ++moves;
        moved = true;
        const double next_phi = rosenthal_potential(game, current);
        if (next_phi < phi - kTieTolerance) {
          fail_invariant("best_response_dynamics: potential decreased along an improving move");
        }
        phi = next_phi;
      }
    }
    if (!moved) return current;
  }
}

RegretTracker::RegretTracker(const CongestionGame& game, std::size_t player)
    : game_(&game), player_(player), facility_values_(game.num_facilities(), 0.0) {}

void RegretTracker::add_round(const MarginalProfile& marginals) {
  const auto& q = marginals[player_];
  double value = 0.0;
  for (std::size_t f = 0; f < facility_values_.size(); ++f) {
    const double v = expected_facility_reward(*game_, player_, f, marginals);
    facility_values_[f] += v;
    value += q[f] * v;
  }
  cumulative_ += value;
  ++rounds_;
}

RegretTrace RegretTracker::trace() const {
  RegretTrace out;
  out.player = player_;
  out.rounds = rounds_;
  out.cumulative_value = cumulative_;
  out.facility_values = facility_values_;
  out.best_action = best_fixed_action(*game_, player_, facility_values_);
  for (std::size_t f : out.best_action.facilities()) out.best_value += facility_values_[f];
  out.regret = rounds_ == 0 ? 0.0 : out.best_value - cumulative_;
  return out;
}

Action best_fixed_action(const CongestionGame& game, std::size_t player,
                         const std::vector<double>& facility_values) {
  if (game.action_space() == ActionSpaceKind::kAllKSubsets) {
    std::vector<std::size_t> order(facility_values.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return facility_values[a] > facility_values[b];
    });
    Action best;
    for (std::size_t j = 0; j < game.k(); ++j) best = best.with(order[j]);
    return best;
  }
  Action best;
  double best_value = -kInf;
  for (Action a : game.actions(player)) {
    double v = 0.0;
    for (std::size_t f : a.facilities()) v += facility_values[f];
    if (v > best_value) {
      best_value = v;
      best = a;
    }
  }
  return best;
}

RegretTrace best_in_hindsight_regret(const CongestionGame& game, std::size_t player,
                                     const std::vector<MarginalProfile>& trajectory) {
  RegretTracker tracker(game, player);
  for (const auto& snapshot : trajectory) tracker.add_round(snapshot);
  return tracker.trace();
}

SampledRegretTracker::SampledRegretTracker(const CongestionGame& game, std::size_t player)
    : game_(&game), player_(player), facility_values_(game.num_facilities(), 0.0) {}

void SampledRegretTracker::add_round(const JointAction& joint) {
  const auto loads = facility_loads(*game_, joint);
  const Action own = joint[player_];
  for (std::size_t f = 0; f < facility_values_.size(); ++f) {
    const std::size_t others = loads[f] - (own.contains(f) ? 1 : 0);
    facility_values_[f] += game_->reward(f, others + 1);
  }
  realized_ += reward_at_loads(*game_, loads, own);
}

double SampledRegretTracker::regret() const {
  const Action best = best_fixed_action(*game_, player_, facility_values_);
  double v = 0.0;
  for (std::size_t f : best.facilities()) v += facility_values_[f];
  return v - realized_;
}

WelfareOptimum welfare_optimum(const CongestionGame& game, std::uint64_t budget) {
  const std::uint64_t count = profile_count(game);
  check_budget(count, budget, "welfare_optimum");
  WelfareOptimum best{-kInf, {}};
  for (std::uint64_t index = 0; index < count; ++index) {
    JointAction profile = decode_profile(game, index);
    const double w = welfare_at_loads(game, facility_loads(game, profile));
    if (w > best.value) best = {w, std::move(profile)};
  }
  return best;
}

namespace {

struct ProfileTable {
  std::vector<JointAction> profiles;
  std::vector<std::vector<std::size_t>> loads;
  std::vector<double> welfare;
};

ProfileTable tabulate(const CongestionGame& game, std::uint64_t budget, const char* what) {
  const std::uint64_t count = profile_count(game);
  const std::uint64_t squared =
      count > std::numeric_limits<std::uint32_t>::max() ? std::numeric_limits<std::uint64_t>::max()
                                                        : count * count;
  check_budget(squared, budget, what);
  ProfileTable t;
  t.profiles.reserve(count);
  for (std::uint64_t index = 0; index < count; ++index) {
    t.profiles.push_back(decode_profile(game, index));
    t.loads.push_back(facility_loads(game, t.profiles.back()));
    t.welfare.push_back(welfare_at_loads(game, t.loads.back()));
  }
  return t;
}

// sum_i r_i(target_i, a_-i) at the loads of a.
double deviation_sum(const CongestionGame& game, const JointAction& target, const JointAction& a,
                     const std::vector<std::size_t>& loads) {
  double total = 0.0;
  for (std::size_t i = 0; i < target.size(); ++i) {
    total += deviation_reward(game, loads, a[i], target[i]);
  }
  return total;
}

}  // namespace

SmoothnessResult verify_smoothness(const CongestionGame& game, double lambda, double mu,
                                   std::uint64_t budget) {
  const ProfileTable t = tabulate(game, budget, "verify_smoothness");
  SmoothnessResult out;
  out.opt = *std::max_element(t.welfare.begin(), t.welfare.end());
  out.best_slack = -kInf;
  for (std::size_t s = 0; s < t.profiles.size(); ++s) {
    double worst = kInf;
    for (std::size_t j = 0; j < t.profiles.size(); ++j) {
      const double lhs = deviation_sum(game, t.profiles[s], t.profiles[j], t.loads[j]);
      worst = std::min(worst, lhs - (lambda * out.opt - mu * t.welfare[j]));
      if (worst < out.best_slack) break;
    }
    if (worst > out.best_slack) {
      out.best_slack = worst;
      if (worst >= -kTieTolerance) out.witness = t.profiles[s];
    }
  }
  out.holds = out.best_slack >= -kTieTolerance;
  if (!out.holds) out.witness.reset();
  return out;
}

double max_smoothness_lambda(const CongestionGame& game, double mu, std::uint64_t budget) {
  const ProfileTable t = tabulate(game, budget, "max_smoothness_lambda");
  const double opt = *std::max_element(t.welfare.begin(), t.welfare.end());
  if (opt <= 0.0) return 0.0;
  double best = -kInf;
  for (std::size_t s = 0; s < t.profiles.size(); ++s) {
    double worst = kInf;
    for (std::size_t j = 0; j < t.profiles.size(); ++j) {
      const double lhs = deviation_sum(game, t.profiles[s], t.profiles[j], t.loads[j]);
      worst = std::min(worst, (lhs + mu * t.welfare[j]) / opt);
      if (worst <= best) break;
    }
    best = std::max(best, worst);
  }
  return best;
}

WelfareReport welfare_report(double opt, const std::vector<double>& welfare_trace, double lambda,
                             double mu, const std::vector<double>& regrets) {
  if (!(mu > -1.0)) fail_validation("welfare_report: mu must exceed -1");
  WelfareReport r;
  r.opt = opt;
  r.lambda = lambda;
  r.mu = mu;
  r.rounds = welfare_trace.size();
  for (double w : welfare_trace) r.average_welfare += w;
  if (r.rounds > 0) r.average_welfare /= static_cast<double>(r.rounds);
  for (double g : regrets) r.regret_sum += g;
  r.bound = lambda / (1.0 + mu) * opt;
  if (r.rounds > 0) r.bound -= r.regret_sum / (static_cast<double>(r.rounds) * (1.0 + mu));
  r.slack = r.average_welfare - r.bound;
  return r;
}

}  // namespace congestexp
