#include "congestexp/learners.hpp"

#include <cmath>
#include <limits>
#include <memory>

#include "congestexp/error.hpp"

namespace congestexp {

LearningRateSchedule LearningRateSchedule::constant(double eta) {
  if (!(eta > 0.0) || !std::isfinite(eta)) fail_validation("schedule: eta must be positive");
  return LearningRateSchedule(eta, 0.0);
}

LearningRateSchedule LearningRateSchedule::constant_for_horizon(std::size_t horizon) {
  if (horizon < 1) fail_validation("schedule: horizon must be at least 1");
  return constant(1.0 / std::sqrt(static_cast<double>(horizon)));
}

LearningRateSchedule LearningRateSchedule::power_decay(double beta, double alpha) {
  if (!(beta > 0.0) || !std::isfinite(beta)) fail_validation("schedule: beta must be positive");
  if (!(alpha > 0.5 && alpha < 1.0)) fail_validation("schedule: alpha must lie in (1/2, 1)");
  return LearningRateSchedule(beta, alpha);
}

double LearningRateSchedule::rate(std::size_t round) const {
  if (is_constant()) return beta_;
  return beta_ * std::pow(static_cast<double>(round + 1), -alpha_);
}

double LearningRateSchedule::cumulative(std::size_t rounds) const {
  if (is_constant()) return beta_ * static_cast<double>(rounds);
  double sum = 0.0;
  for (std::size_t t = 0; t < rounds; ++t) sum += rate(t);
  return sum;
}

double stochastic_beta(double delta, double margin, std::size_t k, std::size_t num_players,
                       std::size_t num_facilities, double alpha) {
  if (!(delta > 0.0 && delta < 1.0)) fail_validation("stochastic_beta: delta must lie in (0, 1)");
  if (!(alpha > 0.5 && alpha < 1.0)) fail_validation("stochastic_beta: alpha must lie in (1/2, 1)");
  if (!(margin > 0.0)) fail_validation("stochastic_beta: M must be positive");
  if (num_facilities < 2) fail_validation("stochastic_beta: F = 1 leaves no choice");
  // sum_{t>=0} (t+1)^(-2 alpha) <= 1 + 1/(2 alpha - 1).
  const double square_sum_bound = 1.0 + 1.0 / (2.0 * alpha - 1.0);
  const double kd = static_cast<double>(k);
  const double denom = 8.0 * static_cast<double>(num_players) * kd * kd *
                       static_cast<double>(num_facilities - 1) * square_sum_bound;
  return std::sqrt(delta * margin * margin / denom);
}

EstimateVector estimate_semibandit(Action played, const std::vector<double>& observed_rewards,
                                   const std::vector<double>& marginals) {
  if (observed_rewards.size() != marginals.size()) {
    fail_validation("estimate_semibandit: rewards and marginals differ in length");
  }
  EstimateVector out{std::vector<double>(marginals.size(), 1.0)};
  for (std::size_t f : played.facilities()) {
    if (f >= marginals.size()) fail_validation("estimate_semibandit: facility out of range");
    const double q = marginals[f];
    if (!(q > 0.0)) {
      fail_invariant("estimate_semibandit: played facility " + std::to_string(f) +
                     " has zero inclusion probability");
    }
    out.values[f] = 1.0 - (1.0 - observed_rewards[f]) / q;
  }
  return out;
}

EstimateVector estimate_fullinfo_expected(const CongestionGame& game, std::size_t player,
                                          const MarginalProfile& marginals) {
  EstimateVector out{std::vector<double>(game.num_facilities())};
  for (std::size_t f = 0; f < game.num_facilities(); ++f) {
    out.values[f] = expected_facility_reward(game, player, f, marginals);
  }
  return out;
}

std::vector<double> sample_counterfactual_rewards(const CongestionGame& game,
                                                  std::size_t player, const JointAction& joint,
                                                  const std::vector<double>& realized, Rng& rng) {
  const auto loads = facility_loads(game, joint);
  std::vector<double> out(game.num_facilities());
  for (std::size_t f = 0; f < out.size(); ++f) {
    if (joint[player].contains(f)) {
      out[f] = realized[f];
    } else {
      out[f] = sample_facility_reward(game, f, loads[f] + 1, rng);
    }
  }
  return out;
}

EstimateVector estimate_fullinfo_stochastic(const std::vector<double>& observed_rewards) {
  for (double r : observed_rewards) {
    if (!(r >= 0.0 && r <= 1.0)) fail_validation("estimate_fullinfo_stochastic: reward outside [0, 1]");
  }
  return EstimateVector{observed_rewards};
}

Learner::Learner(std::size_t player, FactoredPolicy initial_policy,
                 LearningRateSchedule schedule, FeedbackMode mode)
    : player_(player),
      policy_(std::move(initial_policy)),
      offsets_(policy_.scores()),
      learned_(policy_.num_facilities(), 0.0),
      schedule_(schedule),
      mode_(mode) {
  if (mode_ == FeedbackMode::kSemiBandit && schedule_.is_constant() &&
      schedule_.beta() > 1.0 / static_cast<double>(policy_.k())) {
    fail_validation("schedule: semi-bandit learning needs eta <= 1/k");
  }
}

Learner Learner::updated(const EstimateVector& estimate) const {
  if (estimate.values.size() != learned_.size()) fail_validation("update: estimate has wrong length");
  Learner next = *this;
  const double eta = schedule_.rate(round_);
  std::vector<double> scores(learned_.size());
  for (std::size_t f = 0; f < learned_.size(); ++f) {
    next.learned_[f] += eta * estimate.values[f];
    scores[f] = offsets_[f] + next.learned_[f];
  }
  next.policy_ = policy_.with_scores(std::move(scores));
  ++next.round_;
  return next;
}

namespace {

FactoredPolicy policy_for(const CongestionGame& game, std::size_t player,
                          std::vector<double> scores) {
  if (game.action_space() == ActionSpaceKind::kAllKSubsets) {
    return FactoredPolicy(std::move(scores), game.k());
  }
  return FactoredPolicy(std::move(scores), game.k(),
                        std::make_shared<const std::vector<Action>>(game.actions(player)));
}

}  // namespace

std::vector<Learner> init_uniform(const CongestionGame& game, const LearningRateSchedule& schedule,
                                  FeedbackMode mode) {
  std::vector<Learner> out;
  out.reserve(game.num_players());
  for (std::size_t i = 0; i < game.num_players(); ++i) {
    out.emplace_back(i, policy_for(game, i, std::vector<double>(game.num_facilities(), 0.0)),
                     schedule, mode);
  }
  return out;
}

std::vector<Learner> init_near_equilibrium(const CongestionGame& game,
                                           const JointAction& equilibrium, double margin,
                                           const LearningRateSchedule& schedule,
                                           FeedbackMode mode) {
  game.check_joint_action(equilibrium);
  if (!(margin >= 0.0) || !std::isfinite(margin)) fail_validation("init: M must be >= 0");
  const double kf = static_cast<double>(game.k() * game.num_facilities());
  std::vector<Learner> out;
  out.reserve(game.num_players());
  for (std::size_t i = 0; i < game.num_players(); ++i) {
    std::vector<double> scores(game.num_facilities(), 0.0);
    for (std::size_t f : equilibrium[i].facilities()) scores[f] = margin;
    FactoredPolicy policy = policy_for(game, i, std::move(scores));
    const double p = policy.action_probability(equilibrium[i]);
    if (p < 1.0 - kf * std::exp(-margin) - 1e-12) {
      fail_invariant("init: omega(a*) = " + std::to_string(p) + " below 1 - kF exp(-M)");
    }
    out.emplace_back(i, std::move(policy), schedule, mode);
  }
  return out;
}

double NashConvergenceMonitor::max_score_gap(std::size_t player,
                                             const FactoredPolicy& policy) const {
  const Action target = equilibrium_.at(player);
  const auto& g = policy.scores();
  double best = -std::numeric_limits<double>::infinity();
  if (policy.all_k_subsets()) {
    if (target.size() == policy.num_facilities()) return best;
    double weakest_inside = std::numeric_limits<double>::infinity();
    double strongest_outside = -std::numeric_limits<double>::infinity();
    for (std::size_t f = 0; f < g.size(); ++f) {
      if (target.contains(f)) {
        weakest_inside = std::min(weakest_inside, g[f]);
      } else {
        strongest_outside = std::max(strongest_outside, g[f]);
      }
    }
    return strongest_outside - weakest_inside;
  }
  double target_score = 0.0;
  for (std::size_t f : target.facilities()) target_score += g[f];
  for (Action a : *policy.explicit_actions()) {
    if (a == target) continue;
    double s = 0.0;
    for (std::size_t f : a.facilities()) s += g[f];
    best = std::max(best, s - target_score);
  }
  return best;
}

bool NashConvergenceMonitor::in_region(const std::vector<Learner>& learners) const {
  for (const auto& learner : learners) {
    if (!player_in_region(learner.player(), learner.policy())) return false;
  }
  return true;
}

}  // namespace congestexp
