#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "congestexp/factored_policy.hpp"
#include "congestexp/game.hpp"

namespace congestexp {

// One round's facility-level reward estimates y~(f).
struct EstimateVector {
  std::vector<double> values;
};

enum class FeedbackMode { kSemiBandit, kFullInfoExpected, kFullInfoStochastic };

// eta_t for the update applied at round t = 0, 1, ...
class LearningRateSchedule {
 public:
  static LearningRateSchedule constant(double eta);
  // eta = 1/sqrt(T).
  static LearningRateSchedule constant_for_horizon(std::size_t horizon);
  // eta_t = beta * (t + 1)^(-alpha), alpha in (1/2, 1).
  static LearningRateSchedule power_decay(double beta, double alpha);

  bool is_constant() const { return alpha_ == 0.0; }
  double beta() const { return beta_; }
  double alpha() const { return alpha_; }
  double rate(std::size_t round) const;
  // Sum of eta_j for j < rounds.
  double cumulative(std::size_t rounds) const;

 private:
  LearningRateSchedule(double beta, double alpha) : beta_(beta), alpha_(alpha) {}

  double beta_;
  double alpha_;
};

// Square-summable step scale for the stochastic full-information learner:
// beta = sqrt(delta M^2 / (8 n k^2 (F - 1) (1 + 1/(2 alpha - 1)))).
double stochastic_beta(double delta, double margin, std::size_t k, std::size_t num_players,
                       std::size_t num_facilities, double alpha);

// y~(f) = 1 - 1{f in a}(1 - R^f)/q(f). Throws kInvariant if a played
// facility has q(f) = 0.
EstimateVector estimate_semibandit(Action played, const std::vector<double>& observed_rewards,
                                   const std::vector<double>& marginals);

// y~(f) = E_{a_-i ~ omega_-i}[r^f(1 + load_-i(f))] for every facility.
EstimateVector estimate_fullinfo_expected(const CongestionGame& game, std::size_t player,
                                          const MarginalProfile& marginals);

// Rewards observed by `player` for every facility: played facilities see the
// shared realized draw, the others an independent draw at load n_f(a_-i) + 1.
std::vector<double> sample_counterfactual_rewards(const CongestionGame& game,
                                                  std::size_t player, const JointAction& joint,
                                                  const std::vector<double>& realized, Rng& rng);

// y~(f) = R^f(a_i, a_-i) for all facilities.
EstimateVector estimate_fullinfo_stochastic(const std::vector<double>& observed_rewards);

// Per-player CongestEXP state. Scores are split into initialization offsets
// (round 0) and the learned part sum_j eta_j y~^j(f); the policy uses their sum.
class Learner {
 public:
  Learner(std::size_t player, FactoredPolicy initial_policy, LearningRateSchedule schedule,
          FeedbackMode mode);

  std::size_t player() const { return player_; }
  const FactoredPolicy& policy() const { return policy_; }
  std::size_t round() const { return round_; }
  const LearningRateSchedule& schedule() const { return schedule_; }
  FeedbackMode mode() const { return mode_; }
  const std::vector<double>& init_offsets() const { return offsets_; }
  const std::vector<double>& learned_scores() const { return learned_; }

  // G(f) += eta_t y~(f); returns the next state.
  Learner updated(const EstimateVector& estimate) const;

 private:
  std::size_t player_;
  FactoredPolicy policy_;
  std::vector<double> offsets_;
  std::vector<double> learned_;
  std::size_t round_ = 0;
  LearningRateSchedule schedule_;
  FeedbackMode mode_;
};

// Uniform initial policies for every player.
std::vector<Learner> init_uniform(const CongestionGame& game, const LearningRateSchedule& schedule,
                                  FeedbackMode mode);

// G0(f) = margin for f in a*_i and 0 otherwise, which puts every single-swap
// score gap at exactly -margin. Checks omega_i(a*_i) >= 1 - kF exp(-margin).
std::vector<Learner> init_near_equilibrium(const CongestionGame& game,
                                           const JointAction& equilibrium, double margin,
                                           const LearningRateSchedule& schedule,
                                           FeedbackMode mode);

// Tracks z~_i(a) = sum_{f in a} G_i(f) - sum_{f in a*_i} G_i(f) against a
// reference pure profile. Over all k-subsets the maximum over a != a*_i is
// the largest single-swap gap whenever that gap is negative, and membership
// in U_M is decided by the swap gaps alone.
class NashConvergenceMonitor {
 public:
  NashConvergenceMonitor(JointAction equilibrium, double margin)
      : equilibrium_(std::move(equilibrium)), margin_(margin) {}

  const JointAction& equilibrium() const { return equilibrium_; }
  double margin() const { return margin_; }

  // max_{a != a*_i} z~_i(a) (swap form for all-k-subsets policies).
  double max_score_gap(std::size_t player, const FactoredPolicy& policy) const;
  bool player_in_region(std::size_t player, const FactoredPolicy& policy) const {
    return max_score_gap(player, policy) <= -margin_;
  }
  bool in_region(const std::vector<Learner>& learners) const;

 private:
  JointAction equilibrium_;
  double margin_;
};

}  // namespace congestexp
