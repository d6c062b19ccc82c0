#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "congestexp/action.hpp"
#include "congestexp/rng.hpp"

namespace congestexp {

// Reward of one facility as a function of its load: values[m - 1] = r^f(m).
struct FacilityRewardTable {
  std::vector<double> values;

  double at_load(std::size_t load) const { return values[load - 1]; }
};

enum class ActionSpaceKind { kAllKSubsets, kExplicitLists };

// How realized rewards R^f are drawn around their mean r^f(load).
enum class RewardKernel { kDeterministic, kBernoulli };

// Per-player, per-facility inclusion probabilities q_i(f).
using MarginalProfile = std::vector<std::vector<double>>;

class CongestionGame {
 public:
  // Every k-subset of [0, F) is an action of every player.
  CongestionGame(std::size_t num_players, std::size_t num_facilities, std::size_t k,
                 std::vector<FacilityRewardTable> rewards,
                 RewardKernel kernel = RewardKernel::kBernoulli);

  // Per-player explicit action lists.
  CongestionGame(std::size_t num_players, std::size_t num_facilities, std::size_t k,
                 std::vector<std::vector<Action>> action_lists,
                 std::vector<FacilityRewardTable> rewards,
                 RewardKernel kernel = RewardKernel::kBernoulli);

  std::size_t num_players() const { return num_players_; }
  std::size_t num_facilities() const { return num_facilities_; }
  std::size_t k() const { return k_; }
  ActionSpaceKind action_space() const { return kind_; }
  RewardKernel kernel() const { return kernel_; }
  void set_kernel(RewardKernel kernel) { kernel_ = kernel; }

  const std::vector<FacilityRewardTable>& rewards() const { return rewards_; }
  double reward(std::size_t facility, std::size_t load) const {
    return rewards_[facility].at_load(load);
  }

  // The action list of player i (enumerated in increasing mask order for
  // AllKSubsets games).
  const std::vector<Action>& actions(std::size_t player) const;
  std::size_t num_actions(std::size_t player) const { return actions(player).size(); }
  // Explicit lists only; empty for AllKSubsets.
  const std::vector<std::vector<Action>>& explicit_action_lists() const { return action_lists_; }

  bool is_valid_action(std::size_t player, Action a) const;
  // Throws a validation error unless every player's action is valid.
  void check_joint_action(const JointAction& joint) const;

  friend bool operator==(const CongestionGame&, const CongestionGame&);

 private:
  void validate() const;

  std::size_t num_players_;
  std::size_t num_facilities_;
  std::size_t k_;
  ActionSpaceKind kind_;
  std::vector<std::vector<Action>> action_lists_;
  std::vector<Action> all_subsets_;
  std::vector<FacilityRewardTable> rewards_;
  RewardKernel kernel_;
};

// Parameters (c_f, d_f) of r^f(m) = clamp(c_f - d_f (m - 1), 0, 1).
struct AffineRewardSpec {
  std::vector<double> intercept;  // c_f in [0, 1]
  std::vector<double> slope;      // d_f >= 0
};

std::vector<FacilityRewardTable> make_affine_tables(const AffineRewardSpec& spec,
                                                    std::size_t num_players);

// Random game: each facility table holds n uniform [0,1) draws sorted in
// non-increasing order, so rewards fall as congestion rises.
CongestionGame make_random_game(std::size_t num_players, std::size_t num_facilities,
                                std::size_t k, std::uint64_t seed,
                                RewardKernel kernel = RewardKernel::kBernoulli);

// n_f(a) for every facility.
std::vector<std::size_t> facility_loads(const CongestionGame& game, const JointAction& joint);

// r^f(n_f(a)) for used facilities and 0 for unused ones.
std::vector<double> facility_rewards(const CongestionGame& game, const JointAction& joint);

double player_reward(const CongestionGame& game, std::size_t player, const JointAction& joint);

double welfare(const CongestionGame& game, const JointAction& joint);

// One realized draw per used facility; unused facilities report 0.
std::vector<double> sample_stochastic_rewards(const CongestionGame& game,
                                              const JointAction& joint, Rng& rng);

// A single realized reward for facility f at the given load.
double sample_facility_reward(const CongestionGame& game, std::size_t facility,
                              std::size_t load, Rng& rng);

// Law of a sum of independent Bernoulli(p_j); result[m] = P[sum = m].
std::vector<double> poisson_binomial_pmf(std::span<const double> probabilities);

// E over the opponents' product policy of r^f(1 + load_{-i}(f)).
double expected_facility_reward(const CongestionGame& game, std::size_t player,
                                std::size_t facility, const MarginalProfile& marginals);

// r_i(omega) = sum_f q_i(f) * expected_facility_reward(i, f).
double expected_player_reward(const CongestionGame& game, std::size_t player,
                              const MarginalProfile& marginals);

// E[W] under the product-of-players joint policy with the given marginals.
double expected_welfare(const CongestionGame& game, const MarginalProfile& marginals);

// Marginals of the pure profile `joint`.
MarginalProfile pure_marginals(const CongestionGame& game, const JointAction& joint);

}  // namespace congestexp
