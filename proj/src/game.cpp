#include "congestexp/game.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "congestexp/error.hpp"

namespace congestexp {
namespace {

// AllKSubsets action lists above this size are not materialized.
constexpr std::uint64_t kMaxMaterializedActions = std::uint64_t{1} << 22;

}  // namespace

CongestionGame::CongestionGame(std::size_t num_players, std::size_t num_facilities,
                               std::size_t k, std::vector<FacilityRewardTable> rewards,
                               RewardKernel kernel)
    : num_players_(num_players),
      num_facilities_(num_facilities),
      k_(k),
      kind_(ActionSpaceKind::kAllKSubsets),
      rewards_(std::move(rewards)),
      kernel_(kernel) {
  validate();
  if (binomial(num_facilities_, k_) <= kMaxMaterializedActions) {
    all_subsets_ = enumerate_k_subsets(num_facilities_, k_);
  }
}

CongestionGame::CongestionGame(std::size_t num_players, std::size_t num_facilities,
                               std::size_t k, std::vector<std::vector<Action>> action_lists,
                               std::vector<FacilityRewardTable> rewards, RewardKernel kernel)
    : num_players_(num_players),
      num_facilities_(num_facilities),
      k_(k),
      kind_(ActionSpaceKind::kExplicitLists),
      action_lists_(std::move(action_lists)),
      rewards_(std::move(rewards)),
      kernel_(kernel) {
  validate();
}

void CongestionGame::validate() const {
  if (num_players_ < 1) fail_validation("n must be at least 1");
  if (num_facilities_ < 1 || num_facilities_ > kMaxFacilities) {
    fail_validation("F must lie in [1, 64], got " + std::to_string(num_facilities_));
  }
  if (k_ < 1 || k_ > num_facilities_) {
    fail_validation("k must lie in [1, F], got " + std::to_string(k_));
  }
  if (rewards_.size() != num_facilities_) {
    fail_validation("rewards: expected " + std::to_string(num_facilities_) + " tables, got " +
                    std::to_string(rewards_.size()));
  }
  for (std::size_t f = 0; f < rewards_.size(); ++f) {
    const auto& values = rewards_[f].values;
    if (values.size() != num_players_) {
      fail_validation("rewards[" + std::to_string(f) + "]: expected " +
                      std::to_string(num_players_) + " entries, got " +
                      std::to_string(values.size()));
    }
    for (std::size_t m = 0; m < values.size(); ++m) {
      if (!(values[m] >= 0.0 && values[m] <= 1.0)) {
        fail_validation("rewards[" + std::to_string(f) + "][" + std::to_string(m) +
                        "] outside [0, 1]");
      }
    }
  }
  if (kind_ == ActionSpaceKind::kExplicitLists) {
    if (action_lists_.size() != num_players_) {
      fail_validation("action_space: expected one list per player");
    }
    const std::uint64_t range =
        num_facilities_ == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << num_facilities_) - 1;
    for (std::size_t i = 0; i < action_lists_.size(); ++i) {
      const auto& list = action_lists_[i];
      if (list.empty()) fail_validation("action_space[" + std::to_string(i) + "] is empty");
      for (std::size_t j = 0; j < list.size(); ++j) {
        const Action a = list[j];
        const std::string where =
            "action_space[" + std::to_string(i) + "][" + std::to_string(j) + "]";
        if (a.size() != k_) fail_validation(where + " does not have exactly k facilities");
        if ((a.mask() & ~range) != 0) fail_validation(where + " uses a facility outside [0, F)");
        for (std::size_t l = 0; l < j; ++l) {
          if (list[l] == a) fail_validation(where + " duplicates an earlier action");
        }
      }
    }
  }
}

const std::vector<Action>& CongestionGame::actions(std::size_t player) const {
  if (kind_ == ActionSpaceKind::kExplicitLists) return action_lists_.at(player);
  if (all_subsets_.empty()) {
    throw Error(ErrorCode::kBudget, "action space C(F, k) too large to enumerate");
  }
  return all_subsets_;
}

bool CongestionGame::is_valid_action(std::size_t player, Action a) const {
  if (player >= num_players_) return false;
  if (kind_ == ActionSpaceKind::kExplicitLists) {
    const auto& list = action_lists_[player];
    return std::find(list.begin(), list.end(), a) != list.end();
  }
  if (a.size() != k_) return false;
  if (num_facilities_ == 64) return true;
  return (a.mask() >> num_facilities_) == 0;
}

void CongestionGame::check_joint_action(const JointAction& joint) const {
  if (joint.size() != num_players_) {
    fail_validation("joint action has " + std::to_string(joint.size()) + " entries, expected " +
                    std::to_string(num_players_));
  }
  for (std::size_t i = 0; i < joint.size(); ++i) {
    if (!is_valid_action(i, joint[i])) {
      fail_validation("player " + std::to_string(i) + " action " + joint[i].to_string() +
                      " is not a valid action");
    }
  }
}

bool operator==(const CongestionGame& a, const CongestionGame& b) {
  if (a.num_players_ != b.num_players_ || a.num_facilities_ != b.num_facilities_ ||
      a.k_ != b.k_ || a.kind_ != b.kind_ || a.kernel_ != b.kernel_ ||
      a.action_lists_ != b.action_lists_) {
    return false;
  }
  for (std::size_t f = 0; f < a.rewards_.size(); ++f) {
    if (a.rewards_[f].values != b.rewards_[f].values) return false;
  }
  return true;
}

std::vector<FacilityRewardTable> make_affine_tables(const AffineRewardSpec& spec,
                                                    std::size_t num_players) {
  if (spec.intercept.size() != spec.slope.size()) {
    fail_validation("affine: c and d must have the same length");
  }
  std::vector<FacilityRewardTable> tables(spec.intercept.size());
  for (std::size_t f = 0; f < tables.size(); ++f) {
    const double c = spec.intercept[f];
    const double d = spec.slope[f];
    if (!(c >= 0.0 && c <= 1.0)) fail_validation("affine: c[" + std::to_string(f) + "] outside [0, 1]");
    if (!(d >= 0.0) || !std::isfinite(d)) fail_validation("affine: d[" + std::to_string(f) + "] must be >= 0");
    tables[f].values.resize(num_players);
    for (std::size_t m = 1; m <= num_players; ++m) {
      tables[f].values[m - 1] = std::clamp(c - d * static_cast<double>(m - 1), 0.0, 1.0);
    }
  }
  return tables;
}

CongestionGame make_random_game(std::size_t num_players, std::size_t num_facilities,
                                std::size_t k, std::uint64_t seed, RewardKernel kernel) {
  Rng rng(seed, /*stream_index=*/0x67616d65);  // "game"
  std::vector<FacilityRewardTable> tables(num_facilities);
  for (auto& table : tables) {
    table.values.resize(num_players);
    for (double& v : table.values) v = rng.uniform();
    std::sort(table.values.begin(), table.values.end(), std::greater<>());
  }
  return CongestionGame(num_players, num_facilities, k, std::move(tables), kernel);
}

std::vector<std::size_t> facility_loads(const CongestionGame& game, const JointAction& joint) {
  std::vector<std::size_t> loads(game.num_facilities(), 0);
  for (Action a : joint) {
    for (std::size_t f : a.facilities()) ++loads[f];
  }
  return loads;
}

std::vector<double> facility_rewards(const CongestionGame& game, const JointAction& joint) {
  game.check_joint_action(joint);
  const auto loads = facility_loads(game, joint);
  std::vector<double> out(game.num_facilities(), 0.0);
  for (std::size_t f = 0; f < out.size(); ++f) {
    if (loads[f] > 0) out[f] = game.reward(f, loads[f]);
  }
  return out;
}

double player_reward(const CongestionGame& game, std::size_t player, const JointAction& joint) {
  game.check_joint_action(joint);
  const auto loads = facility_loads(game, joint);
  double total = 0.0;
  for (std::size_t f : joint[player].facilities()) total += game.reward(f, loads[f]);
  return total;
}

double welfare(const CongestionGame& game, const JointAction& joint) {
  double total = 0.0;
  for (std::size_t i = 0; i < game.num_players(); ++i) total += player_reward(game, i, joint);
  return total;
}

double sample_facility_reward(const CongestionGame& game, std::size_t facility,
                              std::size_t load, Rng& rng) {
  const double mean = game.reward(facility, load);
  if (game.kernel() == RewardKernel::kDeterministic) return mean;
  return rng.bernoulli(mean) ? 1.0 : 0.0;
}

std::vector<double> sample_stochastic_rewards(const CongestionGame& game,
                                              const JointAction& joint, Rng& rng) {
  game.check_joint_action(joint);
  const auto loads = facility_loads(game, joint);
  std::vector<double> out(game.num_facilities(), 0.0);
  for (std::size_t f = 0; f < out.size(); ++f) {
    if (loads[f] > 0) out[f] = sample_facility_reward(game, f, loads[f], rng);
  }
  return out;
}

std::vector<double> poisson_binomial_pmf(std::span<const double> probabilities) {
  std::vector<double> pmf(probabilities.size() + 1, 0.0);
  pmf[0] = 1.0;
  std::size_t count = 0;
  for (double p : probabilities) {
    ++count;
    for (std::size_t m = count; m > 0; --m) pmf[m] = pmf[m] * (1.0 - p) + pmf[m - 1] * p;
    pmf[0] *= (1.0 - p);
  }
  return pmf;
}

double expected_facility_reward(const CongestionGame& game, std::size_t player,
                                std::size_t facility, const MarginalProfile& marginals) {
  std::vector<double> others;
  others.reserve(game.num_players() - 1);
  for (std::size_t j = 0; j < game.num_players(); ++j) {
    if (j != player) others.push_back(marginals[j][facility]);
  }
  const auto pmf = poisson_binomial_pmf(others);
  double value = 0.0;
  for (std::size_t m = 0; m < pmf.size(); ++m) value += pmf[m] * game.reward(facility, m + 1);
  return value;
}

double expected_player_reward(const CongestionGame& game, std::size_t player,
                              const MarginalProfile& marginals) {
  double value = 0.0;
  for (std::size_t f = 0; f < game.num_facilities(); ++f) {
    const double q = marginals[player][f];
    if (q > 0.0) value += q * expected_facility_reward(game, player, f, marginals);
  }
  return value;
}

double expected_welfare(const CongestionGame& game, const MarginalProfile& marginals) {
  double value = 0.0;
  std::vector<double> column(game.num_players());
  for (std::size_t f = 0; f < game.num_facilities(); ++f) {
    for (std::size_t i = 0; i < game.num_players(); ++i) column[i] = marginals[i][f];
    const auto pmf = poisson_binomial_pmf(column);
    for (std::size_t m = 1; m < pmf.size(); ++m) {
      value += pmf[m] * static_cast<double>(m) * game.reward(f, m);
    }
  }
  return value;
}

MarginalProfile pure_marginals(const CongestionGame& game, const JointAction& joint) {
  MarginalProfile q(game.num_players(), std::vector<double>(game.num_facilities(), 0.0));
  for (std::size_t i = 0; i < joint.size(); ++i) {
    for (std::size_t f : joint[i].facilities()) q[i][f] = 1.0;
  }
  return q;
}

}  // namespace congestexp
