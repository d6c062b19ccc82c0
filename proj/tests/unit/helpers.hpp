#pragma once

#include <cmath>
#include <vector>

#include "congestexp/equilibrium.hpp"
#include "congestexp/game.hpp"

namespace testutil {

using namespace congestexp;

inline CongestionGame g1(RewardKernel kernel = RewardKernel::kBernoulli) {
  return CongestionGame(2, 2, 1, {{{1.0, 0.2}}, {{0.8, 0.3}}}, kernel);
}

inline Action act(std::initializer_list<std::size_t> fs) {
  return Action::from_facilities(std::vector<std::size_t>(fs));
}

inline CongestionGame constant_game(std::size_t n, std::size_t num_f, std::size_t k, double c,
                                    RewardKernel kernel = RewardKernel::kDeterministic) {
  std::vector<FacilityRewardTable> tables(num_f, FacilityRewardTable{std::vector<double>(n, c)});
  return CongestionGame(n, num_f, k, tables, kernel);
}

// Random per-player marginals drawn from random factored policies, so they
// are consistent with some distribution over k-subsets.
MarginalProfile random_marginals(const CongestionGame& game, Rng& rng);

// E over the product of per-player action distributions by enumerating the
// joint action space.
template <typename Fn>
double enumerate_expectation(const CongestionGame& game,
                             const std::vector<std::vector<double>>& action_probs, Fn&& value) {
  double total = 0.0;
  const std::uint64_t count = profile_count(game);
  for (std::uint64_t idx = 0; idx < count; ++idx) {
    const JointAction joint = decode_profile(game, idx);
    double p = 1.0;
    for (std::size_t i = 0; i < game.num_players(); ++i) {
      const auto& acts = game.actions(i);
      const auto pos = std::find(acts.begin(), acts.end(), joint[i]) - acts.begin();
      p *= action_probs[i][pos];
    }
    if (p > 0.0) total += p * value(joint);
  }
  return total;
}

}  // namespace testutil
