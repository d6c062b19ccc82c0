#include "helpers.hpp"

#include "congestexp/factored_policy.hpp"

namespace testutil {

MarginalProfile random_marginals(const CongestionGame& game, Rng& rng) {
  MarginalProfile q;
  for (std::size_t i = 0; i < game.num_players(); ++i) {
    std::vector<double> scores(game.num_facilities());
    for (double& s : scores) s = 4.0 * rng.uniform() - 2.0;
    q.push_back(FactoredPolicy(scores, game.k()).marginals());
  }
  return q;
}

}  // namespace testutil
