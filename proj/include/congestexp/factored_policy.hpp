#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "congestexp/action.hpp"
#include "congestexp/rng.hpp"

namespace congestexp {

struct SubsetDistributionStats {
  double log_normalizer = 0.0;
  std::vector<double> marginals;
  // Probability of every action in enumeration order; only filled on request.
  std::optional<std::vector<double>> action_probabilities;
};

// Product-form exponential-weights distribution over k-subsets:
//
//   omega(a) = exp(sum_{f in a} G(f)) / sum_{a'} exp(sum_{f in a'} G(f)).
//
// Scores G(f) already include the learning rate. Over all k-subsets the
// normalizer is the elementary symmetric polynomial e_k of exp(G), evaluated
// entirely in the log domain so arbitrarily large score gaps stay finite.
// Over an explicit action list every quantity is computed by enumeration.
class FactoredPolicy {
 public:
  // All k-subsets of [0, scores.size()).
  FactoredPolicy(std::vector<double> scores, std::size_t k);
  // An explicit list of k-subsets.
  FactoredPolicy(std::vector<double> scores, std::size_t k,
                 std::shared_ptr<const std::vector<Action>> actions);

  static FactoredPolicy uniform(std::size_t num_facilities, std::size_t k) {
    return FactoredPolicy(std::vector<double>(num_facilities, 0.0), k);
  }

  std::size_t num_facilities() const { return scores_.size(); }
  std::size_t k() const { return k_; }
  bool all_k_subsets() const { return actions_ == nullptr; }
  const std::vector<double>& scores() const { return scores_; }
  // Explicit action list, or nullptr for the all-k-subsets space.
  const std::shared_ptr<const std::vector<Action>>& explicit_actions() const { return actions_; }

  // Same action space, scores G + delta.
  FactoredPolicy shifted(std::span<const double> delta) const;
  FactoredPolicy with_scores(std::vector<double> scores) const;

  double log_normalizer() const;
  double marginal(std::size_t facility) const;
  std::vector<double> marginals() const;
  double action_probability(Action a) const;
  // log(1 - omega(a)), computed without cancellation.
  double log_complement_probability(Action a) const;
  // ||omega - delta_a||_1 = 2 (1 - omega(a)).
  double l1_distance_to_pure(Action a) const;

  // Draws one action. All-k-subsets policies visit facilities in ascending
  // order and include each with its conditional probability given the
  // remaining slot count; explicit lists use inverse-CDF sampling in list order.
  Action sample_action(Rng& rng) const;

  SubsetDistributionStats stats(bool with_table = false) const;

 private:
  void check_action(Action a) const;
  std::vector<double> list_log_weights() const;

  std::vector<double> scores_;
  std::size_t k_;
  std::shared_ptr<const std::vector<Action>> actions_;
};

// log(exp(a) + exp(b)) with -inf handled.
double log_add(double a, double b);

// log e_j(exp(scores)) for j = 0..k.
std::vector<double> log_elementary_symmetric(std::span<const double> scores, std::size_t k);

}  // namespace congestexp
