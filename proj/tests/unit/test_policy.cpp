#include <cmath>
#include <map>

#include "congestexp/error.hpp"
#include "congestexp/factored_policy.hpp"
#include "doctest.h"
#include "helpers.hpp"

using namespace congestexp;
using testutil::act;

namespace {

// Direct enumeration over the k-subsets, no ESP involved.
struct Brute {
  double log_z;
  std::vector<double> marginals;
  std::vector<double> probs;
};

Brute brute(const std::vector<double>& g, std::size_t k) {
  const auto acts = enumerate_k_subsets(g.size(), k);
  std::vector<double> logw;
  double mx = -INFINITY;
  for (Action a : acts) {
    double s = 0.0;
    for (std::size_t f : a.facilities()) s += g[f];
    logw.push_back(s);
    mx = std::max(mx, s);
  }
  double z = 0.0;
  for (double s : logw) z += std::exp(s - mx);
  Brute b{mx + std::log(z), std::vector<double>(g.size(), 0.0), {}};
  for (std::size_t j = 0; j < acts.size(); ++j) {
    const double p = std::exp(logw[j] - b.log_z);
    b.probs.push_back(p);
    for (std::size_t f : acts[j].facilities()) b.marginals[f] += p;
  }
  return b;
}

std::vector<double> log_weights(std::initializer_list<double> w) {
  std::vector<double> g;
  for (double x : w) g.push_back(std::log(x));
  return g;
}

}  // namespace

TEST_CASE("normalizer examples") {
  CHECK(FactoredPolicy::uniform(3, 2).log_normalizer() == doctest::Approx(std::log(3.0)));
  const FactoredPolicy p(log_weights({1, 2, 3}), 2);
  CHECK(p.log_normalizer() == doctest::Approx(std::log(11.0)).epsilon(1e-14));
  const FactoredPolicy single({0.3, -1.2, 4.0}, 3);
  CHECK(single.log_normalizer() == doctest::Approx(3.1).epsilon(1e-14));
}

TEST_CASE("marginal examples") {
  for (double q : FactoredPolicy::uniform(3, 2).marginals()) CHECK(q == doctest::Approx(2.0 / 3));
  const FactoredPolicy p(log_weights({1, 2, 3}), 2);
  CHECK(p.marginal(2) == doctest::Approx(9.0 / 11).epsilon(1e-14));
  CHECK(p.marginal(0) == doctest::Approx(5.0 / 11).epsilon(1e-14));
  for (double q : FactoredPolicy({5.0, -3.0}, 2).marginals()) CHECK(q == 1.0);
}

TEST_CASE("action probability and distance examples") {
  CHECK(FactoredPolicy::uniform(6, 3).action_probability(act({0, 2, 5})) ==
        doctest::Approx(1.0 / 20));
  const FactoredPolicy p(log_weights({1, 2, 3}), 2);
  CHECK(p.action_probability(act({0, 1})) == doctest::Approx(2.0 / 11).epsilon(1e-14));
  CHECK(p.l1_distance_to_pure(act({1, 2})) == doctest::Approx(10.0 / 11).epsilon(1e-14));
  CHECK(FactoredPolicy({1.0, 2.0}, 2).action_probability(act({0, 1})) == 1.0);
  CHECK(FactoredPolicy({1.0, 2.0}, 2).l1_distance_to_pure(act({0, 1})) == 0.0);
  const FactoredPolicy uniform = FactoredPolicy::uniform(5, 2);
  CHECK(uniform.l1_distance_to_pure(act({1, 3})) == doctest::Approx(2.0 * (1 - 1.0 / 10)));
  std::vector<double> g(6, 0.0);
  g[1] = g[4] = 40.0;
  const FactoredPolicy point(g, 2);
  CHECK(point.l1_distance_to_pure(act({1, 4})) <= 1e-6);
  CHECK(point.l1_distance_to_pure(act({1, 4})) > 0.0);  // no cancellation to zero
  CHECK_THROWS_AS(p.action_probability(act({0})), Error);
}

TEST_CASE("ESP quantities match enumeration on random scores") {
  Rng rng(2024);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t num_f = 1 + rng.below(10);
    const std::size_t k = 1 + rng.below(num_f);
    std::vector<double> g(num_f);
    for (double& x : g) x = 10.0 * rng.uniform() - 5.0;
    const FactoredPolicy p(g, k);
    const Brute b = brute(g, k);
    CHECK(std::abs(p.log_normalizer() - b.log_z) <= 1e-9 * std::max(1.0, std::abs(b.log_z)));
    const auto q = p.marginals();
    double sum = 0.0;
    for (std::size_t f = 0; f < num_f; ++f) {
      CHECK(std::abs(q[f] - b.marginals[f]) <= 1e-9 * std::max(b.marginals[f], 1e-300));
      sum += q[f];
    }
    CHECK(std::abs(sum - double(k)) <= 1e-9);
    const auto stats = p.stats(true);
    const auto acts = enumerate_k_subsets(num_f, k);
    for (std::size_t j = 0; j < acts.size(); ++j) {
      CHECK(std::abs(p.action_probability(acts[j]) - b.probs[j]) <= 1e-9 * b.probs[j]);
      CHECK(std::abs((*stats.action_probabilities)[j] - b.probs[j]) <= 1e-9 * b.probs[j]);
    }
  }
}

TEST_CASE("huge score gaps stay finite") {
  const FactoredPolicy p({5000.0, -5000.0, 0.0, 2500.0}, 2);
  CHECK(std::isfinite(p.log_normalizer()));
  CHECK(p.marginal(0) == doctest::Approx(1.0));
  CHECK(p.marginal(3) == doctest::Approx(1.0));
  CHECK(p.marginal(1) == 0.0);
  CHECK(p.log_complement_probability(act({0, 3})) == doctest::Approx(-2500.0));
}

TEST_CASE("shift invariance") {
  Rng rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> g(7);
    for (double& x : g) x = 6.0 * rng.uniform() - 3.0;
    const FactoredPolicy p(g, 3);
    const FactoredPolicy shifted = p.shifted(std::vector<double>(7, 12.5));
    const auto q0 = p.marginals(), q1 = shifted.marginals();
    for (std::size_t f = 0; f < 7; ++f) CHECK(std::abs(q0[f] - q1[f]) <= 1e-9);
    for (Action a : enumerate_k_subsets(7, 3)) {
      CHECK(std::abs(p.action_probability(a) - shifted.action_probability(a)) <= 1e-9);
    }
  }
}

TEST_CASE("raising a score never lowers its marginal") {
  Rng rng(6);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> g(8);
    for (double& x : g) x = 4.0 * rng.uniform() - 2.0;
    const std::size_t f = rng.below(8);
    const FactoredPolicy p(g, 3);
    g[f] += rng.uniform();
    CHECK(FactoredPolicy(g, 3).marginal(f) >= p.marginal(f) - 1e-15);
  }
}

TEST_CASE("sampling frequencies") {
  Rng rng(99);
  {
    const FactoredPolicy p = FactoredPolicy::uniform(3, 2);
    std::map<std::uint64_t, int> counts;
    const int draws = 30000;
    for (int j = 0; j < draws; ++j) counts[p.sample_action(rng).mask()]++;
    const double sd = std::sqrt(draws * (1.0 / 3) * (2.0 / 3));
    CHECK(counts.size() == 3);
    for (const auto& [mask, c] : counts) CHECK(std::abs(c - draws / 3.0) <= 3 * sd);
  }
  {
    const FactoredPolicy p(log_weights({1, 2, 3}), 2);
    const int draws = 100000;
    int hits = 0;
    for (int j = 0; j < draws; ++j) hits += p.sample_action(rng) == act({1, 2});
    const double pr = 6.0 / 11;
    CHECK(std::abs(hits - draws * pr) <= 3 * std::sqrt(draws * pr * (1 - pr)));
  }
  const FactoredPolicy single({1.0, 2.0, 3.0}, 3);
  for (int j = 0; j < 10; ++j) CHECK(single.sample_action(rng) == act({0, 1, 2}));
}

TEST_CASE("sampling is deterministic given the stream") {
  const FactoredPolicy p({0.1, 0.7, -0.4, 1.3, 0.0}, 2);
  Rng a(42, 3), b(42, 3);
  for (int j = 0; j < 200; ++j) CHECK(p.sample_action(a) == p.sample_action(b));
}

TEST_CASE("explicit action lists") {
  auto list = std::make_shared<const std::vector<Action>>(
      std::vector<Action>{act({0, 1}), act({1, 2}), act({2, 3})});
  const FactoredPolicy p({0.0, std::log(2.0), 0.0, std::log(3.0)}, 2, list);
  // weights: {0,1}: 2, {1,2}: 2, {2,3}: 3
  CHECK(p.log_normalizer() == doctest::Approx(std::log(7.0)));
  CHECK(p.marginal(1) == doctest::Approx(4.0 / 7));
  CHECK(p.marginal(3) == doctest::Approx(3.0 / 7));
  CHECK(p.action_probability(act({0, 3})) == 0.0);
  CHECK(p.l1_distance_to_pure(act({2, 3})) == doctest::Approx(2.0 * 4.0 / 7));
  Rng rng(1);
  int hits = 0;
  const int draws = 70000;
  for (int j = 0; j < draws; ++j) {
    const Action a = p.sample_action(rng);
    CHECK(std::find(list->begin(), list->end(), a) != list->end());
    hits += a == act({2, 3});
  }
  CHECK(std::abs(hits - draws * 3.0 / 7) <= 3 * std::sqrt(draws * 3.0 / 7 * 4.0 / 7));
}

TEST_CASE("policy validation") {
  CHECK_THROWS_AS(FactoredPolicy({0.0, 1.0}, 0), Error);
  CHECK_THROWS_AS(FactoredPolicy({0.0, 1.0}, 3), Error);
  CHECK_THROWS_AS(FactoredPolicy({0.0, NAN}, 1), Error);
  CHECK_THROWS_AS(FactoredPolicy({0.0, INFINITY}, 1), Error);
}

TEST_CASE("log_add and ESP helpers") {
  CHECK(log_add(-INFINITY, 2.0) == 2.0);
  CHECK(log_add(std::log(2.0), std::log(3.0)) == doctest::Approx(std::log(5.0)));
  const auto e = log_elementary_symmetric(log_weights({1, 2, 3}), 3);
  CHECK(e[0] == doctest::Approx(0.0));
  CHECK(std::exp(e[1]) == doctest::Approx(6.0));
  CHECK(std::exp(e[2]) == doctest::Approx(11.0));
  CHECK(std::exp(e[3]) == doctest::Approx(6.0));
}
