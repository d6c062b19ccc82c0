#include "congestexp/factored_policy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "congestexp/error.hpp"

namespace congestexp {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

using LogTable = std::vector<std::vector<double>>;

// rows[f][j] = log e_j over facilities [f, F).
LogTable suffix_tables(std::span<const double> scores, std::size_t k) {
  const std::size_t num = scores.size();
  LogTable rows(num + 1, std::vector<double>(k + 1, kNegInf));
  rows[num][0] = 0.0;
  for (std::size_t f = num; f-- > 0;) {
    rows[f][0] = 0.0;
    for (std::size_t j = 1; j <= k; ++j) {
      rows[f][j] = log_add(rows[f + 1][j], rows[f + 1][j - 1] + scores[f]);
    }
  }
  return rows;
}

// rows[f][j] = log e_j over facilities [0, f).
LogTable prefix_tables(std::span<const double> scores, std::size_t k) {
  const std::size_t num = scores.size();
  LogTable rows(num + 1, std::vector<double>(k + 1, kNegInf));
  rows[0][0] = 0.0;
  for (std::size_t f = 0; f < num; ++f) {
    rows[f + 1][0] = 0.0;
    for (std::size_t j = 1; j <= k; ++j) {
      rows[f + 1][j] = log_add(rows[f][j], rows[f][j - 1] + scores[f]);
    }
  }
  return rows;
}

double log_sum_exp(std::span<const double> values) {
  double best = kNegInf;
  for (double v : values) best = std::max(best, v);
  if (best == kNegInf) return kNegInf;
  double sum = 0.0;
  for (double v : values) sum += std::exp(v - best);
  return best + std::log(sum);
}

double action_score(std::span<const double> scores, Action a) {
  double s = 0.0;
  for (std::size_t f : a.facilities()) s += scores[f];
  return s;
}

}  // namespace

double log_add(double a, double b) {
  if (a < b) std::swap(a, b);
  if (b == kNegInf) return a;
  return a + std::log1p(std::exp(b - a));
}

std::vector<double> log_elementary_symmetric(std::span<const double> scores, std::size_t k) {
  std::vector<double> e(k + 1, kNegInf);
  e[0] = 0.0;
  std::size_t count = 0;
  for (double s : scores) {
    ++count;
    for (std::size_t j = std::min(count, k); j >= 1; --j) e[j] = log_add(e[j], e[j - 1] + s);
  }
  return e;
}

FactoredPolicy::FactoredPolicy(std::vector<double> scores, std::size_t k)
    : scores_(std::move(scores)), k_(k) {
  if (scores_.empty() || scores_.size() > kMaxFacilities) {
    fail_validation("policy: facility count must lie in [1, 64]");
  }
  if (k_ < 1 || k_ > scores_.size()) fail_validation("policy: k must lie in [1, F]");
  for (double s : scores_) {
    if (!std::isfinite(s)) fail_validation("policy: scores must be finite");
  }
}

FactoredPolicy::FactoredPolicy(std::vector<double> scores, std::size_t k,
                               std::shared_ptr<const std::vector<Action>> actions)
    : FactoredPolicy(std::move(scores), k) {
  if (!actions || actions->empty()) fail_validation("policy: explicit action list is empty");
  for (Action a : *actions) {
    if (a.size() != k_) fail_validation("policy: listed action " + a.to_string() + " is not a k-subset");
    if (scores_.size() < 64 && (a.mask() >> scores_.size()) != 0) {
      fail_validation("policy: listed action " + a.to_string() + " uses an unknown facility");
    }
  }
  actions_ = std::move(actions);
}

FactoredPolicy FactoredPolicy::shifted(std::span<const double> delta) const {
  if (delta.size() != scores_.size()) fail_validation("policy: score delta has wrong length");
  std::vector<double> next = scores_;
  for (std::size_t f = 0; f < next.size(); ++f) next[f] += delta[f];
  return with_scores(std::move(next));
}

FactoredPolicy FactoredPolicy::with_scores(std::vector<double> scores) const {
  if (actions_) return FactoredPolicy(std::move(scores), k_, actions_);
  return FactoredPolicy(std::move(scores), k_);
}

void FactoredPolicy::check_action(Action a) const {
  if (a.size() != k_) {
    fail_validation("action " + a.to_string() + " does not have exactly " + std::to_string(k_) +
                    " facilities");
  }
  if (scores_.size() < 64 && (a.mask() >> scores_.size()) != 0) {
    fail_validation("action " + a.to_string() + " uses a facility outside [0, F)");
  }
}

std::vector<double> FactoredPolicy::list_log_weights() const {
  std::vector<double> w;
  w.reserve(actions_->size());
  for (Action a : *actions_) w.push_back(action_score(scores_, a));
  return w;
}

double FactoredPolicy::log_normalizer() const {
  if (actions_) return log_sum_exp(list_log_weights());
  return log_elementary_symmetric(scores_, k_)[k_];
}

std::vector<double> FactoredPolicy::marginals() const {
  const std::size_t num = scores_.size();
  std::vector<double> q(num, 0.0);
  if (actions_) {
    const auto w = list_log_weights();
    const double log_z = log_sum_exp(w);
    for (std::size_t j = 0; j < w.size(); ++j) {
      const double p = std::exp(w[j] - log_z);
      for (std::size_t f : (*actions_)[j].facilities()) q[f] += p;
    }
  } else {
    const auto pre = prefix_tables(scores_, k_);
    const auto suf = suffix_tables(scores_, k_);
    const double log_z = suf[0][k_];
    std::vector<double> terms(k_);
    for (std::size_t f = 0; f < num; ++f) {
      // log e_{k-1} of every facility except f, split at f.
      for (std::size_t j = 0; j < k_; ++j) terms[j] = pre[f][j] + suf[f + 1][k_ - 1 - j];
      q[f] = std::exp(scores_[f] + log_sum_exp(terms) - log_z);
    }
  }
  for (double& v : q) v = std::clamp(v, 0.0, 1.0);
  return q;
}

double FactoredPolicy::marginal(std::size_t facility) const {
  if (facility >= scores_.size()) fail_validation("facility index out of range");
  return marginals()[facility];
}

double FactoredPolicy::action_probability(Action a) const {
  check_action(a);
  if (actions_ && std::find(actions_->begin(), actions_->end(), a) == actions_->end()) return 0.0;
  return std::exp(action_score(scores_, a) - log_normalizer());
}

double FactoredPolicy::log_complement_probability(Action a) const {
  check_action(a);
  if (actions_) {
    std::vector<double> others;
    bool listed = false;
    for (Action b : *actions_) {
      if (b == a) {
        listed = true;
      } else {
        others.push_back(action_score(scores_, b));
      }
    }
    if (!listed) return 0.0;
    return log_sum_exp(others) - log_normalizer();
  }
  // Actions other than a pick j < k facilities inside a and k - j outside.
  std::vector<double> inside;
  std::vector<double> outside;
  for (std::size_t f = 0; f < scores_.size(); ++f) {
    (a.contains(f) ? inside : outside).push_back(scores_[f]);
  }
  const auto e_in = log_elementary_symmetric(inside, k_);
  const auto e_out = log_elementary_symmetric(outside, k_);
  std::vector<double> terms(k_);
  for (std::size_t j = 0; j < k_; ++j) terms[j] = e_in[j] + e_out[k_ - j];
  return log_sum_exp(terms) - log_normalizer();
}

double FactoredPolicy::l1_distance_to_pure(Action a) const {
  return 2.0 * std::exp(log_complement_probability(a));
}

Action FactoredPolicy::sample_action(Rng& rng) const {
  if (actions_) {
    const auto w = list_log_weights();
    const double log_z = log_sum_exp(w);
    const double u = rng.uniform();
    double cumulative = 0.0;
    for (std::size_t j = 0; j < w.size(); ++j) {
      cumulative += std::exp(w[j] - log_z);
      if (u < cumulative) return (*actions_)[j];
    }
    return actions_->back();
  }
  const std::size_t num = scores_.size();
  const auto suf = suffix_tables(scores_, k_);
  Action chosen;
  std::size_t slots = k_;
  for (std::size_t f = 0; f < num && slots > 0; ++f) {
    if (num - f == slots) {
      chosen = chosen.with(f);
      --slots;
      continue;
    }
    const double p = std::exp(scores_[f] + suf[f + 1][slots - 1] - suf[f][slots]);
    if (rng.uniform() < p) {
      chosen = chosen.with(f);
      --slots;
    }
  }
  return chosen;
}

SubsetDistributionStats FactoredPolicy::stats(bool with_table) const {
  SubsetDistributionStats out;
  out.log_normalizer = log_normalizer();
  out.marginals = marginals();
  if (with_table) {
    const std::vector<Action> all =
        actions_ ? *actions_ : enumerate_k_subsets(scores_.size(), k_);
    std::vector<double> table;
    table.reserve(all.size());
    for (Action a : all) table.push_back(std::exp(action_score(scores_, a) - out.log_normalizer));
    out.action_probabilities = std::move(table);
  }
  return out;
}

}  // namespace congestexp
