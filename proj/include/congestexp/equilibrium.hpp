#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "congestexp/game.hpp"

namespace congestexp {

inline constexpr std::uint64_t kDefaultEnumerationBudget = 10'000'000;

// Reward differences below this magnitude count as ties.
inline constexpr double kTieTolerance = 1e-12;

// Number of pure profiles prod_i |A_i|, saturating at UINT64_MAX.
std::uint64_t profile_count(const CongestionGame& game);

// Throws a kBudget error naming the required budget when `required` > `budget`.
void check_budget(std::uint64_t required, std::uint64_t budget, const char* what);

// Decodes profile indices in mixed radix, player 0 least significant.
JointAction decode_profile(const CongestionGame& game, std::uint64_t index);

struct NashCertificate {
  JointAction profile;
  bool strict = false;
  // min over players and unilateral deviations of r_i(a*) - r_i(a_i, a*_-i);
  // +infinity when no player has an alternative action.
  double gap = 0.0;
  // gap / 2.
  double epsilon = 0.0;
};

// Smallest unilateral deviation loss at `profile` (negative if someone gains).
double deviation_gap(const CongestionGame& game, const JointAction& profile);

// Every pure Nash equilibrium, in profile-index order.
std::vector<NashCertificate> find_pure_nash(const CongestionGame& game,
                                            std::uint64_t budget = kDefaultEnumerationBudget);

// Strict equilibrium with the largest gap, if any.
std::optional<NashCertificate> best_strict_nash(const std::vector<NashCertificate>& certs);

// Phi(a) = sum_f sum_{m=1}^{n_f(a)} r^f(m).
double rosenthal_potential(const CongestionGame& game, const JointAction& joint);

// Best response of `player` against the others in `joint` (lowest list index
// among maximizers).
Action best_response(const CongestionGame& game, std::size_t player, const JointAction& joint);

// Round-robin improving moves until no player gains more than kTieTolerance.
// Each move counts as one iteration; exhausting max_iters is an invariant
// violation since the potential strictly rises with every move.
JointAction best_response_dynamics(const CongestionGame& game, JointAction start,
                                   std::size_t max_iters);

struct RegretTrace {
  std::size_t player = 0;
  std::size_t rounds = 0;
  // sum_t r_i(omega_i^t, omega_-i^t).
  double cumulative_value = 0.0;
  // V_T(f) = sum_t E_{a_-i ~ omega_-i^t}[r^f(load_-i(f) + 1)].
  std::vector<double> facility_values;
  double best_value = 0.0;
  Action best_action;
  double regret = 0.0;
};

// Incremental best-in-hindsight regret against the realized opponent policy
// sequence, using exact expected round values.
class RegretTracker {
 public:
  RegretTracker(const CongestionGame& game, std::size_t player);

  void add_round(const MarginalProfile& marginals);
  RegretTrace trace() const;

 private:
  const CongestionGame* game_;
  std::size_t player_;
  std::size_t rounds_ = 0;
  double cumulative_ = 0.0;
  std::vector<double> facility_values_;
};

// Best fixed action for per-facility cumulative values: the top-k facilities
// over all k-subsets (ties to lower index), otherwise a scan of the list.
Action best_fixed_action(const CongestionGame& game, std::size_t player,
                         const std::vector<double>& facility_values);

RegretTrace best_in_hindsight_regret(const CongestionGame& game, std::size_t player,
                                     const std::vector<MarginalProfile>& trajectory);

// Diagnostic regret against realized opponent actions with mean rewards:
// max_a sum_t r_i(a, a_-i^t) - sum_t r_i(a^t).
class SampledRegretTracker {
 public:
  SampledRegretTracker(const CongestionGame& game, std::size_t player);

  void add_round(const JointAction& joint);
  double regret() const;

 private:
  const CongestionGame* game_;
  std::size_t player_;
  double realized_ = 0.0;
  std::vector<double> facility_values_;
};

struct WelfareOptimum {
  double value = 0.0;
  JointAction profile;
};

WelfareOptimum welfare_optimum(const CongestionGame& game,
                               std::uint64_t budget = kDefaultEnumerationBudget);

struct SmoothnessResult {
  bool holds = false;
  std::optional<JointAction> witness;
  double opt = 0.0;
  // max over candidate a* of min over a of lhs - rhs.
  double best_slack = 0.0;
};

// Checks sum_i r_i(a*_i, a_-i) >= lambda OPT - mu W(a) for all a, over every
// candidate a*. Needs (#profiles)^2 evaluations.
SmoothnessResult verify_smoothness(const CongestionGame& game, double lambda, double mu,
                                   std::uint64_t budget = kDefaultEnumerationBudget);

// Largest lambda for which the game is (lambda, mu)-smooth (0 when OPT = 0).
double max_smoothness_lambda(const CongestionGame& game, double mu,
                             std::uint64_t budget = kDefaultEnumerationBudget);

struct WelfareReport {
  double opt = 0.0;
  double lambda = 0.0;
  double mu = 0.0;
  std::size_t rounds = 0;
  double average_welfare = 0.0;
  double regret_sum = 0.0;
  // lambda/(1+mu) OPT - regret_sum / (T (1+mu)).
  double bound = 0.0;
  double slack = 0.0;
};

WelfareReport welfare_report(double opt, const std::vector<double>& welfare_trace, double lambda,
                             double mu, const std::vector<double>& regrets);

}  // namespace congestexp
