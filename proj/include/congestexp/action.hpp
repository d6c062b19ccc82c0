#pragma once

#include <bit>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace congestexp {

inline constexpr std::size_t kMaxFacilities = 64;

// A set of facilities stored as a bitmask; bit f set means facility f is used.
// Actions are serialized by their mask value.
class Action {
 public:
  constexpr Action() = default;
  constexpr explicit Action(std::uint64_t mask) : mask_(mask) {}

  static Action from_facilities(const std::vector<std::size_t>& facilities);

  constexpr std::uint64_t mask() const { return mask_; }
  constexpr bool contains(std::size_t f) const { return (mask_ >> f) & 1U; }
  constexpr std::size_t size() const {
    return static_cast<std::size_t>(std::popcount(mask_));
  }

  // Facility indices in ascending order.
  std::vector<std::size_t> facilities() const;

  // Ascending facility list, e.g. "{0,3}".
  std::string to_string() const;

  constexpr Action with(std::size_t f) const { return Action(mask_ | (std::uint64_t{1} << f)); }
  constexpr Action without(std::size_t f) const {
    return Action(mask_ & ~(std::uint64_t{1} << f));
  }

  friend constexpr bool operator==(Action, Action) = default;
  friend constexpr auto operator<=>(Action, Action) = default;

 private:
  std::uint64_t mask_ = 0;
};

using JointAction = std::vector<Action>;

// C(n, r) as an exact integer, or UINT64_MAX on overflow.
std::uint64_t binomial(std::size_t n, std::size_t r);

// Every k-subset of [0, F) in increasing mask order.
std::vector<Action> enumerate_k_subsets(std::size_t num_facilities, std::size_t k);

}  // namespace congestexp
