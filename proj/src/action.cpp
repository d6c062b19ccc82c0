#include "congestexp/action.hpp"

#include <limits>

#include "congestexp/error.hpp"

namespace congestexp {

Action Action::from_facilities(const std::vector<std::size_t>& facilities) {
  std::uint64_t mask = 0;
  for (std::size_t f : facilities) {
    if (f >= kMaxFacilities) fail_validation("facility index " + std::to_string(f) + " out of range");
    const std::uint64_t bit = std::uint64_t{1} << f;
    if (mask & bit) fail_validation("facility " + std::to_string(f) + " listed twice in an action");
    mask |= bit;
  }
  return Action(mask);
}

std::vector<std::size_t> Action::facilities() const {
  std::vector<std::size_t> out;
  out.reserve(size());
  for (std::uint64_t m = mask_; m != 0; m &= m - 1) {
    out.push_back(static_cast<std::size_t>(std::countr_zero(m)));
  }
  return out;
}

std::string Action::to_string() const {
  std::string s = "{";
  bool first = true;
  for (std::size_t f : facilities()) {
    if (!first) s += ",";
    s += std::to_string(f);
    first = false;
  }
  return s + "}";
}

std::uint64_t binomial(std::size_t n, std::size_t r) {
  if (r > n) return 0;
  r = std::min(r, n - r);
  std::uint64_t result = 1;
  for (std::size_t i = 1; i <= r; ++i) {
    // result * (n - r + i) / i is always an integer.
    const unsigned __int128 next =
        static_cast<unsigned __int128>(result) * (n - r + i) / i;
    if (next > std::numeric_limits<std::uint64_t>::max()) {
      return std::numeric_limits<std::uint64_t>::max();
    }
    result = static_cast<std::uint64_t>(next);
  }
  return result;
}

std::vector<Action> enumerate_k_subsets(std::size_t num_facilities, std::size_t k) {
  if (num_facilities > kMaxFacilities) fail_validation("too many facilities");
  std::vector<Action> out;
  if (k > num_facilities) return out;
  if (k == 0) {
    out.emplace_back(0);
    return out;
  }
  out.reserve(binomial(num_facilities, k));
  // Gosper's hack walks k-bit masks in increasing numeric order.
  std::uint64_t mask = (k == 64) ? ~std::uint64_t{0} : (std::uint64_t{1} << k) - 1;
  const std::uint64_t limit_bit = num_facilities == 64 ? 0 : std::uint64_t{1} << num_facilities;
  for (;;) {
    out.emplace_back(mask);
    const std::uint64_t c = mask & (~mask + 1);
    const std::uint64_t r = mask + c;
    if (r == 0) break;
    if (limit_bit != 0 && r >= limit_bit) {
      // The next mask would be at least r, which already exceeds the range.
      break;
    }
    const std::uint64_t next = (((r ^ mask) >> 2) / c) | r;
    if (limit_bit != 0 && next >= limit_bit) break;
    mask = next;
  }
  return out;
}

}  // namespace congestexp
