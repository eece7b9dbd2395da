#pragma once

#include <compare>
#include <limits>
#include <ostream>

namespace prophet {

// A reward value paired with a uniform tie-breaker coordinate, ordered
// lexicographically. Two independently drawn TaggedValues compare equal with
// probability zero, so point masses behave like continuous values under
// strict comparison.
struct TaggedValue {
  double value = 0.0;
  double tiebreak = 0.0;

  friend constexpr auto operator<=>(const TaggedValue&, const TaggedValue&) = default;

  // Threshold sentinel that no drawn value exceeds ("never accept").
  static constexpr TaggedValue never() {
    return {std::numeric_limits<double>::infinity(), 1.0};
  }

  constexpr bool is_never() const {
    return value == std::numeric_limits<double>::infinity() && tiebreak == 1.0;
  }
};

inline std::ostream& operator<<(std::ostream& os, const TaggedValue& v) {
  if (v.is_never()) return os << "(NEVER)";
  return os << '(' << v.value << ", " << v.tiebreak << ')';
}

}  // namespace prophet
