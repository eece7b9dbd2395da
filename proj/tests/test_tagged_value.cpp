#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <vector>

#include "prophet/rng.hpp"
#include "prophet/tagged_value.hpp"

using prophet::Rng;
using prophet::TaggedValue;

TEST_CASE("tagged comparison is lexicographic") {
  CHECK(TaggedValue{3.0, 0.2} > TaggedValue{2.0, 0.9});
  CHECK(TaggedValue{2.0, 0.9} > TaggedValue{2.0, 0.1});
  CHECK(TaggedValue{2.0, 0.5} == TaggedValue{2.0, 0.5});
  CHECK_FALSE(TaggedValue{2.0, 0.5} > TaggedValue{2.0, 0.5});
}

TEST_CASE("never sentinel dominates every value") {
  const TaggedValue never = TaggedValue::never();
  CHECK(never.is_never());
  CHECK(never > TaggedValue{1e300, 0.999999});
  CHECK(never > TaggedValue{std::numeric_limits<double>::infinity(), 0.999999});
  CHECK(never == TaggedValue::never());
  CHECK_FALSE((TaggedValue{0.0, 0.0}).is_never());
}

TEST_CASE("independently drawn tags are pairwise distinct") {
  Rng rng(20240811);
  std::vector<TaggedValue> draws;
  draws.reserve(1000000);
  for (int i = 0; i < 1000000; ++i) draws.push_back({1.0, rng.uniform01()});
  std::sort(draws.begin(), draws.end());
  CHECK(std::adjacent_find(draws.begin(), draws.end()) == draws.end());
}
