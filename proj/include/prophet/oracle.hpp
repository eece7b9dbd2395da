#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

#include "prophet/distribution.hpp"
#include "prophet/rules.hpp"

namespace prophet {

inline constexpr std::size_t kEnumerationMaxN = 24;

// A fixed deferred-decisions configuration: the 2n drawn values merged and
// sorted descending, each position mapped back to its origin index. Within
// every origin the larger value is its Y and the smaller its Z; jstar is the
// 1-based position of the largest Z, i.e. the first repeated origin.
struct World {
  std::size_t n = 0;
  std::vector<TaggedValue> w;        // 2n values, strictly descending
  std::vector<std::size_t> origin;   // 0-based origin of each position
  std::size_t jstar = 0;             // 1-based pivotal position
};

// First 1-based position whose origin already appeared at an earlier position.
inline std::size_t pivotal_index(const World& world) {
  std::vector<bool> seen(world.n, false);
  for (std::size_t pos = 0; pos < world.w.size(); ++pos) {
    if (seen[world.origin[pos]]) return pos + 1;
    seen[world.origin[pos]] = true;
  }
  throw std::logic_error("pivotal_index: malformed world");
}

inline World build_world(std::span<const TaggedValue> y, std::span<const TaggedValue> z) {
  if (y.empty() || y.size() != z.size())
    throw std::invalid_argument("build_world: need equal-length non-empty Y and Z");
  const std::size_t n = y.size();

  World world;
  world.n = n;
  world.w.reserve(2 * n);
  world.origin.reserve(2 * n);
  std::vector<std::size_t> order(2 * n);
  std::vector<TaggedValue> all(2 * n);
  for (std::size_t i = 0; i < n; ++i) {
    // Relabel per origin so that Y_i > Z_i; only the pair matters afterwards.
    all[2 * i] = std::max(y[i], z[i]);
    all[2 * i + 1] = std::min(y[i], z[i]);
  }
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return all[a] > all[b]; });
  for (std::size_t pos = 0; pos < 2 * n; ++pos) {
    world.w.push_back(all[order[pos]]);
    world.origin.push_back(order[pos] / 2);
  }
  for (std::size_t pos = 0; pos + 1 < 2 * n; ++pos)
    if (world.w[pos] == world.w[pos + 1])
      throw std::invalid_argument("build_world: tagged values must be pairwise distinct");
  world.jstar = pivotal_index(world);
  return world;
}

// Sum_{j<jstar} W_j / 2^j + W_jstar / 2^(jstar-1): the prophet's expected
// reward over the coin flips, exact for every fixed world.
inline double prophet_formula(const World& world) {
  double sum = 0.0;
  double weight = 0.5;
  for (std::size_t j = 1; j < world.jstar; ++j) {
    sum += world.w[j - 1].value * weight;
    weight *= 0.5;
  }
  sum += world.w[world.jstar - 1].value * std::pow(0.5, static_cast<double>(world.jstar - 1));
  return sum;
}

// Sum_{j<=jstar-2} W_j / 2^(j+1) + W_(jstar-1) / 2^(jstar-1): lower bound on
// the single-sample gambler's expected reward over the coin flips.
inline double gambler_bound_formula(const World& world) {
  double sum = 0.0;
  double weight = 0.25;
  for (std::size_t j = 1; j + 1 < world.jstar; ++j) {
    sum += world.w[j - 1].value * weight;
    weight *= 0.5;
  }
  sum += world.w[world.jstar - 2].value * std::pow(0.5, static_cast<double>(world.jstar - 1));
  return sum;
}

namespace detail {

// Per-origin (Y, Z) pairs recovered from the sorted world.
inline void split_world(const World& world, std::vector<TaggedValue>& y,
                        std::vector<TaggedValue>& z) {
  y.assign(world.n, {});
  z.assign(world.n, {});
  std::vector<bool> seen(world.n, false);
  for (std::size_t pos = 0; pos < world.w.size(); ++pos) {
    const std::size_t i = world.origin[pos];
    (seen[i] ? z[i] : y[i]) = world.w[pos];
    seen[i] = true;
  }
}

inline void check_enumerable(const World& world) {
  if (world.n > kEnumerationMaxN)
    throw std::invalid_argument("enumeration supports n <= 24");
}

}  // namespace detail

struct ExactReward {
  double prophet = 0.0;
  double gambler = 0.0;
};

// Average over all 2^n coin outcomes of the prophet's max and of the Single
// Sample reward with realized values arriving in the given order.
inline ExactReward enumerate_exact(const World& world, std::span<const std::size_t> arrival) {
  detail::check_enumerable(world);
  if (arrival.size() != world.n)
    throw std::invalid_argument("enumerate_exact: arrival permutation length mismatch");
  std::vector<bool> hit(world.n, false);
  for (std::size_t i : arrival) {
    if (i >= world.n || hit[i])
      throw std::invalid_argument("enumerate_exact: arrival must be a permutation of 0..n-1");
    hit[i] = true;
  }

  std::vector<TaggedValue> y, z;
  detail::split_world(world, y, z);
  const std::size_t n = world.n;
  double prophet_sum = 0.0, gambler_sum = 0.0;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
    // Bit i set = coin i heads = the larger value arrives as the real draw.
    TaggedValue threshold{-std::numeric_limits<double>::infinity(), 0.0};
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
      const bool heads = (mask >> i) & 1;
      const TaggedValue& real = heads ? y[i] : z[i];
      const TaggedValue& sample = heads ? z[i] : y[i];
      if (sample > threshold) threshold = sample;
      best = std::max(best, real.value);
    }
    prophet_sum += best;
    for (std::size_t i : arrival) {
      const bool heads = (mask >> i) & 1;
      const TaggedValue& real = heads ? y[i] : z[i];
      if (real > threshold) {
        gambler_sum += real.value;
        break;
      }
    }
  }
  const double outcomes = std::pow(2.0, static_cast<double>(n));
  return {prophet_sum / outcomes, gambler_sum / outcomes};
}

// Average over coin outcomes of the smallest realized value strictly above the
// sample maximum (0 when nothing exceeds): the almighty adversary's order.
inline double adversarial_gambler_exact(const World& world) {
  detail::check_enumerable(world);
  std::vector<TaggedValue> y, z;
  detail::split_world(world, y, z);
  const std::size_t n = world.n;
  double sum = 0.0;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
    TaggedValue threshold{-std::numeric_limits<double>::infinity(), 0.0};
    for (std::size_t i = 0; i < n; ++i) {
      const TaggedValue& sample = ((mask >> i) & 1) ? z[i] : y[i];
      if (sample > threshold) threshold = sample;
    }
    TaggedValue worst = TaggedValue::never();
    bool any = false;
    for (std::size_t i = 0; i < n; ++i) {
      const TaggedValue& real = ((mask >> i) & 1) ? y[i] : z[i];
      if (real > threshold && real < worst) {
        worst = real;
        any = true;
      }
    }
    if (any) sum += worst.value;
  }
  return sum / std::pow(2.0, static_cast<double>(n));
}

struct DeferredDraw {
  std::vector<TaggedValue> samples;
  std::vector<TaggedValue> reals;
};

// Assign each origin's pair by its coin: heads sends the larger value to the
// real sequence, tails sends it to the samples.
inline DeferredDraw deferred_assign(std::span<const TaggedValue> y,
                                    std::span<const TaggedValue> z,
                                    const std::vector<bool>& heads) {
  if (y.size() != z.size() || y.size() != heads.size())
    throw std::invalid_argument("deferred_assign: length mismatch");
  DeferredDraw out;
  out.samples.reserve(y.size());
  out.reals.reserve(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    const TaggedValue hi = std::max(y[i], z[i]);
    const TaggedValue lo = std::min(y[i], z[i]);
    out.reals.push_back(heads[i] ? hi : lo);
    out.samples.push_back(heads[i] ? lo : hi);
  }
  return out;
}

// Draw (Y_i, Z_i) per distribution, relabel, and flip one fair coin per index.
inline DeferredDraw deferred_decisions_draw(const Instance& inst, Rng& rng) {
  const std::size_t n = inst.size();
  std::vector<TaggedValue> y(n), z(n);
  std::vector<bool> heads(n);
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = inst.distributions[i].draw(rng);
    z[i] = inst.distributions[i].draw(rng);
    heads[i] = rng.coin();
  }
  return deferred_assign(y, z, heads);
}

// World with Y and Z drawn i.i.d. from d (retrying the probability-zero
// duplicate rejection).
inline World random_world(const Distribution& d, std::size_t n, Rng& rng) {
  for (;;) {
    std::vector<TaggedValue> y(n), z(n);
    for (std::size_t i = 0; i < n; ++i) {
      y[i] = d.draw(rng);
      z[i] = d.draw(rng);
    }
    try {
      return build_world(y, z);
    } catch (const std::invalid_argument&) {
      continue;
    }
  }
}

}  // namespace prophet
