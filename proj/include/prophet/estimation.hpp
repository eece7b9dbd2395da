#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "prophet/distribution.hpp"
#include "prophet/rules.hpp"

namespace prophet {

// p rounded down to an integer power of (1+eps), then shaded one more factor.
struct RoundedQuantile {
  double original = 0.0;
  double rounded = 0.0;  // largest (1+eps)^-k <= p, k >= 1
  double shaded = 0.0;   // rounded / (1+eps)
};

inline RoundedQuantile round_down_power(double p, double epsilon) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::domain_error("round_down_power: p must be in [0, 1]");
  if (!(epsilon > 0.0 && epsilon < 1.0))
    throw std::domain_error("round_down_power: epsilon must be in (0, 1)");
  if (p == 0.0) return {0.0, 0.0, 0.0};
  const double base = 1.0 + epsilon;
  long long k = std::max<long long>(
      1, static_cast<long long>(std::ceil(-std::log(p) / std::log(base) - 1e-12)));
  while (std::pow(base, static_cast<double>(-k)) > p) ++k;
  while (k > 1 && std::pow(base, static_cast<double>(-(k - 1))) <= p) --k;
  const double rounded = std::pow(base, static_cast<double>(-k));
  return {p, rounded, rounded / base};
}

// i.i.d. samples from one distribution, kept sorted descending in tagged order.
struct SamplePool {
  std::vector<TaggedValue> samples;

  std::size_t size() const { return samples.size(); }

  static SamplePool from_values(std::vector<TaggedValue> values) {
    if (values.empty()) throw std::invalid_argument("sample pool: need m >= 1");
    std::sort(values.begin(), values.end(),
              [](const TaggedValue& a, const TaggedValue& b) { return a > b; });
    return {std::move(values)};
  }

  static SamplePool draw(const Distribution& d, std::size_t m, Rng& rng) {
    std::vector<TaggedValue> values;
    values.reserve(m);
    for (std::size_t i = 0; i < m; ++i) values.push_back(d.draw(rng));
    return from_values(std::move(values));
  }
};

enum class RankRounding { ceil, floor };

// Rank of the order statistic targeted by a shaded quantile. The ceiling
// choice keeps the rank >= 1; floor is available for sensitivity runs.
inline std::uint64_t order_statistic_rank(double shaded, std::uint64_t m, RankRounding mode) {
  const double r = shaded * static_cast<double>(m);
  std::uint64_t k = mode == RankRounding::ceil ? static_cast<std::uint64_t>(std::ceil(r))
                                               : static_cast<std::uint64_t>(std::floor(r));
  return std::max<std::uint64_t>(k, 1);
}

// The (shaded * m)-th highest sample; NEVER when shaded = 0.
inline TaggedValue order_statistic_threshold(const SamplePool& pool, double shaded,
                                             RankRounding mode = RankRounding::ceil) {
  if (shaded == 0.0) return TaggedValue::never();
  if (!(shaded > 0.0 && shaded <= 1.0))
    throw std::invalid_argument("order_statistic_threshold: shaded must be in [0, 1]");
  const std::uint64_t k = order_statistic_rank(shaded, pool.size(), mode);
  if (k > pool.size())
    throw std::invalid_argument("order_statistic_threshold: rank exceeds pool size");
  return pool.samples[k - 1];
}

// m = ceil(12 ln(1/eps) / (eps^3 delta)) with delta = eps^2 / n.
inline std::uint64_t required_samples(std::uint64_t n, double epsilon) {
  if (n == 0) throw std::domain_error("required_samples: need n >= 1");
  if (!(epsilon > 0.0 && epsilon < 1.0))
    throw std::domain_error("required_samples: epsilon must be in (0, 1)");
  const double m =
      12.0 * std::log(1.0 / epsilon) * static_cast<double>(n) / std::pow(epsilon, 5);
  return static_cast<std::uint64_t>(std::ceil(m));
}

// Sample-based thresholds: round each p_i down to a power of (1+eps), shade by
// one more factor, then take the corresponding highest-order statistic.
inline ThresholdPolicy samples_cfhov_policy(const SamplePool& pool, const Schedule& s,
                                            double epsilon,
                                            RankRounding mode = RankRounding::ceil) {
  ThresholdPolicy policy;
  policy.thresholds.reserve(s.size());
  for (double p : s.p) {
    if (p == 0.0) {
      policy.thresholds.push_back(TaggedValue::never());
    } else {
      policy.thresholds.push_back(
          order_statistic_threshold(pool, round_down_power(p, epsilon).shaded, mode));
    }
  }
  return policy;
}

struct GoodnessReport {
  std::vector<bool> per_step;
  bool overall = true;
};

// Checks p_i/(1+eps)^3 <= tail(tau_i) <= p_i per step (both sides non-strict,
// with a 1e-12 numeric slack so exact-boundary thresholds count as good).
inline GoodnessReport goodness_check(const Distribution& d, const ThresholdPolicy& policy,
                                     const Schedule& s, double epsilon) {
  if (policy.size() != s.size())
    throw std::invalid_argument("goodness_check: policy and schedule lengths differ");
  constexpr double kSlack = 1e-12;
  const double cube = (1.0 + epsilon) * (1.0 + epsilon) * (1.0 + epsilon);
  GoodnessReport report;
  report.per_step.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double t = d.tail(policy.thresholds[i]);
    const bool ok = t >= s.p[i] / cube - kSlack && t <= s.p[i] + kSlack;
    report.per_step.push_back(ok);
    report.overall = report.overall && ok;
  }
  return report;
}

}  // namespace prophet
