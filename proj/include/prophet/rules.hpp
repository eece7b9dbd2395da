#pragma once

#include <fstream>
#include <optional>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "prophet/distribution.hpp"
#include "prophet/instance_stats.hpp"

namespace prophet {

// Per-step acceptance probabilities p_1 <= ... <= p_n with the clipping
// threshold delta = epsilon^2 / n recorded alongside.
struct Schedule {
  std::vector<double> p;
  double epsilon = 0.0;
  double delta = 0.0;

  std::size_t size() const { return p.size(); }
};

inline Schedule make_schedule(std::vector<double> p, double epsilon) {
  if (p.empty()) throw std::invalid_argument("schedule: need n >= 1");
  if (!(epsilon > 0.0 && epsilon < 1.0))
    throw std::invalid_argument("schedule: epsilon must be in (0, 1)");
  double prev = 0.0;
  for (double x : p) {
    if (!(x >= 0.0 && x <= 1.0))
      throw std::invalid_argument("schedule: probabilities must be in [0, 1]");
    if (x < prev) throw std::invalid_argument("schedule: probabilities must be non-decreasing");
    prev = x;
  }
  Schedule s;
  s.epsilon = epsilon;
  s.delta = epsilon * epsilon / static_cast<double>(p.size());
  s.p = std::move(p);
  return s;
}

inline Schedule make_constant_schedule(std::size_t n, double c, double epsilon) {
  if (n == 0) throw std::invalid_argument("schedule: need n >= 1");
  return make_schedule(std::vector<double>(n, c / static_cast<double>(n)), epsilon);
}

// One probability per line, ascending; '#' comments and blank lines skipped.
inline Schedule load_schedule_file(const std::string& path, double epsilon,
                                   std::optional<std::size_t> expected_n = std::nullopt) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("schedule file: cannot open " + path);
  std::vector<double> p;
  std::string line;
  while (std::getline(in, line)) {
    if (const auto pos = line.find('#'); pos != std::string::npos) line.erase(pos);
    std::istringstream ls(line);
    double x;
    if (ls >> x) {
      p.push_back(x);
      std::string rest;
      if (ls >> rest)
        throw std::invalid_argument("schedule file: one probability per line (" + path + ")");
    }
  }
  if (expected_n && p.size() != *expected_n)
    throw std::invalid_argument("schedule file: expected " + std::to_string(*expected_n) +
                                " entries, got " + std::to_string(p.size()) + " (" + path + ")");
  return make_schedule(std::move(p), epsilon);
}

// Zero out every p_i <= delta (boundary inclusive).
inline Schedule clip_schedule(const Schedule& s) {
  Schedule out = s;
  for (double& x : out.p)
    if (x <= s.delta) x = 0.0;
  return out;
}

// Per-step tagged thresholds; NEVER entries disable acceptance at that step.
struct ThresholdPolicy {
  std::vector<TaggedValue> thresholds;

  std::size_t size() const { return thresholds.size(); }
};

struct RunOutcome {
  double reward = 0.0;
  std::optional<std::size_t> stop_index;  // 0-based; nullopt = no acceptance
};

// Accept the first realized value strictly exceeding its step threshold.
// Every rule in the library executes through this one runner.
inline RunOutcome run_policy(const ThresholdPolicy& policy,
                             std::span<const TaggedValue> realized) {
  if (policy.size() != realized.size())
    throw std::invalid_argument("run_policy: policy and sequence lengths differ");
  for (std::size_t i = 0; i < realized.size(); ++i)
    if (realized[i] > policy.thresholds[i]) return {realized[i].value, i};
  return {0.0, std::nullopt};
}

// Constant policy at the maximum of one offline sample per distribution.
inline ThresholdPolicy single_sample_threshold(std::span<const TaggedValue> samples) {
  if (samples.empty()) throw std::invalid_argument("single_sample_threshold: no samples");
  TaggedValue best = samples[0];
  for (const auto& s : samples)
    if (s > best) best = s;
  return {std::vector<TaggedValue>(samples.size(), best)};
}

// Thresholds at the exact upper p_i-quantiles of D (NEVER where p_i = 0).
inline ThresholdPolicy explicit_cfhov_policy(const Distribution& d, const Schedule& s) {
  ThresholdPolicy policy;
  policy.thresholds.reserve(s.size());
  for (double p : s.p) policy.thresholds.push_back(d.upper_quantile(p));
  return policy;
}

enum class BaselineKind { median_of_max, half_expected_max };

inline ThresholdPolicy baseline_policy(BaselineKind kind, const Instance& inst) {
  TaggedValue t;
  switch (kind) {
    case BaselineKind::median_of_max:
      t = median_of_max(inst);
      break;
    case BaselineKind::half_expected_max:
      t = {0.5 * expected_max(inst), 0.5};
      break;
  }
  return {std::vector<TaggedValue>(inst.size(), t)};
}

}  // namespace prophet
