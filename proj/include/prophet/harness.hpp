#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <thread>
#include <vector>

#include "prophet/distribution.hpp"
#include "prophet/estimation.hpp"
#include "prophet/instance_stats.hpp"
#include "prophet/oracle.hpp"
#include "prophet/rules.hpp"

namespace prophet {

// 99% two-sided normal quantile; 4-standard-error slacks are used for
// statistical acceptance checks throughout.
inline constexpr double kZ99 = 2.5758293035489004;

struct Estimate {
  double mean = 0.0;
  double half_width = 0.0;  // 99% normal-approximation half-width
  std::uint64_t trials = 0;
  std::uint64_t seed = 0;

  double std_error() const { return half_width / kZ99; }
};

namespace stream {
// Distinct stream tags keep numerator/denominator and generator randomness
// independent even under a shared seed.
inline constexpr std::uint64_t prophet = 1;
inline constexpr std::uint64_t rule = 2;
inline constexpr std::uint64_t coupled = 3;
inline constexpr std::uint64_t world = 4;
inline constexpr std::uint64_t instance_gen = 5;
}  // namespace stream

namespace detail {

// Trials are processed in fixed-size blocks and folded in block order, so the
// aggregate is bit-identical for every worker count.
inline constexpr std::uint64_t kTrialBlock = 8192;

template <typename Fn>
inline void run_blocked(std::uint64_t trials, unsigned threads, Fn&& fn) {
  const std::uint64_t nblocks = (trials + kTrialBlock - 1) / kTrialBlock;
  if (threads <= 1 || nblocks <= 1) {
    for (std::uint64_t b = 0; b < nblocks; ++b)
      fn(b, b * kTrialBlock, std::min(trials, (b + 1) * kTrialBlock));
    return;
  }
  std::atomic<std::uint64_t> next{0};
  auto worker = [&] {
    for (;;) {
      const std::uint64_t b = next.fetch_add(1);
      if (b >= nblocks) return;
      fn(b, b * kTrialBlock, std::min(trials, (b + 1) * kTrialBlock));
    }
  };
  std::vector<std::thread> pool;
  const unsigned k = std::min<std::uint64_t>(threads, nblocks);
  pool.reserve(k);
  for (unsigned t = 0; t < k; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
}

struct MeanVar {
  double sum = 0.0;
  double sumsq = 0.0;
  std::uint64_t count = 0;

  void add(double x) {
    sum += x;
    sumsq += x * x;
    ++count;
  }
};

inline Estimate fold_blocks(const std::vector<MeanVar>& blocks, std::uint64_t seed) {
  double sum = 0.0, sumsq = 0.0;
  std::uint64_t n = 0;
  for (const auto& b : blocks) {
    sum += b.sum;
    sumsq += b.sumsq;
    n += b.count;
  }
  Estimate e;
  e.trials = n;
  e.seed = seed;
  e.mean = sum / static_cast<double>(n);
  if (n >= 2) {
    const double var =
        std::max(0.0, (sumsq - sum * e.mean) / static_cast<double>(n - 1));
    e.half_width = kZ99 * std::sqrt(var / static_cast<double>(n));
  }
  return e;
}

}  // namespace detail

// Monte Carlo estimate of E[max_i X_i].
inline Estimate mc_prophet(const Instance& inst, std::uint64_t trials, std::uint64_t seed,
                           unsigned threads = 1) {
  if (trials == 0) throw std::invalid_argument("mc_prophet: need trials >= 1");
  const std::uint64_t nblocks = (trials + detail::kTrialBlock - 1) / detail::kTrialBlock;
  std::vector<detail::MeanVar> blocks(nblocks);
  detail::run_blocked(trials, threads, [&](std::uint64_t b, std::uint64_t lo, std::uint64_t hi) {
    for (std::uint64_t k = lo; k < hi; ++k) {
      Rng rng = Rng::for_trial(seed, stream::prophet, k);
      double best = -std::numeric_limits<double>::infinity();
      for (const auto& d : inst.distributions) best = std::max(best, d.draw(rng).value);
      blocks[b].add(best);
    }
  });
  return detail::fold_blocks(blocks, seed);
}

enum class RuleKind {
  single_sample,
  explicit_cfhov,
  samples_cfhov,
  median_of_max,
  half_expected_max
};

enum class PoolMode { auto_select, explicit_pool, implicit_pool };

// Explicit pools cost m draws plus a sort per trial; beyond this many total
// draws the order-statistic (implicit) sampler takes over under auto_select.
inline constexpr double kImplicitPoolThreshold = 2e8;

struct RuleSpec {
  RuleKind kind = RuleKind::single_sample;
  std::optional<Schedule> schedule;  // explicit-cfhov / samples-cfhov
  double epsilon = 0.0;              // samples-cfhov (pool sizing)
  std::uint64_t m = 0;               // samples-cfhov; 0 = required_samples(n, epsilon)
  RankRounding rank_rounding = RankRounding::ceil;
  PoolMode pool_mode = PoolMode::auto_select;
};

namespace detail {

// Order-statistic plan for drawing Samples-CFHOV thresholds without
// materializing the pool: the tagged CDF of a draw is uniform on [0, 1], so
// the tail of the k-th highest of m samples is the k-th smallest of m
// uniforms, and the needed ranks follow a joint Beta recursion. Identical in
// law to an explicit pool, at O(distinct ranks) per trial.
struct ImplicitRankPlan {
  std::uint64_t m = 0;
  std::vector<std::uint64_t> distinct;    // ascending ranks
  std::vector<std::ptrdiff_t> step_rank;  // per step: index into distinct, -1 = NEVER
};

inline ImplicitRankPlan make_rank_plan(const Schedule& clipped, double epsilon,
                                       std::uint64_t m, RankRounding mode) {
  ImplicitRankPlan plan;
  plan.m = m;
  plan.step_rank.reserve(clipped.size());
  std::vector<std::uint64_t> ranks;
  for (double p : clipped.p) {
    if (p == 0.0) {
      plan.step_rank.push_back(-1);
      continue;
    }
    const double shaded = round_down_power(p, epsilon).shaded;
    const std::uint64_t k = order_statistic_rank(shaded, m, mode);
    if (k > m) throw std::invalid_argument("implicit pool: rank exceeds m");
    ranks.push_back(k);
    plan.step_rank.push_back(0);  // filled below once ranks are deduped
  }
  std::vector<std::uint64_t> sorted = ranks;
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  plan.distinct = sorted;
  std::size_t next = 0;
  for (std::size_t i = 0; i < clipped.size(); ++i) {
    if (plan.step_rank[i] < 0) continue;
    const std::uint64_t k = ranks[next++];
    plan.step_rank[i] = static_cast<std::ptrdiff_t>(
        std::lower_bound(sorted.begin(), sorted.end(), k) - sorted.begin());
  }
  return plan;
}

// Joint draw of the pool tails at the planned ranks (ascending), using the
// renewal property of uniform order statistics.
inline void sample_plan_tails(const ImplicitRankPlan& plan, Rng& rng,
                              std::vector<double>& tails) {
  tails.clear();
  tails.reserve(plan.distinct.size());
  std::uint64_t prev_k = 0;
  double prev_q = 0.0;
  for (std::uint64_t k : plan.distinct) {
    const double a = static_cast<double>(k - prev_k);
    const double b = static_cast<double>(plan.m - k + 1);
    double q = prev_q + (1.0 - prev_q) * rng.beta(a, b);
    q = std::clamp(q, std::numeric_limits<double>::min(), 1.0);
    tails.push_back(q);
    prev_k = k;
    prev_q = q;
  }
}

inline ThresholdPolicy policy_from_plan(const Distribution& d, const ImplicitRankPlan& plan,
                                        const std::vector<double>& tails) {
  ThresholdPolicy policy;
  policy.thresholds.reserve(plan.step_rank.size());
  std::vector<TaggedValue> cache(tails.size());
  for (std::size_t r = 0; r < tails.size(); ++r) cache[r] = d.upper_quantile(tails[r]);
  for (std::ptrdiff_t idx : plan.step_rank)
    policy.thresholds.push_back(idx < 0 ? TaggedValue::never()
                                        : cache[static_cast<std::size_t>(idx)]);
  return policy;
}

inline PoolMode resolve_pool_mode(PoolMode mode, std::uint64_t m, std::uint64_t trials) {
  if (mode != PoolMode::auto_select) return mode;
  return static_cast<double>(m) * static_cast<double>(trials) > kImplicitPoolThreshold
             ? PoolMode::implicit_pool
             : PoolMode::explicit_pool;
}

}  // namespace detail

// Monte Carlo estimate of a stopping rule's expected reward. Single Sample
// draws fresh offline samples per trial; Samples-CFHOV draws a fresh pool per
// trial; the remaining rules use a fixed precomputed policy.
inline Estimate mc_rule(const RuleSpec& spec, const Instance& inst, std::uint64_t trials,
                        std::uint64_t seed, unsigned threads = 1) {
  if (trials == 0) throw std::invalid_argument("mc_rule: need trials >= 1");
  if (inst.adversary == Adversary::almighty)
    throw std::invalid_argument(
        "mc_rule: the almighty adversary is exact-only (see the oracle verifiers)");
  const std::size_t n = inst.size();

  std::optional<ThresholdPolicy> fixed;
  std::optional<Schedule> clipped;
  std::uint64_t m = 0;
  PoolMode mode = PoolMode::explicit_pool;
  std::optional<detail::ImplicitRankPlan> plan;

  switch (spec.kind) {
    case RuleKind::single_sample:
      break;
    case RuleKind::median_of_max:
      fixed = baseline_policy(BaselineKind::median_of_max, inst);
      break;
    case RuleKind::half_expected_max:
      fixed = baseline_policy(BaselineKind::half_expected_max, inst);
      break;
    case RuleKind::explicit_cfhov:
    case RuleKind::samples_cfhov: {
      if (!spec.schedule) throw std::invalid_argument("mc_rule: rule needs a schedule");
      if (spec.schedule->size() != n)
        throw std::invalid_argument("mc_rule: schedule length must match the instance");
      if (!is_iid(inst))
        throw std::invalid_argument("mc_rule: CFHOV rules need an i.i.d. instance");
      clipped = clip_schedule(*spec.schedule);
      if (spec.kind == RuleKind::explicit_cfhov) {
        fixed = explicit_cfhov_policy(inst.distributions.front(), *clipped);
      } else {
        m = spec.m != 0 ? spec.m : required_samples(n, spec.epsilon);
        mode = detail::resolve_pool_mode(spec.pool_mode, m, trials);
        if (mode == PoolMode::implicit_pool)
          plan = detail::make_rank_plan(*clipped, spec.epsilon, m, spec.rank_rounding);
      }
      break;
    }
  }

  const Distribution& d0 = inst.distributions.front();
  const std::uint64_t nblocks = (trials + detail::kTrialBlock - 1) / detail::kTrialBlock;
  std::vector<detail::MeanVar> blocks(nblocks);
  detail::run_blocked(trials, threads, [&](std::uint64_t b, std::uint64_t lo, std::uint64_t hi) {
    std::vector<TaggedValue> realized(n);
    std::vector<TaggedValue> samples(n);
    std::vector<double> tails;
    for (std::uint64_t k = lo; k < hi; ++k) {
      Rng rng = Rng::for_trial(seed, stream::rule, k);
      RunOutcome out;
      switch (spec.kind) {
        case RuleKind::single_sample: {
          for (std::size_t i = 0; i < n; ++i) samples[i] = inst.distributions[i].draw(rng);
          const ThresholdPolicy policy = single_sample_threshold(samples);
          for (std::size_t i = 0; i < n; ++i) realized[i] = inst.distributions[i].draw(rng);
          out = run_policy(policy, realized);
          break;
        }
        case RuleKind::samples_cfhov: {
          ThresholdPolicy policy;
          if (plan) {
            detail::sample_plan_tails(*plan, rng, tails);
            policy = detail::policy_from_plan(d0, *plan, tails);
          } else {
            const SamplePool pool = SamplePool::draw(d0, m, rng);
            policy = samples_cfhov_policy(pool, *clipped, spec.epsilon, spec.rank_rounding);
          }
          for (std::size_t i = 0; i < n; ++i) realized[i] = d0.draw(rng);
          out = run_policy(policy, realized);
          break;
        }
        default: {
          for (std::size_t i = 0; i < n; ++i) realized[i] = inst.distributions[i].draw(rng);
          out = run_policy(*fixed, realized);
          break;
        }
      }
      blocks[b].add(out.reward);
    }
  });
  return detail::fold_blocks(blocks, seed);
}

// The paper's tight two-step instance: X_1 = 1, X_2 = 1/eps w.p. eps else 0.
inline Instance hard_instance(double epsilon) {
  if (!(epsilon > 0.0 && epsilon < 1.0))
    throw std::domain_error("hard_instance: epsilon must be in (0, 1)");
  std::vector<Distribution> ds;
  ds.push_back(Distribution::point_mass(1.0));
  ds.push_back(Distribution::finite_discrete({1.0 / epsilon, 0.0}, {epsilon, 1.0 - epsilon}));
  return Instance(std::move(ds));
}

// Random mixed-family instance with n in 1..max_n; values kept non-negative.
inline Instance random_instance(Rng& rng, std::size_t max_n) {
  if (max_n == 0) throw std::invalid_argument("random_instance: need max_n >= 1");
  const std::size_t n = 1 + static_cast<std::size_t>(rng.below(max_n));
  std::vector<Distribution> ds;
  ds.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    switch (rng.below(4)) {
      case 0: {
        const double lo = 2.0 * rng.uniform01();
        ds.push_back(Distribution::uniform(lo, lo + 0.25 + 2.75 * rng.uniform01()));
        break;
      }
      case 1:
        ds.push_back(Distribution::exponential(0.3 + 2.7 * rng.uniform01()));
        break;
      case 2:
        ds.push_back(Distribution::point_mass(0.1 + 2.9 * rng.uniform01()));
        break;
      default: {
        const std::size_t atoms = 2 + static_cast<std::size_t>(rng.below(3));
        std::vector<double> values, weights;
        for (std::size_t a = 0; a < atoms; ++a) {
          values.push_back(4.0 * rng.uniform01());
          weights.push_back(0.05 + rng.uniform01());
        }
        std::sort(values.begin(), values.end());
        if (std::unique(values.begin(), values.end()) != values.end()) {
          --i;  // probability-zero duplicate; redraw this slot
          continue;
        }
        double sum = 0.0;
        for (double w : weights) sum += w;
        for (double& w : weights) w /= sum;
        ds.push_back(Distribution::finite_discrete(std::move(values), std::move(weights)));
        break;
      }
    }
  }
  return Instance(std::move(ds));
}

struct RatioReport {
  Estimate rule;
  Estimate prophet;
  Estimate ratio;  // delta-method half-width
};

inline RatioReport ratio_report(const RuleSpec& spec, const Instance& inst,
                                std::uint64_t trials, std::uint64_t seed,
                                unsigned threads = 1) {
  RatioReport report;
  report.rule = mc_rule(spec, inst, trials, seed, threads);
  report.prophet = mc_prophet(inst, trials, seed, threads);
  if (!(report.prophet.mean > 0.0))
    throw std::domain_error("ratio_report: prophet mean must be positive");
  const double r = report.rule.mean / report.prophet.mean;
  const double rel_a = report.rule.std_error() / report.rule.mean;
  const double rel_b = report.prophet.std_error() / report.prophet.mean;
  const double se =
      std::abs(r) * std::sqrt((report.rule.mean == 0.0 ? 0.0 : rel_a * rel_a) + rel_b * rel_b);
  report.ratio = {r, kZ99 * se, trials, seed};
  return report;
}

// One coupled draw: a fresh Samples-CFHOV policy and one shared realized
// sequence, run under both rules.
struct CoupledTrial {
  std::optional<std::size_t> t1;  // Explicit-CFHOV stop (0-based)
  std::optional<std::size_t> t2;  // Samples-CFHOV stop
  double reward1 = 0.0;
  double reward2 = 0.0;
  bool good = false;  // thresholds satisfied the per-step tail bracket
};

struct GridPoint {
  double v = 0.0;
  double exceed1 = 0.0;      // Pr[reward1 > v | good]
  double exceed2 = 0.0;      // Pr[reward2 > v | good]
  double mean_diff = 0.0;    // mean of 1[r2>v] - 1[r1>v]/(1+eps)^3 over good trials
  double diff_slack = 0.0;   // 4 standard errors of mean_diff
  bool pass = true;
};

struct CoupledConfig {
  Distribution d;
  Schedule schedule;
  double epsilon = 0.0;
  std::uint64_t m = 0;  // 0 = required_samples(n, epsilon)
  std::uint64_t trials = 0;
  std::uint64_t seed = 0;
  unsigned threads = 1;
  PoolMode pool_mode = PoolMode::auto_select;
  RankRounding rank_rounding = RankRounding::ceil;
  std::size_t grid_cells = 200;
};

struct CoupledRun {
  std::vector<CoupledTrial> trials;
  std::uint64_t m = 0;
  PoolMode pool_mode = PoolMode::explicit_pool;
  std::uint64_t good_count = 0;
  std::uint64_t early_stop_violations = 0;  // good trials with t2 < t1
  std::vector<GridPoint> grid;
  bool dominance_pass = true;   // every grid point
  Estimate explicit_reward;     // all trials
  Estimate samples_reward;      // all trials
  double theorem4_factor = 0.0; // (1-eps)/(1+eps)^3
  double theorem4_margin = 0.0; // mean(r2 - factor*r1) + 4 SE
  bool theorem4_pass = true;
  double good_mean1 = 0.0;      // mean rewards over good trials
  double good_mean2 = 0.0;
  double integral_error1 = 0.0; // |good mean - area under exceedance curve|
  double integral_error2 = 0.0;
  double integral_tolerance = 0.0;
  bool integral_pass = true;
};

inline CoupledRun coupled_cfhov(const CoupledConfig& cfg) {
  if (cfg.trials == 0) throw std::invalid_argument("coupled_cfhov: need trials >= 1");
  const std::size_t n = cfg.schedule.size();
  const Schedule clipped = clip_schedule(cfg.schedule);
  const ThresholdPolicy sigma = explicit_cfhov_policy(cfg.d, clipped);

  CoupledRun run;
  run.m = cfg.m != 0 ? cfg.m : required_samples(n, cfg.epsilon);
  run.pool_mode = detail::resolve_pool_mode(cfg.pool_mode, run.m, cfg.trials);
  std::optional<detail::ImplicitRankPlan> plan;
  if (run.pool_mode == PoolMode::implicit_pool)
    plan = detail::make_rank_plan(clipped, cfg.epsilon, run.m, cfg.rank_rounding);

  run.trials.resize(cfg.trials);
  detail::run_blocked(
      cfg.trials, cfg.threads, [&](std::uint64_t, std::uint64_t lo, std::uint64_t hi) {
        std::vector<TaggedValue> realized(n);
        std::vector<double> tails;
        for (std::uint64_t k = lo; k < hi; ++k) {
          Rng rng = Rng::for_trial(cfg.seed, stream::coupled, k);
          ThresholdPolicy tau;
          if (plan) {
            detail::sample_plan_tails(*plan, rng, tails);
            tau = detail::policy_from_plan(cfg.d, *plan, tails);
          } else {
            const SamplePool pool = SamplePool::draw(cfg.d, run.m, rng);
            tau = samples_cfhov_policy(pool, clipped, cfg.epsilon, cfg.rank_rounding);
          }
          const bool good = goodness_check(cfg.d, tau, clipped, cfg.epsilon).overall;
          for (std::size_t i = 0; i < n; ++i) realized[i] = cfg.d.draw(rng);
          const RunOutcome o1 = run_policy(sigma, realized);
          const RunOutcome o2 = run_policy(tau, realized);
          run.trials[k] = {o1.stop_index, o2.stop_index, o1.reward, o2.reward, good};
        }
      });

  // Aggregation is a deterministic single-threaded fold in trial order.
  const double cube = (1.0 + cfg.epsilon) * (1.0 + cfg.epsilon) * (1.0 + cfg.epsilon);
  double vmax = 0.0;
  double good_sum1 = 0.0, good_sum2 = 0.0;
  detail::MeanVar all1, all2, gap;
  run.theorem4_factor = (1.0 - cfg.epsilon) / cube;
  for (const auto& t : run.trials) {
    all1.add(t.reward1);
    all2.add(t.reward2);
    gap.add(t.reward2 - run.theorem4_factor * t.reward1);
    if (!t.good) continue;
    ++run.good_count;
    good_sum1 += t.reward1;
    good_sum2 += t.reward2;
    vmax = std::max({vmax, t.reward1, t.reward2});
    const std::size_t o1 = t.t1.value_or(n);
    const std::size_t o2 = t.t2.value_or(n);
    if (o2 < o1) ++run.early_stop_violations;
  }
  run.explicit_reward = detail::fold_blocks({all1}, cfg.seed);
  run.samples_reward = detail::fold_blocks({all2}, cfg.seed);

  {
    const Estimate g = detail::fold_blocks({gap}, cfg.seed);
    run.theorem4_margin = g.mean + 4.0 * g.std_error();
    run.theorem4_pass = run.theorem4_margin >= 0.0;
  }

  const std::size_t cells = std::max<std::size_t>(cfg.grid_cells, 1);
  run.grid.assign(cells + 1, {});
  if (run.good_count > 0) {
    const double g = static_cast<double>(run.good_count);
    std::vector<double> vs(cells + 1);
    for (std::size_t j = 0; j <= cells; ++j)
      vs[j] = vmax * static_cast<double>(j) / static_cast<double>(cells);
    std::vector<double> dsum(cells + 1, 0.0), dsumsq(cells + 1, 0.0);
    std::vector<double> c1(cells + 1, 0.0), c2(cells + 1, 0.0);
    for (const auto& t : run.trials) {
      if (!t.good) continue;
      for (std::size_t j = 0; j <= cells; ++j) {
        const double i1 = t.reward1 > vs[j] ? 1.0 : 0.0;
        const double i2 = t.reward2 > vs[j] ? 1.0 : 0.0;
        const double diff = i2 - i1 / cube;
        c1[j] += i1;
        c2[j] += i2;
        dsum[j] += diff;
        dsumsq[j] += diff * diff;
      }
    }
    for (std::size_t j = 0; j <= cells; ++j) {
      GridPoint& pt = run.grid[j];
      pt.v = vs[j];
      pt.exceed1 = c1[j] / g;
      pt.exceed2 = c2[j] / g;
      pt.mean_diff = dsum[j] / g;
      if (run.good_count >= 2) {
        const double var = std::max(
            0.0, (dsumsq[j] - dsum[j] * pt.mean_diff) / static_cast<double>(run.good_count - 1));
        pt.diff_slack = 4.0 * std::sqrt(var / g);
      }
      pt.pass = pt.mean_diff >= -pt.diff_slack;
      run.dominance_pass = run.dominance_pass && pt.pass;
    }

    run.good_mean1 = good_sum1 / g;
    run.good_mean2 = good_sum2 / g;
    double area1 = 0.0, area2 = 0.0;
    for (std::size_t j = 0; j < cells; ++j) {
      const double h = run.grid[j + 1].v - run.grid[j].v;
      area1 += 0.5 * h * (run.grid[j].exceed1 + run.grid[j + 1].exceed1);
      area2 += 0.5 * h * (run.grid[j].exceed2 + run.grid[j + 1].exceed2);
    }
    run.integral_error1 = std::abs(run.good_mean1 - area1);
    run.integral_error2 = std::abs(run.good_mean2 - area2);
    run.integral_tolerance = vmax / static_cast<double>(cells) + 1e-9;
    run.integral_pass = run.integral_error1 <= run.integral_tolerance &&
                        run.integral_error2 <= run.integral_tolerance;
  }
  return run;
}

}  // namespace prophet
