#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <string>
#include <vector>

#include <json.hpp>

#include "prophet/config.hpp"
#include "prophet/harness.hpp"

namespace prophet {

using json = nlohmann::json;

namespace detail {

inline std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header)
      : out_(path) {
    if (!out_) throw std::runtime_error("cannot open CSV output: " + path.string());
    write(header);
  }

  void row(const std::vector<std::string>& cells) { write(cells); }

  static std::string num(double v) { return fmt17(v); }
  static std::string num(std::uint64_t v) { return std::to_string(v); }
  static std::string flag(bool b) { return b ? "1" : "0"; }

 private:
  void write(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out_ << ',';
      out_ << cells[i];
    }
    out_ << '\n';
    if (!out_) throw std::runtime_error("CSV write failed");
  }

  std::ofstream out_;
};

struct CheckList {
  json items = json::array();
  bool all_pass = true;

  void add(const std::string& name, bool pass, const std::string& detail) {
    items.push_back({{"name", name}, {"pass", pass}, {"detail", detail}});
    all_pass = all_pass && pass;
  }
};

inline std::uint64_t instance_seed(std::uint64_t seed, std::uint64_t index) {
  return splitmix64(seed + 0x9e3779b97f4a7c15ull * (index + 1));
}

inline const char* pool_mode_name(PoolMode m) {
  switch (m) {
    case PoolMode::auto_select: return "auto";
    case PoolMode::explicit_pool: return "explicit";
    case PoolMode::implicit_pool: return "implicit";
  }
  return "?";
}

}  // namespace detail

struct ExperimentResult {
  int exit_code = 0;
  json summary;
  std::filesystem::path csv_path;
  std::filesystem::path summary_path;
};

namespace detail {

inline json config_echo(const ExperimentConfig& cfg) {
  json echo;
  echo["experiment"] = to_string(cfg.kind);
  echo["seed"] = cfg.seed;
  echo["threads"] = cfg.threads;
  if (cfg.distribution) echo["distribution"] = cfg.distribution->describe();
  if (cfg.instance) {
    if (cfg.instance->suite_count > 0) {
      echo["instance"] = "random(" + std::to_string(cfg.instance->suite_count) + "," +
                         std::to_string(cfg.instance->suite_max_n) + ")";
    } else {
      json ds = json::array();
      for (const auto& d : cfg.instance->instance->distributions) ds.push_back(d.describe());
      echo["instance"] = cfg.instance->text;
      echo["instance_distributions"] = ds;
    }
  }
  if (cfg.rule) echo["rule"] = to_string(*cfg.rule);
  if (cfg.n > 0) echo["n"] = cfg.n;
  if (cfg.n_max > 0) echo["n_max"] = cfg.n_max;
  if (cfg.epsilon_set) echo["epsilon"] = cfg.epsilon;
  if (cfg.schedule) {
    echo["schedule"] = cfg.schedule->text;
    if (cfg.schedule->kind == ScheduleSpec::Kind::file)
      echo["schedule_probabilities"] = cfg.schedule->file_probs;
  }
  if (cfg.trials > 0) echo["trials"] = cfg.trials;
  if (cfg.worlds > 0) echo["worlds"] = cfg.worlds;
  if (cfg.pools > 0) echo["pools"] = cfg.pools;
  if (cfg.min_ratio) echo["min_ratio"] = *cfg.min_ratio;
  echo["rank_rounding"] = cfg.rank_rounding == RankRounding::ceil ? "ceil" : "floor";
  return echo;
}

inline json estimate_json(const Estimate& e) {
  return {{"mean", e.mean},
          {"half_width_99", e.half_width},
          {"std_error", e.std_error()},
          {"trials", e.trials}};
}

// --- oracle-sweep: formula-vs-enumeration verification over random worlds ---

inline json run_oracle_sweep(const ExperimentConfig& cfg, CsvWriter& csv, CheckList& checks) {
  constexpr double kTol = 1e-12;
  double max_prop1_err = 0.0;
  double min_prop2_gap = std::numeric_limits<double>::infinity();
  double min_chain_gap = std::numeric_limits<double>::infinity();
  double min_half_gap = std::numeric_limits<double>::infinity();
  double min_adv_gap = std::numeric_limits<double>::infinity();
  double min_adv_vs_fixed = std::numeric_limits<double>::infinity();

  for (std::uint64_t w = 0; w < cfg.worlds; ++w) {
    Rng rng = Rng::for_trial(cfg.seed, stream::world, w);
    const std::size_t n = 1 + static_cast<std::size_t>(rng.below(cfg.n_max));
    const World world = random_world(*cfg.distribution, n, rng);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    const ExactReward exact = enumerate_exact(world, order);
    const double formula = prophet_formula(world);
    const double bound = gambler_bound_formula(world);
    const double adv = adversarial_gambler_exact(world);

    max_prop1_err = std::max(max_prop1_err, std::abs(formula - exact.prophet));
    min_prop2_gap = std::min(min_prop2_gap, exact.gambler - bound);
    min_chain_gap = std::min(min_chain_gap, bound - 0.5 * formula);
    min_half_gap = std::min(min_half_gap, exact.gambler - 0.5 * exact.prophet);
    min_adv_gap = std::min(min_adv_gap, adv - 0.5 * formula);
    min_adv_vs_fixed = std::min(min_adv_vs_fixed, exact.gambler - adv);

    csv.row({CsvWriter::num(w), CsvWriter::num(world.n), CsvWriter::num(world.jstar),
             CsvWriter::num(formula), CsvWriter::num(exact.prophet), CsvWriter::num(bound),
             CsvWriter::num(exact.gambler), CsvWriter::num(adv)});
  }

  checks.add("prop1-equality", max_prop1_err <= kTol,
             "max |prophet_formula - enumeration| = " + fmt17(max_prop1_err));
  checks.add("prop2-bound-fixed-order", min_prop2_gap >= -kTol,
             "min (gambler_exact - gambler_bound) = " + fmt17(min_prop2_gap));
  checks.add("thm1-bound-chain", min_chain_gap >= -kTol,
             "min (gambler_bound - prophet_formula/2) = " + fmt17(min_chain_gap));
  checks.add("thm1-half-fixed-order", min_half_gap >= -kTol,
             "min (gambler_exact - prophet_exact/2) = " + fmt17(min_half_gap));
  checks.add("almighty-half", min_adv_gap >= -kTol,
             "min (adversarial_gambler - prophet_formula/2) = " + fmt17(min_adv_gap));
  checks.add("almighty-below-fixed-order", min_adv_vs_fixed >= -kTol,
             "min (gambler_exact - adversarial_gambler) = " + fmt17(min_adv_vs_fixed));

  return {{"worlds", cfg.worlds},
          {"max_prop1_error", max_prop1_err},
          {"min_prop2_gap", min_prop2_gap},
          {"min_adversarial_gap", min_adv_gap}};
}

// --- verify-single-sample: every arrival permutation, n <= 6 ---

inline json run_verify_single_sample(const ExperimentConfig& cfg, CsvWriter& csv,
                                     CheckList& checks) {
  constexpr double kTol = 1e-12;
  double min_bound_gap = std::numeric_limits<double>::infinity();
  double min_half_gap = std::numeric_limits<double>::infinity();
  double min_adv_gap = std::numeric_limits<double>::infinity();
  double min_ratio = std::numeric_limits<double>::infinity();
  double max_prop1_err = 0.0;

  for (std::uint64_t w = 0; w < cfg.worlds; ++w) {
    Rng rng = Rng::for_trial(cfg.seed, stream::world, w);
    const std::size_t n = 1 + static_cast<std::size_t>(rng.below(cfg.n_max));
    const World world = random_world(*cfg.distribution, n, rng);
    const double formula = prophet_formula(world);
    const double bound = gambler_bound_formula(world);
    const double adv = adversarial_gambler_exact(world);
    min_adv_gap = std::min(min_adv_gap, adv - 0.5 * formula);

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    double prophet = 0.0;
    double world_min_gambler = std::numeric_limits<double>::infinity();
    do {
      const ExactReward exact = enumerate_exact(world, order);
      prophet = exact.prophet;
      world_min_gambler = std::min(world_min_gambler, exact.gambler);
      min_bound_gap = std::min(min_bound_gap, exact.gambler - bound);
      min_half_gap = std::min(min_half_gap, exact.gambler - 0.5 * exact.prophet);
    } while (std::next_permutation(order.begin(), order.end()));

    max_prop1_err = std::max(max_prop1_err, std::abs(formula - prophet));
    const double ratio = prophet > 0.0 ? world_min_gambler / prophet
                                       : std::numeric_limits<double>::infinity();
    min_ratio = std::min(min_ratio, ratio);

    csv.row({CsvWriter::num(w), CsvWriter::num(world.n), CsvWriter::num(world.jstar),
             CsvWriter::num(prophet), CsvWriter::num(world_min_gambler), CsvWriter::num(bound),
             CsvWriter::num(adv), CsvWriter::num(ratio)});
  }

  checks.add("prop1-equality", max_prop1_err <= kTol,
             "max |prophet_formula - enumeration| = " + fmt17(max_prop1_err));
  checks.add("prop2-bound-all-orders", min_bound_gap >= -kTol,
             "min over worlds+orders of (gambler - bound) = " + fmt17(min_bound_gap));
  checks.add("thm1-half-all-orders", min_half_gap >= -kTol,
             "min over worlds+orders of (gambler - prophet/2) = " + fmt17(min_half_gap));
  checks.add("almighty-half", min_adv_gap >= -kTol,
             "min (adversarial_gambler - prophet_formula/2) = " + fmt17(min_adv_gap));

  return {{"worlds", cfg.worlds}, {"min_gambler_over_prophet", min_ratio}};
}

// --- ratio: Monte Carlo competitive-ratio report ---

inline RuleSpec rule_spec_for(const ExperimentConfig& cfg, std::size_t n) {
  RuleSpec spec;
  spec.kind = *cfg.rule;
  spec.epsilon = cfg.epsilon;
  spec.m = cfg.m;
  spec.rank_rounding = cfg.rank_rounding;
  spec.pool_mode = cfg.pool_mode;
  if (cfg.schedule) spec.schedule = cfg.schedule->build(n, cfg.epsilon);
  return spec;
}

inline json run_ratio(const ExperimentConfig& cfg, CsvWriter& csv, CheckList& checks) {
  struct Entry {
    Instance inst;
    std::uint64_t seed;
  };
  std::vector<Entry> entries;
  if (cfg.instance->suite_count > 0) {
    for (std::uint64_t i = 0; i < cfg.instance->suite_count; ++i) {
      Rng rng = Rng::for_trial(cfg.seed, stream::instance_gen, i);
      entries.push_back({random_instance(rng, cfg.instance->suite_max_n),
                         instance_seed(cfg.seed, i)});
    }
  } else {
    entries.push_back({*cfg.instance->instance, cfg.seed});
  }

  double min_ratio_observed = std::numeric_limits<double>::infinity();
  double max_prophet_err = 0.0;
  bool ratio_pass = true;
  bool prophet_consistent = true;
  json per_instance = json::array();
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const Instance& inst = entries[i].inst;
    const RuleSpec spec = rule_spec_for(cfg, inst.size());
    const RatioReport report =
        ratio_report(spec, inst, cfg.trials, entries[i].seed, cfg.threads);
    const double slack = 4.0 * report.ratio.std_error();
    const bool pass = !cfg.min_ratio || report.ratio.mean >= *cfg.min_ratio - slack;
    ratio_pass = ratio_pass && pass;
    min_ratio_observed = std::min(min_ratio_observed, report.ratio.mean);

    const double exact = expected_max(inst);
    const double perr = std::abs(report.prophet.mean - exact);
    max_prophet_err = std::max(max_prophet_err, perr);
    prophet_consistent =
        prophet_consistent && perr <= 4.0 * report.prophet.std_error() + 1e-6;

    std::string desc;
    for (const auto& d : inst.distributions) desc += (desc.empty() ? "" : ";") + d.describe();
    csv.row({CsvWriter::num(static_cast<std::uint64_t>(i)), CsvWriter::num(inst.size()),
             CsvWriter::num(report.rule.mean), CsvWriter::num(report.rule.half_width),
             CsvWriter::num(report.prophet.mean), CsvWriter::num(report.prophet.half_width),
             CsvWriter::num(exact), CsvWriter::num(report.ratio.mean),
             CsvWriter::num(report.ratio.half_width), CsvWriter::flag(pass), desc});
    per_instance.push_back({{"rule", estimate_json(report.rule)},
                            {"prophet", estimate_json(report.prophet)},
                            {"ratio", estimate_json(report.ratio)},
                            {"exact_expected_max", exact}});
  }

  if (cfg.min_ratio)
    checks.add("ratio-threshold", ratio_pass,
               "every instance ratio >= " + fmt17(*cfg.min_ratio) +
                   " - 4se; min observed = " + fmt17(min_ratio_observed));
  checks.add("prophet-exact-consistency", prophet_consistent,
             "max |mc_prophet - expected_max| = " + fmt17(max_prophet_err));

  return {{"instances", entries.size()},
          {"min_ratio_observed", min_ratio_observed},
          {"per_instance", per_instance}};
}

// --- lemma1: goodness fraction over independent explicit pools ---

inline json run_lemma1(const ExperimentConfig& cfg, CsvWriter& csv, CheckList& checks) {
  const std::uint64_t m = cfg.m != 0 ? cfg.m : required_samples(cfg.n, cfg.epsilon);
  if (static_cast<double>(m) * static_cast<double>(cfg.pools) > 2e9)
    throw std::invalid_argument("lemma1: m * pools too large for explicit pools");
  const Schedule schedule = clip_schedule(cfg.schedule->build(cfg.n, cfg.epsilon));

  std::uint64_t good = 0;
  for (std::uint64_t pool_idx = 0; pool_idx < cfg.pools; ++pool_idx) {
    Rng rng = Rng::for_trial(cfg.seed, stream::rule, pool_idx);
    const SamplePool pool = SamplePool::draw(*cfg.distribution, m, rng);
    const ThresholdPolicy policy =
        samples_cfhov_policy(pool, schedule, cfg.epsilon, cfg.rank_rounding);
    const GoodnessReport report =
        goodness_check(*cfg.distribution, policy, schedule, cfg.epsilon);
    if (report.overall) ++good;
    std::uint64_t bad_steps = 0;
    for (bool ok : report.per_step)
      if (!ok) ++bad_steps;
    csv.row({CsvWriter::num(pool_idx), CsvWriter::flag(report.overall),
             CsvWriter::num(bad_steps)});
  }

  const double frac = static_cast<double>(good) / static_cast<double>(cfg.pools);
  const double target = 1.0 - cfg.epsilon;
  const double slack =
      4.0 * std::sqrt(target * (1.0 - target) / static_cast<double>(cfg.pools));
  checks.add("lemma1-good-fraction", frac >= target - slack,
             "good fraction " + fmt17(frac) + " vs threshold " + fmt17(target - slack) +
                 " (m = " + std::to_string(m) + ")");

  return {{"m", m}, {"pools", cfg.pools}, {"good_fraction", frac},
          {"threshold", target - slack}};
}

// --- verify-iid: coupled Explicit-vs-Samples run with dominance checks ---

inline json run_verify_iid(const ExperimentConfig& cfg, CsvWriter& csv, CheckList& checks) {
  CoupledConfig cc{*cfg.distribution,
                   cfg.schedule->build(cfg.n, cfg.epsilon),
                   cfg.epsilon,
                   cfg.m,
                   cfg.trials,
                   cfg.seed,
                   cfg.threads,
                   cfg.pool_mode,
                   cfg.rank_rounding};
  const CoupledRun run = coupled_cfhov(cc);

  for (const auto& pt : run.grid)
    csv.row({CsvWriter::num(pt.v), CsvWriter::num(pt.exceed1), CsvWriter::num(pt.exceed2),
             CsvWriter::num(pt.exceed1 / std::pow(1.0 + cfg.epsilon, 3)),
             CsvWriter::num(pt.mean_diff), CsvWriter::num(pt.diff_slack),
             CsvWriter::flag(pt.pass)});

  checks.add("claim1-no-early-stop", run.early_stop_violations == 0,
             std::to_string(run.early_stop_violations) + " good trials with t2 < t1 out of " +
                 std::to_string(run.good_count) + " good trials");
  checks.add("eq2-dominance", run.dominance_pass,
             "exceedance of Samples-CFHOV >= Explicit-CFHOV/(1+eps)^3 - 4se at every grid v");
  checks.add("thm4-ratio", run.theorem4_pass,
             "mean(samples - factor*explicit) + 4se = " + fmt17(run.theorem4_margin) +
                 " with factor (1-eps)/(1+eps)^3 = " + fmt17(run.theorem4_factor));
  checks.add("integral-identity", run.integral_pass,
             "|good mean - exceedance area| = " + fmt17(run.integral_error1) + " / " +
                 fmt17(run.integral_error2) + " vs tol " + fmt17(run.integral_tolerance));

  return {{"m", run.m},
          {"pool_mode", pool_mode_name(run.pool_mode)},
          {"good_fraction",
           static_cast<double>(run.good_count) / static_cast<double>(cfg.trials)},
          {"early_stop_violations", run.early_stop_violations},
          {"explicit_reward", estimate_json(run.explicit_reward)},
          {"samples_reward", estimate_json(run.samples_reward)},
          {"theorem4_factor", run.theorem4_factor}};
}

inline std::vector<std::string> csv_header_for(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::oracle_sweep:
      return {"world", "n", "jstar", "prophet_formula", "prophet_enumeration",
              "gambler_bound", "gambler_enumeration", "adversarial_gambler"};
    case ExperimentKind::verify_single_sample:
      return {"world", "n",     "jstar",       "prophet", "min_gambler_over_orders",
              "gambler_bound", "adversarial_gambler", "min_ratio"};
    case ExperimentKind::ratio:
      return {"instance", "n",       "rule_mean",    "rule_half_width", "prophet_mean",
              "prophet_half_width", "exact_expected_max", "ratio", "ratio_half_width",
              "pass",     "distributions"};
    case ExperimentKind::lemma1:
      return {"pool", "good", "bad_steps"};
    case ExperimentKind::verify_iid:
      return {"v", "exceed_explicit", "exceed_samples", "lower_bound", "mean_diff",
              "diff_slack", "pass"};
  }
  return {};
}

}  // namespace detail

// Runs one experiment, writing <out_dir>/<csv> and <out_dir>/<summary>.
// Exit code 0 iff every check passed.
inline ExperimentResult run_experiment(const ExperimentConfig& cfg,
                                       const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (!std::filesystem::is_directory(out_dir))
    throw std::runtime_error("output directory unavailable: " + out_dir.string());

  ExperimentResult result;
  result.csv_path = out_dir / cfg.csv_name;
  result.summary_path = out_dir / cfg.summary_name;

  detail::CsvWriter csv(result.csv_path, detail::csv_header_for(cfg.kind));
  detail::CheckList checks;
  json estimates;
  switch (cfg.kind) {
    case ExperimentKind::oracle_sweep:
      estimates = detail::run_oracle_sweep(cfg, csv, checks);
      break;
    case ExperimentKind::verify_single_sample:
      estimates = detail::run_verify_single_sample(cfg, csv, checks);
      break;
    case ExperimentKind::ratio:
      estimates = detail::run_ratio(cfg, csv, checks);
      break;
    case ExperimentKind::lemma1:
      estimates = detail::run_lemma1(cfg, csv, checks);
      break;
    case ExperimentKind::verify_iid:
      estimates = detail::run_verify_iid(cfg, csv, checks);
      break;
  }

  result.summary = json{{"config", detail::config_echo(cfg)},
                        {"estimates", estimates},
                        {"checks", checks.items},
                        {"pass", checks.all_pass},
                        {"seed", cfg.seed}};

  std::ofstream summary_out(result.summary_path);
  if (!summary_out) throw std::runtime_error("cannot open summary output: " +
                                             result.summary_path.string());
  summary_out << result.summary.dump(2) << '\n';
  if (!summary_out) throw std::runtime_error("summary write failed");

  result.exit_code = checks.all_pass ? 0 : 1;
  return result;
}

}  // namespace prophet
