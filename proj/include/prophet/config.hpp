#pragma once

#include <cctype>
#include <charconv>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "prophet/harness.hpp"

namespace prophet {

enum class ExperimentKind { verify_single_sample, verify_iid, ratio, lemma1, oracle_sweep };

inline const char* to_string(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::verify_single_sample: return "verify-single-sample";
    case ExperimentKind::verify_iid: return "verify-iid";
    case ExperimentKind::ratio: return "ratio";
    case ExperimentKind::lemma1: return "lemma1";
    case ExperimentKind::oracle_sweep: return "oracle-sweep";
  }
  return "?";
}

inline std::optional<ExperimentKind> experiment_kind_from(std::string_view s) {
  if (s == "verify-single-sample") return ExperimentKind::verify_single_sample;
  if (s == "verify-iid") return ExperimentKind::verify_iid;
  if (s == "ratio") return ExperimentKind::ratio;
  if (s == "lemma1") return ExperimentKind::lemma1;
  if (s == "oracle-sweep") return ExperimentKind::oracle_sweep;
  return std::nullopt;
}

inline const char* to_string(RuleKind k) {
  switch (k) {
    case RuleKind::single_sample: return "single-sample";
    case RuleKind::explicit_cfhov: return "explicit-cfhov";
    case RuleKind::samples_cfhov: return "samples-cfhov";
    case RuleKind::median_of_max: return "median-of-max";
    case RuleKind::half_expected_max: return "half-expected-max";
  }
  return "?";
}

inline std::optional<RuleKind> rule_kind_from(std::string_view s) {
  if (s == "single-sample") return RuleKind::single_sample;
  if (s == "explicit-cfhov") return RuleKind::explicit_cfhov;
  if (s == "samples-cfhov") return RuleKind::samples_cfhov;
  if (s == "median-of-max") return RuleKind::median_of_max;
  if (s == "half-expected-max") return RuleKind::half_expected_max;
  return std::nullopt;
}

// Schedule request before n is known; resolved against the instance length.
struct ScheduleSpec {
  enum class Kind { constant, file } kind = Kind::constant;
  double constant = 1.0;
  std::string path;
  std::vector<double> file_probs;  // loaded and validated at parse time
  std::string text = "constant(1)";

  Schedule build(std::size_t n, double epsilon) const {
    if (kind == Kind::constant) return make_constant_schedule(n, constant, epsilon);
    if (file_probs.size() != n)
      throw std::invalid_argument("schedule file: expected " + std::to_string(n) +
                                  " entries, got " + std::to_string(file_probs.size()));
    return make_schedule(file_probs, epsilon);
  }
};

// Instance request: a concrete instance, or a random suite to be generated.
struct InstanceSpec {
  std::optional<Instance> instance;
  std::uint64_t suite_count = 0;  // >0 marks random(count, max_n)
  std::size_t suite_max_n = 0;
  std::string text;
};

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::ratio;
  std::optional<Distribution> distribution;
  std::optional<InstanceSpec> instance;
  std::optional<RuleKind> rule;
  std::size_t n = 0;
  std::size_t n_max = 0;
  double epsilon = 0.0;
  bool epsilon_set = false;
  std::optional<ScheduleSpec> schedule;
  std::uint64_t m = 0;  // 0 = auto
  std::uint64_t trials = 0;
  std::uint64_t worlds = 0;
  std::uint64_t pools = 0;
  std::uint64_t seed = 1;
  PoolMode pool_mode = PoolMode::auto_select;
  RankRounding rank_rounding = RankRounding::ceil;
  std::optional<double> min_ratio;
  unsigned threads = 1;
  std::string csv_name;      // defaults to <experiment>.csv
  std::string summary_name;  // defaults to <experiment>.json
};

struct ParseResult {
  std::optional<ExperimentConfig> config;
  std::vector<std::string> errors;

  bool ok() const { return errors.empty() && config.has_value(); }
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

inline bool parse_double(std::string_view s, double& out) {
  s = trim(s);
  if (s.empty()) return false;
  const char* begin = s.data();
  const char* end = begin + s.size();
  auto [ptr, ec] = std::from_chars(begin, end, out);
  return ec == std::errc{} && ptr == end;
}

inline bool parse_u64(std::string_view s, std::uint64_t& out) {
  s = trim(s);
  if (s.empty()) return false;
  const char* begin = s.data();
  const char* end = begin + s.size();
  auto [ptr, ec] = std::from_chars(begin, end, out);
  return ec == std::errc{} && ptr == end;
}

// Splits "name(args)" and returns the args split at top-level commas.
inline bool split_call(std::string_view text, std::string& name,
                       std::vector<std::string>& args) {
  text = trim(text);
  if (text.size() < 2) return false;
  const auto open = text.find('(');
  if (open == std::string_view::npos || text.back() != ')') return false;
  name = std::string(trim(text.substr(0, open)));
  const std::string_view body = text.substr(open + 1, text.size() - open - 2);
  args.clear();
  int depth = 0;
  std::string cur;
  for (char c : body) {
    if (c == '(' || c == '[') ++depth;
    if (c == ')' || c == ']') --depth;
    if (c == ',' && depth == 0) {
      args.push_back(std::string(trim(cur)));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!trim(cur).empty() || !args.empty()) args.push_back(std::string(trim(cur)));
  return depth == 0;
}

inline bool parse_number_list(std::string_view text, std::vector<double>& out) {
  text = trim(text);
  if (text.size() < 2 || text.front() != '[' || text.back() != ']') return false;
  out.clear();
  std::string cur;
  for (char c : text.substr(1, text.size() - 2)) {
    if (c == ',') {
      double v;
      if (!parse_double(cur, v)) return false;
      out.push_back(v);
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!trim(cur).empty()) {
    double v;
    if (!parse_double(cur, v)) return false;
    out.push_back(v);
  }
  return !out.empty();
}

}  // namespace detail

// Distribution literal: uniform(a,b) | exp(rate) | discrete([v..],[p..]) |
// point(v) | empirical([v..]). Throws std::invalid_argument on bad input.
inline Distribution parse_distribution(std::string_view text) {
  std::string name;
  std::vector<std::string> args;
  if (!detail::split_call(text, name, args))
    throw std::invalid_argument("distribution: expected name(args), got '" + std::string(text) +
                                "'");
  const auto need = [&](std::size_t k) {
    if (args.size() != k)
      throw std::invalid_argument("distribution " + name + ": expected " + std::to_string(k) +
                                  " argument(s)");
  };
  const auto num = [&](std::size_t i) {
    double v;
    if (!detail::parse_double(args[i], v))
      throw std::invalid_argument("distribution " + name + ": bad number '" + args[i] + "'");
    return v;
  };
  if (name == "uniform") {
    need(2);
    return Distribution::uniform(num(0), num(1));
  }
  if (name == "exp") {
    need(1);
    return Distribution::exponential(num(0));
  }
  if (name == "point") {
    need(1);
    return Distribution::point_mass(num(0));
  }
  if (name == "discrete") {
    need(2);
    std::vector<double> values, probs;
    if (!detail::parse_number_list(args[0], values) || !detail::parse_number_list(args[1], probs))
      throw std::invalid_argument("discrete: expected two [..] number lists");
    return Distribution::finite_discrete(std::move(values), std::move(probs));
  }
  if (name == "empirical") {
    need(1);
    std::vector<double> values;
    if (!detail::parse_number_list(args[0], values))
      throw std::invalid_argument("empirical: expected a [..] number list");
    return Distribution::empirical(std::move(values));
  }
  throw std::invalid_argument("distribution: unknown family '" + name + "'");
}

// Instance literal: hard(eps) | iid(D, n) | list(D1, D2, ...) | random(count, max_n).
inline InstanceSpec parse_instance(std::string_view text) {
  std::string name;
  std::vector<std::string> args;
  if (!detail::split_call(text, name, args))
    throw std::invalid_argument("instance: expected name(args), got '" + std::string(text) + "'");
  InstanceSpec spec;
  spec.text = std::string(detail::trim(text));
  if (name == "hard") {
    if (args.size() != 1) throw std::invalid_argument("hard: expected hard(epsilon)");
    double eps;
    if (!detail::parse_double(args[0], eps))
      throw std::invalid_argument("hard: bad epsilon '" + args[0] + "'");
    spec.instance = hard_instance(eps);
    return spec;
  }
  if (name == "iid") {
    if (args.size() != 2) throw std::invalid_argument("iid: expected iid(distribution, n)");
    std::uint64_t n;
    if (!detail::parse_u64(args[1], n) || n == 0)
      throw std::invalid_argument("iid: n must be a positive integer");
    spec.instance = make_iid(parse_distribution(args[0]), n);
    return spec;
  }
  if (name == "list") {
    std::vector<Distribution> ds;
    for (const auto& a : args) ds.push_back(parse_distribution(a));
    if (ds.empty()) throw std::invalid_argument("list: need at least one distribution");
    spec.instance = Instance(std::move(ds));
    return spec;
  }
  if (name == "random") {
    if (args.size() != 2) throw std::invalid_argument("random: expected random(count, max_n)");
    std::uint64_t count, max_n;
    if (!detail::parse_u64(args[0], count) || count == 0 ||
        !detail::parse_u64(args[1], max_n) || max_n == 0)
      throw std::invalid_argument("random: count and max_n must be positive integers");
    spec.suite_count = count;
    spec.suite_max_n = max_n;
    return spec;
  }
  throw std::invalid_argument("instance: unknown form '" + name + "'");
}

inline ScheduleSpec parse_schedule_spec(std::string_view text) {
  std::string name;
  std::vector<std::string> args;
  if (!detail::split_call(text, name, args))
    throw std::invalid_argument("schedule: expected constant(c) or file(path)");
  ScheduleSpec spec;
  spec.text = std::string(detail::trim(text));
  if (name == "constant") {
    if (args.size() != 1 || !detail::parse_double(args[0], spec.constant))
      throw std::invalid_argument("schedule: expected constant(c)");
    spec.kind = ScheduleSpec::Kind::constant;
    return spec;
  }
  if (name == "file") {
    if (args.size() != 1 || args[0].empty())
      throw std::invalid_argument("schedule: expected file(path)");
    spec.kind = ScheduleSpec::Kind::file;
    spec.path = args[0];
    // Load eagerly so file problems surface as config errors. Monotonicity and
    // range checks run here with a placeholder epsilon.
    spec.file_probs = load_schedule_file(spec.path, 0.5).p;
    return spec;
  }
  throw std::invalid_argument("schedule: unknown kind '" + name + "'");
}

// Line-oriented key = value configuration. Collects every validation error
// rather than stopping at the first.
inline ParseResult parse_config(const std::string& text,
                                std::optional<ExperimentKind> forced_kind = std::nullopt) {
  ParseResult result;
  auto& errors = result.errors;
  std::map<std::string, std::string> kv;

  std::size_t lineno = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t nl = text.find('\n', start);
    std::string line = text.substr(start, nl == std::string::npos ? nl : nl - start);
    start = nl == std::string::npos ? text.size() + 1 : nl + 1;
    ++lineno;
    if (const auto pos = line.find('#'); pos != std::string::npos) line.erase(pos);
    const std::string_view stripped = detail::trim(line);
    if (stripped.empty()) continue;
    const auto eq = stripped.find('=');
    if (eq == std::string_view::npos) {
      errors.push_back("line " + std::to_string(lineno) + ": expected key = value");
      continue;
    }
    const std::string key(detail::trim(stripped.substr(0, eq)));
    const std::string value(detail::trim(stripped.substr(eq + 1)));
    if (key.empty() || value.empty()) {
      errors.push_back("line " + std::to_string(lineno) + ": empty key or value");
      continue;
    }
    if (kv.contains(key)) {
      errors.push_back("line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
      continue;
    }
    kv[key] = value;
  }

  ExperimentConfig cfg;
  bool kind_known = forced_kind.has_value();

  // Experiment kind: from the config and/or the subcommand; both must agree.
  if (const auto it = kv.find("experiment"); it != kv.end()) {
    const auto kind = experiment_kind_from(it->second);
    if (!kind) {
      errors.push_back("experiment: unknown kind '" + it->second + "'");
    } else if (forced_kind && *forced_kind != *kind) {
      errors.push_back(std::string("experiment: config says '") + to_string(*kind) +
                       "' but the subcommand is '" + to_string(*forced_kind) + "'");
    } else {
      cfg.kind = *kind;
      kind_known = true;
    }
    kv.erase(it);
  } else if (!forced_kind) {
    errors.push_back("experiment: missing (set the key or use a subcommand)");
  }
  if (forced_kind) cfg.kind = *forced_kind;

  // Reject keys that are unknown or do not apply to this experiment kind.
  {
    static const std::set<std::string> common = {"seed", "threads", "csv", "summary"};
    std::set<std::string> allowed;
    switch (cfg.kind) {
      case ExperimentKind::oracle_sweep:
      case ExperimentKind::verify_single_sample:
        allowed = {"distribution", "n_max", "worlds"};
        break;
      case ExperimentKind::ratio:
        allowed = {"rule",      "instance",      "trials",    "epsilon", "schedule",
                   "m",         "pool_mode",     "rank_rounding", "min_ratio", "adversary"};
        break;
      case ExperimentKind::lemma1:
        allowed = {"distribution", "n", "epsilon", "pools", "schedule", "m", "rank_rounding"};
        break;
      case ExperimentKind::verify_iid:
        allowed = {"distribution", "n",      "epsilon",       "schedule",
                   "m",            "trials", "pool_mode",     "rank_rounding"};
        break;
    }
    for (auto it = kv.begin(); it != kv.end();) {
      if (common.contains(it->first) || (kind_known && allowed.contains(it->first))) {
        ++it;
      } else if (kind_known) {
        errors.push_back("unknown key '" + it->first + "' for experiment " +
                         to_string(cfg.kind));
        it = kv.erase(it);
      } else {
        ++it;
      }
    }
  }

  const auto take = [&](const char* key) -> std::optional<std::string> {
    const auto it = kv.find(key);
    if (it == kv.end()) return std::nullopt;
    std::string v = it->second;
    kv.erase(it);
    return v;
  };
  const auto take_u64 = [&](const char* key, std::uint64_t& out, std::uint64_t min_v) {
    if (const auto v = take(key)) {
      if (!detail::parse_u64(*v, out) || out < min_v)
        errors.push_back(std::string(key) + ": expected an integer >= " + std::to_string(min_v) +
                         ", got '" + *v + "'");
      return true;
    }
    return false;
  };

  if (const auto v = take("seed")) {
    if (!detail::parse_u64(*v, cfg.seed))
      errors.push_back("seed: expected an unsigned integer, got '" + *v + "'");
  }
  {
    std::uint64_t threads = 0;
    if (take_u64("threads", threads, 1)) cfg.threads = static_cast<unsigned>(threads);
  }
  if (const auto v = take("csv")) cfg.csv_name = *v;
  if (const auto v = take("summary")) cfg.summary_name = *v;

  if (const auto v = take("epsilon")) {
    cfg.epsilon_set = true;
    if (!detail::parse_double(*v, cfg.epsilon) || !(cfg.epsilon > 0.0 && cfg.epsilon < 1.0))
      errors.push_back("epsilon: must be a real in (0, 1), got '" + *v + "'");
  }
  if (const auto v = take("distribution")) {
    try {
      cfg.distribution = parse_distribution(*v);
    } catch (const std::exception& e) {
      errors.push_back(std::string("distribution: ") + e.what());
    }
  }
  if (const auto v = take("instance")) {
    try {
      cfg.instance = parse_instance(*v);
    } catch (const std::exception& e) {
      errors.push_back(std::string("instance: ") + e.what());
    }
  }
  if (const auto v = take("rule")) {
    cfg.rule = rule_kind_from(*v);
    if (!cfg.rule) errors.push_back("rule: unknown rule '" + *v + "'");
  }
  if (const auto v = take("schedule")) {
    try {
      cfg.schedule = parse_schedule_spec(*v);
    } catch (const std::exception& e) {
      errors.push_back(std::string("schedule: ") + e.what());
    }
  }
  if (const auto v = take("m")) {
    if (*v == "auto") {
      cfg.m = 0;
    } else if (!detail::parse_u64(*v, cfg.m) || cfg.m == 0) {
      errors.push_back("m: expected 'auto' or a positive integer, got '" + *v + "'");
    }
  }
  if (const auto v = take("pool_mode")) {
    if (*v == "auto") {
      cfg.pool_mode = PoolMode::auto_select;
    } else if (*v == "explicit") {
      cfg.pool_mode = PoolMode::explicit_pool;
    } else if (*v == "implicit") {
      cfg.pool_mode = PoolMode::implicit_pool;
    } else {
      errors.push_back("pool_mode: expected auto | explicit | implicit, got '" + *v + "'");
    }
  }
  if (const auto v = take("rank_rounding")) {
    if (*v == "ceil") {
      cfg.rank_rounding = RankRounding::ceil;
    } else if (*v == "floor") {
      cfg.rank_rounding = RankRounding::floor;
    } else {
      errors.push_back("rank_rounding: expected ceil | floor, got '" + *v + "'");
    }
  }
  if (const auto v = take("min_ratio")) {
    double r;
    if (!detail::parse_double(*v, r) || !(r >= 0.0 && r <= 1.0)) {
      errors.push_back("min_ratio: must be a real in [0, 1], got '" + *v + "'");
    } else {
      cfg.min_ratio = r;
    }
  }
  if (const auto v = take("adversary")) {
    if (*v == "almighty") {
      errors.push_back(
          "adversary: almighty is exact-only; use oracle-sweep / verify-single-sample");
    } else if (*v != "fixed-order") {
      errors.push_back("adversary: expected fixed-order | almighty, got '" + *v + "'");
    }
  }

  {
    std::uint64_t u = 0;
    if (take_u64("n", u, 1)) cfg.n = static_cast<std::size_t>(u);
    if (take_u64("n_max", u, 1)) cfg.n_max = static_cast<std::size_t>(u);
    take_u64("trials", cfg.trials, 1);
    take_u64("worlds", cfg.worlds, 1);
    take_u64("pools", cfg.pools, 1);
  }

  for (const auto& [key, value] : kv) errors.push_back("unknown key '" + key + "'");
  kv.clear();

  // Per-kind requirements and defaults.
  const auto require_key = [&](bool present, const char* key) {
    if (!present) errors.push_back(std::string(key) + ": required for this experiment");
  };
  switch (cfg.kind) {
    case ExperimentKind::oracle_sweep:
      if (!cfg.distribution) cfg.distribution = Distribution::uniform(0.0, 1.0);
      if (cfg.n_max == 0) cfg.n_max = 12;
      if (cfg.n_max > 16) errors.push_back("n_max: oracle-sweep enumerates 2^n; keep n_max <= 16");
      if (cfg.worlds == 0) cfg.worlds = 500;
      break;
    case ExperimentKind::verify_single_sample:
      if (!cfg.distribution) cfg.distribution = Distribution::uniform(0.0, 1.0);
      if (cfg.n_max == 0) cfg.n_max = 6;
      if (cfg.n_max > 6)
        errors.push_back("n_max: the full permutation sweep supports n_max <= 6");
      if (cfg.worlds == 0) cfg.worlds = 200;
      break;
    case ExperimentKind::ratio: {
      require_key(cfg.rule.has_value(), "rule");
      require_key(cfg.instance.has_value(), "instance");
      require_key(cfg.trials > 0, "trials");
      const bool cfhov = cfg.rule && (*cfg.rule == RuleKind::explicit_cfhov ||
                                      *cfg.rule == RuleKind::samples_cfhov);
      if (cfhov) {
        require_key(cfg.epsilon_set, "epsilon");
        if (!cfg.schedule) cfg.schedule = ScheduleSpec{};
        if (cfg.instance && cfg.instance->suite_count > 0)
          errors.push_back("instance: CFHOV rules need an i.i.d. instance, not random(...)");
        if (cfg.instance && cfg.instance->instance && !is_iid(*cfg.instance->instance))
          errors.push_back("instance: CFHOV rules need identical distributions");
      } else if (cfg.schedule || cfg.epsilon_set) {
        errors.push_back("schedule/epsilon: only meaningful for the CFHOV rules");
      }
      if (!cfg.min_ratio && cfg.rule &&
          (*cfg.rule == RuleKind::single_sample || *cfg.rule == RuleKind::median_of_max ||
           *cfg.rule == RuleKind::half_expected_max))
        cfg.min_ratio = 0.5;
      break;
    }
    case ExperimentKind::lemma1:
      if (!cfg.distribution) cfg.distribution = Distribution::uniform(0.0, 1.0);
      require_key(cfg.n > 0, "n");
      require_key(cfg.epsilon_set, "epsilon");
      if (cfg.pools == 0) cfg.pools = 200;
      if (!cfg.schedule) cfg.schedule = ScheduleSpec{};
      break;
    case ExperimentKind::verify_iid:
      if (!cfg.distribution) cfg.distribution = Distribution::uniform(0.0, 1.0);
      require_key(cfg.n > 0, "n");
      require_key(cfg.epsilon_set, "epsilon");
      require_key(cfg.trials > 0, "trials");
      if (!cfg.schedule) cfg.schedule = ScheduleSpec{};
      break;
  }

  if (cfg.csv_name.empty()) cfg.csv_name = std::string(to_string(cfg.kind)) + ".csv";
  if (cfg.summary_name.empty()) cfg.summary_name = std::string(to_string(cfg.kind)) + ".json";

  if (errors.empty()) result.config = std::move(cfg);
  return result;
}

}  // namespace prophet
