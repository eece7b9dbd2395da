#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <vector>

#include "prophet/rng.hpp"
#include "prophet/tagged_value.hpp"

namespace prophet {

inline constexpr double kProbSumTolerance = 1e-12;

enum class DistKind { uniform, exponential, finite_discrete, point_mass, empirical };

// A sampleable value source with exact tail probabilities and upper quantiles
// in the tagged space: tail(t) = Pr[(X, u) > t] and tail(upper_quantile(p)) = p.
class Distribution {
 public:
  static Distribution uniform(double lo, double hi) {
    require(std::isfinite(lo) && std::isfinite(hi) && lo < hi,
            "uniform: need finite lo < hi");
    Distribution d(DistKind::uniform);
    d.a_ = lo;
    d.b_ = hi;
    return d;
  }

  static Distribution exponential(double rate) {
    require(std::isfinite(rate) && rate > 0.0, "exponential: need rate > 0");
    Distribution d(DistKind::exponential);
    d.a_ = rate;
    return d;
  }

  static Distribution finite_discrete(std::vector<double> values, std::vector<double> probs) {
    Distribution d(DistKind::finite_discrete);
    d.init_atoms(std::move(values), std::move(probs));
    return d;
  }

  static Distribution point_mass(double v) {
    require(std::isfinite(v), "point_mass: need a finite value");
    Distribution d(DistKind::point_mass);
    d.a_ = v;
    d.init_atoms({v}, {1.0});
    return d;
  }

  // Samples uniformly with replacement from the stored list; tails and
  // quantiles are exact for the induced discrete measure.
  static Distribution empirical(std::vector<double> values) {
    require(!values.empty(), "empirical: need at least one value");
    for (double v : values) require(std::isfinite(v), "empirical: values must be finite");
    Distribution d(DistKind::empirical);
    d.raw_ = values;
    const double w = 1.0 / static_cast<double>(values.size());
    d.init_atoms(std::move(values), std::vector<double>(d.raw_.size(), w));
    return d;
  }

  DistKind kind() const { return kind_; }

  TaggedValue draw(Rng& rng) const {
    double v = 0.0;
    switch (kind_) {
      case DistKind::uniform:
        v = a_ + rng.uniform01() * (b_ - a_);
        break;
      case DistKind::exponential:
        v = -std::log(rng.uniform01_open_low()) / a_;
        break;
      case DistKind::point_mass:
        v = a_;
        break;
      case DistKind::empirical:
        v = raw_[rng.below(raw_.size())];
        break;
      case DistKind::finite_discrete: {
        const double u = rng.uniform01();
        double cum = 0.0;
        v = values_.back();
        for (std::size_t i = 0; i < values_.size(); ++i) {
          cum += probs_[i];
          if (u < cum) {
            v = values_[i];
            break;
          }
        }
        break;
      }
    }
    return {v, rng.uniform01()};
  }

  // Pr[(X, u) > threshold] in the tagged space.
  double tail(const TaggedValue& threshold) const {
    if (threshold.is_never()) return 0.0;
    switch (kind_) {
      case DistKind::uniform:
      case DistKind::exponential:
        return value_tail(threshold.value);
      default: {
        const double v = threshold.value;
        const auto it = std::lower_bound(values_.begin(), values_.end(), v);
        const std::size_t i = static_cast<std::size_t>(it - values_.begin());
        if (i < values_.size() && values_[i] == v) {
          const double keep = 1.0 - std::clamp(threshold.tiebreak, 0.0, 1.0);
          return suffix_[i + 1] + probs_[i] * keep;
        }
        return suffix_[i];
      }
    }
  }

  // Pr[X > v], ignoring the tie-breaker coordinate.
  double value_tail(double v) const {
    switch (kind_) {
      case DistKind::uniform:
        if (v <= a_) return 1.0;
        if (v >= b_) return 0.0;
        return (b_ - v) / (b_ - a_);
      case DistKind::exponential:
        return v <= 0.0 ? 1.0 : std::exp(-a_ * v);
      default: {
        const auto it = std::upper_bound(values_.begin(), values_.end(), v);
        return suffix_[static_cast<std::size_t>(it - values_.begin())];
      }
    }
  }

  double cdf(double v) const { return 1.0 - value_tail(v); }

  double mass_at(double v) const {
    if (!is_atomic()) return 0.0;
    const auto it = std::lower_bound(values_.begin(), values_.end(), v);
    const std::size_t i = static_cast<std::size_t>(it - values_.begin());
    return (i < values_.size() && values_[i] == v) ? probs_[i] : 0.0;
  }

  // Threshold t with tail(t) = p. p = 0 yields the NEVER sentinel; for atomic
  // families the tie-breaker coordinate makes the tagged tail hit p exactly.
  TaggedValue upper_quantile(double p) const {
    require_domain(p >= 0.0 && p <= 1.0, "upper_quantile: p must be in [0, 1]");
    if (p == 0.0) return TaggedValue::never();
    switch (kind_) {
      case DistKind::uniform:
        return {b_ - p * (b_ - a_), 0.5};
      case DistKind::exponential:
        return {-std::log(p) / a_, 0.5};
      default: {
        // Largest atom index whose "at or above" mass still covers p.
        std::size_t lo = 0, hi = values_.size() - 1;
        if (suffix_[hi] >= p) {
          lo = hi;
        } else {
          while (lo + 1 < hi) {
            const std::size_t mid = (lo + hi) / 2;
            if (suffix_[mid] >= p) {
              lo = mid;
            } else {
              hi = mid;
            }
          }
        }
        const double above = suffix_[lo + 1];
        double q = (p - above) / probs_[lo];
        q = std::clamp(q, 0.0, 1.0);
        double t = 1.0 - q;
        if (t >= 1.0) t = std::nextafter(1.0, 0.0);
        return {values_[lo], t};
      }
    }
  }

  bool is_atomic() const { return kind_ != DistKind::uniform && kind_ != DistKind::exponential; }

  double support_lo() const {
    switch (kind_) {
      case DistKind::uniform:
        return a_;
      case DistKind::exponential:
        return 0.0;
      default:
        return values_.front();
    }
  }

  // Finite upper cover; the exponential tail is cut where it drops below tail_eps.
  double support_hi(double tail_eps = 1e-16) const {
    switch (kind_) {
      case DistKind::uniform:
        return b_;
      case DistKind::exponential:
        return -std::log(tail_eps) / a_;
      default:
        return values_.back();
    }
  }

  const std::vector<double>& atom_values() const { return values_; }
  const std::vector<double>& atom_probs() const { return probs_; }

  std::string describe() const {
    switch (kind_) {
      case DistKind::uniform:
        return "uniform(" + num(a_) + "," + num(b_) + ")";
      case DistKind::exponential:
        return "exp(" + num(a_) + ")";
      case DistKind::point_mass:
        return "point(" + num(a_) + ")";
      case DistKind::empirical:
        return "empirical(" + list(raw_) + ")";
      case DistKind::finite_discrete:
        return "discrete(" + list(values_) + "," + list(probs_) + ")";
    }
    return {};
  }

  friend bool operator==(const Distribution& x, const Distribution& y) {
    return x.kind_ == y.kind_ && x.a_ == y.a_ && x.b_ == y.b_ && x.values_ == y.values_ &&
           x.probs_ == y.probs_ && x.raw_ == y.raw_;
  }

 private:
  explicit Distribution(DistKind k) : kind_(k) {}

  static void require(bool ok, const char* msg) {
    if (!ok) throw std::invalid_argument(msg);
  }
  static void require_domain(bool ok, const char* msg) {
    if (!ok) throw std::domain_error(msg);
  }

  static std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
  }

  static std::string list(const std::vector<double>& xs) {
    std::string s = "[";
    for (std::size_t i = 0; i < xs.size(); ++i) {
      if (i) s += ",";
      s += num(xs[i]);
    }
    return s + "]";
  }

  void init_atoms(std::vector<double> values, std::vector<double> probs) {
    require(!values.empty() && values.size() == probs.size(),
            "discrete: values and probabilities must be non-empty and aligned");
    double sum = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
      require(std::isfinite(values[i]), "discrete: values must be finite");
      require(std::isfinite(probs[i]) && probs[i] >= 0.0,
              "discrete: probabilities must be non-negative");
      sum += probs[i];
    }
    require(std::abs(sum - 1.0) <= kProbSumTolerance,
            "discrete: probabilities must sum to 1 within 1e-12");

    std::vector<std::size_t> order(values.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t x, std::size_t y) { return values[x] < values[y]; });

    values_.clear();
    probs_.clear();
    for (std::size_t i : order) {
      if (probs[i] == 0.0) continue;
      if (!values_.empty() && values_.back() == values[i]) {
        probs_.back() += probs[i];
      } else {
        values_.push_back(values[i]);
        probs_.push_back(probs[i]);
      }
    }
    require(!values_.empty(), "discrete: need at least one atom with positive mass");

    suffix_.assign(values_.size() + 1, 0.0);
    for (std::size_t i = values_.size(); i-- > 0;) suffix_[i] = suffix_[i + 1] + probs_[i];
  }

  DistKind kind_;
  double a_ = 0.0;  // uniform lo / exponential rate / point value
  double b_ = 0.0;  // uniform hi
  std::vector<double> values_;  // atoms, ascending, distinct
  std::vector<double> probs_;
  std::vector<double> suffix_;  // suffix_[i] = Pr[X >= values_[i]], suffix_[size] = 0
  std::vector<double> raw_;     // empirical list as given
};

enum class Adversary { fixed_order, almighty };

// An ordered list of distributions plus the adversary model.
struct Instance {
  std::vector<Distribution> distributions;
  Adversary adversary = Adversary::fixed_order;

  Instance(std::vector<Distribution> ds, Adversary adv = Adversary::fixed_order)
      : distributions(std::move(ds)), adversary(adv) {
    if (distributions.empty()) throw std::invalid_argument("instance: need n >= 1");
  }

  std::size_t size() const { return distributions.size(); }
};

inline Instance make_iid(const Distribution& d, std::size_t n,
                         Adversary adv = Adversary::fixed_order) {
  return Instance(std::vector<Distribution>(n, d), adv);
}

inline bool is_iid(const Instance& inst) {
  for (const auto& d : inst.distributions)
    if (!(d == inst.distributions.front())) return false;
  return true;
}

}  // namespace prophet
