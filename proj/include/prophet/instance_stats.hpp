#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "prophet/distribution.hpp"

namespace prophet {

// Pr[max_i (X_i, u_i) > t] in the tagged space.
inline double tagged_max_tail(const Instance& inst, const TaggedValue& t) {
  double keep = 1.0;
  for (const auto& d : inst.distributions) keep *= 1.0 - d.tail(t);
  return 1.0 - keep;
}

namespace detail {

inline double simpson(double fa, double fm, double fb, double a, double b) {
  return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

inline double adaptive_simpson(const std::function<double(double)>& f, double a, double fa,
                               double b, double fb, double m, double fm, double whole,
                               double tol, int depth) {
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = simpson(fa, flm, fm, a, m);
  const double right = simpson(fm, frm, fb, m, b);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  return adaptive_simpson(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1) +
         adaptive_simpson(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1);
}

inline double integrate(const std::function<double(double)>& f, double a, double b, double tol) {
  if (!(b > a)) return 0.0;
  const double m = 0.5 * (a + b);
  const double fa = f(a), fb = f(b), fm = f(m);
  return adaptive_simpson(f, a, fa, b, fb, m, fm, simpson(fa, fm, fb, a, b), tol, 40);
}

}  // namespace detail

// E[max_i X_i]: exact atom enumeration when every distribution is atomic,
// otherwise numerical integration of 1 - prod_i F_i over a finite cover.
inline double expected_max(const Instance& inst) {
  bool atomic = true;
  for (const auto& d : inst.distributions) atomic = atomic && d.is_atomic();

  if (atomic) {
    std::vector<double> pts;
    for (const auto& d : inst.distributions)
      pts.insert(pts.end(), d.atom_values().begin(), d.atom_values().end());
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    double e = 0.0, prev = 0.0;
    for (double v : pts) {
      double cdf = 1.0;
      for (const auto& d : inst.distributions) cdf *= d.cdf(v);
      e += v * (cdf - prev);
      prev = cdf;
    }
    return e;
  }

  double lo = -std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (const auto& d : inst.distributions) {
    lo = std::max(lo, d.support_lo());
    hi = std::max(hi, d.support_hi());
  }
  if (!(hi > lo)) return lo;

  // Integrand kinks live at atoms and uniform endpoints; split there.
  std::vector<double> cuts{lo, hi};
  for (const auto& d : inst.distributions) {
    if (d.is_atomic()) {
      for (double v : d.atom_values())
        if (v > lo && v < hi) cuts.push_back(v);
    } else if (d.kind() == DistKind::uniform) {
      for (double v : {d.support_lo(), d.support_hi()})
        if (v > lo && v < hi) cuts.push_back(v);
    }
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  const auto max_tail = [&](double v) {
    double cdf = 1.0;
    for (const auto& d : inst.distributions) cdf *= d.cdf(v);
    return 1.0 - cdf;
  };

  double area = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i)
    area += detail::integrate(max_tail, cuts[i], cuts[i + 1], 1e-12 * (cuts[i + 1] - cuts[i]));
  return lo + area;
}

// Tagged threshold t with tagged_max_tail(t) = 1/2, found by bisection on the
// value coordinate and then, at an atom, on the tie-breaker coordinate.
inline TaggedValue median_of_max(const Instance& inst) {
  double lo = -std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (const auto& d : inst.distributions) {
    lo = std::max(lo, d.support_lo());
    hi = std::max(hi, d.support_hi());
  }
  lo -= 1.0;
  hi += 1.0;

  const auto above = [&](double v) { return tagged_max_tail(inst, {v, 1.0}); };  // Pr[max > v]
  const auto at_or_above = [&](double v) { return tagged_max_tail(inst, {v, 0.0}); };

  // Smallest v with Pr[max > v] <= 1/2.
  for (int it = 0; it < 200 && hi - lo > 0.0; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (above(mid) <= 0.5) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  const double v = hi;

  if (at_or_above(v) < 0.5) return {v, 0.5};  // continuous crossing, no atom in play

  double tlo = 0.0, thi = 1.0;
  for (int it = 0; it < 200; ++it) {
    const double tm = 0.5 * (tlo + thi);
    if (tagged_max_tail(inst, {v, tm}) > 0.5) {
      tlo = tm;
    } else {
      thi = tm;
    }
  }
  return {v, 0.5 * (tlo + thi)};
}

}  // namespace prophet
