#pragma once

// Equivalence and monotonicity constants attached to a profile, the least
// concave majorant, and the grid checks behind every hypothesis used by the
// dimension-free machinery. All "essential" constants are computed on finite
// grids and are therefore lower bounds of the true suprema; callers wanting a
// convergence stamp re-run on a refined grid (stable_ratio_constant).

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "isoperim/grids.hpp"
#include "isoperim/numerics.hpp"
#include "isoperim/profiles.hpp"

namespace isoperim {

enum class Monotonicity { non_decreasing, non_increasing };

// Constants above the cap are reported as +infinity: "property fails" is
// kept distinct from float overflow.
inline constexpr double kConstantCap = 1e6;

// Smallest D with f(s) <= D f(t) for s <= t (non-decreasing case) or
// f(t) <= D f(s) (non-increasing case), over grid pairs.
inline double essential_monotone_constant(
    const std::function<double(double)>& f, const std::vector<double>& grid,
    Monotonicity dir) {
  if (grid.empty()) throw std::domain_error("essential constant: empty grid");
  double best = 1.0;
  if (dir == Monotonicity::non_decreasing) {
    double prefix_max = 0.0;
    for (double t : grid) {
      const double v = f(t);
      if (!(v > 0.0))
        throw std::domain_error("essential constant: f must be positive on the grid");
      prefix_max = std::max(prefix_max, v);
      best = std::max(best, prefix_max / v);
    }
  } else {
    double prefix_min = std::numeric_limits<double>::infinity();
    for (double t : grid) {
      const double v = f(t);
      if (!(v > 0.0))
        throw std::domain_error("essential constant: f must be positive on the grid");
      prefix_min = std::min(prefix_min, v);
      best = std::max(best, v / prefix_min);
    }
  }
  return best > kConstantCap ? std::numeric_limits<double>::infinity() : best;
}

// Smallest C2 with f(s) <= C2 max(1, s/t) f(t) for all grid pairs; equals the
// larger of the non-decreasing constant of f and the non-increasing constant
// of f(t)/t, so f is essentially concave iff the result is finite.
inline double peetre_constant(const std::function<double(double)>& f,
                              const std::vector<double>& grid) {
  for (double t : grid)
    if (!(t > 0.0)) throw std::domain_error("peetre constant: grid must be positive");
  const double up = essential_monotone_constant(f, grid, Monotonicity::non_decreasing);
  const double down = essential_monotone_constant(
      [&f](double t) { return f(t) / t; }, grid, Monotonicity::non_increasing);
  const double c = std::max(up, down);
  return c > kConstantCap ? std::numeric_limits<double>::infinity() : c;
}

class PiecewiseLinear {
 public:
  PiecewiseLinear(std::vector<double> x, std::vector<double> y)
      : x_(std::move(x)), y_(std::move(y)) {
    if (x_.size() != y_.size() || x_.size() < 2)
      throw std::domain_error("piecewise linear: need >= 2 matched nodes");
  }

  double operator()(double t) const {
    if (t <= x_.front()) return y_.front();
    if (t >= x_.back()) return y_.back();
    auto it = std::upper_bound(x_.begin(), x_.end(), t);
    const std::size_t k = static_cast<std::size_t>(it - x_.begin());
    const double w = (t - x_[k - 1]) / (x_[k] - x_[k - 1]);
    return y_[k - 1] + w * (y_[k] - y_[k - 1]);
  }

  const std::vector<double>& xs() const { return x_; }
  const std::vector<double>& ys() const { return y_; }

 private:
  std::vector<double> x_, y_;
};

// Upper concave envelope (upper hull) of a finite point set: the minimal
// concave function majorizing every input point.
inline PiecewiseLinear least_concave_majorant(
    std::vector<std::pair<double, double>> pts) {
  if (pts.size() < 2)
    throw std::domain_error("least concave majorant: need >= 2 points");
  std::sort(pts.begin(), pts.end());
  for (std::size_t i = 0; i + 1 < pts.size(); ++i)
    if (pts[i].first == pts[i + 1].first)
      throw std::domain_error("least concave majorant: abscissae must be distinct");
  std::vector<std::pair<double, double>> hull;
  auto ccw = [](const std::pair<double, double>& o,
                const std::pair<double, double>& a,
                const std::pair<double, double>& b) {
    return (a.first - o.first) * (b.second - o.second) -
           (a.second - o.second) * (b.first - o.first);
  };
  for (const auto& p : pts) {
    while (hull.size() >= 2 && ccw(hull[hull.size() - 2], hull.back(), p) >= 0.0)
      hull.pop_back();
    hull.push_back(p);
  }
  std::vector<double> x, y;
  x.reserve(hull.size());
  y.reserve(hull.size());
  for (const auto& p : hull) {
    x.push_back(p.first);
    y.push_back(p.second);
  }
  return PiecewiseLinear(std::move(x), std::move(y));
}

struct ViolationReport {
  double max_violation = -std::numeric_limits<double>::infinity();
  double arg_a = 0.0;
  double arg_b = 0.0;
  double tol = 0.0;
  bool pass = false;
};

namespace detail {
inline double max_abs(const ProfileFunction& J, const std::vector<double>& grid) {
  double m = 0.0;
  for (double t : grid) m = std::max(m, std::fabs(J(t)));
  return m > 0.0 ? m : 1.0;
}
}  // namespace detail

// max over grid pairs p+q < 1 of J(p+q) - J(p) - J(q), after normalizing J
// to max 1.
inline ViolationReport check_subadditive(const ProfileFunction& J,
                                         const std::vector<double>& grid,
                                         double tol = 1e-9) {
  std::vector<double> jv(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) jv[i] = J(grid[i]);
  const double scale = detail::max_abs(J, grid);
  ViolationReport rep;
  rep.tol = tol;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    for (std::size_t k = i; k < grid.size(); ++k) {
      const double p = grid[i], q = grid[k];
      if (!(p > 0.0 && q > 0.0 && p + q < 1.0)) continue;
      const double v = (J(p + q) - jv[i] - jv[k]) / scale;
      if (v > rep.max_violation) {
        rep.max_violation = v;
        rep.arg_a = p;
        rep.arg_b = q;
      }
    }
  }
  rep.pass = rep.max_violation <= tol;
  return rep;
}

// max over grid pairs (a,b) in [0,1]^2 of J(ab) - a J(b) - b J(a),
// normalized as above.
inline ViolationReport check_two_point(const ProfileFunction& J,
                                       const std::vector<double>& grid,
                                       double tol = 1e-9) {
  std::vector<double> jv(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) jv[i] = J(grid[i]);
  const double scale = detail::max_abs(J, grid);
  ViolationReport rep;
  rep.tol = tol;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    for (std::size_t k = i; k < grid.size(); ++k) {
      const double a = grid[i], b = grid[k];
      const double v = (J(a * b) - a * jv[k] - b * jv[i]) / scale;
      if (v > rep.max_violation) {
        rep.max_violation = v;
        rep.arg_a = a;
        rep.arg_b = b;
      }
    }
  }
  rep.pass = rep.max_violation <= tol;
  return rep;
}

enum class ReferenceProfile { j0, j1 };

// Essential monotone constant of J/ref restricted to (lo, hi]; nodes where
// the reference vanishes are excluded.
inline double check_ratio_monotone(const ProfileFunction& J,
                                   ReferenceProfile ref, double lo, double hi,
                                   Monotonicity dir,
                                   const std::vector<double>& grid) {
  auto ref_at = [ref](double t) {
    return ref == ReferenceProfile::j0 ? t : xlog1over(t);
  };
  std::vector<double> nodes;
  for (double t : grid)
    if (t > lo && t <= hi && ref_at(t) > 0.0) nodes.push_back(t);
  if (nodes.size() < 2)
    throw std::domain_error("check_ratio_monotone: too few usable grid nodes");
  return essential_monotone_constant(
      [&J, ref_at](double t) { return J(t) / ref_at(t); }, nodes, dir);
}

struct StampedConstant {
  double value = 1.0;    // on the base grid
  double refined = 1.0;  // on the 2x grid
  bool converged = false;
};

// PASS stamp rule: doubling the grid must move the constant by < 1%.
inline StampedConstant stable_ratio_constant(const ProfileFunction& J,
                                             ReferenceProfile ref, double lo,
                                             double hi, Monotonicity dir,
                                             std::size_t per_side = 512) {
  StampedConstant out;
  out.value = check_ratio_monotone(J, ref, lo, hi, dir,
                                   default_profile_grid(per_side));
  out.refined = check_ratio_monotone(J, ref, lo, hi, dir,
                                     default_profile_grid(2 * per_side));
  if (std::isinf(out.value) && std::isinf(out.refined)) {
    out.converged = true;
  } else {
    out.converged =
        std::isfinite(out.refined) &&
        std::fabs(out.refined - out.value) < 0.01 * std::fabs(out.refined);
  }
  return out;
}

struct EquivalenceConstants {
  double D = 1.0;   // J/J1 essentially non-decreasing on (0,1)
  double D0 = 1.0;  // J/J0 essentially non-increasing on (0,1/2]
  double D1 = 1.0;  // J/J1 essentially non-decreasing on (0,1/2]
  double C2 = 1.0;  // Peetre constant of the flat extension of J past 1/2
  double cD = 1.0;  // tensorization constant
};

struct EquivCrosscheck {
  double margin_D = 0.0;   // D0*D1/log2 * (1+slack) - D
  double margin_D0 = 0.0;  // D/log2   * (1+slack) - D0
  double margin_D1 = 0.0;  // D        * (1+slack) - D1
  double slack = 0.0;
  bool pass = false;
};

// Constant calculus among D, D0, D1 with a grid slack (the grid values are
// lower bounds of the true suprema, so both sides wobble).
inline EquivCrosscheck equivalence_crosscheck(const EquivalenceConstants& c,
                                              double slack = 0.05) {
  const double l2 = std::log(2.0);
  EquivCrosscheck out;
  out.slack = slack;
  out.margin_D = c.D0 * c.D1 / l2 * (1.0 + slack) - c.D;
  out.margin_D0 = c.D / l2 * (1.0 + slack) - c.D0;
  out.margin_D1 = c.D * (1.0 + slack) - c.D1;
  out.pass = out.margin_D >= 0.0 && out.margin_D0 >= 0.0 && out.margin_D1 >= 0.0;
  return out;
}

// Signed slack of the optimal half-line condition against a discrete
// probability measure N on [0,1]:
//   rhs = int J dN + int_0^1 J(N([0,t])) dt,  lhs = J(int t dN).
// The second integral is exact: the integrand is a step function.
inline double check_bobkov_optimal(
    const ProfileFunction& J, std::vector<std::pair<double, double>> atoms) {
  if (atoms.empty()) throw std::domain_error("bobkov check: empty measure");
  double wsum = 0.0;
  for (const auto& [t, w] : atoms) {
    if (t < 0.0 || t > 1.0 || w < 0.0)
      throw std::domain_error("bobkov check: atoms must lie in [0,1] with weights >= 0");
    wsum += w;
  }
  if (std::fabs(wsum - 1.0) > 1e-9)
    throw std::domain_error("bobkov check: weights must sum to 1");
  std::sort(atoms.begin(), atoms.end());
  double mean = 0.0, rhs = 0.0;
  for (const auto& [t, w] : atoms) {
    mean += t * w;
    rhs += w * J(t);
  }
  double prev = 0.0, cum = 0.0;
  for (const auto& [t, w] : atoms) {
    rhs += J(cum) * (t - prev);
    prev = t;
    cum += w;
  }
  rhs += J(1.0) * (1.0 - prev);
  return rhs - J(mean);
}

struct SubadditiveLimit {
  double limit = 0.0;  // extrapolated K(h)/h, h -> 0+
  double sup = 0.0;    // grid supremum of K(t)/t
  double gap = 0.0;
  bool limit_converged = false;
};

// Compares the h->0 limit of K(h)/h with sup K(t)/t for K(x) = e^x J(e^-x).
// Equality is the subadditive-limit identity; it requires K subadditive,
// i.e. J two-point subadditive, and the report states both sides either way.
inline SubadditiveLimit subadditive_limit_check(const ProfileFunction& J) {
  auto K_over = [&J](double x) { return std::exp(x) * J(std::exp(-x)) / x; };
  const auto ex = richardson_limit(K_over, std::ldexp(1.0, -8), 20, 1e-7);
  SubadditiveLimit out;
  out.limit = std::min(ex.value, kConstantCap);
  out.limit_converged = ex.converged;
  for (double t : log_spaced(1e-6, 50.0, 4000))
    out.sup = std::max(out.sup, K_over(t));
  out.sup = std::min(out.sup, kConstantCap);
  out.gap = std::fabs(out.sup - out.limit);
  return out;
}

}  // namespace isoperim
