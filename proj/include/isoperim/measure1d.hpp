#pragma once

// One-dimensional measures given by a positive continuous density on a
// possibly unbounded interval: CDF / quantile evaluation by adaptive
// quadrature and bracketed root finding, profile extraction, reconstruction
// of a measure from a profile, and boundary measure of interval unions.

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

inline constexpr double kInf = std::numeric_limits<double>::infinity();
inline constexpr double kDivergenceThreshold = 1e6;  // quantile mass -> infinite support

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

// Sorted union of closed intervals; overlapping or touching parts merge so
// that interior endpoints never appear.
class IntervalUnion {
 public:
  IntervalUnion() = default;
  explicit IntervalUnion(std::vector<Interval> parts) {
    for (const auto& p : parts)
      if (!(p.lo <= p.hi))
        throw std::domain_error("IntervalUnion: interval with lo > hi");
    std::sort(parts.begin(), parts.end(),
              [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
    for (const auto& p : parts) {
      if (!parts_.empty() && p.lo <= parts_.back().hi) {
        parts_.back().hi = std::max(parts_.back().hi, p.hi);
      } else {
        parts_.push_back(p);
      }
    }
  }

  const std::vector<Interval>& parts() const { return parts_; }
  bool empty() const { return parts_.empty(); }

 private:
  std::vector<Interval> parts_;
};

class Measure1D {
 public:
  struct Config {
    double support_lo = -kInf;
    double support_hi = kInf;
    std::function<double(double)> density;
    double normalization_tol = 1e-6;
    std::string name = "measure";
    bool even = false;
    bool log_concave = false;
    std::function<double(double)> cdf_override;
    std::function<double(double)> quantile_override;
    bool validate = true;
  };

  explicit Measure1D(Config cfg) : cfg_(std::move(cfg)) {
    if (!cfg_.density) throw std::domain_error("Measure1D: density evaluator required");
    if (!(cfg_.support_lo < cfg_.support_hi))
      throw std::domain_error("Measure1D: empty support interval");
    if (cfg_.validate) validate_invariants();
  }

  double density(double x) const {
    if (!std::isfinite(x) || x <= cfg_.support_lo || x >= cfg_.support_hi)
      return 0.0;
    return cfg_.density(x);
  }

  double support_lo() const { return cfg_.support_lo; }
  double support_hi() const { return cfg_.support_hi; }
  const std::string& name() const { return cfg_.name; }
  bool even() const { return cfg_.even; }
  bool log_concave() const { return cfg_.log_concave; }
  double normalization_tol() const { return cfg_.normalization_tol; }
  const std::function<double(double)>& cdf_override() const {
    return cfg_.cdf_override;
  }
  const std::function<double(double)>& quantile_override() const {
    return cfg_.quantile_override;
  }

  // Probe points strictly inside the support, denser toward finite ends and
  // covering the tails of unbounded supports via the tangent map.
  std::vector<double> probe_points(std::size_t n = 201) const {
    const double ua = std::atan(std::max(cfg_.support_lo, -1e15));
    const double ub = std::atan(std::min(cfg_.support_hi, 1e15));
    std::vector<double> xs;
    xs.reserve(n);
    for (std::size_t i = 1; i + 1 < n; ++i) {
      const double u = ua + (ub - ua) * static_cast<double>(i) /
                                static_cast<double>(n - 1);
      xs.push_back(std::tan(u));
    }
    return xs;
  }

 private:
  void validate_invariants() {
    const auto xs = probe_points();
    double fmax = 0.0;
    for (double x : xs) {
      const double f = cfg_.density(x);
      if (!(f > 0.0))
        throw std::domain_error(cfg_.name +
                                ": density must be positive inside the support");
      fmax = std::max(fmax, f);
    }
    const double mass =
        integrate([this](double x) { return density(x); }, cfg_.support_lo,
                  cfg_.support_hi, 0.1 * cfg_.normalization_tol);
    if (std::fabs(mass - 1.0) > cfg_.normalization_tol)
      throw std::domain_error(cfg_.name + ": density mass " +
                              std::to_string(mass) + " is not 1");
    if (cfg_.even) {
      for (double x : xs) {
        if (-x <= cfg_.support_lo || -x >= cfg_.support_hi)
          throw std::domain_error(cfg_.name + ": even flag on asymmetric support");
        if (std::fabs(cfg_.density(x) - cfg_.density(-x)) > 1e-8 * fmax)
          throw std::domain_error(cfg_.name + ": density is not even");
      }
    }
    if (cfg_.log_concave) {
      for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
        const double m = 0.5 * (xs[i] + xs[i + 1]);
        const double lhs = std::log(cfg_.density(m));
        const double rhs = 0.5 * (std::log(cfg_.density(xs[i])) +
                                  std::log(cfg_.density(xs[i + 1])));
        if (lhs < rhs - 1e-9 * (1.0 + std::fabs(rhs)))
          throw std::domain_error(cfg_.name + ": density is not log-concave");
      }
    }
  }

  Config cfg_;
};

inline double cdf(const Measure1D& mu, double x) {
  if (x <= mu.support_lo()) return 0.0;
  if (x >= mu.support_hi()) return 1.0;
  if (mu.cdf_override()) {
    return std::clamp(mu.cdf_override()(x), 0.0, 1.0);
  }
  const double v = integrate([&mu](double s) { return mu.density(s); },
                             mu.support_lo(), x);
  return std::clamp(v, 0.0, 1.0);
}

inline double quantile(const Measure1D& mu, double t) {
  if (!(t > 0.0 && t < 1.0))
    throw std::domain_error(
        "quantile: t must lie in (0,1); endpoints map to the support ends");
  if (mu.quantile_override()) return mu.quantile_override()(t);
  // Bracket the root of cdf(x) = t, growing geometrically into unbounded ends.
  double lo = mu.support_lo(), hi = mu.support_hi();
  if (std::isinf(lo)) {
    lo = std::isfinite(hi) ? hi - 1.0 : -1.0;
    double step = 1.0;
    while (cdf(mu, lo) > t) {
      lo -= step;
      step *= 2.0;
      if (step > 1e300) throw numerical_error("quantile: bracket not found", t);
    }
  }
  if (std::isinf(hi)) {
    hi = std::isfinite(mu.support_lo()) ? mu.support_lo() + 1.0 : 1.0;
    double step = 1.0;
    while (cdf(mu, hi) < t) {
      hi += step;
      step *= 2.0;
      if (step > 1e300) throw numerical_error("quantile: bracket not found", t);
    }
  }
  return solve_increasing([&mu, t](double x) { return cdf(mu, x) - t; }, lo, hi);
}

// Boundary density of the half-line of mass t; 0 at t in {0,1}.
inline double profile_J(const Measure1D& mu, double t) {
  if (t == 0.0 || t == 1.0) return 0.0;
  return mu.density(quantile(mu, t));
}

namespace detail {

// One-sided mass of 1/J toward an endpoint of (0,1), marched geometrically
// in s = log distance from the endpoint. Decides finite vs infinite support:
// the partial integral exceeding kDivergenceThreshold means infinite; below
// the double-resolution horizon (s ~ 36) the local exponent of J is probed
// and a sub-linear tail is summed in closed form.
inline double profile_support_end(const ProfileFunction& J, bool upper) {
  auto at = [&J, upper](double s) {
    const double d = std::exp(-s);
    return upper ? J(1.0 - d) : J(d);
  };
  auto integrand = [&at](double s) {
    const double v = at(s);
    return v > 0.0 ? std::exp(-s) / v : kInf;
  };
  const double s0 = std::log(2.0);  // distance 1/2 from the endpoint
  double partial = 0.0;
  double s = s0;
  const double s_cap = 36.0;
  while (s < s_cap) {
    const double s_next = std::min(s + 1.0, s_cap);
    partial += integrate_finite(integrand, s, s_next, 1e-12);
    if (partial > kDivergenceThreshold) return kInf;
    s = s_next;
  }
  // local exponent p of J against the distance to the endpoint
  const double j0 = at(30.0), j1 = at(33.0), j2 = at(36.0);
  if (!(j0 > 0.0 && j1 > 0.0 && j2 > 0.0)) return kInf;
  const double p = std::log(0.5 * (j0 / j1 + j1 / j2)) / 3.0;
  if (p >= 0.95) return kInf;
  const double tail = std::exp(-(1.0 - p) * s_cap) / ((1.0 - p) * at(s_cap) /
                                                      std::exp(-p * s_cap));
  const double total = partial + tail;
  return total > kDivergenceThreshold ? kInf : total;
}

}  // namespace detail

// Inverse of the profile map: the measure whose quantile is
// Q(t) = int_{1/2}^t du / J(u) (median at 0) and whose density at Q(t) is
// J(t). The support end is finite exactly when the mass of 1/J converges
// there.
inline Measure1D measure_from_profile(const ProfileFunction& J) {
  {
    const auto grid = two_sided_log_grid(128, 1e-9);
    for (double t : grid)
      if (!(J(t) > 0.0))
        throw std::domain_error("measure_from_profile: profile vanishes at t=" +
                                std::to_string(t));
  }
  // Integrate 1/J in log distance from the nearer endpoint; direct
  // integration over many decades starves an absolute-tolerance scheme.
  auto q_raw = [J](double t) {
    if (t == 0.5) return 0.0;
    const double l2 = std::log(2.0);
    if (t < 0.5) {
      auto g = [&J](double s) {
        const double u = std::exp(-s);
        return u / J(u);
      };
      return -integrate_finite(g, l2, std::log(1.0 / t), 1e-12);
    }
    auto g = [&J](double s) {
      const double d = std::exp(-s);
      return d / J(1.0 - d);
    };
    return integrate_finite(g, l2, std::log(1.0 / (1.0 - t)), 1e-12);
  };
  const double hi = detail::profile_support_end(J, true);
  const double lo = -detail::profile_support_end(J, false);
  const double t_edge = 1e-14;
  const double q_lo_cap = q_raw(t_edge);
  const double q_hi_cap = q_raw(1.0 - t_edge);

  auto q_inv = [q_raw, lo, hi, q_lo_cap, q_hi_cap, t_edge](double x) {
    if (x <= lo || x <= q_lo_cap) return x <= lo ? 0.0 : t_edge;
    if (x >= hi || x >= q_hi_cap) return x >= hi ? 1.0 : 1.0 - t_edge;
    RootOptions opt;
    opt.residual_tol = 1e-12 * (1.0 + std::fabs(x));
    return solve_increasing([&q_raw, x](double t) { return q_raw(t) - x; },
                            t_edge, 1.0 - t_edge, opt);
  };

  const auto flag_grid = default_profile_grid(64, 1e-6);
  double jmax = 0.0;
  for (double t : flag_grid) jmax = std::max(jmax, J(t));
  const bool even_flag = symmetry_defect(J, flag_grid) <= 1e-9 * jmax;
  bool concave = true;
  for (std::size_t i = 0; i + 1 < flag_grid.size() && concave; ++i) {
    const double m = 0.5 * (flag_grid[i] + flag_grid[i + 1]);
    if (J(m) < 0.5 * (J(flag_grid[i]) + J(flag_grid[i + 1])) - 1e-9 * jmax)
      concave = false;
  }

  Measure1D::Config cfg;
  cfg.support_lo = lo;
  cfg.support_hi = hi;
  cfg.density = [J, q_inv](double x) { return J(q_inv(x)); };
  cfg.cdf_override = q_inv;
  cfg.quantile_override = [q_raw](double t) { return q_raw(t); };
  cfg.name = "reconstructed(" + J.name() + ")";
  cfg.even = even_flag;
  cfg.log_concave = concave;
  cfg.validate = false;  // normalization and positivity hold by construction
  return Measure1D(std::move(cfg));
}

// Minkowski content of an interval union: the density summed over endpoints
// strictly inside the open support (the enlargement is clipped to the
// space, so endpoints sitting on the support boundary contribute nothing).
inline double boundary_measure_1d(const Measure1D& mu, const IntervalUnion& A) {
  double total = 0.0;
  for (const auto& part : A.parts()) {
    if (part.lo > mu.support_lo() && part.lo < mu.support_hi())
      total += mu.density(part.lo);
    if (part.hi > mu.support_lo() && part.hi < mu.support_hi())
      total += mu.density(part.hi);
  }
  return total;
}

struct HalflineReport {
  double symmetry_defect = 0.0;
  double subadditivity_violation = 0.0;
  double tol = 0.0;
  bool half_lines_optimal = false;
};

// Half-lines solve the isoperimetric problem iff the profile is symmetric
// about 1/2 and subadditive; both defects are measured on the grid after
// normalizing the profile to max 1.
inline HalflineReport check_halfline_optimal(
    const Measure1D& mu, const std::vector<double>& grid = linspace(0.02, 0.98, 33),
    double tol = 1e-8) {
  std::vector<double> j(grid.size());
  double jmax = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    j[i] = profile_J(mu, grid[i]);
    jmax = std::max(jmax, j[i]);
  }
  HalflineReport rep;
  rep.tol = tol;
  for (std::size_t i = 0; i < grid.size(); ++i)
    rep.symmetry_defect = std::max(
        rep.symmetry_defect, std::fabs(j[i] - profile_J(mu, 1.0 - grid[i])));
  for (std::size_t i = 0; i < grid.size(); ++i) {
    for (std::size_t k = i; k < grid.size(); ++k) {
      const double p = grid[i], q = grid[k];
      if (p + q >= 1.0) break;
      rep.subadditivity_violation = std::max(
          rep.subadditivity_violation, profile_J(mu, p + q) - j[i] - j[k]);
    }
  }
  if (jmax > 0.0) {
    rep.symmetry_defect /= jmax;
    rep.subadditivity_violation /= jmax;
  }
  rep.half_lines_optimal =
      rep.symmetry_defect <= tol && rep.subadditivity_violation <= tol;
  return rep;
}

// --- measure catalog --------------------------------------------------------

inline Measure1D logistic_measure() {
  Measure1D::Config cfg;
  cfg.density = [](double x) {
    const double e = std::exp(-std::fabs(x));
    return e / ((1.0 + e) * (1.0 + e));
  };
  cfg.name = "logistic";
  cfg.even = true;
  cfg.log_concave = true;
  return Measure1D(std::move(cfg));
}

inline Measure1D dexp_measure() {
  Measure1D::Config cfg;
  cfg.density = [](double x) { return 0.5 * std::exp(-std::fabs(x)); };
  cfg.name = "dexp";
  cfg.even = true;
  cfg.log_concave = true;
  return Measure1D(std::move(cfg));
}

inline Measure1D gaussian_measure() {
  Measure1D::Config cfg;
  cfg.density = [](double x) {
    return std::exp(-0.5 * x * x) / std::sqrt(8.0 * std::atan(1.0));
  };
  cfg.name = "gaussian";
  cfg.even = true;
  cfg.log_concave = true;
  return Measure1D(std::move(cfg));
}

inline Measure1D uniform_measure() {
  Measure1D::Config cfg;
  cfg.support_lo = 0.0;
  cfg.support_hi = 1.0;
  cfg.density = [](double) { return 1.0; };
  cfg.name = "uniform";
  cfg.log_concave = true;
  return Measure1D(std::move(cfg));
}

// density proportional to exp(-|t|^rho); log-concave exactly when rho >= 1
inline Measure1D boltzmann_measure(double rho) {
  if (!(rho > 0.0)) throw std::domain_error("boltzmann: rho must be positive");
  const double z = 2.0 * std::tgamma(1.0 + 1.0 / rho);
  Measure1D::Config cfg;
  cfg.density = [rho, z](double x) {
    return std::exp(-std::pow(std::fabs(x), rho)) / z;
  };
  cfg.name = "boltzmann:rho=" + std::to_string(rho);
  cfg.even = true;
  cfg.log_concave = rho >= 1.0;
  return Measure1D(std::move(cfg));
}

inline Measure1D measure_by_name(const std::string& name) {
  if (name == "logistic") return logistic_measure();
  if (name == "dexp") return dexp_measure();
  if (name == "gaussian") return gaussian_measure();
  if (name == "uniform") return uniform_measure();
  if (name.rfind("boltzmann:rho=", 0) == 0)
    return boltzmann_measure(std::stod(name.substr(14)));
  throw std::domain_error("unknown measure: " + name);
}

}  // namespace isoperim
