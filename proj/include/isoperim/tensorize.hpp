#pragma once

// Dimension-free isoperimetric machinery: the ratio transform Phi, its
// sup-representation with coefficient map c(a), the two-sided sandwich
// check, certified lower bounds J/c_D for infinite products, the
// Beckner-type functional inequality, the phi-variance subadditivity step on
// finite product tables, and the infinite-dimensional upper envelope.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "isoperim/conditions.hpp"
#include "isoperim/grids.hpp"
#include "isoperim/measure1d.hpp"
#include "isoperim/numerics.hpp"
#include "isoperim/profiles.hpp"

namespace isoperim {

inline double alpha_domain_max() { return 1.0 / std::log(2.0); }

// Phi(alpha) = J(e^{-1/alpha}) / e^{-1/alpha}; by construction
// alpha * Phi(alpha) = (J/J1)(e^{-1/alpha}). Arguments so small that
// e^{-1/alpha} underflows are clamped at 1/alpha = 600 (the tail is
// reported from the clamp, not extrapolated).
inline double phi_from_J(const ProfileFunction& J, double alpha) {
  if (!(alpha > 0.0 && alpha <= alpha_domain_max() * (1.0 + 1e-12)))
    throw std::domain_error("phi_from_J: alpha must lie in (0, 1/log 2]");
  const double u = std::min(1.0 / alpha, 600.0);
  const double t = std::exp(-u);
  return J(t) * std::exp(u);
}

namespace detail {

// sup over alpha in (0,1] of h(alpha): log grid plus golden refinement
// around the best node and around an optional analytic seed.
inline double sup_over_alpha(const std::function<double(double)>& h,
                             double seed = -1.0) {
  const auto grid = log_spaced(1e-4, 1.0, 128);
  double best = -std::numeric_limits<double>::infinity();
  std::size_t best_i = 0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double v = h(grid[i]);
    if (v > best) {
      best = v;
      best_i = i;
    }
  }
  const double lo = grid[best_i == 0 ? 0 : best_i - 1];
  const double hi = grid[std::min(best_i + 1, grid.size() - 1)];
  best = std::max(best, h(golden_max(h, lo, hi)));
  if (seed > 0.0 && seed <= 1.0) {
    best = std::max(best, h(seed));
    best = std::max(best, h(golden_max(h, std::max(0.5 * seed, 1e-9),
                                       std::min(2.0 * seed, 1.0))));
  }
  return best;
}

}  // namespace detail

struct BcrReport {
  double min_lower_margin = 0.0;  // sup - Phi(1/log(1/y)) / (2 C0), scaled
  double min_upper_margin = 0.0;  // max(C0,C1) Phi(1/log(1/y)) - sup, scaled
  double scale = 1.0;
  double tol = 0.0;
  bool pass = false;
};

// Two-sided comparison of sup_{alpha in (0,1]} Phi(alpha)(1 - y^alpha)
// against Phi(1/log(1/y)); requires Phi essentially non-increasing with
// constant C0 and s*Phi(s) essentially non-decreasing with constant C1
// (computed beforehand, e.g. by essential_monotone_constant).
inline BcrReport bcr_check(const std::function<double(double)>& phi, double C0,
                           double C1, const std::vector<double>& y_grid,
                           double tol = 1e-9) {
  if (!(std::isfinite(C0) && C0 >= 1.0))
    throw std::invalid_argument(
        "bcr_check: C0 (non-increasing constant of Phi) must be finite and >= 1");
  if (!(std::isfinite(C1) && C1 >= 1.0))
    throw std::invalid_argument(
        "bcr_check: C1 (non-decreasing constant of s*Phi(s)) must be finite and >= 1");
  BcrReport rep;
  rep.tol = tol;
  rep.min_lower_margin = std::numeric_limits<double>::infinity();
  rep.min_upper_margin = std::numeric_limits<double>::infinity();
  double scale = 0.0;
  std::vector<double> sups(y_grid.size()), refs(y_grid.size());
  for (std::size_t i = 0; i < y_grid.size(); ++i) {
    const double y = y_grid[i];
    if (!(y > 0.0 && y <= 0.5))
      throw std::domain_error("bcr_check: y grid must lie in (0, 1/2]");
    auto h = [&phi, y](double a) { return phi(a) * (1.0 - std::pow(y, a)); };
    const double seed = 1.0 / std::log(1.0 / y);
    sups[i] = detail::sup_over_alpha(h, std::min(seed, 1.0));
    refs[i] = phi(seed);
    scale = std::max({scale, sups[i], refs[i]});
  }
  rep.scale = scale > 0.0 ? scale : 1.0;
  for (std::size_t i = 0; i < y_grid.size(); ++i) {
    rep.min_lower_margin = std::min(
        rep.min_lower_margin, (sups[i] - refs[i] / (2.0 * C0)) / rep.scale);
    rep.min_upper_margin = std::min(
        rep.min_upper_margin,
        (std::max(C0, C1) * refs[i] - sups[i]) / rep.scale);
  }
  rep.pass = rep.min_lower_margin >= -tol && rep.min_upper_margin >= -tol;
  return rep;
}

// a-grid for sup representations: 64 nodes on [1/2, 1-1e-6], geometric in
// alpha = 1/a - 1 so the a -> 1 tail is well resolved.
inline std::vector<double> default_a_grid(std::size_t n = 64) {
  std::vector<double> a;
  a.reserve(n);
  for (double alpha : log_spaced(1e-6, 1.0, n)) a.push_back(1.0 / (1.0 + alpha));
  std::sort(a.begin(), a.end());
  return a;
}

// c(a) = Phi(1/a - 1) / max(D0, D1) on an a-grid inside [1/2, 1).
inline CoefficientMap coefficient_map(const ProfileFunction& J, double D0,
                                      double D1,
                                      const std::vector<double>& a_grid) {
  if (!(std::isfinite(D0) && std::isfinite(D1)))
    throw std::invalid_argument("coefficient_map: constants must be finite");
  CoefficientMap out;
  out.reserve(a_grid.size());
  const double denom = std::max(D0, D1);
  for (double a : a_grid) {
    if (!(a >= 0.5 && a < 1.0))
      throw std::domain_error("coefficient_map: a must lie in [1/2, 1)");
    out.emplace_back(a, phi_from_J(J, 1.0 / a - 1.0) / denom);
  }
  return out;
}

namespace detail {

// sup over a in [1/2, 1) of c(a) (t - t^{1/a}) with the exact coefficient
// evaluator (no interpolation error enters the sandwich margins).
inline double sup_c_ma(const std::function<double(double)>& c, double t) {
  auto h = [&c, t](double alpha) {
    const double a = 1.0 / (1.0 + alpha);
    return c(a) * (t - std::pow(t, 1.0 + alpha));
  };
  double seed = -1.0;
  if (t > 0.0 && t < 0.5) seed = 1.0 / std::log(1.0 / t);
  return std::max(sup_over_alpha(h, seed), 0.0);
}

}  // namespace detail

struct SandwichReport {
  double min_lower_margin = 0.0;  // J(t) - sup on (0,1), scaled by max J
  double min_upper_margin = 0.0;  // factor*sup - J(t) on (0,1/2], scaled
  double factor = 0.0;            // 2 D0 max(D0, D1)
  double max_ratio = 0.0;         // realized sup of J / sup-representation
  double tol = 0.0;
  bool pass = false;
};

inline SandwichReport sandwich_check(const ProfileFunction& J, double D0,
                                     double D1, const std::vector<double>& grid,
                                     double tol = 1e-9) {
  const double denom = std::max(D0, D1);
  auto c = [&J, denom](double a) { return phi_from_J(J, 1.0 / a - 1.0) / denom; };
  SandwichReport rep;
  rep.tol = tol;
  rep.factor = 2.0 * D0 * std::max(D0, D1);
  rep.min_lower_margin = std::numeric_limits<double>::infinity();
  rep.min_upper_margin = std::numeric_limits<double>::infinity();
  double jmax = 0.0;
  for (double t : grid) jmax = std::max(jmax, J(t));
  if (jmax <= 0.0) jmax = 1.0;
  for (double t : grid) {
    if (!(t > 0.0 && t < 1.0)) continue;
    const double sup = detail::sup_c_ma(c, t);
    const double j = J(t);
    rep.min_lower_margin = std::min(rep.min_lower_margin, (j - sup) / jmax);
    if (t <= 0.5) {
      rep.min_upper_margin =
          std::min(rep.min_upper_margin, (rep.factor * sup - j) / jmax);
      if (sup > 0.0) rep.max_ratio = std::max(rep.max_ratio, j / sup);
    }
  }
  rep.pass = rep.min_lower_margin >= -tol && rep.min_upper_margin >= -tol;
  return rep;
}

struct CertificateOptions {
  std::size_t per_side = 512;    // grid density per side of 1/2
  double tol = 1e-9;
  bool assume_concave = false;   // skip the hull test
};

// A certified lower bound for the infinite-product profile: if I_mu >= J
// then I over any number of factors is >= J / cD, with cD = 2 (D/log 2)^2 in
// general, 2D for concave J with D > 1, and 1 for concave J with D = 1.
struct BoundCertificate {
  ProfileFunction profile;
  EquivalenceConstants constants;
  bool concave = false;
  double concavity_gap = 0.0;     // hull excess relative to max J
  bool constants_converged = false;
  CoefficientMap c_map;
  SandwichReport sandwich;

  double bound_at(double t) const { return profile(t) / constants.cD; }
  ProfileFunction bound() const {
    return ProfileFunction::scaled(profile, 1.0 / constants.cD);
  }
};

inline BoundCertificate certified_lower_bound(const ProfileFunction& J,
                                              const CertificateOptions& opt = {}) {
  const auto grid = default_profile_grid(opt.per_side);
  double jmax = 0.0;
  for (double t : grid) jmax = std::max(jmax, J(t));
  if (!(jmax > 0.0))
    throw std::domain_error("certified_lower_bound: profile is identically 0");
  const double defect = symmetry_defect(J, grid);
  if (defect > 1e-9 * jmax)
    throw std::domain_error(
        "certified_lower_bound: symmetry hypothesis failed (defect " +
        std::to_string(defect / jmax) + ")");
  if (std::fabs(J(0.0)) > 1e-12 * jmax)
    throw std::domain_error("certified_lower_bound: J(0) must vanish");

  const StampedConstant d_stamp = stable_ratio_constant(
      J, ReferenceProfile::j1, 0.0, 1.0, Monotonicity::non_decreasing,
      opt.per_side);
  if (!std::isfinite(d_stamp.refined))
    throw std::domain_error(
        "certified_lower_bound: monotone-ratio hypothesis failed (J/J1 is "
        "not essentially non-decreasing on (0,1))");
  const double D = std::max(d_stamp.value, d_stamp.refined);
  const double D0 =
      check_ratio_monotone(J, ReferenceProfile::j0, 0.0, 0.5,
                           Monotonicity::non_increasing, grid);
  const double D1 =
      check_ratio_monotone(J, ReferenceProfile::j1, 0.0, 0.5,
                           Monotonicity::non_decreasing, grid);

  // Peetre constant of J frozen past 1/2 (the extension used to build the
  // symmetric concave witness).
  std::vector<double> pos_grid = lower_half(grid);
  for (double t : linspace(0.5, 4.0, 65)) pos_grid.push_back(t);
  const double C2 = peetre_constant(
      [&J](double t) { return t < 0.5 ? J(t) : J(0.5); }, pos_grid);

  BoundCertificate cert{J, {}, false, 0.0, d_stamp.converged, {}, {}};
  cert.constants.D = D;
  cert.constants.D0 = D0;
  cert.constants.D1 = D1;
  cert.constants.C2 = C2;

  if (opt.assume_concave) {
    cert.concave = true;
  } else {
    std::vector<std::pair<double, double>> pts;
    pts.reserve(grid.size() + 2);
    pts.emplace_back(0.0, J(0.0));
    for (double t : grid) pts.emplace_back(t, J(t));
    pts.emplace_back(1.0, J(1.0));
    const PiecewiseLinear hull = least_concave_majorant(std::move(pts));
    double gap = 0.0;
    for (double t : grid) gap = std::max(gap, hull(t) - J(t));
    cert.concavity_gap = gap / jmax;
    cert.concave = cert.concavity_gap < 1e-6;
  }

  // The concave-case constant is discontinuous at D = 1; grid roundoff is
  // absorbed by a 1e-9 guard.
  if (cert.concave) {
    cert.constants.cD = D <= 1.0 + 1e-9 ? 1.0 : 2.0 * D;
  } else {
    const double l2 = std::log(2.0);
    cert.constants.cD = 2.0 * (D / l2) * (D / l2);
  }

  cert.c_map = coefficient_map(J, D0, D1, default_a_grid());
  cert.sandwich = sandwich_check(J, D0, D1, grid, opt.tol);
  return cert;
}

// Piecewise-linear test function on the line, extended by its end values.
struct RampFunction {
  std::vector<double> x, y;

  double operator()(double t) const {
    if (t <= x.front()) return y.front();
    if (t >= x.back()) return y.back();
    auto it = std::upper_bound(x.begin(), x.end(), t);
    const std::size_t k = static_cast<std::size_t>(it - x.begin());
    const double w = (t - x[k - 1]) / (x[k] - x[k - 1]);
    return y[k - 1] + w * (y[k] - y[k - 1]);
  }
};

// Signed slack of c * int |f'| dmu - ( int f dmu - (int f^a dmu)^{1/a} ) for
// a piecewise-linear f valued in [0,1]. Nonnegative whenever
// c I_mu(p) >= p - p^{1/a} for all p.
inline double beckner_check(const Measure1D& mu, double a, double c,
                            const RampFunction& f) {
  if (!(a >= 0.5 && a <= 1.0))
    throw std::domain_error("beckner_check: a must lie in [1/2, 1]");
  if (f.x.size() != f.y.size() || f.x.empty())
    throw std::domain_error("beckner_check: malformed ramp");
  for (std::size_t i = 0; i + 1 < f.x.size(); ++i)
    if (!(f.x[i] < f.x[i + 1]))
      throw std::domain_error("beckner_check: knots must be strictly increasing");
  for (double v : f.y)
    if (v < 0.0 || v > 1.0)
      throw std::domain_error("beckner_check: f must take values in [0, 1]");

  std::vector<double> cdf_at(f.x.size());
  for (std::size_t i = 0; i < f.x.size(); ++i) cdf_at[i] = cdf(mu, f.x[i]);

  double grad = 0.0;
  for (std::size_t i = 0; i + 1 < f.x.size(); ++i) {
    const double slope = (f.y[i + 1] - f.y[i]) / (f.x[i + 1] - f.x[i]);
    grad += std::fabs(slope) * (cdf_at[i + 1] - cdf_at[i]);
  }

  auto moment = [&mu, &f](double expo) {
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < f.x.size(); ++i)
      total += integrate_finite(
          [&mu, &f, expo](double t) {
            const double v = f(t);
            return (v > 0.0 ? std::pow(v, expo) : 0.0) * mu.density(t);
          },
          f.x[i], f.x[i + 1], 1e-12);
    const double y0 = f.y.front(), yn = f.y.back();
    if (y0 > 0.0) total += std::pow(y0, expo) * cdf(mu, f.x.front());
    if (yn > 0.0) total += std::pow(yn, expo) * (1.0 - cdf(mu, f.x.back()));
    return total;
  };
  const double mean = moment(1.0);
  const double mean_a = a == 1.0 ? mean : moment(a);
  return c * grad - (mean - std::pow(mean_a, 1.0 / a));
}

// Deficit of phi-variance subadditivity on a finite product table with
// phi(t) = t^{1/a}: right side minus left side of
//   E phi(Z) - phi(E Z) <= E[row deficits] + E[column deficits].
inline double lo_check(double a, const std::vector<std::vector<double>>& Z,
                       const std::vector<double>& w1,
                       const std::vector<double>& w2) {
  if (!(a >= 0.5 && a <= 1.0))
    throw std::domain_error("lo_check: a must lie in [1/2, 1] (1/phi'' concave)");
  if (Z.size() != w1.size() || w1.empty() || w2.empty())
    throw std::domain_error("lo_check: table and weights do not match");
  auto check_weights = [](const std::vector<double>& w, const char* tag) {
    double s = 0.0;
    for (double v : w) {
      if (v < 0.0) throw std::domain_error(std::string("lo_check: negative weight in ") + tag);
      s += v;
    }
    if (std::fabs(s - 1.0) > 1e-9)
      throw std::domain_error(std::string("lo_check: weights of ") + tag + " must sum to 1");
  };
  check_weights(w1, "mu1");
  check_weights(w2, "mu2");
  const double inv = 1.0 / a;
  auto phi = [inv](double t) {
    if (t < 0.0) throw std::domain_error("lo_check: table must be nonnegative");
    return std::pow(t, inv);
  };

  double ez = 0.0, ephi = 0.0;
  for (std::size_t i = 0; i < w1.size(); ++i) {
    if (Z[i].size() != w2.size())
      throw std::domain_error("lo_check: ragged table");
    for (std::size_t j = 0; j < w2.size(); ++j) {
      ez += w1[i] * w2[j] * Z[i][j];
      ephi += w1[i] * w2[j] * phi(Z[i][j]);
    }
  }
  const double lhs = ephi - phi(ez);

  double rhs = 0.0;
  for (std::size_t i = 0; i < w1.size(); ++i) {  // conditional on row i
    double m = 0.0, mp = 0.0;
    for (std::size_t j = 0; j < w2.size(); ++j) {
      m += w2[j] * Z[i][j];
      mp += w2[j] * phi(Z[i][j]);
    }
    rhs += w1[i] * (mp - phi(m));
  }
  for (std::size_t j = 0; j < w2.size(); ++j) {  // conditional on column j
    double m = 0.0, mp = 0.0;
    for (std::size_t i = 0; i < w1.size(); ++i) {
      m += w1[i] * Z[i][j];
      mp += w1[i] * phi(Z[i][j]);
    }
    rhs += w2[j] * (mp - phi(m));
  }
  return rhs - lhs;
}

struct EnvelopeResult {
  ProfileFunction envelope;
  double alpha = 0.0;  // envelope >= alpha * min(t, 1-t)
  double beta = 0.0;   // envelope <= beta * min(t log 1/t, (1-t) log 1/(1-t))
  int passes = 0;
  double final_change = 0.0;
};

// Pointwise-minimal upper envelope stable under the product-set constraint
// I(ab) <= a I(b) + b I(a) and the entropy-shaped cap with
// beta = (2/log 2) I(1/2). The reported alpha is (1/2) min I/K0 over the
// grid: min-updates preserve the K0-shaped floor, and K0 >= MinExp/2.
inline EnvelopeResult infdim_upper_envelope(const ProfileFunction& I,
                                            int iterations) {
  const std::size_t n = 513;
  std::vector<double> ts = linspace(0.0, 1.0, n);
  std::vector<double> v(n);
  double vmax = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    v[k] = I(ts[k]);
    if (v[k] < 0.0) throw std::domain_error("envelope: profile must be nonnegative");
    vmax = std::max(vmax, v[k]);
  }
  for (std::size_t k = 0; k < n; ++k)
    if (std::fabs(v[k] - v[n - 1 - k]) > 1e-9 * std::max(vmax, 1e-300))
      throw std::domain_error("envelope: input profile must be symmetric about 1/2");
  for (std::size_t k = 0; k < n / 2; ++k)
    v[k] = v[n - 1 - k] = std::min(v[k], v[n - 1 - k]);

  EnvelopeResult out{ProfileFunction::j0(), 0.0, 0.0, 0, 0.0};
  out.beta = (2.0 / std::log(2.0)) * v[n / 2];
  out.alpha = std::numeric_limits<double>::infinity();
  for (std::size_t k = 1; k + 1 < n; ++k)
    out.alpha = std::min(out.alpha, v[k] / (ts[k] * (1.0 - ts[k])));
  out.alpha = vmax > 0.0 ? 0.5 * out.alpha : 0.0;

  for (std::size_t k = 0; k < n; ++k) {
    const double cap =
        out.beta * std::min(xlog1over(ts[k]), xlog1over(1.0 - ts[k]));
    v[k] = std::min(v[k], cap);
  }

  auto interp = [&ts, &v, n](double t) {
    if (t <= 0.0) return v.front();
    if (t >= 1.0) return v.back();
    const double pos = t * static_cast<double>(n - 1);
    const std::size_t k = std::min(static_cast<std::size_t>(pos), n - 2);
    const double w = pos - static_cast<double>(k);
    return v[k] + w * (v[k + 1] - v[k]);
  };

  std::vector<double> next(n);
  for (int pass = 0; pass < iterations; ++pass) {
    next = v;
    for (std::size_t k = 1; k + 1 < n; ++k) {
      const double t = ts[k];
      double best = next[k];
      for (std::size_t m = k; m + 1 < n; ++m) {
        const double a = ts[m];
        const double b = t / a;
        const double cand = a * interp(b) + b * v[m];
        best = std::min(best, cand);
      }
      next[k] = best;
    }
    double change = 0.0;
    for (std::size_t k = 0; k < n / 2; ++k) {
      const double sym = std::min(next[k], next[n - 1 - k]);
      change = std::max({change, std::fabs(sym - v[k]),
                         std::fabs(sym - v[n - 1 - k])});
      next[k] = next[n - 1 - k] = sym;
    }
    v.swap(next);
    out.passes = pass + 1;
    out.final_change = change;
    if (change <= 1e-12 * std::max(vmax, 1e-300)) break;
  }
  out.envelope = ProfileFunction::tabulated(std::move(ts), std::move(v),
                                            "envelope(" + I.name() + ")");
  return out;
}

}  // namespace isoperim
