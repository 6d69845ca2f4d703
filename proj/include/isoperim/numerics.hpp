#pragma once

// Low-level numerical routines shared by the library: adaptive quadrature
// (with a tangent substitution for unbounded intervals), bracketed root
// finding, golden-section maximization, Richardson extrapolation and a
// deterministic seed-splitting helper for Monte Carlo paths.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace isoperim {

inline constexpr double kQuadratureTol = 1e-10;

// Thrown when an iterative scheme cannot meet its tolerance; carries the
// tolerance actually achieved.
class numerical_error : public std::runtime_error {
 public:
  numerical_error(const std::string& what, double achieved)
      : std::runtime_error(what + " (achieved tolerance " +
                           std::to_string(achieved) + ")"),
        achieved_(achieved) {}
  double achieved_tolerance() const { return achieved_; }

 private:
  double achieved_;
};

namespace detail {

struct SimpsonState {
  double tol_spent = 0.0;
  long evals = 0;
};

inline double simpson(double fa, double fm, double fb, double h) {
  return h / 6.0 * (fa + 4.0 * fm + fb);
}

inline double adaptive_simpson_rec(const std::function<double(double)>& f,
                                   double a, double b, double fa, double fm,
                                   double fb, double whole, double tol,
                                   int depth, SimpsonState& st) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  st.evals += 2;
  const double left = simpson(fa, flm, fm, m - a);
  const double right = simpson(fm, frm, fb, b - m);
  const double err = (left + right - whole) / 15.0;
  if (depth <= 0) {
    st.tol_spent = std::max(st.tol_spent, std::fabs(err));
    return left + right + err;
  }
  if (std::fabs(err) <= tol) {
    st.tol_spent = std::max(st.tol_spent, std::fabs(err));
    return left + right + err;
  }
  return adaptive_simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1,
                              st) +
         adaptive_simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol,
                              depth - 1, st);
}

}  // namespace detail

// Adaptive Simpson on a finite interval with an absolute tolerance.
inline double integrate_finite(const std::function<double(double)>& f,
                               double a, double b,
                               double abs_tol = kQuadratureTol) {
  if (!(a <= b)) std::swap(a, b);
  if (a == b) return 0.0;
  detail::SimpsonState st;
  const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  const double whole = detail::simpson(fa, fm, fb, b - a);
  const double v = detail::adaptive_simpson_rec(f, a, b, fa, fm, fb, whole,
                                                abs_tol, 48, st);
  if (st.tol_spent > 64.0 * abs_tol)
    throw numerical_error("quadrature did not converge", st.tol_spent);
  return v;
}

// Integral of f over [a,b] where either bound may be infinite; unbounded
// ranges are mapped through x = tan(u). The integrand is treated as 0 at
// non-finite abscissae (probability densities vanish at infinity).
inline double integrate(const std::function<double(double)>& f, double a,
                        double b, double abs_tol = kQuadratureTol) {
  const bool inf_a = std::isinf(a);
  const bool inf_b = std::isinf(b);
  if (!inf_a && !inf_b) return integrate_finite(f, a, b, abs_tol);
  auto g = [&f](double u) {
    const double x = std::tan(u);
    if (!std::isfinite(x)) return 0.0;
    const double c = std::cos(u);
    const double v = f(x);
    return v == 0.0 ? 0.0 : v / (c * c);
  };
  const double ua = inf_a ? (a < 0 ? -std::asin(1.0) : std::asin(1.0))
                          : std::atan(a);
  const double ub = inf_b ? (b < 0 ? -std::asin(1.0) : std::asin(1.0))
                          : std::atan(b);
  return integrate_finite(g, ua, ub, abs_tol);
}

struct RootOptions {
  double residual_tol = 1e-12;   // |g(x)| target
  double width_frac = 4.0;       // bracket-width fallback, in ulps
  int max_iter = 120;
};

// Root of an increasing function g on a bracket [lo, hi] with
// g(lo) <= 0 <= g(hi): bisection interleaved with secant steps.
inline double solve_increasing(const std::function<double(double)>& g,
                               double lo, double hi,
                               const RootOptions& opt = {}) {
  double glo = g(lo), ghi = g(hi);
  if (glo > 0.0 || ghi < 0.0)
    throw std::invalid_argument("solve_increasing: invalid bracket");
  if (glo == 0.0) return lo;
  if (ghi == 0.0) return hi;
  double best_x = 0.5 * (lo + hi);
  double best_r = std::numeric_limits<double>::infinity();
  for (int it = 0; it < opt.max_iter; ++it) {
    double x;
    if (it % 3 == 2 && ghi != glo) {
      x = lo - glo * (hi - lo) / (ghi - glo);  // secant
      if (!(x > lo && x < hi)) x = 0.5 * (lo + hi);
    } else {
      x = 0.5 * (lo + hi);
    }
    const double gx = g(x);
    if (std::fabs(gx) < best_r) {
      best_r = std::fabs(gx);
      best_x = x;
    }
    if (best_r <= opt.residual_tol) return best_x;
    if (gx <= 0.0) {
      lo = x;
      glo = gx;
    } else {
      hi = x;
      ghi = gx;
    }
    const double eps = std::numeric_limits<double>::epsilon();
    if (hi - lo <= opt.width_frac * eps * (1.0 + std::fabs(lo))) return best_x;
  }
  return best_x;
}

// Argmax of f on [a, b] by golden-section search; f need only be unimodal
// near the optimum (callers seed the bracket from a grid scan).
inline double golden_max(const std::function<double(double)>& f, double a,
                         double b, int iters = 80) {
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = b - phi * (b - a);
  double x2 = a + phi * (b - a);
  double f1 = f(x1), f2 = f(x2);
  for (int i = 0; i < iters && b - a > 1e-14 * (1.0 + std::fabs(a)); ++i) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + phi * (b - a);
      f2 = f(x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - phi * (b - a);
      f1 = f(x1);
    }
  }
  return f1 > f2 ? x1 : x2;
}

inline double golden_min(const std::function<double(double)>& f, double a,
                         double b, int iters = 80) {
  return golden_max([&f](double x) { return -f(x); }, a, b, iters);
}

struct Extrapolation {
  double value = 0.0;
  double error = std::numeric_limits<double>::infinity();
  bool converged = false;
};

// Limit of q(h) as h -> 0+ from a geometric ladder h0 * 2^{-k}:
// first-order then second-order Richardson, declared converged when
// successive second-order extrapolants agree to rel_tol.
inline Extrapolation richardson_limit(const std::function<double(double)>& q,
                                      double h0, int halvings,
                                      double rel_tol = 1e-5) {
  std::vector<double> qs(static_cast<std::size_t>(halvings) + 1);
  for (int k = 0; k <= halvings; ++k) qs[k] = q(h0 * std::ldexp(1.0, -k));
  std::vector<double> r1(qs.size() - 1), r2;
  for (std::size_t k = 0; k + 1 < qs.size(); ++k) r1[k] = 2.0 * qs[k + 1] - qs[k];
  r2.resize(r1.size() - 1);
  for (std::size_t k = 0; k + 1 < r1.size(); ++k)
    r2[k] = (4.0 * r1[k + 1] - r1[k]) / 3.0;
  Extrapolation out;
  out.value = r2.back();
  for (std::size_t k = 0; k + 1 < r2.size(); ++k) {
    const double diff = std::fabs(r2[k + 1] - r2[k]);
    const double scale = std::max(std::fabs(r2[k + 1]), 1e-30);
    if (diff <= rel_tol * std::max(scale, 1e-12)) {
      out.value = r2[k + 1];
      out.error = diff;
      out.converged = true;
      return out;
    }
    out.error = diff;
  }
  return out;
}

// SplitMix64; used to derive independent, reproducible RNG streams from a
// root seed (stream i of seed s is splitmix(s ^ mix(i))).
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t derive_stream(std::uint64_t root, std::uint64_t index) {
  std::uint64_t s = root + 0x632be59bd9b4e019ULL * (index + 1);
  return splitmix64(s);
}

// Static partition of [0, n) over at most `jobs` threads; the body must be
// independent per index (no ordering contract).
template <class Fn>
void parallel_for(std::size_t n, unsigned jobs, Fn&& fn) {
  if (jobs <= 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  jobs = std::min<unsigned>(jobs, static_cast<unsigned>(n));
  std::vector<std::thread> threads;
  threads.reserve(jobs);
  for (unsigned w = 0; w < jobs; ++w) {
    threads.emplace_back([&, w] {
      for (std::size_t i = w; i < n; i += jobs) fn(i);
    });
  }
  for (auto& t : threads) t.join();
}

}  // namespace isoperim
