#pragma once

// Catalog and algebra of profile functions on [0,1]: the closed-form
// catalog (J0, J1, Kbeta, Ma, Ent, MinExp), tabulated grids, scaled copies,
// suprema of coefficient-weighted Ma families, CSV I/O and the CLI
// expression mini-language.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "isoperim/grids.hpp"
#include "isoperim/numerics.hpp"

namespace isoperim {

// t*log(1/t) with the 0*inf limit hard-coded to 0.
inline double xlog1over(double t) {
  if (t < 1e-300) return 0.0;
  return -t * std::log(t);
}

inline double ma_value(double p, double a) {
  if (a < 0.5 || a > 1.0)
    throw std::domain_error("Ma: parameter must lie in [1/2, 1]");
  if (a == 1.0) return 0.0;  // p - p^1 vanishes identically
  const double inv = 1.0 / a;
  const double left = p <= 0.0 ? 0.0 : p - std::pow(p, inv);
  const double q = 1.0 - p;
  const double right = q <= 0.0 ? 0.0 : q - std::pow(q, inv);
  return std::max({left, right, 0.0});
}

inline double kbeta_value(double t, double beta) {
  if (beta < 0.0 || beta > 1.0)
    throw std::domain_error("Kbeta: exponent must lie in [0, 1]");
  const double w = t * (1.0 - t);
  if (w <= 0.0) return 0.0;
  if (beta == 0.0) return w;
  return w * std::pow(std::log(3.0 / w), beta);
}

inline double ent_value(double t) { return xlog1over(t) + xlog1over(1.0 - t); }

using CoefficientMap = std::vector<std::pair<double, double>>;  // (a, c(a))

namespace detail {
inline double interp_coeff(const CoefficientMap& cmap, double a) {
  if (a <= cmap.front().first) return cmap.front().second;
  if (a >= cmap.back().first) return cmap.back().second;
  auto it = std::upper_bound(
      cmap.begin(), cmap.end(), a,
      [](double x, const std::pair<double, double>& r) { return x < r.first; });
  const auto& hi = *it;
  const auto& lo = *(it - 1);
  const double w = (a - lo.first) / (hi.first - lo.first);
  return lo.second + w * (hi.second - lo.second);
}
}  // namespace detail

// sup_{a} c(a) * max{t - t^{1/a}, 1-t - (1-t)^{1/a}} over a finite
// coefficient map, refined by golden-section around the best grid node;
// ties break toward smaller a.
inline double sup_profile(const CoefficientMap& cmap, double t) {
  if (cmap.empty()) throw std::domain_error("sup_profile: empty a-grid");
  std::size_t best = 0;
  double best_val = -1.0;
  for (std::size_t i = 0; i < cmap.size(); ++i) {
    const double v = cmap[i].second * ma_value(t, cmap[i].first);
    if (v > best_val) {
      best_val = v;
      best = i;
    }
  }
  if (cmap.size() == 1) return std::max(best_val, 0.0);
  const double lo = cmap[best == 0 ? 0 : best - 1].first;
  const double hi = cmap[std::min(best + 1, cmap.size() - 1)].first;
  auto h = [&](double a) { return detail::interp_coeff(cmap, a) * ma_value(t, a); };
  const double a_ref = golden_max(h, lo, hi);
  return std::max(best_val, h(a_ref));
}

enum class ProfileKind {
  j0,
  j1,
  kbeta,
  ma,
  ent,
  min_exp,
  tabulated,
  sup_ma,
  scaled,
  custom
};

class ProfileFunction {
 public:
  ProfileFunction() : ProfileFunction(j0()) {}

  static ProfileFunction j0() { return ProfileFunction(ProfileKind::j0, 0.0, "J0"); }
  static ProfileFunction j1() { return ProfileFunction(ProfileKind::j1, 0.0, "J1"); }
  static ProfileFunction ent() { return ProfileFunction(ProfileKind::ent, 0.0, "Ent"); }
  static ProfileFunction min_exp() {
    return ProfileFunction(ProfileKind::min_exp, 0.0, "MinExp");
  }
  static ProfileFunction kbeta(double beta) {
    if (beta < 0.0 || beta > 1.0)
      throw std::domain_error("Kbeta: exponent must lie in [0, 1]");
    return ProfileFunction(ProfileKind::kbeta, beta,
                           "Kbeta:" + format_param(beta));
  }
  static ProfileFunction ma(double a) {
    if (a < 0.5 || a > 1.0)
      throw std::domain_error("Ma: parameter must lie in [1/2, 1]");
    return ProfileFunction(ProfileKind::ma, a, "Ma:" + format_param(a));
  }
  static ProfileFunction tabulated(std::vector<double> t,
                                   std::vector<double> v,
                                   std::string name = "tabulated") {
    if (t.size() != v.size() || t.size() < 2)
      throw std::domain_error("tabulated profile: need >= 2 matched nodes");
    for (std::size_t i = 0; i + 1 < t.size(); ++i)
      if (!(t[i] < t[i + 1]))
        throw std::domain_error("tabulated profile: nodes must be strictly increasing");
    if (t.front() < 0.0 || t.back() > 1.0)
      throw std::domain_error("tabulated profile: nodes must lie in [0, 1]");
    ProfileFunction p(ProfileKind::tabulated, 0.0, std::move(name));
    p.table_ = std::make_shared<Table>(Table{std::move(t), std::move(v)});
    return p;
  }
  static ProfileFunction sup_ma(CoefficientMap cmap, std::string name = "sup") {
    if (cmap.empty()) throw std::domain_error("sup profile: empty a-grid");
    std::sort(cmap.begin(), cmap.end());
    ProfileFunction p(ProfileKind::sup_ma, 0.0, std::move(name));
    p.coeff_ = std::make_shared<CoefficientMap>(std::move(cmap));
    return p;
  }
  static ProfileFunction scaled(ProfileFunction inner, double factor) {
    if (!(factor >= 0.0)) throw std::domain_error("scaled profile: factor must be >= 0");
    ProfileFunction p(ProfileKind::scaled, factor,
                      format_param(factor) + "*" + inner.name());
    p.inner_ = std::make_shared<ProfileFunction>(std::move(inner));
    return p;
  }
  static ProfileFunction custom(std::function<double(double)> f,
                                std::string name) {
    ProfileFunction p(ProfileKind::custom, 0.0, std::move(name));
    p.fn_ = std::move(f);
    return p;
  }

  double operator()(double t) const {
    switch (kind_) {
      case ProfileKind::j0:
        return t;
      case ProfileKind::j1:
        return xlog1over(t);
      case ProfileKind::kbeta:
        return kbeta_value(t, param_);
      case ProfileKind::ma:
        return ma_value(t, param_);
      case ProfileKind::ent:
        return ent_value(t);
      case ProfileKind::min_exp:
        return std::max(std::min(t, 1.0 - t), 0.0);
      case ProfileKind::tabulated:
        return eval_table(t);
      case ProfileKind::sup_ma:
        return sup_profile(*coeff_, t);
      case ProfileKind::scaled:
        return param_ * (*inner_)(t);
      case ProfileKind::custom:
        return fn_(t);
    }
    return 0.0;
  }

  ProfileKind kind() const { return kind_; }
  double param() const { return param_; }
  const std::string& name() const { return name_; }
  const std::vector<double>& nodes() const {
    require_table();
    return table_->t;
  }
  const std::vector<double>& values() const {
    require_table();
    return table_->v;
  }
  const CoefficientMap& coefficients() const {
    if (!coeff_) throw std::logic_error("profile has no coefficient map");
    return *coeff_;
  }

 private:
  struct Table {
    std::vector<double> t, v;
  };

  ProfileFunction(ProfileKind k, double param, std::string name)
      : kind_(k), param_(param), name_(std::move(name)) {}

  static std::string format_param(double x) {
    std::ostringstream os;
    os << x;
    return os.str();
  }

  void require_table() const {
    if (!table_) throw std::logic_error("profile is not tabulated");
  }

  // Piecewise linear between nodes; outside the tabulated range the profile
  // continues linearly to the anchors (0,0) and (1,0).
  double eval_table(double t) const {
    const auto& ts = table_->t;
    const auto& vs = table_->v;
    if (t <= ts.front()) {
      if (ts.front() <= 0.0) return vs.front();
      if (t <= 0.0) return 0.0;
      return vs.front() * t / ts.front();
    }
    if (t >= ts.back()) {
      if (ts.back() >= 1.0) return vs.back();
      if (t >= 1.0) return 0.0;
      return vs.back() * (1.0 - t) / (1.0 - ts.back());
    }
    auto it = std::upper_bound(ts.begin(), ts.end(), t);
    const std::size_t k = static_cast<std::size_t>(it - ts.begin());
    const double w = (t - ts[k - 1]) / (ts[k] - ts[k - 1]);
    return vs[k - 1] + w * (vs[k] - vs[k - 1]);
  }

  ProfileKind kind_;
  double param_;
  std::string name_;
  std::shared_ptr<const Table> table_;
  std::shared_ptr<const ProfileFunction> inner_;
  std::shared_ptr<const CoefficientMap> coeff_;
  std::function<double(double)> fn_;
};

inline double eval(const ProfileFunction& p, double t) { return p(t); }

inline double symmetry_defect(const ProfileFunction& p,
                              const std::vector<double>& grid) {
  double worst = 0.0;
  for (double t : grid)
    worst = std::max(worst, std::fabs(p(t) - p(1.0 - t)));
  return worst;
}

// Evaluate p on {0} + grid + {1} and freeze as a piecewise-linear table.
inline ProfileFunction tabulate(const ProfileFunction& p,
                                const std::vector<double>& grid) {
  std::vector<double> ts;
  ts.reserve(grid.size() + 2);
  ts.push_back(0.0);
  for (double t : grid)
    if (t > 0.0 && t < 1.0) ts.push_back(t);
  ts.push_back(1.0);
  std::sort(ts.begin(), ts.end());
  ts.erase(std::unique(ts.begin(), ts.end()), ts.end());
  std::vector<double> vs(ts.size());
  for (std::size_t i = 0; i < ts.size(); ++i) vs[i] = p(ts[i]);
  return ProfileFunction::tabulated(std::move(ts), std::move(vs),
                                    "tab(" + p.name() + ")");
}

// --- CSV I/O ---------------------------------------------------------------
// Profiles: two columns with header "t,J". Coefficient maps: header "a,c".

inline void save_profile_csv(const ProfileFunction& p,
                             const std::vector<double>& grid,
                             const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << "t,J\n";
  out.precision(17);
  for (double t : grid) out << t << "," << p(t) << "\n";
}

namespace detail {
inline std::vector<std::pair<double, double>> load_two_columns(
    const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::vector<std::pair<double, double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream is(line);
    double a, b;
    if (is >> a >> b) rows.emplace_back(a, b);
  }
  if (rows.size() < 2) throw std::runtime_error(path + ": expected >= 2 data rows");
  return rows;
}
}  // namespace detail

inline ProfileFunction load_profile_csv(const std::string& path) {
  auto rows = detail::load_two_columns(path);
  std::sort(rows.begin(), rows.end());
  std::vector<double> t, v;
  for (auto& r : rows) {
    t.push_back(r.first);
    v.push_back(r.second);
  }
  return ProfileFunction::tabulated(std::move(t), std::move(v),
                                    "file:" + path);
}

inline CoefficientMap load_coeff_csv(const std::string& path) {
  auto rows = detail::load_two_columns(path);
  std::sort(rows.begin(), rows.end());
  return rows;
}

// Expression mini-language: J0 | J1 | Kbeta:<b> | Ma:<a> | Ent | MinExp |
// file:<path.csv> | sup:<coeff.csv>
inline ProfileFunction parse_profile(const std::string& expr) {
  auto starts_with = [&expr](const char* pre) {
    return expr.rfind(pre, 0) == 0;
  };
  if (expr == "J0") return ProfileFunction::j0();
  if (expr == "J1") return ProfileFunction::j1();
  if (expr == "Ent") return ProfileFunction::ent();
  if (expr == "MinExp") return ProfileFunction::min_exp();
  if (starts_with("Kbeta:"))
    return ProfileFunction::kbeta(std::stod(expr.substr(6)));
  if (starts_with("Ma:")) return ProfileFunction::ma(std::stod(expr.substr(3)));
  if (starts_with("file:")) return load_profile_csv(expr.substr(5));
  if (starts_with("sup:"))
    return ProfileFunction::sup_ma(load_coeff_csv(expr.substr(4)),
                                   "sup:" + expr.substr(4));
  throw std::domain_error("unknown profile expression: " + expr);
}

}  // namespace isoperim
