#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

namespace isoperim {

inline std::vector<double> linspace(double a, double b, std::size_t n) {
  std::vector<double> g(n);
  for (std::size_t i = 0; i < n; ++i)
    g[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
  return g;
}

inline std::vector<double> log_spaced(double a, double b, std::size_t n) {
  std::vector<double> g(n);
  const double la = std::log(a), lb = std::log(b);
  for (std::size_t i = 0; i < n; ++i)
    g[i] = std::exp(la + (lb - la) * static_cast<double>(i) /
                             static_cast<double>(n - 1));
  return g;
}

// Log-spaced grid on (0,1): `per_side` points from `edge` up to 1/2 and the
// mirror image 1-t, so resolution increases toward both endpoints.
inline std::vector<double> two_sided_log_grid(std::size_t per_side = 512,
                                              double edge = 1e-9) {
  std::vector<double> g = log_spaced(edge, 0.5, per_side);
  const std::size_t m = g.size();
  g.reserve(2 * m);
  for (std::size_t i = m; i-- > 0;) g.push_back(1.0 - g[i]);
  g.erase(std::unique(g.begin(), g.end()), g.end());
  return g;
}

// Default evaluation grid for profiles: two-sided log grid merged with a
// linear grid (log spacing alone is sparse near 1/2).
inline std::vector<double> default_profile_grid(std::size_t per_side = 512,
                                                double edge = 1e-9) {
  std::vector<double> g = two_sided_log_grid(per_side, edge);
  std::vector<double> lin = linspace(edge, 1.0 - edge, 257);
  g.insert(g.end(), lin.begin(), lin.end());
  std::sort(g.begin(), g.end());
  g.erase(std::unique(g.begin(), g.end()), g.end());
  return g;
}

inline std::vector<double> lower_half(const std::vector<double>& grid) {
  std::vector<double> g;
  for (double t : grid)
    if (t > 0.0 && t <= 0.5) g.push_back(t);
  return g;
}

}  // namespace isoperim
