#pragma once

// Jointly Gaussian inner bound for mu = N(0, sx^2), psi = N(0, sy^2) under
// squared error. With U ~ N(0,1), U = aX + V and Y = bU + W, the distortion
// constraint reads sx^2 + sy^2 - 2ab sx^2 <= D and the rates are
//   I(X;U) = 1/2 log2(1 / (1 - a^2 sx^2)),  I(Y;U) = 1/2 log2(sy^2 / (sy^2 - b^2)).

#include <cmath>
#include <vector>

#include "ocrd/error.hpp"
#include "ocrd/info.hpp"
#include "ocrd/region/types.hpp"

namespace ocrd {

namespace detail {

inline double gaussian_i1(const GaussianSpec& g, double a) {
  const double t = 1.0 - a * a * g.sigma_x * g.sigma_x;
  return t <= 0.0 ? kInf : -0.5 * std::log2(t);
}
inline double gaussian_i2(const GaussianSpec& g, double b) {
  const double vy = g.sigma_y * g.sigma_y;
  const double t = vy - b * b;
  return t <= 0.0 ? kInf : 0.5 * std::log2(vy / t);
}
// Half of the cross term the coupling must supply: (sx^2 + sy^2 - D) / 2.
inline double gaussian_cross(const GaussianSpec& g) {
  return 0.5 * (g.sigma_x * g.sigma_x + g.sigma_y * g.sigma_y - g.distortion);
}
inline void require_feasible(const GaussianSpec& g) {
  g.validate();
  if (!g.feasible())
    throw DomainError("gaussian spec: distortion below (sigma_x - sigma_y)^2, no coupling meets it");
}

}  // namespace detail

/// I(mu || psi, D) for Gaussian marginals: -1/2 log2(1 - r^2) with
/// correlation r = (sx^2 + sy^2 - D) / (2 sx sy) clamped to [0, 1];
/// r = 1 requires a deterministic coupling and yields +inf.
inline double gaussian_mmi(const GaussianSpec& g) {
  detail::require_feasible(g);
  const double r = std::clamp(detail::gaussian_cross(g) / (g.sigma_x * g.sigma_y), 0.0, 1.0);
  if (r >= 1.0) return kInf;
  return -0.5 * std::log2(1.0 - r * r);
}

struct GaussianBoundaryOptions {
  double bisection_tolerance = 1e-10;
};

/// Minimum R at common randomness rc (rc may be +inf).
inline double gaussian_boundary_point(const GaussianSpec& g, double rc, const GaussianBoundaryOptions& opt = {}) {
  detail::require_feasible(g);
  if (std::isnan(rc) || rc < 0.0) throw ValidationError("gaussian_boundary: rc must be nonnegative");
  const double c = detail::gaussian_cross(g);
  if (c <= 0.0) return 0.0;  // ab = 0 already meets the budget
  const double vx = g.sigma_x * g.sigma_x;
  if (c >= g.sigma_x * g.sigma_y) return kInf;  // only a = 1/sx, b = sy remains
  if (std::isinf(rc)) return gaussian_mmi(g);
  // On the active constraint b = c / (a sx^2); a ranges over [c/(sx^2 sy), 1/sx].
  // I1(a) - I2(b(a)) increases from -inf to +inf there.
  auto b_of = [&](double a) { return c / (a * vx); };
  auto gap = [&](double a) {
    return detail::gaussian_i1(g, a) - detail::gaussian_i2(g, b_of(a)) + rc;
  };
  double lo = c / (vx * g.sigma_y), hi = 1.0 / g.sigma_x;
  const double tol = opt.bisection_tolerance / g.sigma_x;
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    (gap(mid) > 0.0 ? hi : lo) = mid;
  }
  return detail::gaussian_i1(g, 0.5 * (lo + hi));
}

inline RegionCurve gaussian_boundary(const GaussianSpec& g, const std::vector<double>& rc_grid,
                                     const GaussianBoundaryOptions& opt = {}) {
  detail::require_feasible(g);
  for (std::size_t k = 0; k < rc_grid.size(); ++k) {
    if (std::isnan(rc_grid[k]) || rc_grid[k] < 0.0) throw ValidationError("rc grid: values must be nonnegative");
    if (k > 0 && !(rc_grid[k] > rc_grid[k - 1])) throw ValidationError("rc grid: values must be strictly increasing");
  }
  RegionCurve curve{g.distortion, {}, RegionTag::main_inner};
  for (double rc : rc_grid) curve.points.push_back({rc, gaussian_boundary_point(g, rc, opt)});
  return curve;
}

}  // namespace ocrd
