#pragma once

// Closed forms for the doubly symmetric binary case: mu = psi = Bern(1/2),
// Hamming distortion.

#include <cmath>
#include <vector>

#include "ocrd/error.hpp"
#include "ocrd/info.hpp"
#include "ocrd/region/types.hpp"

namespace ocrd {

namespace detail {

inline void check_half_interval(double v, const char* what) {
  if (std::isnan(v)) throw ValidationError(std::string(what) + ": NaN");
  if (v < 0.0 || v > 0.5) throw DomainError(std::string(what) + ": value outside [0, 1/2]");
}

/// Composition of two binary symmetric channels: BSC(a1) then BSC(a2).
inline double bsc_cascade(double a1, double a2) { return a1 + a2 - 2.0 * a1 * a2; }

}  // namespace detail

/// Crossover a1 = (1 - sqrt(1 - 2 a0)) / 2 with BSC(a1) o BSC(a1) = BSC(a0).
inline double bsc_half_crossover(double a0) {
  detail::check_half_interval(a0, "bsc_half_crossover");
  return 0.5 * (1.0 - std::sqrt(1.0 - 2.0 * a0));
}

/// Wyner's common information of the doubly symmetric binary source with
/// crossover a0: 1 + h(a0) - 2 h(a1).
inline double wyner_bsc(double a0) {
  detail::check_half_interval(a0, "wyner_bsc");
  return 1.0 + binary_entropy(a0) - 2.0 * binary_entropy(bsc_half_crossover(a0));
}

/// C_0 at distortion d. The common information decreases in a0, so the
/// minimum over a0 <= d sits at a0 = d.
inline double c0_bsc(double d) {
  detail::check_half_interval(d, "c0_bsc");
  return wyner_bsc(d);
}

/// Rate of the channel-synthesis route at R_c = 0 (the separated solution).
inline double synthesis_inner_min_sum_rate_bsc(double d) {
  detail::check_half_interval(d, "synthesis_inner_min_sum_rate_bsc");
  return c0_bsc(d);
}

/// Triple achieving Wyner's common information for crossover a0:
/// U ~ Bern(1/2), X and Y are BSC(a1) outputs of U.
inline MarkovTriple wyner_bsc_triple(double a0) {
  const double a1 = bsc_half_crossover(a0);
  return MarkovTriple(Pmf::uniform(2), Channel::bsc(a1), Channel::bsc(a1));
}

struct BscBoundaryPoint {
  double rc = 0.0;
  double r_min = 0.0;
  double a1 = 0.0;  // encoder-side crossover, P_{U|X} = BSC(a1)
  double a2 = 0.0;  // decoder-side crossover, P_{Y|U} = BSC(a2)
};

struct BscBoundaryOptions {
  double bisection_tolerance = 1e-10;
};

/// One point of the symmetric-auxiliary inner bound. For rc in [0, h(d)) the
/// minimum rate solves h(a1) - h(a2) = rc with a1 + a2 - 2 a1 a2 = d, which
/// after eliminating a2 = (d - a1) / (1 - 2 a1) is monotone in a1 on
/// [a*, d]. At and beyond rc = h(d) the rate stays at 1 - h(d).
inline BscBoundaryPoint bsc_boundary_point(double d, double rc, const BscBoundaryOptions& opt = {}) {
  if (std::isnan(d) || std::isnan(rc)) throw ValidationError("bsc_boundary: NaN input");
  if (!(d > 0.0 && d < 0.5)) throw DomainError("bsc_boundary: distortion outside (0, 1/2)");
  if (rc < 0.0) throw ValidationError("bsc_boundary: negative common randomness rate");
  const double hd = binary_entropy(d);
  if (rc >= hd) return {rc, 1.0 - hd, d, 0.0};
  auto a2_of = [d](double a1) { return std::max(0.0, (d - a1) / (1.0 - 2.0 * a1)); };
  auto g = [&](double a1) { return binary_entropy(a1) - binary_entropy(a2_of(a1)) - rc; };
  double lo = bsc_half_crossover(d), hi = d;  // g(lo) = -rc <= 0, g(hi) = h(d) - rc > 0
  while (hi - lo > opt.bisection_tolerance) {
    const double mid = 0.5 * (lo + hi);
    (g(mid) > 0.0 ? hi : lo) = mid;
  }
  const double a1 = 0.5 * (lo + hi);
  return {rc, 1.0 - binary_entropy(a1), a1, a2_of(a1)};
}

inline RegionCurve bsc_boundary(double d, const std::vector<double>& rc_grid, const BscBoundaryOptions& opt = {}) {
  check_rate_grid(rc_grid);
  RegionCurve curve{d, {}, RegionTag::main_inner};
  curve.points.reserve(rc_grid.size());
  for (double rc : rc_grid) {
    const auto p = bsc_boundary_point(d, rc, opt);
    curve.points.push_back({p.rc, p.r_min});
  }
  return curve;
}

/// The (U ~ Bern(1/2), BSC(a1), BSC(a2)) triple behind a boundary point.
inline MarkovTriple bsc_boundary_triple(const BscBoundaryPoint& p) {
  return MarkovTriple(Pmf::uniform(2), Channel::bsc(p.a1), Channel::bsc(p.a2));
}

}  // namespace ocrd
