#pragma once

// I(mu || psi, D): minimum mutual information over couplings of mu and psi
// with expected distortion at most D.
//
// The program is convex. For a multiplier s >= 0 the Lagrangian
//   I(X;Y) + s E[rho]   (in nats)
// restricted to the transportation polytope is minimized by the Gibbs plan
// P_s = diag(alpha) exp(-s rho) diag(beta), so the solver searches s until
// E_{P_s}[rho] meets D. Every returned plan is projected exactly onto the
// polytope, hence its mutual information is an upper bound; Lagrangian
// duality gives the matching lower bound I(P_s) - s (D - E_{P_s}[rho]).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include <boost/math/tools/roots.hpp>

#include "ocrd/detail/scaling.hpp"
#include "ocrd/info.hpp"
#include "ocrd/region/types.hpp"
#include "ocrd/transport.hpp"

namespace ocrd {

struct MmiOptions {
  /// Target duality gap in bits.
  double gap_tolerance = 1e-9;
  /// Slack on the distortion budget when comparing against the OT cost.
  double feasibility_slack = 1e-12;
};

struct MmiResult {
  /// Bits; +inf when no coupling meets the distortion budget.
  double value = kInf;
  bool feasible = false;
  /// The minimizing coupling. For an infeasible budget this is the minimum
  /// distortion (optimal transport) coupling.
  Coupling argmin;
  /// Lower bound on the optimum certified by duality (bits).
  double lower_bound = kInf;
  /// Multiplier s of the distortion constraint, nats per unit distortion.
  double multiplier = 0.0;
  /// Optimal transport cost: the smallest achievable distortion.
  double min_distortion = 0.0;
};

namespace detail {

struct ReducedProblem {
  std::vector<std::size_t> rows, cols;
  std::vector<double> a, b;
  Matrix cost;
};

inline ReducedProblem reduce_support(const Pmf& mu, const Pmf& psi, const DistortionMatrix& rho) {
  ReducedProblem r;
  for (std::size_t i = 0; i < mu.size(); ++i)
    if (mu[i] > 0.0) r.rows.push_back(i), r.a.push_back(mu[i]);
  for (std::size_t j = 0; j < psi.size(); ++j)
    if (psi[j] > 0.0) r.cols.push_back(j), r.b.push_back(psi[j]);
  r.cost = Matrix(r.rows.size(), r.cols.size());
  for (std::size_t i = 0; i < r.rows.size(); ++i)
    for (std::size_t j = 0; j < r.cols.size(); ++j) r.cost(i, j) = rho(r.rows[i], r.cols[j]);
  return r;
}

inline JointPmf expand_plan(const ReducedProblem& r, const Matrix& plan, std::size_t m, std::size_t n) {
  Matrix full(m, n);
  for (std::size_t i = 0; i < r.rows.size(); ++i)
    for (std::size_t j = 0; j < r.cols.size(); ++j) full(r.rows[i], r.cols[j]) = plan(i, j);
  return JointPmf(std::move(full));
}

}  // namespace detail

inline MmiResult mmi_constrained_output(const Pmf& mu, const Pmf& psi, const DistortionMatrix& rho, double d,
                                        const MmiOptions& opt = {}) {
  if (std::isnan(d)) throw ValidationError("mmi: distortion level is NaN");
  const TransportProblem problem{mu, psi, rho};
  problem.validate();
  const OtSolution ot = solve_ot_detailed(problem);

  MmiResult res;
  res.min_distortion = ot.coupling.cost;
  const double scale = std::max(1.0, rho.max());
  if (d < ot.coupling.cost - opt.feasibility_slack * scale) {
    res.argmin = ot.coupling;
    return res;
  }
  res.feasible = true;

  auto finish = [&](JointPmf joint, double s, double gap_nats) {
    const double cost = coupling_cost(joint, rho);
    res.value = mutual_information(joint);
    res.argmin = Coupling{std::move(joint), mu, psi, cost};
    res.multiplier = s;
    res.lower_bound = std::max(0.0, res.value - gap_nats / std::log(2.0));
    return res;
  };

  const JointPmf product = JointPmf::product(mu, psi);
  if (coupling_cost(product, rho) <= d) return finish(product, 0.0, 0.0);

  const detail::ReducedProblem red = detail::reduce_support(mu, psi, rho);
  const std::size_t m = mu.size(), n = psi.size();

  // Maximum-entropy plan on the optimal transport face: the limit s -> inf.
  auto face_plan = [&]() -> JointPmf {
    std::vector<char> mask(red.rows.size() * red.cols.size(), 0);
    for (std::size_t i = 0; i < red.rows.size(); ++i)
      for (std::size_t j = 0; j < red.cols.size(); ++j) {
        const double reduced =
            red.cost(i, j) - ot.row_potential[red.rows[i]] - ot.col_potential[red.cols[j]];
        mask[i * red.cols.size() + j] = reduced <= 1e-9 * scale;
      }
    detail::GibbsScaler face(red.a, red.b, Matrix(red.rows.size(), red.cols.size()), std::move(mask));
    face.max_iterations = 5000;
    face.scale(0.0);
    JointPmf joint = detail::expand_plan(red, face.plan(), m, n);
    if (coupling_cost(joint, rho) > d + opt.feasibility_slack * scale ||
        mutual_information(joint) > mutual_information(ot.coupling.joint))
      return ot.coupling.joint;
    return joint;
  };

  if (d <= ot.coupling.cost + opt.feasibility_slack * scale) {
    // The budget admits only the optimal transport face.
    return finish(face_plan(), kInf, 0.0);
  }

  detail::GibbsScaler scaler(red.a, red.b, red.cost);
  struct Probe {
    double s = 0.0;
    double excess = 0.0;  // E[rho] - d
    Matrix plan;
  };
  auto probe = [&](double s) {
    scaler.scale(s);
    Probe p{s, 0.0, scaler.plan()};
    double e = 0.0;
    for (std::size_t i = 0; i < red.rows.size(); ++i)
      for (std::size_t j = 0; j < red.cols.size(); ++j) e += p.plan(i, j) * red.cost(i, j);
    p.excess = e - d;
    return p;
  };

  double range = 0.0;
  for (double v : red.cost.data()) range = std::max(range, v);
  double s_hi = 1.0 / std::max(range, 1e-300);
  Probe hi = probe(s_hi);
  while (hi.excess > 0.0) {
    s_hi *= 2.0;
    if (s_hi * range > 1e5) return finish(face_plan(), kInf, 0.0);
    hi = probe(s_hi);
  }

  // Best feasible probe so far, ranked by duality gap s (d - E).
  Probe best = hi;
  auto gap_of = [](const Probe& p) { return -p.s * p.excess; };
  auto f = [&](double s) {
    Probe p = probe(s);
    if (p.excess <= 0.0 && gap_of(p) < gap_of(best)) best = p;
    return p.excess;
  };
  const double target_gap = opt.gap_tolerance * std::log(2.0);
  double lo = 0.0, up = s_hi;
  double f_lo = coupling_cost(product, rho) - d, f_up = hi.excess;
  for (int round = 0; round < 4 && gap_of(best) > target_gap; ++round) {
    std::uintmax_t iters = 200;
    auto tol = [&](double x, double y) { return std::abs(y - x) <= 1e-15 * std::max(1.0, y) || gap_of(best) <= target_gap; };
    const auto bracket = boost::math::tools::toms748_solve(f, lo, up, f_lo, f_up, tol, iters);
    lo = bracket.first;
    up = bracket.second;
    f_lo = f(lo);
    f_up = f(up);
    if (!(f_lo > 0.0 && f_up <= 0.0)) break;
  }

  return finish(detail::expand_plan(red, best.plan, m, n), best.s, gap_of(best));
}

}  // namespace ocrd
