#pragma once

// Rate regions of the two variations (deterministic decoder, empirical output
// constraint) and the membership test for the main region.

#include <algorithm>
#include <cmath>
#include <string>

#include "ocrd/info.hpp"
#include "ocrd/region/mmi.hpp"
#include "ocrd/region/types.hpp"

namespace ocrd {

/// Minimum R for a deterministic decoder: R >= I(X;Y) and R + rc >= H(Y).
/// H(Y) = H(psi) on every feasible coupling, so the bound separates.
inline double det_decoder_min_rate(const Pmf& mu, const Pmf& psi, const DistortionMatrix& rho, double d, double rc,
                                   const MmiOptions& opt = {}) {
  if (std::isnan(rc) || rc < 0.0) throw ValidationError("det_decoder_min_rate: rc must be nonnegative");
  const MmiResult m = mmi_constrained_output(mu, psi, rho, d, opt);
  if (!m.feasible) return kInf;
  return std::max(m.value, entropy(psi) - rc);
}

/// Minimum R when only the empirical output law must approach psi. Common
/// randomness does not lower it, so rc is validated and otherwise unused.
inline double empirical_region_min_rate(const Pmf& mu, const Pmf& psi, const DistortionMatrix& rho, double d,
                                        double rc, const MmiOptions& opt = {}) {
  if (std::isnan(rc) || rc < 0.0) throw ValidationError("empirical_region_min_rate: rc must be nonnegative");
  return mmi_constrained_output(mu, psi, rho, d, opt).value;
}

enum class MembershipStatus { member, not_member, constraint_violation };

inline std::string_view to_string(MembershipStatus s) {
  switch (s) {
    case MembershipStatus::member: return "member";
    case MembershipStatus::not_member: return "not-member";
    case MembershipStatus::constraint_violation: return "constraint-violation";
  }
  return "unknown";
}

struct MembershipResult {
  MembershipStatus status = MembershipStatus::constraint_violation;
  double i_xu = kInf;
  double i_yu = kInf;
  double marginal_error = 0.0;  // max of the two TV gaps to mu and psi
  double distortion = 0.0;
  std::string violation;

  bool member() const { return status == MembershipStatus::member; }
};

struct MembershipOptions {
  double marginal_tolerance = 1e-6;
  double distortion_slack = 1e-9;
  /// Slack on the two rate inequalities.
  double rate_slack = 1e-9;
};

/// Checks R >= I(X;U) and R + R_c >= I(Y;U) for a triple in M(D). A triple
/// that misses the marginals or the distortion budget is reported as a
/// constraint violation rather than as a non-member.
inline MembershipResult region_membership(const Pmf& mu, const Pmf& psi, const DistortionMatrix& rho, double d,
                                          const MarkovTriple& triple, const RatePoint& point,
                                          const MembershipOptions& opt = {}) {
  point.validate();
  MembershipResult res;
  if (triple.x_size() != mu.size() || triple.y_size() != psi.size() || rho.rows() != mu.size() ||
      rho.cols() != psi.size()) {
    res.violation = "alphabet sizes do not match";
    return res;
  }
  const Pmf px = triple.induced_x(), py = triple.induced_y();
  double err = 0.0;
  for (std::size_t i = 0; i < mu.size(); ++i) err = std::max(err, std::abs(px[i] - mu[i]));
  for (std::size_t j = 0; j < psi.size(); ++j) err = std::max(err, std::abs(py[j] - psi[j]));
  res.marginal_error = err;
  res.distortion = triple.distortion(rho);
  res.i_xu = triple.i_xu();
  res.i_yu = triple.i_yu();
  if (err > opt.marginal_tolerance) {
    res.violation = "induced marginals differ from (mu, psi) by " + std::to_string(err);
    return res;
  }
  if (res.distortion > d + opt.distortion_slack) {
    res.violation = "expected distortion " + std::to_string(res.distortion) + " exceeds budget";
    return res;
  }
  const bool ok = point.r >= res.i_xu - opt.rate_slack && point.r + point.rc >= res.i_yu - opt.rate_slack;
  res.status = ok ? MembershipStatus::member : MembershipStatus::not_member;
  return res;
}

/// Triple with U = Y built from a coupling of (mu, psi).
inline MarkovTriple triple_through_output(const JointPmf& coupling) {
  const Pmf py = coupling.marginal_y();
  const std::size_t nx = coupling.x_size(), ny = coupling.y_size();
  Matrix xu(ny, nx);
  const Pmf px = coupling.marginal_x();
  for (std::size_t y = 0; y < ny; ++y)
    for (std::size_t x = 0; x < nx; ++x) xu(y, x) = py[y] > 0.0 ? coupling(x, y) / py[y] : px[x];
  return MarkovTriple(py, Channel(std::move(xu)), Channel::identity(ny));
}

}  // namespace ocrd
