#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "ocrd/error.hpp"
#include "ocrd/info.hpp"

namespace ocrd {

/// A joint law of (X, U, Y) forming the Markov chain X - U - Y, stored as
/// P_U, P_{X|U} and P_{Y|U}.
class MarkovTriple {
 public:
  MarkovTriple() = default;
  MarkovTriple(Pmf p_u, Channel x_given_u, Channel y_given_u)
      : p_u_(std::move(p_u)), x_given_u_(std::move(x_given_u)), y_given_u_(std::move(y_given_u)) {
    if (x_given_u_.inputs() != p_u_.size() || y_given_u_.inputs() != p_u_.size())
      throw ValidationError("markov triple: channels must take the auxiliary alphabet as input");
    if (p_u_.size() > x_size() + y_size() + 1)
      throw ValidationError("markov triple: auxiliary alphabet larger than |X|+|Y|+1");
  }

  const Pmf& p_u() const noexcept { return p_u_; }
  const Channel& x_given_u() const noexcept { return x_given_u_; }
  const Channel& y_given_u() const noexcept { return y_given_u_; }
  std::size_t aux_size() const noexcept { return p_u_.size(); }
  std::size_t x_size() const noexcept { return x_given_u_.outputs(); }
  std::size_t y_size() const noexcept { return y_given_u_.outputs(); }

  JointPmf joint_ux() const { return JointPmf::from_channel(p_u_, x_given_u_); }
  JointPmf joint_uy() const { return JointPmf::from_channel(p_u_, y_given_u_); }
  Pmf induced_x() const { return x_given_u_.apply(p_u_); }
  Pmf induced_y() const { return y_given_u_.apply(p_u_); }

  JointPmf joint_xy() const {
    Matrix t(x_size(), y_size());
    for (std::size_t u = 0; u < aux_size(); ++u)
      for (std::size_t x = 0; x < x_size(); ++x)
        for (std::size_t y = 0; y < y_size(); ++y) t(x, y) += p_u_[u] * x_given_u_(u, x) * y_given_u_(u, y);
    return JointPmf(std::move(t));
  }

  double i_xu() const { return mutual_information(joint_ux()); }
  double i_yu() const { return mutual_information(joint_uy()); }
  double distortion(const DistortionMatrix& rho) const { return expected_distortion(joint_xy(), rho); }

  /// The same chain read in the other direction, Y - U - X.
  MarkovTriple swapped() const { return MarkovTriple(p_u_, y_given_u_, x_given_u_); }

 private:
  Pmf p_u_;
  Channel x_given_u_;
  Channel y_given_u_;
};

/// (R, R_c) in bits per symbol; rc may be +inf.
struct RatePoint {
  double r = 0.0;
  double rc = 0.0;

  void validate() const {
    if (!(r >= 0.0) || std::isinf(r)) throw ValidationError("rate point: r must be finite and nonnegative");
    if (!(rc >= 0.0)) throw ValidationError("rate point: rc must be nonnegative");
  }
};

enum class RegionTag { main_inner, synthesis_inner, det_decoder, empirical };

inline std::string_view to_string(RegionTag t) {
  switch (t) {
    case RegionTag::main_inner: return "main-inner";
    case RegionTag::synthesis_inner: return "synthesis-inner";
    case RegionTag::det_decoder: return "det-decoder";
    case RegionTag::empirical: return "empirical";
  }
  return "unknown";
}

struct CurvePoint {
  double rc = 0.0;
  double r_min = 0.0;
};

/// Lower boundary {(rc, min R)} of a rate region at fixed distortion.
struct RegionCurve {
  double distortion = 0.0;
  std::vector<CurvePoint> points;
  RegionTag tag = RegionTag::main_inner;

  /// rc strictly increasing, r_min nonincreasing (up to `slack`).
  bool well_formed(double slack = 1e-12) const {
    for (std::size_t k = 1; k < points.size(); ++k) {
      if (!(points[k].rc > points[k - 1].rc)) return false;
      if (points[k].r_min > points[k - 1].r_min + slack) return false;
    }
    return true;
  }
};

/// Zero-mean Gaussian source N(0, sigma_x^2), output N(0, sigma_y^2),
/// squared-error distortion level.
struct GaussianSpec {
  double sigma_x = 1.0;
  double sigma_y = 1.0;
  double distortion = 0.0;

  void validate() const {
    if (!(sigma_x > 0.0) || !(sigma_y > 0.0) || !std::isfinite(sigma_x) || !std::isfinite(sigma_y))
      throw ValidationError("gaussian spec: standard deviations must be positive and finite");
    if (!(distortion >= 0.0) || !std::isfinite(distortion))
      throw ValidationError("gaussian spec: distortion must be finite and nonnegative");
  }
  /// Smallest achievable E[(X-Y)^2] over couplings, (sigma_x - sigma_y)^2.
  double min_distortion() const { return (sigma_x - sigma_y) * (sigma_x - sigma_y); }
  bool feasible() const { return sigma_x * sigma_x + sigma_y * sigma_y - 2.0 * sigma_x * sigma_y <= distortion; }
};

inline void check_rate_grid(const std::vector<double>& rc_grid) {
  for (std::size_t k = 0; k < rc_grid.size(); ++k) {
    if (!(rc_grid[k] >= 0.0)) throw ValidationError("rc grid: values must be nonnegative");
    if (k > 0 && !(rc_grid[k] > rc_grid[k - 1])) throw ValidationError("rc grid: values must be strictly increasing");
  }
}

}  // namespace ocrd
