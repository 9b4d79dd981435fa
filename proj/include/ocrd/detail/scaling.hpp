#pragma once

// Diagonal scaling P = diag(alpha) K diag(beta) of a Gibbs kernel
// K = exp(-s C) (optionally masked) onto prescribed marginals. Used by the
// mutual-information solver: at inverse temperature s the scaled kernel is
// the exact minimizer of I(X;Y) + s E[C] over the transportation polytope.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "ocrd/info.hpp"

namespace ocrd::detail {

class GibbsScaler {
 public:
  /// `mask` (optional, row-major) marks admissible cells.
  GibbsScaler(std::vector<double> a, std::vector<double> b, Matrix cost, std::vector<char> mask = {})
      : a_(std::move(a)), b_(std::move(b)), c_(std::move(cost)), mask_(std::move(mask)),
        f_(a_.size(), 0.0), g_(b_.size(), 0.0) {
    if (mask_.empty()) mask_.assign(a_.size() * b_.size(), 1);
    double lo = kInf, hi = -kInf;
    for (std::size_t k = 0; k < mask_.size(); ++k)
      if (mask_[k]) {
        lo = std::min(lo, c_.data()[k]);
        hi = std::max(hi, c_.data()[k]);
      }
    range_ = hi - lo;
  }

  std::size_t max_iterations = 200'000;
  double tolerance = 1e-14;

  /// Scales at inverse temperature s, warm-starting from the previous call.
  /// Returns false when the marginal error did not reach `tolerance`.
  bool scale(double s) {
    s_ = s;
    return s * range_ <= 500.0 ? scale_plain() : scale_log();
  }

  /// The scaled plan after exact rounding onto the transportation polytope.
  Matrix plan() const {
    const std::size_t m = a_.size(), n = b_.size();
    Matrix p(m, n);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (mask_[i * n + j]) p(i, j) = std::exp(f_[i] + g_[j] - s_ * c_(i, j));
    round_to_marginals(p);
    return p;
  }

 private:
  bool scale_plain() {
    const std::size_t m = a_.size(), n = b_.size();
    Matrix k(m, n);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < n; ++j) k(i, j) = mask_[i * n + j] ? std::exp(-s_ * c_(i, j)) : 0.0;
    std::vector<double> alpha(m), beta(n), tmp(std::max(m, n));
    for (std::size_t i = 0; i < m; ++i) alpha[i] = std::exp(f_[i]);
    for (std::size_t j = 0; j < n; ++j) beta[j] = std::exp(g_[j]);
    bool ok = false;
    for (std::size_t it = 0; it < max_iterations; ++it) {
      for (std::size_t i = 0; i < m; ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < n; ++j) acc += k(i, j) * beta[j];
        alpha[i] = acc > 0.0 ? a_[i] / acc : 0.0;
      }
      std::fill(tmp.begin(), tmp.begin() + n, 0.0);
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) tmp[j] += k(i, j) * alpha[i];
      for (std::size_t j = 0; j < n; ++j) beta[j] = tmp[j] > 0.0 ? b_[j] / tmp[j] : 0.0;
      if ((it & 7) == 7 || it + 1 == max_iterations) {
        double err = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
          double acc = 0.0;
          for (std::size_t j = 0; j < n; ++j) acc += k(i, j) * beta[j];
          err += std::abs(alpha[i] * acc - a_[i]);
        }
        if (!std::isfinite(err)) break;
        if (err <= tolerance) {
          ok = true;
          break;
        }
      }
    }
    for (std::size_t i = 0; i < m; ++i) f_[i] = alpha[i] > 0.0 ? std::log(alpha[i]) : -700.0;
    for (std::size_t j = 0; j < n; ++j) g_[j] = beta[j] > 0.0 ? std::log(beta[j]) : -700.0;
    return ok;
  }

  bool scale_log() {
    const std::size_t m = a_.size(), n = b_.size();
    std::vector<double> buf(std::max(m, n));
    auto lse = [&](std::size_t len) {
      double mx = -kInf;
      for (std::size_t t = 0; t < len; ++t) mx = std::max(mx, buf[t]);
      if (mx == -kInf) return -kInf;
      double acc = 0.0;
      for (std::size_t t = 0; t < len; ++t) acc += std::exp(buf[t] - mx);
      return mx + std::log(acc);
    };
    const double neg_inf = -kInf;
    for (std::size_t it = 0; it < max_iterations; ++it) {
      for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < n; ++j) buf[j] = mask_[i * n + j] ? g_[j] - s_ * c_(i, j) : neg_inf;
        f_[i] = std::log(a_[i]) - lse(n);
      }
      for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t i = 0; i < m; ++i) buf[i] = mask_[i * n + j] ? f_[i] - s_ * c_(i, j) : neg_inf;
        g_[j] = std::log(b_[j]) - lse(m);
      }
      if ((it & 7) == 7) {
        double err = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
          for (std::size_t j = 0; j < n; ++j) buf[j] = mask_[i * n + j] ? g_[j] - s_ * c_(i, j) : neg_inf;
          err += std::abs(std::exp(f_[i] + lse(n)) - a_[i]);
        }
        if (!std::isfinite(err)) return false;
        if (err <= tolerance) return true;
      }
    }
    return false;
  }

  // Rows, then columns, are scaled down to their targets; the leftover mass
  // is put back as a rank-one correction, giving exact marginals.
  void round_to_marginals(Matrix& p) const {
    const std::size_t m = a_.size(), n = b_.size();
    for (std::size_t i = 0; i < m; ++i) {
      double r = 0.0;
      for (double v : p.row(i)) r += v;
      if (r > a_[i])
        for (double& v : p.row(i)) v *= a_[i] / r;
    }
    std::vector<double> col(n, 0.0);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < n; ++j) col[j] += p(i, j);
    for (std::size_t j = 0; j < n; ++j)
      if (col[j] > b_[j])
        for (std::size_t i = 0; i < m; ++i) p(i, j) *= b_[j] / col[j];
    std::vector<double> er(m), ec(n);
    double total = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      double r = 0.0;
      for (double v : p.row(i)) r += v;
      er[i] = std::max(a_[i] - r, 0.0);
      total += er[i];
    }
    std::fill(col.begin(), col.end(), 0.0);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < n; ++j) col[j] += p(i, j);
    for (std::size_t j = 0; j < n; ++j) ec[j] = std::max(b_[j] - col[j], 0.0);
    if (total > 0.0)
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) p(i, j) += er[i] * ec[j] / total;
  }

  std::vector<double> a_, b_;
  Matrix c_;
  std::vector<char> mask_;
  std::vector<double> f_, g_;
  double s_ = 0.0;
  double range_ = 0.0;
};

}  // namespace ocrd::detail
