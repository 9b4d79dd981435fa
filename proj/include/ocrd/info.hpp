#pragma once

// Finite-alphabet probability primitives. All information quantities are in
// bits and use the convention 0 log 0 = 0.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "ocrd/error.hpp"

namespace ocrd {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Inputs whose total is within this of 1 are renormalized; others rejected.
inline constexpr double kNormalizationSlack = 1e-9;

/// Default cap on enumerated product alphabets (m^n outcomes).
inline constexpr std::size_t kDefaultProductCap = 10'000'000;

/// Dense row-major matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Matrix(std::initializer_list<std::initializer_list<double>> init) {
    rows_ = init.size();
    cols_ = rows_ ? init.begin()->size() : 0;
    data_.reserve(rows_ * cols_);
    for (const auto& r : init) {
      if (r.size() != cols_) throw ValidationError("ragged matrix initializer");
      data_.insert(data_.end(), r.begin(), r.end());
    }
  }
  static Matrix from_rows(const std::vector<std::vector<double>>& rows) {
    Matrix m(rows.size(), rows.empty() ? 0 : rows.front().size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (rows[i].size() != m.cols_) throw ValidationError("ragged matrix rows");
      std::copy(rows[i].begin(), rows[i].end(), m.data_.begin() + i * m.cols_);
    }
    return m;
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }
  std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
  std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }
  std::span<const double> data() const noexcept { return data_; }
  std::span<double> data() noexcept { return data_; }

  Matrix transposed() const {
    Matrix t(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
  }
  std::vector<std::vector<double>> to_rows() const {
    std::vector<std::vector<double>> out(rows_);
    for (std::size_t i = 0; i < rows_; ++i) out[i].assign(row(i).begin(), row(i).end());
    return out;
  }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

namespace detail {

// Validates a mass vector and renormalizes it in place when its total is
// within kNormalizationSlack of `expected_total`.
inline void normalize_masses(std::span<double> v, const char* what, double expected_total = 1.0) {
  double total = 0.0;
  for (double p : v) {
    if (!std::isfinite(p) || p < 0.0) throw ValidationError(std::string(what) + ": negative or non-finite mass");
    total += p;
  }
  if (std::abs(total - expected_total) > kNormalizationSlack)
    throw ValidationError(std::string(what) + ": masses sum to " + std::to_string(total));
  if (total > 0.0)
    for (double& p : v) p *= expected_total / total;
}

inline double xlog2x(double p) { return p > 0.0 ? p * std::log2(p) : 0.0; }

}  // namespace detail

/// Probability vector over the alphabet {0, ..., m-1}.
class Pmf {
 public:
  Pmf() = default;
  explicit Pmf(std::vector<double> probs) : probs_(std::move(probs)) {
    if (probs_.empty()) throw ValidationError("pmf over an empty alphabet");
    detail::normalize_masses(probs_, "pmf");
  }
  Pmf(std::initializer_list<double> probs) : Pmf(std::vector<double>(probs)) {}

  static Pmf uniform(std::size_t m) { return Pmf(std::vector<double>(m, 1.0 / static_cast<double>(m))); }
  static Pmf point_mass(std::size_t m, std::size_t at) {
    std::vector<double> p(m, 0.0);
    p.at(at) = 1.0;
    return Pmf(std::move(p));
  }
  /// Bern(p): mass p on symbol 1.
  static Pmf bernoulli(double p) { return Pmf({1.0 - p, p}); }

  std::size_t size() const noexcept { return probs_.size(); }
  double operator[](std::size_t i) const { return probs_[i]; }
  std::span<const double> probs() const noexcept { return probs_; }
  auto begin() const noexcept { return probs_.begin(); }
  auto end() const noexcept { return probs_.end(); }

  friend bool operator==(const Pmf&, const Pmf&) = default;

 private:
  std::vector<double> probs_;
};

/// Conditional probability matrix: one output pmf per input symbol.
class Channel {
 public:
  Channel() = default;
  explicit Channel(Matrix rows) : m_(std::move(rows)) {
    if (m_.rows() == 0 || m_.cols() == 0) throw ValidationError("channel with empty alphabet");
    for (std::size_t i = 0; i < m_.rows(); ++i) detail::normalize_masses(m_.row(i), "channel row");
  }
  Channel(std::initializer_list<std::initializer_list<double>> init) : Channel(Matrix(init)) {}

  static Channel identity(std::size_t m) {
    Matrix w(m, m);
    for (std::size_t i = 0; i < m; ++i) w(i, i) = 1.0;
    return Channel(std::move(w));
  }
  static Channel bsc(double a) { return Channel({{1.0 - a, a}, {a, 1.0 - a}}); }
  /// Every input maps to the same output law.
  static Channel constant(std::size_t inputs, const Pmf& out) {
    Matrix w(inputs, out.size());
    for (std::size_t i = 0; i < inputs; ++i) std::copy(out.begin(), out.end(), w.row(i).begin());
    return Channel(std::move(w));
  }

  std::size_t inputs() const noexcept { return m_.rows(); }
  std::size_t outputs() const noexcept { return m_.cols(); }
  double operator()(std::size_t in, std::size_t out) const { return m_(in, out); }
  std::span<const double> row(std::size_t in) const { return m_.row(in); }
  const Matrix& matrix() const noexcept { return m_; }

  /// Output law when the input is distributed as `p`.
  Pmf apply(const Pmf& p) const {
    if (p.size() != inputs()) throw ValidationError("channel input size mismatch");
    std::vector<double> q(outputs(), 0.0);
    for (std::size_t i = 0; i < inputs(); ++i)
      for (std::size_t j = 0; j < outputs(); ++j) q[j] += p[i] * m_(i, j);
    return Pmf(std::move(q));
  }

  friend bool operator==(const Channel&, const Channel&) = default;

 private:
  Matrix m_;
};

/// Joint pmf on X x Y stored as an |X| x |Y| table.
class JointPmf {
 public:
  JointPmf() = default;
  explicit JointPmf(Matrix table) : t_(std::move(table)) {
    if (t_.rows() == 0 || t_.cols() == 0) throw ValidationError("joint pmf with empty alphabet");
    detail::normalize_masses(t_.data(), "joint pmf");
  }
  JointPmf(std::initializer_list<std::initializer_list<double>> init) : JointPmf(Matrix(init)) {}

  static JointPmf product(const Pmf& p, const Pmf& q) {
    Matrix t(p.size(), q.size());
    for (std::size_t i = 0; i < p.size(); ++i)
      for (std::size_t j = 0; j < q.size(); ++j) t(i, j) = p[i] * q[j];
    return JointPmf(std::move(t));
  }
  static JointPmf from_channel(const Pmf& p, const Channel& w) {
    if (p.size() != w.inputs()) throw ValidationError("channel input size mismatch");
    Matrix t(w.inputs(), w.outputs());
    for (std::size_t i = 0; i < w.inputs(); ++i)
      for (std::size_t j = 0; j < w.outputs(); ++j) t(i, j) = p[i] * w(i, j);
    return JointPmf(std::move(t));
  }

  std::size_t x_size() const noexcept { return t_.rows(); }
  std::size_t y_size() const noexcept { return t_.cols(); }
  double operator()(std::size_t x, std::size_t y) const { return t_(x, y); }
  const Matrix& table() const noexcept { return t_; }

  Pmf marginal_x() const {
    std::vector<double> p(x_size(), 0.0);
    for (std::size_t x = 0; x < x_size(); ++x)
      for (double v : t_.row(x)) p[x] += v;
    return Pmf(std::move(p));
  }
  Pmf marginal_y() const {
    std::vector<double> q(y_size(), 0.0);
    for (std::size_t x = 0; x < x_size(); ++x)
      for (std::size_t y = 0; y < y_size(); ++y) q[y] += t_(x, y);
    return Pmf(std::move(q));
  }
  JointPmf transposed() const { return JointPmf(t_.transposed()); }

 private:
  Matrix t_;
};

/// Nonnegative per-symbol cost rho(x, y).
class DistortionMatrix {
 public:
  DistortionMatrix() = default;
  explicit DistortionMatrix(Matrix costs) : c_(std::move(costs)) {
    if (c_.rows() == 0 || c_.cols() == 0) throw ValidationError("distortion matrix with empty alphabet");
    for (double v : c_.data())
      if (!std::isfinite(v) || v < 0.0) throw ValidationError("distortion entries must be finite and nonnegative");
  }
  DistortionMatrix(std::initializer_list<std::initializer_list<double>> init) : DistortionMatrix(Matrix(init)) {}

  static DistortionMatrix hamming(std::size_t m) { return hamming(m, m); }
  static DistortionMatrix hamming(std::size_t m, std::size_t n) {
    Matrix c(m, n, 1.0);
    for (std::size_t i = 0; i < std::min(m, n); ++i) c(i, i) = 0.0;
    return DistortionMatrix(std::move(c));
  }
  /// |x - y|^2 on symbol indices.
  static DistortionMatrix squared_index(std::size_t m, std::size_t n) {
    Matrix c(m, n);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        const double d = static_cast<double>(i) - static_cast<double>(j);
        c(i, j) = d * d;
      }
    return DistortionMatrix(std::move(c));
  }

  std::size_t rows() const noexcept { return c_.rows(); }
  std::size_t cols() const noexcept { return c_.cols(); }
  double operator()(std::size_t x, std::size_t y) const { return c_(x, y); }
  const Matrix& matrix() const noexcept { return c_; }
  double max() const { return *std::max_element(c_.data().begin(), c_.data().end()); }
  DistortionMatrix transposed() const { return DistortionMatrix(c_.transposed()); }

 private:
  Matrix c_;
};

inline double entropy(std::span<const double> p) {
  double h = 0.0;
  for (double v : p) h -= detail::xlog2x(v);
  return h;
}
inline double entropy(const Pmf& p) { return entropy(p.probs()); }

/// h(p) = -p log p - (1-p) log(1-p).
inline double binary_entropy(double p) {
  constexpr double slack = 1e-12;
  if (!(p >= -slack && p <= 1.0 + slack)) throw DomainError("binary_entropy: argument outside [0,1]");
  p = std::clamp(p, 0.0, 1.0);
  return -detail::xlog2x(p) - detail::xlog2x(1.0 - p);
}

inline double joint_entropy(const JointPmf& j) { return entropy(j.table().data()); }

/// H(Y|X).
inline double conditional_entropy(const JointPmf& j) { return joint_entropy(j) - entropy(j.marginal_x()); }

inline double mutual_information(const JointPmf& j) {
  const Pmf px = j.marginal_x();
  const Pmf py = j.marginal_y();
  double acc = 0.0;
  for (std::size_t x = 0; x < j.x_size(); ++x)
    for (std::size_t y = 0; y < j.y_size(); ++y) {
      const double p = j(x, y);
      if (p > 0.0) acc += p * std::log2(p / (px[x] * py[y]));
    }
  return std::max(acc, 0.0);
}

/// D(p || q) in bits; +inf when p is not absolutely continuous w.r.t. q.
inline double kl_divergence(const Pmf& p, const Pmf& q) {
  if (p.size() != q.size()) throw ValidationError("kl_divergence: alphabet size mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] <= 0.0) continue;
    if (q[i] <= 0.0) return kInf;
    acc += p[i] * std::log2(p[i] / q[i]);
  }
  return std::max(acc, 0.0);
}

inline double total_variation(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) throw ValidationError("total_variation: alphabet size mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) acc += std::abs(p[i] - q[i]);
  return 0.5 * acc;
}
inline double total_variation(const Pmf& p, const Pmf& q) { return total_variation(p.probs(), q.probs()); }

inline double expected_distortion(const JointPmf& j, const DistortionMatrix& rho) {
  if (j.x_size() != rho.rows() || j.y_size() != rho.cols())
    throw ValidationError("expected_distortion: shape mismatch");
  double acc = 0.0;
  for (std::size_t x = 0; x < j.x_size(); ++x)
    for (std::size_t y = 0; y < j.y_size(); ++y) acc += j(x, y) * rho(x, y);
  return acc;
}

/// Number of outcomes m^n, or CapExceeded when it is above `cap`.
inline std::size_t checked_power(std::size_t m, std::size_t n, std::size_t cap, const char* what) {
  std::size_t total = 1;
  for (std::size_t i = 0; i < n; ++i) {
    if (m != 0 && total > cap / m) throw CapExceeded(std::string(what) + ": alphabet power exceeds cap " + std::to_string(cap));
    total *= m;
  }
  if (total > cap) throw CapExceeded(std::string(what) + ": alphabet power exceeds cap " + std::to_string(cap));
  return total;
}

/// n-fold product law. Index order is lexicographic with the first symbol
/// most significant, so index = v_1 m^{n-1} + ... + v_n.
inline Pmf product_extension(const Pmf& p, std::size_t n, std::size_t cap = kDefaultProductCap) {
  if (n == 0) throw ValidationError("product_extension: n must be positive");
  checked_power(p.size(), n, cap, "product_extension");
  std::vector<double> law{1.0};
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> next;
    next.reserve(law.size() * p.size());
    for (double w : law)
      for (double v : p) next.push_back(w * v);
    law = std::move(next);
  }
  return Pmf(std::move(law));
}

/// Decodes a lexicographic product index into its n symbols.
inline void decode_multi_index(std::size_t index, std::size_t m, std::span<std::uint32_t> out) {
  for (std::size_t i = out.size(); i-- > 0;) {
    out[i] = static_cast<std::uint32_t>(index % m);
    index /= m;
  }
}

inline Pmf empirical_pmf(std::span<const std::uint32_t> symbols, std::size_t m) {
  if (symbols.empty()) throw ValidationError("empirical_pmf: no samples");
  std::vector<double> counts(m, 0.0);
  for (auto s : symbols) {
    if (s >= m) throw ValidationError("empirical_pmf: symbol out of range");
    counts[s] += 1.0;
  }
  for (double& c : counts) c /= static_cast<double>(symbols.size());
  return Pmf(std::move(counts));
}

/// Labels each y with the smallest y' whose posterior P_{X|Y}(.|y') matches
/// within `tol` in the sup norm. Zero-mass outputs keep their own label.
inline std::vector<std::size_t> posterior_grouping(const JointPmf& j, double tol = 1e-9) {
  const Pmf py = j.marginal_y();
  const std::size_t nx = j.x_size(), ny = j.y_size();
  std::vector<std::size_t> label(ny);
  std::vector<std::size_t> reps;
  auto posterior = [&](std::size_t y, std::size_t x) { return j(x, y) / py[y]; };
  for (std::size_t y = 0; y < ny; ++y) {
    label[y] = y;
    if (py[y] <= 0.0) continue;
    for (std::size_t r : reps) {
      double dist = 0.0;
      for (std::size_t x = 0; x < nx; ++x) dist = std::max(dist, std::abs(posterior(y, x) - posterior(r, x)));
      if (dist <= tol) {
        label[y] = r;
        break;
      }
    }
    if (label[y] == y) reps.push_back(y);
  }
  return label;
}

/// Necessary conditional entropy H(Y dagger X) = H(f(Y)|X) where f merges
/// outputs with identical posteriors on X.
inline double necessary_conditional_entropy(const JointPmf& j, double tol = 1e-9) {
  const auto label = posterior_grouping(j, tol);
  Matrix merged(j.x_size(), j.y_size());
  for (std::size_t x = 0; x < j.x_size(); ++x)
    for (std::size_t y = 0; y < j.y_size(); ++y) merged(x, label[y]) += j(x, y);
  return std::max(conditional_entropy(JointPmf(std::move(merged))), 0.0);
}

}  // namespace ocrd
