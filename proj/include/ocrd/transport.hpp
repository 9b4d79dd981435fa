#pragma once

// Exact optimal transport between finite pmfs (transportation simplex) and
// monotone couplings on the real line for quadratic cost.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <queue>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/distributions/normal.hpp>

#include "ocrd/error.hpp"
#include "ocrd/info.hpp"
#include "ocrd/rng.hpp"

namespace ocrd {

struct TransportProblem {
  Pmf source;
  Pmf target;
  DistortionMatrix costs;

  void validate() const {
    if (costs.rows() != source.size() || costs.cols() != target.size())
      throw ValidationError("transport problem: cost matrix is " + std::to_string(costs.rows()) + "x" +
                            std::to_string(costs.cols()) + ", marginals are " + std::to_string(source.size()) +
                            " and " + std::to_string(target.size()));
  }
};

/// Joint law with prescribed marginals and its transport cost.
struct Coupling {
  JointPmf joint;
  Pmf source_marginal;
  Pmf target_marginal;
  double cost = 0.0;
};

inline double coupling_cost(const JointPmf& joint, const DistortionMatrix& costs) {
  return expected_distortion(joint, costs);
}

struct OtOptions {
  std::size_t max_side = 4096;
  /// Consecutive zero-step pivots tolerated before switching to Bland's rule.
  std::size_t degenerate_streak = 32;
};

struct OtSolution {
  Coupling coupling;
  /// Dual potentials with cost(x,y) - row[x] - col[y] >= 0 on the support of
  /// both marginals; NaN for zero-mass symbols.
  std::vector<double> row_potential;
  std::vector<double> col_potential;
  std::size_t pivots = 0;
};

namespace detail {

class TransportationSimplex {
 public:
  TransportationSimplex(std::vector<double> supply, std::vector<double> demand, std::vector<double> cost)
      : m_(supply.size()), n_(demand.size()), a_(std::move(supply)), b_(std::move(demand)), c_(std::move(cost)),
        basic_(m_ * n_, 0), adj_(m_ + n_) {
    double scale = 1.0;
    for (double v : c_) scale = std::max(scale, std::abs(v));
    eps_ = 1e-12 * scale;
  }

  void run(std::size_t degenerate_streak) {
    northwest_corner();
    const std::size_t max_pivots = 200 * (m_ + n_) * (m_ + n_) + 1000;
    std::size_t streak = 0;
    while (true) {
      compute_potentials();
      const bool bland = streak >= degenerate_streak;
      const auto entering = price(bland);
      if (!entering) return;
      const double step = pivot(entering->first, entering->second);
      ++pivots_;
      streak = step > 0.0 ? 0 : streak + 1;
      if (pivots_ > max_pivots) throw std::runtime_error("transportation simplex: pivot limit reached");
    }
  }

  double flow(std::size_t i, std::size_t j) const {
    const std::size_t id = i * n_ + j;
    if (!basic_[id]) return 0.0;
    for (std::size_t e : adj_[i])
      if (cells_[e].col == j) return std::max(cells_[e].flow, 0.0);
    return 0.0;
  }
  const std::vector<double>& u() const { return u_; }
  const std::vector<double>& v() const { return v_; }
  std::size_t pivots() const { return pivots_; }

 private:
  struct Cell {
    std::size_t row, col;
    double flow;
  };

  double cost(std::size_t i, std::size_t j) const { return c_[i * n_ + j]; }

  void add_cell(std::size_t i, std::size_t j, double f) {
    const std::size_t e = cells_.size();
    cells_.push_back({i, j, f});
    adj_[i].push_back(e);
    adj_[m_ + j].push_back(e);
    basic_[i * n_ + j] = 1;
  }

  // Staircase start: exactly m + n - 1 cells forming a spanning tree.
  void northwest_corner() {
    std::vector<double> ra = a_, rb = b_;
    std::size_t i = 0, j = 0;
    while (true) {
      const double f = std::min(ra[i], rb[j]);
      add_cell(i, j, f);
      ra[i] -= f;
      rb[j] -= f;
      if (i == m_ - 1 && j == n_ - 1) break;
      if (i == m_ - 1) ++j;
      else if (j == n_ - 1) ++i;
      else if (ra[i] < rb[j]) ++i;
      else ++j;
    }
  }

  void compute_potentials() {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    u_.assign(m_, nan);
    v_.assign(n_, nan);
    std::vector<char> seen(m_ + n_, 0);
    std::vector<std::size_t> stack{0};
    u_[0] = 0.0;
    seen[0] = 1;
    while (!stack.empty()) {
      const std::size_t node = stack.back();
      stack.pop_back();
      for (std::size_t e : adj_[node]) {
        const Cell& c = cells_[e];
        const std::size_t other = node < m_ ? m_ + c.col : c.row;
        if (seen[other]) continue;
        seen[other] = 1;
        if (node < m_) v_[c.col] = cost(c.row, c.col) - u_[c.row];
        else u_[c.row] = cost(c.row, c.col) - v_[c.col];
        stack.push_back(other);
      }
    }
  }

  // Dantzig pricing with lexicographic ties, or Bland's first-improving rule.
  std::optional<std::pair<std::size_t, std::size_t>> price(bool bland) const {
    double best = -eps_;
    std::optional<std::pair<std::size_t, std::size_t>> pick;
    for (std::size_t i = 0; i < m_; ++i)
      for (std::size_t j = 0; j < n_; ++j) {
        if (basic_[i * n_ + j]) continue;
        const double r = cost(i, j) - u_[i] - v_[j];
        if (r < best) {
          pick = {i, j};
          if (bland) return pick;
          best = r;
        }
      }
    return pick;
  }

  // Returns the step length theta.
  double pivot(std::size_t ei, std::size_t ej) {
    // Tree path from row node ei to column node m_ + ej.
    const std::size_t target = m_ + ej;
    std::vector<std::size_t> parent_edge(m_ + n_, SIZE_MAX);
    std::vector<char> seen(m_ + n_, 0);
    std::queue<std::size_t> q;
    q.push(ei);
    seen[ei] = 1;
    while (!q.empty() && !seen[target]) {
      const std::size_t node = q.front();
      q.pop();
      for (std::size_t e : adj_[node]) {
        const Cell& c = cells_[e];
        const std::size_t other = node < m_ ? m_ + c.col : c.row;
        if (seen[other]) continue;
        seen[other] = 1;
        parent_edge[other] = e;
        q.push(other);
      }
    }
    std::vector<std::size_t> path;  // edges from the column end back to ei
    for (std::size_t node = target; node != ei;) {
      const std::size_t e = parent_edge[node];
      path.push_back(e);
      const Cell& c = cells_[e];
      node = node < m_ ? m_ + c.col : c.row;
    }
    std::reverse(path.begin(), path.end());
    // path[0] touches row ei; even positions lose flow.
    double theta = std::numeric_limits<double>::infinity();
    std::size_t leave = SIZE_MAX;
    for (std::size_t k = 0; k < path.size(); k += 2) {
      const Cell& c = cells_[path[k]];
      const bool better = c.flow < theta ||
                          (c.flow == theta && std::pair(c.row, c.col) < std::pair(cells_[leave].row, cells_[leave].col));
      if (better) {
        theta = c.flow;
        leave = path[k];
      }
    }
    for (std::size_t k = 0; k < path.size(); ++k) {
      Cell& c = cells_[path[k]];
      c.flow = (k % 2 == 0) ? c.flow - theta : c.flow + theta;
    }
    // Replace the leaving cell in place by the entering one.
    Cell& out = cells_[leave];
    basic_[out.row * n_ + out.col] = 0;
    auto drop = [&](std::vector<std::size_t>& list) { list.erase(std::find(list.begin(), list.end(), leave)); };
    drop(adj_[out.row]);
    drop(adj_[m_ + out.col]);
    out = {ei, ej, theta};
    adj_[ei].push_back(leave);
    adj_[m_ + ej].push_back(leave);
    basic_[ei * n_ + ej] = 1;
    return theta;
  }

  std::size_t m_, n_;
  std::vector<double> a_, b_, c_;
  std::vector<char> basic_;
  std::vector<std::vector<std::size_t>> adj_;
  std::vector<Cell> cells_;
  std::vector<double> u_, v_;
  double eps_ = 0.0;
  std::size_t pivots_ = 0;
};

}  // namespace detail

/// Minimum-cost coupling of `p.source` and `p.target`, exact up to floating
/// point. Zero-mass symbols are removed before solving and come back as zero
/// rows/columns.
inline OtSolution solve_ot_detailed(const TransportProblem& p, const OtOptions& opt = {}) {
  p.validate();
  const std::size_t m = p.source.size(), n = p.target.size();
  if (m > opt.max_side || n > opt.max_side)
    throw CapExceeded("solve_ot: alphabet side " + std::to_string(std::max(m, n)) + " exceeds cap " +
                      std::to_string(opt.max_side));
  std::vector<std::size_t> rows, cols;
  for (std::size_t i = 0; i < m; ++i)
    if (p.source[i] > 0.0) rows.push_back(i);
  for (std::size_t j = 0; j < n; ++j)
    if (p.target[j] > 0.0) cols.push_back(j);

  std::vector<double> a, b, c;
  for (auto i : rows) a.push_back(p.source[i]);
  for (auto j : cols) b.push_back(p.target[j]);
  for (auto i : rows)
    for (auto j : cols) c.push_back(p.costs(i, j));

  detail::TransportationSimplex simplex(std::move(a), std::move(b), std::move(c));
  simplex.run(opt.degenerate_streak);

  Matrix joint(m, n);
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t s = 0; s < cols.size(); ++s) joint(rows[r], cols[s]) = simplex.flow(r, s);

  OtSolution out{Coupling{JointPmf(std::move(joint)), p.source, p.target, 0.0}, {}, {}, simplex.pivots()};
  out.coupling.cost = coupling_cost(out.coupling.joint, p.costs);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  out.row_potential.assign(m, nan);
  out.col_potential.assign(n, nan);
  for (std::size_t r = 0; r < rows.size(); ++r) out.row_potential[rows[r]] = simplex.u()[r];
  for (std::size_t s = 0; s < cols.size(); ++s) out.col_potential[cols[s]] = simplex.v()[s];
  return out;
}

inline Coupling solve_ot(const TransportProblem& p, const OtOptions& opt = {}) {
  return solve_ot_detailed(p, opt).coupling;
}

/// Draws y from the conditional law joint(x, .) / source(x).
inline std::size_t sample_coupling_conditional(const Coupling& c, std::size_t x, Rng& rng) {
  if (x >= c.joint.x_size()) throw ValidationError("sample_coupling_conditional: symbol out of range");
  const auto row = c.joint.table().row(x);
  double total = 0.0;
  for (double v : row) total += v;
  if (c.source_marginal[x] <= 0.0 || total <= 0.0)
    throw DomainError("sample_coupling_conditional: conditioning on a zero-probability symbol");
  return sample_index(row, total, rng);
}

// ---------------------------------------------------------------------------
// Scalar couplings for quadratic cost.

using QuantileFunction = std::function<double(double)>;

inline QuantileFunction normal_quantile(double mean, double sd) {
  if (!(sd > 0.0)) throw ValidationError("normal_quantile: standard deviation must be positive");
  return [dist = boost::math::normal_distribution<double>(mean, sd)](double t) { return boost::math::quantile(dist, t); };
}

inline QuantileFunction uniform_quantile(double lo, double hi) {
  if (!(hi > lo)) throw ValidationError("uniform_quantile: empty interval");
  return [lo, hi](double t) { return lo + (hi - lo) * t; };
}

/// The comonotone map y = Q_target(F_source(x)), optimal for (x - y)^2 on R.
struct MonotoneMap {
  QuantileFunction source_quantile;
  QuantileFunction target_quantile;
  /// E[(X - T(X))^2] by the midpoint rule on the quantile levels.
  double expected_cost = 0.0;
  std::size_t grid = 0;

  /// F_source(x), by bisection on the source quantile function.
  double source_cdf(double x) const {
    double lo = 0.0, hi = 1.0;
    for (int it = 0; it < 200 && hi - lo > 1e-16; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (source_quantile(mid) <= x) lo = mid;
      else hi = mid;
    }
    return 0.5 * (lo + hi);
  }
  double operator()(double x) const { return target_quantile(source_cdf(x)); }
};

inline MonotoneMap monotone_coupling_quadratic(QuantileFunction source, QuantileFunction target,
                                               std::size_t grid = 100'000) {
  if (grid == 0) throw ValidationError("monotone_coupling_quadratic: empty grid");
  double acc = 0.0;
  double prev_s = -kInf, prev_t = -kInf;
  for (std::size_t k = 0; k < grid; ++k) {
    const double t = (static_cast<double>(k) + 0.5) / static_cast<double>(grid);
    const double qs = source(t), qt = target(t);
    if (!std::isfinite(qs) || !std::isfinite(qt)) throw ValidationError("monotone_coupling_quadratic: non-finite quantile");
    const double slack_s = 1e-12 * (1.0 + std::abs(qs)), slack_t = 1e-12 * (1.0 + std::abs(qt));
    if (qs < prev_s - slack_s || qt < prev_t - slack_t)
      throw ValidationError("monotone_coupling_quadratic: quantile function is not nondecreasing");
    prev_s = qs;
    prev_t = qt;
    acc += (qs - qt) * (qs - qt);
  }
  return MonotoneMap{std::move(source), std::move(target), acc / static_cast<double>(grid), grid};
}

}  // namespace ocrd
