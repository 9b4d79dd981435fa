#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <vector>

namespace ocrd::detail {

struct NelderMeadOptions {
  std::size_t max_evaluations = 2000;
  double initial_step = 1.0;
  /// Stop once the spread of simplex values falls below this.
  double f_tolerance = 1e-10;
  double x_tolerance = 1e-8;
};

struct NelderMeadResult {
  std::vector<double> x;
  double f = 0.0;
  std::size_t evaluations = 0;
};

/// Standard simplex search (reflection 1, expansion 2, contraction 1/2,
/// shrink 1/2).
template <class F>
NelderMeadResult nelder_mead(F&& f, std::vector<double> x0, const NelderMeadOptions& opt = {}) {
  const std::size_t dim = x0.size();
  std::vector<std::vector<double>> pts(dim + 1, x0);
  std::vector<double> vals(dim + 1);
  std::size_t evals = 0;
  auto eval = [&](const std::vector<double>& x) {
    ++evals;
    return f(x);
  };
  for (std::size_t k = 0; k < dim; ++k) pts[k + 1][k] += opt.initial_step;
  for (std::size_t k = 0; k <= dim; ++k) vals[k] = eval(pts[k]);

  std::vector<std::size_t> order(dim + 1);
  std::vector<double> centroid(dim), trial(dim), trial2(dim);
  while (evals < opt.max_evaluations) {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return vals[i] < vals[j]; });
    const std::size_t best = order.front(), worst = order.back(), second = order[dim - 1];
    double size = 0.0;
    for (std::size_t k = 0; k <= dim; ++k)
      for (std::size_t c = 0; c < dim; ++c) size = std::max(size, std::abs(pts[k][c] - pts[best][c]));
    if (vals[worst] - vals[best] <= opt.f_tolerance && size <= opt.x_tolerance) break;
    if (vals[worst] - vals[best] <= opt.f_tolerance * 1e-3) break;

    std::fill(centroid.begin(), centroid.end(), 0.0);
    for (std::size_t k = 0; k <= dim; ++k)
      if (k != worst)
        for (std::size_t c = 0; c < dim; ++c) centroid[c] += pts[k][c] / static_cast<double>(dim);

    for (std::size_t c = 0; c < dim; ++c) trial[c] = centroid[c] + (centroid[c] - pts[worst][c]);
    const double fr = eval(trial);
    if (fr < vals[best]) {
      for (std::size_t c = 0; c < dim; ++c) trial2[c] = centroid[c] + 2.0 * (centroid[c] - pts[worst][c]);
      const double fe = eval(trial2);
      if (fe < fr) pts[worst] = trial2, vals[worst] = fe;
      else pts[worst] = trial, vals[worst] = fr;
      continue;
    }
    if (fr < vals[second]) {
      pts[worst] = trial, vals[worst] = fr;
      continue;
    }
    const bool outside = fr < vals[worst];
    for (std::size_t c = 0; c < dim; ++c)
      trial2[c] = outside ? centroid[c] + 0.5 * (trial[c] - centroid[c]) : centroid[c] + 0.5 * (pts[worst][c] - centroid[c]);
    const double fc = eval(trial2);
    if (fc < std::min(fr, vals[worst])) {
      pts[worst] = trial2, vals[worst] = fc;
      continue;
    }
    for (std::size_t k = 0; k <= dim; ++k) {
      if (k == best) continue;
      for (std::size_t c = 0; c < dim; ++c) pts[k][c] = pts[best][c] + 0.5 * (pts[k][c] - pts[best][c]);
      vals[k] = eval(pts[k]);
    }
  }
  const std::size_t best = static_cast<std::size_t>(std::min_element(vals.begin(), vals.end()) - vals.begin());
  return {pts[best], vals[best], evals};
}

}  // namespace ocrd::detail
