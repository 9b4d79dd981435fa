#pragma once

// I_0(mu || psi, D) = min max(I(X;U), I(Y;U)) over Markov triples X - U - Y
// with P_X = mu, P_Y = psi and E[rho(X,Y)] <= D; the minimum rate without
// common randomness.
//
// The program is not convex. The search variable is the encoder channel
// P_{U|X}, which fixes P_U and I(X;U). For a fixed encoder the remaining
// choice of P_{Y|U} is the convex program I(P_U || psi, D) with the induced
// cost rho_U(u, y) = E[rho(X, y) | U = u], solved exactly. A simplex search
// over the encoder logits runs from seeded Dirichlet starts plus a few
// structured ones (U = X, U = Y, U constant), alternately with the roles of
// X and Y exchanged, and the best triple found is returned. Every triple it
// returns meets the constraints, so the value is an upper bound on I_0.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <thread>
#include <vector>

#include "ocrd/detail/nelder_mead.hpp"
#include "ocrd/info.hpp"
#include "ocrd/region/mmi.hpp"
#include "ocrd/region/types.hpp"
#include "ocrd/rng.hpp"

namespace ocrd {

struct I0Options {
  /// Dirichlet-initialized local searches, split evenly between the two
  /// orientations.
  std::size_t restarts = 64;
  std::uint64_t seed = 0;
  /// Objective evaluations per local search; 0 picks 40 per free parameter.
  std::size_t evaluations_per_start = 0;
  /// Worker threads; 0 uses the hardware concurrency.
  std::size_t threads = 0;
  /// Duality-gap target of the inner solves during the search.
  double inner_gap = 1e-7;
};

struct I0Result {
  /// Upper bound on I_0 in bits; +inf when the budget is infeasible.
  double upper_bound = kInf;
  bool feasible = false;
  MarkovTriple triple;
  double i_xu = kInf;
  double i_yu = kInf;
  std::size_t evaluations = 0;
};

namespace detail {

class EncoderSearch {
 public:
  EncoderSearch(const Pmf& mu, const Pmf& psi, const DistortionMatrix& rho, double d, std::size_t aux)
      : mu_(mu), psi_(psi), rho_(rho), d_(d), aux_(aux) {}

  struct Evaluation {
    double objective = kInf;
    bool feasible = false;
    double i_xu = kInf;
    Matrix joint_xu;
    MmiResult y_side;
  };

  std::size_t dim() const { return mu_.size() * aux_; }

  Evaluation evaluate(const Matrix& u_given_x, const MmiOptions& inner) const {
    Evaluation e;
    const std::size_t nx = mu_.size(), ny = psi_.size();
    e.joint_xu = Matrix(nx, aux_);
    std::vector<double> pu(aux_, 0.0);
    for (std::size_t x = 0; x < nx; ++x)
      for (std::size_t u = 0; u < aux_; ++u) {
        e.joint_xu(x, u) = mu_[x] * u_given_x(x, u);
        pu[u] += e.joint_xu(x, u);
      }
    e.i_xu = mutual_information(JointPmf(e.joint_xu));
    Matrix cost(aux_, ny);
    for (std::size_t u = 0; u < aux_; ++u) {
      if (pu[u] <= 0.0) continue;
      for (std::size_t y = 0; y < ny; ++y) {
        double acc = 0.0;
        for (std::size_t x = 0; x < nx; ++x) acc += e.joint_xu(x, u) * rho_(x, y);
        cost(u, y) = acc / pu[u];
      }
    }
    e.y_side = mmi_constrained_output(Pmf(pu), psi_, DistortionMatrix(std::move(cost)), d_, inner);
    e.feasible = e.y_side.feasible;
    e.objective = e.feasible ? std::max(e.i_xu, e.y_side.value) : 100.0 + 100.0 * (e.y_side.min_distortion - d_);
    return e;
  }

  Matrix softmax(const std::vector<double>& logits) const {
    Matrix p(mu_.size(), aux_);
    for (std::size_t x = 0; x < mu_.size(); ++x) {
      double mx = -kInf;
      for (std::size_t u = 0; u < aux_; ++u) mx = std::max(mx, logits[x * aux_ + u]);
      double total = 0.0;
      for (std::size_t u = 0; u < aux_; ++u) total += (p(x, u) = std::exp(logits[x * aux_ + u] - mx));
      for (std::size_t u = 0; u < aux_; ++u) p(x, u) /= total;
    }
    return p;
  }

  std::vector<double> logits_of(const Matrix& u_given_x, double floor = 1e-4) const {
    std::vector<double> out(dim());
    for (std::size_t x = 0; x < mu_.size(); ++x)
      for (std::size_t u = 0; u < aux_; ++u) out[x * aux_ + u] = std::log(std::max(u_given_x(x, u), floor));
    return out;
  }

  MarkovTriple assemble(const Evaluation& e) const {
    const std::size_t nx = mu_.size(), ny = psi_.size();
    const JointPmf& uy = e.y_side.argmin.joint;
    std::vector<double> pu(aux_, 0.0);
    for (std::size_t x = 0; x < nx; ++x)
      for (std::size_t u = 0; u < aux_; ++u) pu[u] += e.joint_xu(x, u);
    Matrix xu(aux_, nx), yu(aux_, ny);
    for (std::size_t u = 0; u < aux_; ++u) {
      double row = 0.0;
      for (std::size_t y = 0; y < ny; ++y) row += uy(u, y);
      for (std::size_t x = 0; x < nx; ++x) xu(u, x) = pu[u] > 0.0 ? e.joint_xu(x, u) / pu[u] : mu_[x];
      for (std::size_t y = 0; y < ny; ++y) yu(u, y) = row > 0.0 ? uy(u, y) / row : psi_[y];
    }
    return MarkovTriple(Pmf(std::move(pu)), Channel(std::move(xu)), Channel(std::move(yu)));
  }

 private:
  const Pmf& mu_;
  const Pmf& psi_;
  const DistortionMatrix& rho_;
  double d_;
  std::size_t aux_;
};

struct Candidate {
  double value = kInf;
  bool feasible = false;
  bool swapped = false;
  Matrix u_given_x;
  std::size_t evaluations = 0;
};

inline Matrix dirichlet_rows(std::size_t rows, std::size_t cols, Rng& rng) {
  Matrix p(rows, cols);
  for (std::size_t i = 0; i < rows; ++i) {
    double total = 0.0;
    for (std::size_t j = 0; j < cols; ++j) total += (p(i, j) = -std::log(1.0 - uniform01(rng)));
    for (std::size_t j = 0; j < cols; ++j) p(i, j) /= total;
  }
  return p;
}

}  // namespace detail

inline I0Result i0_solver(const Pmf& mu, const Pmf& psi, const DistortionMatrix& rho, double d,
                          const I0Options& opt = {}) {
  if (std::isnan(d)) throw ValidationError("i0_solver: distortion level is NaN");
  TransportProblem{mu, psi, rho}.validate();
  const std::size_t aux = mu.size() + psi.size() + 1;
  const DistortionMatrix rho_t = rho.transposed();
  const detail::EncoderSearch forward(mu, psi, rho, d, aux);
  const detail::EncoderSearch backward(psi, mu, rho_t, d, aux);
  const MmiOptions inner{opt.inner_gap};

  I0Result out;
  const MmiResult direct = mmi_constrained_output(mu, psi, rho, d);
  if (!direct.feasible) return out;

  auto local_search = [&](bool swapped, Matrix start) {
    const detail::EncoderSearch& side = swapped ? backward : forward;
    detail::NelderMeadOptions nm;
    nm.max_evaluations = opt.evaluations_per_start ? opt.evaluations_per_start : 40 * side.dim();
    auto f = [&](const std::vector<double>& th) { return side.evaluate(side.softmax(th), inner).objective; };
    const auto r = detail::nelder_mead(f, side.logits_of(start), nm);
    detail::Candidate c{r.f, r.f < 100.0, swapped, side.softmax(r.x), r.evaluations};
    return c;
  };
  auto exact = [&](bool swapped, Matrix enc) {
    const detail::EncoderSearch& side = swapped ? backward : forward;
    const auto e = side.evaluate(enc, inner);
    return detail::Candidate{e.objective, e.feasible, swapped, std::move(enc), 1};
  };

  // Structured encoders for one orientation: U = first variable, U = second
  // variable through the optimal coupling, and U constant.
  auto structured = [&](bool swapped) {
    const Pmf& src = swapped ? psi : mu;
    const JointPmf coupling = swapped ? direct.argmin.joint.transposed() : direct.argmin.joint;
    std::vector<Matrix> encs;
    Matrix same(src.size(), aux), through(src.size(), aux), constant(src.size(), aux);
    for (std::size_t x = 0; x < src.size(); ++x) {
      same(x, x) = 1.0;
      constant(x, 0) = 1.0;
      double row = 0.0;
      for (std::size_t y = 0; y < coupling.y_size(); ++y) row += coupling(x, y);
      for (std::size_t y = 0; y < coupling.y_size(); ++y)
        through(x, y) = row > 0.0 ? coupling(x, y) / row : 1.0 / static_cast<double>(coupling.y_size());
    }
    encs.push_back(std::move(same));
    encs.push_back(std::move(through));
    encs.push_back(std::move(constant));
    return encs;
  };

  // Job list: exact structured candidates, local searches from the smoothed
  // structured encoders, then Dirichlet restarts (pair k shares one seed).
  struct Job {
    bool swapped;
    bool search;
    Matrix start;
  };
  std::vector<Job> jobs;
  for (bool swapped : {false, true})
    for (auto& enc : structured(swapped)) {
      jobs.push_back({swapped, false, enc});
      jobs.push_back({swapped, true, enc});
    }
  for (std::size_t r = 0; r < opt.restarts; ++r) {
    const bool swapped = (r % 2) == 1;
    Rng rng = derive_rng(opt.seed, 0x10, r / 2);
    const std::size_t rows = swapped ? psi.size() : mu.size();
    jobs.push_back({swapped, true, detail::dirichlet_rows(rows, aux, rng)});
  }

  std::vector<detail::Candidate> results(jobs.size());
  auto work = [&](std::size_t first, std::size_t stride) {
    for (std::size_t k = first; k < jobs.size(); k += stride)
      results[k] = jobs[k].search ? local_search(jobs[k].swapped, jobs[k].start) : exact(jobs[k].swapped, jobs[k].start);
  };
  std::size_t threads = opt.threads ? opt.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, jobs.size());
  if (threads <= 1) {
    work(0, 1);
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(work, t, threads);
  }

  const detail::Candidate* best = nullptr;
  for (const auto& c : results) {
    out.evaluations += c.evaluations;
    if (c.feasible && (!best || c.value < best->value)) best = &c;
  }
  if (!best) return out;

  // Polish the winner with restarted, progressively smaller simplices.
  const detail::EncoderSearch& side = best->swapped ? backward : forward;
  Matrix encoder = best->u_given_x;
  double value = best->value;
  for (double step : {0.5, 0.1, 0.02}) {
    detail::NelderMeadOptions nm;
    nm.initial_step = step;
    nm.max_evaluations = 40 * side.dim();
    auto f = [&](const std::vector<double>& th) { return side.evaluate(side.softmax(th), inner).objective; };
    const auto r = detail::nelder_mead(f, side.logits_of(encoder, 1e-300), nm);
    out.evaluations += r.evaluations;
    if (r.f < value) {
      value = r.f;
      encoder = side.softmax(r.x);
    }
  }

  // Final tight solve of the decoder side for the winning encoder.
  const auto e = side.evaluate(encoder, MmiOptions{});
  MarkovTriple triple = side.assemble(e);
  if (best->swapped) triple = triple.swapped();
  out.feasible = true;
  out.i_xu = triple.i_xu();
  out.i_yu = triple.i_yu();
  out.upper_bound = std::max(out.i_xu, out.i_yu);
  out.triple = std::move(triple);
  return out;
}

}  // namespace ocrd
