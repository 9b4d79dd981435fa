#pragma once

// Block-level simulation of the random-codebook construction: codewords
// U^n(j,k) drawn i.i.d. from P_U, a likelihood encoder choosing j given
// (X^n, K = k), a memoryless decoder P_{Y|U}, and an optional optimal
// coupling that maps the decoder's output law onto psi^n.
//
// Exact mode enumerates X^n and Y^n to get the code's laws and distortions
// in closed form for one codebook. Monte-carlo mode only samples blocks; its
// total variation numbers are plug-in single-letter estimates.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "ocrd/error.hpp"
#include "ocrd/info.hpp"
#include "ocrd/region/types.hpp"
#include "ocrd/rng.hpp"
#include "ocrd/transport.hpp"

namespace ocrd {

struct SimCaps {
  /// Largest enumerated block alphabet |X|^n or |Y|^n.
  std::size_t alphabet_power = 10'000'000;
  /// Largest codebook, counted in codewords.
  std::size_t codebook = std::size_t{1} << 24;
  /// Largest table held in memory: |X|^n x |Y|^n for the corrected
  /// distortion, and codewords x |Y|^n for the per-codeword output laws.
  std::size_t joint_table = 10'000'000;
  /// Largest inner-loop operation count of one exact analysis.
  std::size_t work = 4'000'000'000;
  /// Largest side of the block coupling problem.
  std::size_t coupling_side = 4096;
};

/// |[2^{nR}]| = ceil(2^{nR}); tiny floating excess over an integer is ignored.
inline std::size_t index_set_size(std::size_t n, double rate) {
  if (std::isnan(rate) || rate < 0.0) throw ValidationError("rates must be nonnegative");
  const double v = std::exp2(static_cast<double>(n) * rate);
  if (!(v < 9.0e15)) throw CapExceeded("index set 2^{nR} too large");
  return static_cast<std::size_t>(std::ceil(v * (1.0 - 1e-12)));
}

class Codebook {
 public:
  Codebook() = default;
  /// Explicit codewords, row-major over (j, k) with the n symbols of each
  /// codeword contiguous.
  Codebook(MarkovTriple triple, std::size_t n, double rate, double common_rate, std::uint64_t seed,
           std::size_t rows, std::size_t cols, std::vector<std::uint32_t> symbols)
      : triple_(std::move(triple)), n_(n), rate_(rate), common_rate_(common_rate), seed_(seed), rows_(rows),
        cols_(cols), symbols_(std::move(symbols)) {
    if (n_ == 0) throw ValidationError("codebook: block length must be positive");
    if (symbols_.size() != rows_ * cols_ * n_) throw ValidationError("codebook: symbol count does not match shape");
    for (auto s : symbols_)
      if (s >= triple_.aux_size()) throw ValidationError("codebook: symbol outside the auxiliary alphabet");
  }

  const MarkovTriple& triple() const noexcept { return triple_; }
  std::size_t block_length() const noexcept { return n_; }
  double rate() const noexcept { return rate_; }
  double common_rate() const noexcept { return common_rate_; }
  std::uint64_t seed() const noexcept { return seed_; }
  /// Number of message indices j.
  std::size_t rows() const noexcept { return rows_; }
  /// Number of common-randomness indices k.
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return rows_ * cols_; }
  std::span<const std::uint32_t> codeword(std::size_t j, std::size_t k) const {
    return {symbols_.data() + (j * cols_ + k) * n_, n_};
  }
  std::span<const std::uint32_t> symbols() const noexcept { return symbols_; }

 private:
  MarkovTriple triple_;
  std::size_t n_ = 0;
  double rate_ = 0.0, common_rate_ = 0.0;
  std::uint64_t seed_ = 0;
  std::size_t rows_ = 0, cols_ = 0;
  std::vector<std::uint32_t> symbols_;
};

inline Codebook generate_codebook(const MarkovTriple& triple, std::size_t n, double rate, double common_rate,
                                  std::uint64_t seed, std::size_t cap = std::size_t{1} << 24) {
  if (n == 0) throw ValidationError("codebook: block length must be positive");
  const std::size_t rows = index_set_size(n, rate), cols = index_set_size(n, common_rate);
  if (static_cast<double>(rows) * static_cast<double>(cols) > static_cast<double>(cap))
    throw CapExceeded("codebook: " + std::to_string(rows) + " x " + std::to_string(cols) +
                      " codewords exceed cap " + std::to_string(cap));
  Rng rng(splitmix64(seed));
  std::vector<std::uint32_t> symbols(rows * cols * n);
  const auto pu = triple.p_u().probs();
  for (auto& s : symbols) s = static_cast<std::uint32_t>(sample_index(pu, 1.0, rng));
  return Codebook(triple, n, rate, common_rate, seed, rows, cols, std::move(symbols));
}

struct EncodeResult {
  std::size_t j = 0;
  /// Every codeword in column k gives x_block zero likelihood; j was drawn
  /// uniformly.
  bool zero_likelihood = false;
};

namespace detail {

inline Matrix log_channel(const Channel& w) {
  Matrix out(w.inputs(), w.outputs());
  for (std::size_t u = 0; u < w.inputs(); ++u)
    for (std::size_t x = 0; x < w.outputs(); ++x) out(u, x) = w(u, x) > 0.0 ? std::log(w(u, x)) : -kInf;
  return out;
}

// Posterior over j in column k, normalized from log-likelihoods with the
// maximum subtracted. Returns false (and a uniform posterior) when every
// likelihood is zero.
inline bool encoder_posterior(const Codebook& cb, const Matrix& log_w, std::span<const std::uint32_t> x,
                              std::size_t k, std::vector<double>& post) {
  post.resize(cb.rows());
  double mx = -kInf;
  for (std::size_t j = 0; j < cb.rows(); ++j) {
    const auto u = cb.codeword(j, k);
    double ll = 0.0;
    for (std::size_t i = 0; i < x.size() && ll > -kInf; ++i) ll += log_w(u[i], x[i]);
    post[j] = ll;
    mx = std::max(mx, ll);
  }
  if (mx == -kInf) {
    std::fill(post.begin(), post.end(), 1.0 / static_cast<double>(cb.rows()));
    return false;
  }
  double total = 0.0;
  for (double& p : post) total += (p = std::exp(p - mx));
  for (double& p : post) p /= total;
  return true;
}

}  // namespace detail

/// Draws j with probability proportional to prod_i P_{X|U}(x_i | u_i(j, k)).
inline EncodeResult likelihood_encode(const Codebook& cb, std::span<const std::uint32_t> x_block, std::size_t k,
                                      Rng& rng) {
  if (x_block.size() != cb.block_length()) throw ValidationError("likelihood_encode: block length mismatch");
  if (k >= cb.cols()) throw ValidationError("likelihood_encode: common-randomness index out of range");
  for (auto s : x_block)
    if (s >= cb.triple().x_size()) throw ValidationError("likelihood_encode: source symbol out of range");
  std::vector<double> post;
  const bool ok = detail::encoder_posterior(cb, detail::log_channel(cb.triple().x_given_u()), x_block, k, post);
  return {sample_index(post, 1.0, rng), !ok};
}

/// Passes codeword (j, k) through the memoryless channel `y_given_u`.
inline std::vector<std::uint32_t> decode(const Codebook& cb, std::size_t j, std::size_t k, const Channel& y_given_u,
                                         Rng& rng) {
  if (j >= cb.rows() || k >= cb.cols()) throw ValidationError("decode: index out of range");
  if (y_given_u.inputs() != cb.triple().aux_size()) throw ValidationError("decode: channel input size mismatch");
  const auto u = cb.codeword(j, k);
  std::vector<std::uint32_t> y(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) y[i] = static_cast<std::uint32_t>(sample_index(y_given_u.row(u[i]), 1.0, rng));
  return y;
}

/// Law of W^n given the input sequence v^n through a memoryless channel,
/// in lexicographic block order.
inline std::vector<double> block_output_law(const Channel& w, std::span<const std::uint32_t> v) {
  std::vector<double> law{1.0};
  for (auto s : v) {
    std::vector<double> next;
    next.reserve(law.size() * w.outputs());
    const auto row = w.row(s);
    for (double p : law)
      for (double q : row) next.push_back(p * q);
    law = std::move(next);
  }
  return law;
}

/// rho_n(a, b) = (1/n) sum_i rho(a_i, b_i).
inline double block_distortion(const DistortionMatrix& rho, std::span<const std::uint32_t> a,
                               std::span<const std::uint32_t> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += rho(a[i], b[i]);
  return acc / static_cast<double>(a.size());
}

/// Everything one codebook induces, computed by enumeration.
struct ExactAnalysis {
  std::vector<double> output_law;        // P_{Y^n} of the code
  std::vector<double> ideal_output_law;  // Gamma_{Y^n}
  double ideal_distortion = 0.0;         // E_Gamma[rho_n(X^n, Y^n)]
  double code_distortion = 0.0;          // E_P[rho_n(X^n, Y^n)], before correction
  double tv_output = 0.0;                // ||P_{Y^n} - psi^n||
  double tv_ideal_output = 0.0;          // ||Gamma_{Y^n} - psi^n||
  double tv_source = 0.0;                // ||Gamma_{X^n,K} - Unif x mu^n||
  double zero_likelihood_mass = 0.0;
  bool corrected = false;
  Coupling correction;                   // optimal coupling of P_{Y^n} and psi^n
  double correction_cost = 0.0;          // its cost under rho_n on Y^n x Y^n
  double corrected_distortion = 0.0;     // E[rho_n(X^n, Yhat^n)]
  double tv_corrected = 0.0;             // ||P_{Yhat^n} - psi^n||
};

inline std::size_t checked_product(std::size_t a, std::size_t b, std::size_t cap, const std::string& what) {
  if (a != 0 && b > cap / a) throw CapExceeded(what + " exceeds cap " + std::to_string(cap));
  return a * b;
}

/// Inner-loop operation count of one exact analysis, or CapExceeded.
inline std::size_t exact_work(std::size_t xs, std::size_t ys, std::size_t words, std::size_t n, bool correct,
                              const SimCaps& caps) {
  const std::size_t per_x = correct ? n + ys : n;
  const std::size_t enc = checked_product(checked_product(xs, words, caps.work, "exact analysis work"), per_x, caps.work,
                                          "exact analysis work");
  const std::size_t laws = checked_product(words, ys, caps.joint_table, "codeword output-law table");
  if (enc > caps.work - laws) throw CapExceeded("exact analysis work exceeds cap " + std::to_string(caps.work));
  return enc + laws;
}

/// `output_cost` is the per-letter cost on Y x Y used by the correction
/// coupling; required when `correct` is set.
inline ExactAnalysis analyze_codebook_exact(const Codebook& cb, const DistortionMatrix& rho, bool correct,
                                            const DistortionMatrix* output_cost = nullptr, const SimCaps& caps = {}) {
  const MarkovTriple& t = cb.triple();
  const std::size_t n = cb.block_length(), nx = t.x_size(), ny = t.y_size(), nu = t.aux_size();
  if (rho.rows() != nx || rho.cols() != ny) throw ValidationError("exact analysis: distortion matrix shape mismatch");
  const std::size_t xs = checked_power(nx, n, caps.alphabet_power, "|X|^n");
  const std::size_t ys = checked_power(ny, n, caps.alphabet_power, "|Y|^n");
  const std::size_t words = cb.size();
  exact_work(xs, ys, words, n, correct, caps);
  if (correct) {
    if (!output_cost || output_cost->rows() != ny || output_cost->cols() != ny)
      throw ValidationError("exact analysis: correction needs a |Y| x |Y| output cost");
    if (ys > caps.coupling_side) throw CapExceeded("|Y|^n = " + std::to_string(ys) + " exceeds the coupling cap");
    checked_product(xs, ys, caps.joint_table, "|X|^n x |Y|^n table");
  }

  const Pmf mu = t.induced_x(), psi = t.induced_y();
  const Pmf mu_n = product_extension(mu, n, caps.alphabet_power);
  const Pmf psi_n = product_extension(psi, n, caps.alphabet_power);
  const Matrix log_w = detail::log_channel(t.x_given_u());

  // e(x, u) = E[rho(x, Y) | U = u];  ideal(u) = E[rho(X, Y) | U = u].
  Matrix e(nx, nu);
  std::vector<double> ideal(nu, 0.0);
  for (std::size_t u = 0; u < nu; ++u)
    for (std::size_t x = 0; x < nx; ++x) {
      double acc = 0.0;
      for (std::size_t y = 0; y < ny; ++y) acc += t.y_given_u()(u, y) * rho(x, y);
      e(x, u) = acc;
      ideal[u] += t.x_given_u()(u, x) * acc;
    }

  std::vector<std::vector<double>> laws(words);
  for (std::size_t j = 0; j < cb.rows(); ++j)
    for (std::size_t k = 0; k < cb.cols(); ++k) laws[j * cb.cols() + k] = block_output_law(t.y_given_u(), cb.codeword(j, k));

  ExactAnalysis out;
  out.ideal_output_law.assign(ys, 0.0);
  out.output_law.assign(ys, 0.0);
  for (std::size_t w = 0; w < words; ++w) {
    for (std::size_t y = 0; y < ys; ++y) out.ideal_output_law[y] += laws[w][y] / static_cast<double>(words);
    const auto u = cb.symbols().subspan(w * n, n);
    double acc = 0.0;
    for (auto s : u) acc += ideal[s];
    out.ideal_distortion += acc / static_cast<double>(n * words);
  }

  std::vector<double> weight(words, 0.0);  // P(J = j, K = k)
  std::vector<double> joint;                // P(X^n, Y^n) when correcting
  if (correct) joint.assign(xs * ys, 0.0);
  std::vector<std::uint32_t> xb(n);
  std::vector<double> post;
  const double kmass = 1.0 / static_cast<double>(cb.cols());
  for (std::size_t k = 0; k < cb.cols(); ++k) {
    std::vector<double> gamma_x(xs, 0.0);  // Gamma_{X^n | K = k}
    for (std::size_t xi = 0; xi < xs; ++xi) {
      decode_multi_index(xi, nx, xb);
      for (std::size_t j = 0; j < cb.rows(); ++j) {
        const auto u = cb.codeword(j, k);
        double lik = 1.0;
        for (std::size_t i = 0; i < n; ++i) lik *= t.x_given_u()(u[i], xb[i]);
        gamma_x[xi] += lik / static_cast<double>(cb.rows());
      }
      if (mu_n[xi] <= 0.0) continue;
      if (!detail::encoder_posterior(cb, log_w, xb, k, post)) out.zero_likelihood_mass += mu_n[xi] * kmass;
      for (std::size_t j = 0; j < cb.rows(); ++j) {
        const double v = mu_n[xi] * kmass * post[j];
        if (v <= 0.0) continue;
        const std::size_t w = j * cb.cols() + k;
        weight[w] += v;
        const auto u = cb.codeword(j, k);
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i) acc += e(xb[i], u[i]);
        out.code_distortion += v * acc / static_cast<double>(n);
        if (correct) {
          double* row = joint.data() + xi * ys;
          for (std::size_t y = 0; y < ys; ++y) row[y] += v * laws[w][y];
        }
      }
    }
    out.tv_source += kmass * total_variation(gamma_x, mu_n.probs());
  }
  for (std::size_t w = 0; w < words; ++w)
    for (std::size_t y = 0; y < ys; ++y) out.output_law[y] += weight[w] * laws[w][y];
  out.tv_output = total_variation(out.output_law, psi_n.probs());
  out.tv_ideal_output = total_variation(out.ideal_output_law, psi_n.probs());

  if (!correct) {
    out.corrected_distortion = out.code_distortion;
    out.tv_corrected = out.tv_output;
    return out;
  }

  // Block cost rho_n on Y^n x Y^n and the optimal coupling to psi^n.
  Matrix block_cost(ys, ys);
  std::vector<std::uint32_t> a(n), b(n);
  for (std::size_t yi = 0; yi < ys; ++yi) {
    decode_multi_index(yi, ny, a);
    for (std::size_t zi = 0; zi < ys; ++zi) {
      decode_multi_index(zi, ny, b);
      block_cost(yi, zi) = block_distortion(*output_cost, a, b);
    }
  }
  OtOptions ot_opt;
  ot_opt.max_side = caps.coupling_side;
  out.correction = solve_ot(TransportProblem{Pmf(out.output_law), psi_n, DistortionMatrix(std::move(block_cost))}, ot_opt);
  out.correction_cost = out.correction.cost;
  out.corrected = true;

  std::vector<double> corrected_law(ys, 0.0);
  struct Move {
    std::size_t from, to;
    double prob;  // T(to | from)
  };
  std::vector<Move> moves;
  const Matrix& plan = out.correction.joint.table();
  for (std::size_t yi = 0; yi < ys; ++yi) {
    double row = 0.0;
    for (std::size_t zi = 0; zi < ys; ++zi) row += plan(yi, zi);
    for (std::size_t zi = 0; zi < ys; ++zi) {
      corrected_law[zi] += plan(yi, zi);
      if (plan(yi, zi) > 0.0 && row > 0.0) moves.push_back({yi, zi, plan(yi, zi) / row});
    }
  }
  out.tv_corrected = total_variation(corrected_law, psi_n.probs());
  for (std::size_t xi = 0; xi < xs; ++xi) {
    decode_multi_index(xi, nx, a);
    for (const Move& mv : moves) {
      const double pxy = joint[xi * ys + mv.from];
      if (pxy <= 0.0) continue;
      decode_multi_index(mv.to, ny, b);
      out.corrected_distortion += pxy * mv.prob * block_distortion(rho, a, b);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

enum class SimMode { exact, monte_carlo };
enum class SimModeRequest { automatic, exact, monte_carlo };

inline std::string_view to_string(SimMode m) { return m == SimMode::exact ? "exact" : "monte-carlo"; }

struct SimConfig {
  MarkovTriple triple;
  DistortionMatrix rho;
  std::size_t n = 1;
  double rate = 0.0;
  double common_rate = 0.0;
  std::size_t trials = 1;
  std::uint64_t seed = 0;
  /// Apply the optimal-coupling stage after the decoder.
  bool correction = false;
  SimModeRequest mode = SimModeRequest::automatic;
  /// Per-letter cost on Y x Y for the correction stage; defaults to rho
  /// when rho is square.
  std::optional<DistortionMatrix> output_cost;
  /// rho = d^p for a metric d; the distortion bound uses q = max(1, p).
  double distortion_exponent = 1.0;
  /// Worker threads for the trial fan-out; 0 uses the hardware concurrency.
  std::size_t threads = 1;
  SimCaps caps;

  void validate() const {
    if (n == 0) throw ValidationError("simulation: block length n must be at least 1");
    if (trials == 0) throw ValidationError("simulation: trials must be at least 1");
    if (std::isnan(rate) || rate < 0.0 || std::isnan(common_rate) || common_rate < 0.0)
      throw ValidationError("simulation: rates must be nonnegative");
    if (rho.rows() != triple.x_size() || rho.cols() != triple.y_size())
      throw ValidationError("simulation: distortion matrix is " + std::to_string(rho.rows()) + "x" +
                            std::to_string(rho.cols()) + " but the triple has |X|=" + std::to_string(triple.x_size()) +
                            ", |Y|=" + std::to_string(triple.y_size()));
    if (!(distortion_exponent > 0.0)) throw ValidationError("simulation: distortion exponent must be positive");
    if (correction && !output_cost && rho.rows() != rho.cols())
      throw ValidationError("simulation: correction needs an output cost when rho is not square");
    if (output_cost && (output_cost->rows() != triple.y_size() || output_cost->cols() != triple.y_size()))
      throw ValidationError("simulation: output cost must be |Y| x |Y|");
  }
  const DistortionMatrix& correction_cost() const { return output_cost ? *output_cost : rho; }
};

struct TrialRecord {
  std::size_t trial = 0;
  std::uint64_t codebook_seed = 0;
  std::size_t k = 0;
  std::size_t j = 0;
  bool zero_likelihood = false;
  /// rho_n of the sampled block before and after the correction stage.
  double sample_distortion_decoded = 0.0;
  double sample_distortion = 0.0;
  // Exact mode only; NaN otherwise.
  double ideal_distortion = std::nan("");
  double code_distortion = std::nan("");
  double correction_cost = std::nan("");
  double end_to_end_distortion = std::nan("");
  /// (code_distortion^{1/q} + correction_cost^{1/q})^q.
  double distortion_bound = std::nan("");
  double tv_output = std::nan("");
  double tv_ideal_output = std::nan("");
  double tv_source = std::nan("");
};

struct SimReport {
  SimMode mode = SimMode::exact;
  bool corrected = false;
  std::size_t n = 0;
  std::size_t codebook_rows = 0;
  std::size_t codebook_cols = 0;
  /// Single-letter E[rho(X,Y)] of the triple.
  double design_distortion = 0.0;
  /// Exact mode: mean over codebooks of the exact end-to-end distortion.
  /// Monte-carlo mode: mean sampled rho_n.
  double mean_distortion = 0.0;
  double mean_sample_distortion = 0.0;
  /// Exact mode: mean exact TV between the final output law and psi^n.
  /// Monte-carlo mode: plug-in single-letter TV of pooled outputs.
  double tv_output_vs_iid = 0.0;
  bool tv_is_estimate = false;
  /// Mean TV between Gamma_{Y^n} and psi^n (exact mode only).
  std::optional<double> tv_softcover;
  std::optional<double> tv_source;
  /// Largest (end-to-end distortion - distortion bound) over trials; <= 0
  /// when the triangle-inequality chain holds (exact mode only).
  std::optional<double> max_bound_excess;
  /// max(0, mean distortion bound - design distortion) (exact mode only).
  std::optional<double> distortion_slack;
  std::size_t zero_likelihood_events = 0;
  double zero_likelihood_mass = 0.0;
  std::string caveat;
  std::vector<TrialRecord> trials;
};

namespace detail {

inline bool exact_mode_fits(const SimConfig& cfg, std::size_t rows, std::size_t cols) {
  try {
    const std::size_t xs = checked_power(cfg.triple.x_size(), cfg.n, cfg.caps.alphabet_power, "|X|^n");
    const std::size_t ys = checked_power(cfg.triple.y_size(), cfg.n, cfg.caps.alphabet_power, "|Y|^n");
    exact_work(xs, ys, rows * cols, cfg.n, cfg.correction, cfg.caps);
    if (cfg.correction) {
      if (ys > cfg.caps.coupling_side) return false;
      checked_product(xs, ys, cfg.caps.joint_table, "table");
    }
    return true;
  } catch (const CapExceeded&) {
    return false;
  }
}

enum Stream : std::uint64_t { kCodebook = 1, kSource = 2, kCommon = 3, kEncoder = 4, kDecoder = 5, kCorrection = 6 };

}  // namespace detail

inline SimReport run_simulation(const SimConfig& cfg) {
  cfg.validate();
  const MarkovTriple& t = cfg.triple;
  const std::size_t rows = index_set_size(cfg.n, cfg.rate), cols = index_set_size(cfg.n, cfg.common_rate);
  if (static_cast<double>(rows) * static_cast<double>(cols) > static_cast<double>(cfg.caps.codebook))
    throw CapExceeded("simulation: codebook of " + std::to_string(rows) + " x " + std::to_string(cols) +
                      " codewords exceeds cap " + std::to_string(cfg.caps.codebook));
  SimMode mode = SimMode::monte_carlo;
  const bool fits = detail::exact_mode_fits(cfg, rows, cols);
  if (cfg.mode == SimModeRequest::exact) {
    if (!fits) throw CapExceeded("simulation: exact mode exceeds the enumeration caps (|X|^n, |Y|^n or work)");
    mode = SimMode::exact;
  } else if (cfg.mode == SimModeRequest::automatic && fits) {
    mode = SimMode::exact;
  }

  const Pmf mu = t.induced_x(), psi = t.induced_y();
  const std::size_t n = cfg.n, ny = t.y_size();
  const double q = std::max(1.0, cfg.distortion_exponent);

  SimReport rep;
  rep.mode = mode;
  rep.corrected = cfg.correction;
  rep.n = n;
  rep.codebook_rows = rows;
  rep.codebook_cols = cols;
  rep.design_distortion = t.distortion(cfg.rho);
  rep.trials.resize(cfg.trials);
  std::vector<ExactAnalysis> exact(mode == SimMode::exact ? cfg.trials : 0);
  std::vector<std::vector<std::uint32_t>> inputs(cfg.trials), outputs(cfg.trials);

  auto run_trial = [&](std::size_t trial) {
    TrialRecord& rec = rep.trials[trial];
    rec.trial = trial;
    rec.codebook_seed = splitmix64(splitmix64(cfg.seed ^ detail::kCodebook) + trial);
    const Codebook cb = generate_codebook(t, n, cfg.rate, cfg.common_rate, rec.codebook_seed, cfg.caps.codebook);

    Rng src = derive_rng(cfg.seed, detail::kSource, trial);
    Rng com = derive_rng(cfg.seed, detail::kCommon, trial);
    Rng enc = derive_rng(cfg.seed, detail::kEncoder, trial);
    Rng dec = derive_rng(cfg.seed, detail::kDecoder, trial);
    Rng cor = derive_rng(cfg.seed, detail::kCorrection, trial);

    std::vector<std::uint32_t> x(n);
    for (auto& s : x) s = static_cast<std::uint32_t>(sample_index(mu.probs(), 1.0, src));
    rec.k = static_cast<std::size_t>(uniform01(com) * static_cast<double>(cols));
    const EncodeResult er = likelihood_encode(cb, x, rec.k, enc);
    rec.j = er.j;
    rec.zero_likelihood = er.zero_likelihood;
    std::vector<std::uint32_t> y = decode(cb, rec.j, rec.k, t.y_given_u(), dec);
    rec.sample_distortion_decoded = block_distortion(cfg.rho, x, y);

    if (mode == SimMode::exact) {
      ExactAnalysis& a = exact[trial];
      a = analyze_codebook_exact(cb, cfg.rho, cfg.correction, &cfg.correction_cost(), cfg.caps);
      rec.ideal_distortion = a.ideal_distortion;
      rec.code_distortion = a.code_distortion;
      rec.tv_output = a.tv_output;
      rec.tv_ideal_output = a.tv_ideal_output;
      rec.tv_source = a.tv_source;
      rec.end_to_end_distortion = a.corrected_distortion;
      rec.correction_cost = cfg.correction ? a.correction_cost : 0.0;
      rec.distortion_bound =
          std::pow(std::pow(a.code_distortion, 1.0 / q) + std::pow(rec.correction_cost, 1.0 / q), q);
      if (cfg.correction) {
        std::size_t yi = 0;
        for (auto s : y) yi = yi * ny + s;
        const std::size_t zi = sample_coupling_conditional(a.correction, yi, cor);
        decode_multi_index(zi, ny, y);
      }
    }
    inputs[trial] = x;
    outputs[trial] = y;
    rec.sample_distortion = block_distortion(cfg.rho, x, y);
  };

  const std::size_t threads =
      std::min<std::size_t>(cfg.trials, cfg.threads ? cfg.threads : std::max(1u, std::thread::hardware_concurrency()));
  if (threads <= 1) {
    for (std::size_t trial = 0; trial < cfg.trials; ++trial) run_trial(trial);
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < threads; ++w)
      pool.emplace_back([&, w] {
        for (std::size_t trial = w; trial < cfg.trials; trial += threads) run_trial(trial);
      });
  }

  // Monte-carlo correction: couple the pooled single-letter output law with
  // psi and move each letter through that coupling.
  if (mode == SimMode::monte_carlo && cfg.correction) {
    std::vector<std::uint32_t> pooled;
    for (const auto& y : outputs) pooled.insert(pooled.end(), y.begin(), y.end());
    const Coupling c = solve_ot(TransportProblem{empirical_pmf(pooled, ny), psi, cfg.correction_cost()});
    for (std::size_t trial = 0; trial < cfg.trials; ++trial) {
      Rng cor = derive_rng(cfg.seed, detail::kCorrection, trial);
      for (auto& s : outputs[trial]) s = static_cast<std::uint32_t>(sample_coupling_conditional(c, s, cor));
      rep.trials[trial].sample_distortion = block_distortion(cfg.rho, inputs[trial], outputs[trial]);
    }
  }

  const double trials = static_cast<double>(cfg.trials);
  for (const auto& rec : rep.trials) {
    rep.mean_sample_distortion += rec.sample_distortion / trials;
    rep.zero_likelihood_events += rec.zero_likelihood ? 1 : 0;
  }
  if (mode == SimMode::exact) {
    double softcover = 0.0, source = 0.0, bound = 0.0, excess = -kInf;
    for (std::size_t trial = 0; trial < cfg.trials; ++trial) {
      const auto& a = exact[trial];
      const auto& rec = rep.trials[trial];
      rep.mean_distortion += a.corrected_distortion / trials;
      rep.tv_output_vs_iid += a.tv_corrected / trials;
      rep.zero_likelihood_mass += a.zero_likelihood_mass / trials;
      softcover += a.tv_ideal_output / trials;
      source += a.tv_source / trials;
      bound += rec.distortion_bound / trials;
      excess = std::max(excess, rec.end_to_end_distortion - rec.distortion_bound);
    }
    rep.tv_softcover = softcover;
    rep.tv_source = source;
    rep.max_bound_excess = excess;
    rep.distortion_slack = std::max(0.0, bound - rep.design_distortion);
  } else {
    rep.mean_distortion = rep.mean_sample_distortion;
    std::vector<std::uint32_t> pooled;
    for (const auto& y : outputs) pooled.insert(pooled.end(), y.begin(), y.end());
    rep.tv_output_vs_iid = total_variation(empirical_pmf(pooled, ny), psi);
    rep.tv_is_estimate = true;
    rep.caveat =
        "monte-carlo mode: tv_output_vs_iid is a plug-in single-letter estimate (biased upward); "
        "the correction stage, if enabled, couples single-letter laws rather than block laws";
  }
  return rep;
}

// ---------------------------------------------------------------------------

struct SoftCoveringResult {
  double mean_tv = 0.0;
  std::vector<double> tv;  // one per codebook
  std::size_t codebook_size = 0;
};

/// Exact ||(1/|B|) sum_i P_{W^n|V^n}(.|V^n(i)) - P_W^n|| for random codebooks
/// B of ceil(2^{nR}) sequences drawn i.i.d. from p_v, averaged over
/// `num_codebooks` draws.
inline SoftCoveringResult soft_covering_exact_detailed(const Pmf& p_v, const Channel& w_given_v, std::size_t n,
                                                       double rate, std::uint64_t seed, std::size_t num_codebooks,
                                                       const SimCaps& caps = {}) {
  if (w_given_v.inputs() != p_v.size()) throw ValidationError("soft covering: channel input size mismatch");
  if (n == 0 || num_codebooks == 0) throw ValidationError("soft covering: n and num_codebooks must be positive");
  const std::size_t ws = checked_power(w_given_v.outputs(), n, caps.alphabet_power, "|W|^n");
  const std::size_t size = index_set_size(n, rate);
  if (size > caps.codebook) throw CapExceeded("soft covering: codebook of " + std::to_string(size) + " exceeds cap");
  checked_product(checked_product(size, ws, caps.work, "soft covering work"), num_codebooks, caps.work,
                  "soft covering work");
  const Pmf target = product_extension(w_given_v.apply(p_v), n, caps.alphabet_power);

  SoftCoveringResult res;
  res.codebook_size = size;
  std::vector<std::uint32_t> v(n);
  for (std::size_t c = 0; c < num_codebooks; ++c) {
    Rng rng = derive_rng(seed, 0x5c, c);
    std::vector<double> mix(ws, 0.0);
    for (std::size_t i = 0; i < size; ++i) {
      for (auto& s : v) s = static_cast<std::uint32_t>(sample_index(p_v.probs(), 1.0, rng));
      const auto law = block_output_law(w_given_v, v);
      for (std::size_t w = 0; w < ws; ++w) mix[w] += law[w] / static_cast<double>(size);
    }
    res.tv.push_back(total_variation(mix, target.probs()));
    res.mean_tv += res.tv.back() / static_cast<double>(num_codebooks);
  }
  return res;
}

inline double soft_covering_exact(const Pmf& p_v, const Channel& w_given_v, std::size_t n, double rate,
                                  std::uint64_t seed, std::size_t num_codebooks, const SimCaps& caps = {}) {
  return soft_covering_exact_detailed(p_v, w_given_v, n, rate, seed, num_codebooks, caps).mean_tv;
}

}  // namespace ocrd
