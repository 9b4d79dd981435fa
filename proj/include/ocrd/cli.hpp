#pragma once

// Command-line front end. Each subcommand reads a JSON config (--config),
// lets flags override individual fields, validates everything, and writes
// CSV (curves) or JSON (scalar results, simulation reports) to --out or
// stdout.
//
// Exit codes: 0 success, 1 validation error, 2 input outside the
// mathematical domain, 3 resource cap exceeded.

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "ocrd/codesim.hpp"
#include "ocrd/error.hpp"
#include "ocrd/info.hpp"
#include "ocrd/region.hpp"

namespace ocrd::cli {

using nlohmann::json;

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitDomain = 2;
inline constexpr int kExitCap = 3;

/// Six significant digits, '.' as decimal point regardless of locale,
/// "inf" for infinities.
inline std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (v == 0.0) v = 0.0;  // drop the sign of -0
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 6);
  return std::string(buf, r.ptr);
}

inline json number(double v) {
  if (std::isnan(v)) return nullptr;
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

inline json matrix_json(const Matrix& m) {
  json out = json::array();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (double v : m.row(i)) row.push_back(v);
    out.push_back(std::move(row));
  }
  return out;
}

inline json triple_json(const MarkovTriple& t) {
  json pu = json::array();
  for (double p : t.p_u()) pu.push_back(p);
  return {{"p_u", pu}, {"x_given_u", matrix_json(t.x_given_u().matrix())}, {"y_given_u", matrix_json(t.y_given_u().matrix())}};
}

// ---------------------------------------------------------------------------
// Config access

class Config {
 public:
  Config(json j, std::string command) : j_(std::move(j)), command_(std::move(command)) {
    if (!j_.is_object()) throw ValidationError(command_ + ": config must be a JSON object");
  }

  void allow(std::initializer_list<const char*> keys) {
    for (auto k : keys) allowed_.insert(k);
  }
  void reject_unknown() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!allowed_.count(it.key())) throw ValidationError(command_ + ": unknown config field '" + it.key() + "'");
  }

  bool has(const std::string& key) const { return j_.contains(key) && !j_.at(key).is_null(); }
  const json& at(const std::string& key) const {
    if (!has(key)) throw ValidationError(command_ + ": missing required field '" + key + "'");
    return j_.at(key);
  }

  double real(const std::string& key) const { return to_real(at(key), key); }
  double real(const std::string& key, double fallback) const { return has(key) ? real(key) : fallback; }

  std::uint64_t u64(const std::string& key, std::uint64_t fallback) const {
    if (!has(key)) return fallback;
    const json& v = at(key);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0))
      throw ValidationError(command_ + ": field '" + key + "' must be a nonnegative integer");
    return v.get<std::uint64_t>();
  }
  std::size_t count(const std::string& key, std::size_t fallback, std::size_t min = 1) const {
    const std::uint64_t v = u64(key, fallback);
    if (v < min) throw ValidationError(command_ + ": field '" + key + "' must be at least " + std::to_string(min));
    return static_cast<std::size_t>(v);
  }
  bool flag(const std::string& key, bool fallback) const {
    if (!has(key)) return fallback;
    if (!at(key).is_boolean()) throw ValidationError(command_ + ": field '" + key + "' must be a boolean");
    return at(key).get<bool>();
  }
  std::string text(const std::string& key, const std::string& fallback) const {
    if (!has(key)) return fallback;
    if (!at(key).is_string()) throw ValidationError(command_ + ": field '" + key + "' must be a string");
    return at(key).get<std::string>();
  }

  std::vector<double> vec(const std::string& key) const { return to_vec(at(key), key); }
  Matrix matrix(const std::string& key) const { return to_matrix(at(key), key); }
  Pmf pmf(const std::string& key) const { return Pmf(vec(key)); }

  /// "hamming", "squared" (squared index difference) or an explicit matrix.
  DistortionMatrix distortion(const std::string& key, std::size_t rows, std::size_t cols) const {
    const json& v = at(key);
    if (v.is_string()) {
      const auto name = v.get<std::string>();
      if (name == "hamming") return DistortionMatrix::hamming(rows, cols);
      if (name == "squared") return DistortionMatrix::squared_index(rows, cols);
      throw ValidationError(command_ + ": field '" + key + "' must be \"hamming\", \"squared\" or a matrix");
    }
    DistortionMatrix d(to_matrix(v, key));
    if (d.rows() != rows || d.cols() != cols)
      throw ValidationError(command_ + ": field '" + key + "' must be " + std::to_string(rows) + "x" + std::to_string(cols));
    return d;
  }

  double to_real(const json& v, const std::string& key) const {
    if (v.is_number()) return v.get<double>();
    if (v.is_string() && v.get<std::string>() == "inf") return kInf;
    throw ValidationError(command_ + ": field '" + key + "' must be a number");
  }
  std::vector<double> to_vec(const json& v, const std::string& key) const {
    if (!v.is_array() || v.empty()) throw ValidationError(command_ + ": field '" + key + "' must be a nonempty array");
    std::vector<double> out;
    for (const auto& e : v) out.push_back(to_real(e, key));
    return out;
  }
  Matrix to_matrix(const json& v, const std::string& key) const {
    if (!v.is_array() || v.empty()) throw ValidationError(command_ + ": field '" + key + "' must be a nonempty array of rows");
    std::vector<std::vector<double>> rows;
    for (const auto& r : v) rows.push_back(to_vec(r, key));
    return Matrix::from_rows(rows);
  }

  json& raw() { return j_; }
  const std::string& command() const { return command_; }

 private:
  json j_;
  std::string command_;
  std::set<std::string> allowed_;
};

// ---------------------------------------------------------------------------
// Output

struct Output {
  std::optional<std::string> path;
  std::ostream& fallback;

  void write(const std::string& text) const {
    if (!path) {
      fallback << text;
      return;
    }
    std::ofstream f(*path, std::ios::binary);
    if (!f) throw ValidationError("cannot open output file '" + *path + "'");
    f << text;
    if (!f) throw ValidationError("failed writing output file '" + *path + "'");
  }
};

inline std::string curve_csv(const RegionCurve& c) {
  std::string s = "rc,r_min\n";
  for (const auto& p : c.points) s += format_number(p.rc) + "," + format_number(p.r_min) + "\n";
  return s;
}

inline std::vector<double> linear_grid(double lo, double hi, std::size_t points) {
  if (points == 1) return {lo};
  std::vector<double> g(points);
  for (std::size_t k = 0; k < points; ++k) g[k] = lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(points - 1);
  g.back() = hi;
  return g;
}

inline json scalar_result(const std::string& command, double value, json witness) {
  return {{"command", command},
          {"status", std::isinf(value) ? "infeasible" : "ok"},
          {"value_bits", number(value)},
          {"witness", std::move(witness)}};
}

inline std::string dump(const json& j) { return j.dump(2) + "\n"; }

// ---------------------------------------------------------------------------
// Commands

struct Problem {
  Pmf mu, psi;
  DistortionMatrix rho;
  double d;
};

inline Problem read_problem(const Config& c) {
  Pmf mu = c.pmf("mu"), psi = c.pmf("psi");
  DistortionMatrix rho = c.distortion("rho", mu.size(), psi.size());
  return {std::move(mu), std::move(psi), std::move(rho), c.real("d")};
}

inline std::string cmd_region_bsc(Config& c) {
  c.allow({"d", "points", "rc_max"});
  c.reject_unknown();
  const double d = c.real("d");
  if (std::isnan(d)) throw ValidationError("region-bsc: d is NaN");
  if (!(d > 0.0 && d < 0.5)) throw DomainError("region-bsc: d must lie in (0, 1/2)");
  const double rc_max = c.real("rc_max", binary_entropy(d));
  if (!(rc_max >= 0.0) || std::isinf(rc_max)) throw ValidationError("region-bsc: rc_max must be finite and nonnegative");
  const std::size_t points = c.count("points", 11);
  if (points > 1 && rc_max == 0.0) throw ValidationError("region-bsc: rc_max must be positive for more than one point");
  return curve_csv(bsc_boundary(d, linear_grid(0.0, rc_max, points)));
}

inline std::string cmd_region_gauss(Config& c) {
  c.allow({"sigma_x", "sigma_y", "d", "rc_max", "points"});
  c.reject_unknown();
  const GaussianSpec g{c.real("sigma_x", 1.0), c.real("sigma_y", 1.0), c.real("d")};
  g.validate();
  const double rc_max = c.real("rc_max", 3.0);
  if (!(rc_max >= 0.0) || std::isinf(rc_max)) throw ValidationError("region-gauss: rc_max must be finite and nonnegative");
  const std::size_t points = c.count("points", 31);
  if (points > 1 && rc_max == 0.0) throw ValidationError("region-gauss: rc_max must be positive for more than one point");
  RegionCurve curve = gaussian_boundary(g, linear_grid(0.0, rc_max, points));
  curve.points.push_back({kInf, gaussian_mmi(g)});
  return curve_csv(curve);
}

inline std::string cmd_mmi(Config& c) {
  c.allow({"mu", "psi", "rho", "d"});
  c.reject_unknown();
  const Problem p = read_problem(c);
  const MmiResult r = mmi_constrained_output(p.mu, p.psi, p.rho, p.d);
  json out = scalar_result("mmi", r.value, {{"coupling", matrix_json(r.argmin.joint.table())}});
  out["lower_bound_bits"] = number(r.lower_bound);
  out["distortion"] = r.argmin.cost;
  out["min_distortion"] = r.min_distortion;
  return dump(out);
}

inline std::string cmd_wyner(Config& c) {
  c.allow({"a0"});
  c.reject_unknown();
  const double a0 = c.real("a0");
  const double v = wyner_bsc(a0);
  json out = scalar_result("wyner", v, {{"triple", triple_json(wyner_bsc_triple(a0))}});
  out["a1"] = bsc_half_crossover(a0);
  return dump(out);
}

inline std::string cmd_c0(Config& c) {
  c.allow({"d"});
  c.reject_unknown();
  const double d = c.real("d");
  const double v = c0_bsc(d);
  return dump(scalar_result("c0", v, {{"triple", triple_json(wyner_bsc_triple(d))}}));
}

inline std::string cmd_i0(Config& c) {
  c.allow({"mu", "psi", "rho", "d", "restarts", "seed", "threads"});
  c.reject_unknown();
  const Problem p = read_problem(c);
  I0Options opt;
  opt.restarts = c.count("restarts", opt.restarts, 0);
  opt.seed = c.u64("seed", 0);
  opt.threads = c.count("threads", 0, 0);
  const I0Result r = i0_solver(p.mu, p.psi, p.rho, p.d, opt);
  if (!r.feasible) {
    const MmiResult m = mmi_constrained_output(p.mu, p.psi, p.rho, p.d);
    json out = scalar_result("i0", kInf, {{"coupling", matrix_json(m.argmin.joint.table())}});
    out["min_distortion"] = m.min_distortion;
    return dump(out);
  }
  json out = scalar_result("i0", r.upper_bound, {{"triple", triple_json(r.triple)}});
  out["i_xu"] = r.i_xu;
  out["i_yu"] = r.i_yu;
  out["distortion"] = r.triple.distortion(p.rho);
  out["restarts"] = opt.restarts;
  out["seed"] = opt.seed;
  return dump(out);
}

inline std::string cmd_variation(Config& c, bool deterministic) {
  c.allow({"mu", "psi", "rho", "d", "rc"});
  c.reject_unknown();
  const Problem p = read_problem(c);
  const double rc = c.real("rc", 0.0);
  const double v = deterministic ? det_decoder_min_rate(p.mu, p.psi, p.rho, p.d, rc)
                                 : empirical_region_min_rate(p.mu, p.psi, p.rho, p.d, rc);
  const MmiResult m = mmi_constrained_output(p.mu, p.psi, p.rho, p.d);
  json out = scalar_result(deterministic ? "det-decoder" : "empirical", v,
                           {{"coupling", matrix_json(m.argmin.joint.table())}});
  out["rc"] = number(rc);
  out["mmi_bits"] = number(m.value);
  if (deterministic) out["output_entropy_bits"] = entropy(p.psi);
  return dump(out);
}

inline std::string cmd_synthesis_bsc(Config& c) {
  c.allow({"points", "d_min", "d_max"});
  c.reject_unknown();
  const double lo = c.real("d_min", 0.0), hi = c.real("d_max", 0.5);
  if (!(lo <= hi)) throw ValidationError("synthesis-bsc: d_min must not exceed d_max");
  const std::size_t points = c.count("points", 51);
  std::string s = "d,r_sum\n";
  for (double d : linear_grid(lo, hi, points)) s += format_number(d) + "," + format_number(synthesis_inner_min_sum_rate_bsc(d)) + "\n";
  return s;
}

inline MarkovTriple read_triple(const Config& c, const json& t) {
  if (!t.is_object()) throw ValidationError(c.command() + ": field 'triple' must be an object");
  for (auto it = t.begin(); it != t.end(); ++it)
    if (it.key() != "p_u" && it.key() != "x_given_u" && it.key() != "y_given_u")
      throw ValidationError(c.command() + ": unknown triple field '" + it.key() + "'");
  for (const char* k : {"p_u", "x_given_u", "y_given_u"})
    if (!t.contains(k)) throw ValidationError(c.command() + ": triple is missing '" + k + "'");
  return MarkovTriple(Pmf(c.to_vec(t.at("p_u"), "p_u")), Channel(c.to_matrix(t.at("x_given_u"), "x_given_u")),
                      Channel(c.to_matrix(t.at("y_given_u"), "y_given_u")));
}

inline std::string trial_records_csv(const SimReport& r) {
  std::string s =
      "trial,codebook_seed,k,j,zero_likelihood,sample_distortion_decoded,sample_distortion,ideal_distortion,"
      "code_distortion,correction_cost,end_to_end_distortion,distortion_bound,tv_output,tv_ideal_output,tv_source\n";
  for (const auto& t : r.trials) {
    s += std::to_string(t.trial) + "," + std::to_string(t.codebook_seed) + "," + std::to_string(t.k) + "," +
         std::to_string(t.j) + "," + (t.zero_likelihood ? "1" : "0");
    for (double v : {t.sample_distortion_decoded, t.sample_distortion, t.ideal_distortion, t.code_distortion,
                     t.correction_cost, t.end_to_end_distortion, t.distortion_bound, t.tv_output, t.tv_ideal_output,
                     t.tv_source})
      s += "," + format_number(v);
    s += "\n";
  }
  return s;
}

inline json report_json(const SimReport& r) {
  auto opt = [](const std::optional<double>& v) { return v ? number(*v) : json(nullptr); };
  json trials = json::array();
  for (const auto& t : r.trials)
    trials.push_back({{"trial", t.trial},
                      {"codebook_seed", t.codebook_seed},
                      {"k", t.k},
                      {"j", t.j},
                      {"zero_likelihood", t.zero_likelihood},
                      {"sample_distortion_decoded", number(t.sample_distortion_decoded)},
                      {"sample_distortion", number(t.sample_distortion)},
                      {"ideal_distortion", number(t.ideal_distortion)},
                      {"code_distortion", number(t.code_distortion)},
                      {"correction_cost", number(t.correction_cost)},
                      {"end_to_end_distortion", number(t.end_to_end_distortion)},
                      {"distortion_bound", number(t.distortion_bound)},
                      {"tv_output", number(t.tv_output)},
                      {"tv_ideal_output", number(t.tv_ideal_output)},
                      {"tv_source", number(t.tv_source)}});
  return {{"command", "simulate"},
          {"status", "ok"},
          {"mode", std::string(to_string(r.mode))},
          {"corrected", r.corrected},
          {"n", r.n},
          {"codebook", {{"rows", r.codebook_rows}, {"cols", r.codebook_cols}}},
          {"design_distortion", number(r.design_distortion)},
          {"mean_distortion", number(r.mean_distortion)},
          {"mean_sample_distortion", number(r.mean_sample_distortion)},
          {"tv_output_vs_iid", number(r.tv_output_vs_iid)},
          {"tv_is_estimate", r.tv_is_estimate},
          {"tv_softcover", opt(r.tv_softcover)},
          {"tv_source", opt(r.tv_source)},
          {"max_bound_excess", opt(r.max_bound_excess)},
          {"distortion_slack", opt(r.distortion_slack)},
          {"zero_likelihood_events", r.zero_likelihood_events},
          {"zero_likelihood_mass", number(r.zero_likelihood_mass)},
          {"caveat", r.caveat},
          {"trials", std::move(trials)}};
}

inline std::string cmd_simulate(Config& c, std::ostream& err) {
  c.allow({"triple", "mmi_triple", "rho", "n", "rate", "common_rate", "trials", "seed", "correction", "mode",
           "distortion_exponent", "output_cost", "threads", "records"});
  c.reject_unknown();
  if (c.has("triple") == c.has("mmi_triple"))
    throw ValidationError("simulate: give exactly one of 'triple' or 'mmi_triple'");
  std::optional<MarkovTriple> triple;
  std::optional<DistortionMatrix> rho;
  if (c.has("triple")) {
    triple = read_triple(c, c.at("triple"));
  } else {
    Config inner(c.at("mmi_triple"), "simulate.mmi_triple");
    inner.allow({"mu", "psi", "rho", "d"});
    inner.reject_unknown();
    const Problem p = read_problem(inner);
    const MmiResult m = mmi_constrained_output(p.mu, p.psi, p.rho, p.d);
    if (!m.feasible) throw DomainError("simulate: the mmi_triple distortion budget is below the optimal transport cost");
    triple = triple_through_output(m.argmin.joint);
    if (!c.has("rho")) rho = p.rho;
  }
  if (!rho) rho = c.distortion("rho", triple->x_size(), triple->y_size());
  SimConfig cfg;
  cfg.triple = *triple;
  cfg.rho = *rho;
  cfg.n = c.count("n", 1);
  cfg.rate = c.real("rate", 0.0);
  cfg.common_rate = c.real("common_rate", 0.0);
  cfg.trials = c.count("trials", 1);
  cfg.seed = c.u64("seed", 0);
  cfg.correction = c.flag("correction", false);
  const std::string mode = c.text("mode", "auto");
  if (mode == "auto") cfg.mode = SimModeRequest::automatic;
  else if (mode == "exact") cfg.mode = SimModeRequest::exact;
  else if (mode == "monte-carlo") cfg.mode = SimModeRequest::monte_carlo;
  else throw ValidationError("simulate: mode must be \"auto\", \"exact\" or \"monte-carlo\"");
  cfg.distortion_exponent = c.real("distortion_exponent", 1.0);
  if (c.has("output_cost")) cfg.output_cost = c.distortion("output_cost", triple->y_size(), triple->y_size());
  cfg.threads = c.count("threads", 1, 0);
  if (std::isinf(cfg.rate) || std::isinf(cfg.common_rate)) throw ValidationError("simulate: rates must be finite");

  const SimReport r = run_simulation(cfg);
  if (c.has("records")) Output{c.text("records", ""), err}.write(trial_records_csv(r));
  return dump(report_json(r));
}

inline std::string cmd_softcover(Config& c) {
  c.allow({"p_v", "w_given_v", "rate", "n", "num_codebooks", "seed"});
  c.reject_unknown();
  const Pmf p_v = c.pmf("p_v");
  const Channel w(c.matrix("w_given_v"));
  const double rate = c.real("rate");
  if (std::isinf(rate)) throw ValidationError("softcover: rate must be finite");
  std::vector<std::size_t> ns;
  const json& nj = c.at("n");
  if (nj.is_array()) {
    for (const auto& e : nj) {
      if (!e.is_number_unsigned() && !(e.is_number_integer() && e.get<std::int64_t>() > 0))
        throw ValidationError("softcover: 'n' entries must be positive integers");
      ns.push_back(e.get<std::size_t>());
    }
  } else {
    ns.push_back(c.count("n", 1));
  }
  if (ns.empty()) throw ValidationError("softcover: 'n' grid is empty");
  const std::size_t codebooks = c.count("num_codebooks", 32);
  const std::uint64_t seed = c.u64("seed", 0);
  std::string s = "n,mean_tv\n";
  for (std::size_t n : ns) s += std::to_string(n) + "," + format_number(soft_covering_exact(p_v, w, n, rate, seed, codebooks)) + "\n";
  return s;
}

// ---------------------------------------------------------------------------

inline json load_config(const std::string& path) {
  if (path.empty()) return json::object();
  std::ifstream f(path);
  if (!f) throw ValidationError("cannot open config file '" + path + "'");
  try {
    return json::parse(f);
  } catch (const json::parse_error& e) {
    throw ValidationError("config file '" + path + "' is not valid JSON: " + e.what());
  }
}

/// Runs the CLI on `args` (args[0] is the program name).
inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Output-constrained rate-distortion toolkit", "ocrd"};
  app.require_subcommand(1);

  struct Common {
    std::string out, config, records;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> points;
    std::optional<double> d, a0, rc;
  };
  Common opt;

  struct Spec {
    const char* name;
    const char* help;
    bool points;
    bool d;
  };
  const std::vector<Spec> specs = {
      {"region-bsc", "Boundary of the binary region (CSV rc,r_min)", true, true},
      {"region-gauss", "Boundary of the Gaussian region (CSV rc,r_min)", true, true},
      {"mmi", "Minimum mutual information with output constraint (JSON)", false, true},
      {"wyner", "Wyner common information of the binary symmetric pair (JSON)", false, false},
      {"c0", "Binary rate without common randomness via channel synthesis (JSON)", false, true},
      {"i0", "Upper bound on the rate without common randomness (JSON)", false, true},
      {"det-decoder", "Minimum rate with a deterministic decoder (JSON)", false, true},
      {"empirical", "Minimum rate under an empirical output constraint (JSON)", false, true},
      {"synthesis-bsc", "Channel-synthesis sum rate over a distortion grid (CSV d,r_sum)", true, false},
      {"simulate", "Random-code simulation report (JSON)", false, false},
      {"softcover", "Exact soft-covering total variation (CSV n,mean_tv)", false, false},
  };
  for (const auto& s : specs) {
    CLI::App* sub = app.add_subcommand(s.name, s.help);
    sub->add_option("--out", opt.out, "Output file (default stdout)");
    sub->add_option("--config", opt.config, "JSON config file")->check(CLI::ExistingFile);
    sub->add_option("--seed", opt.seed, "Seed (overrides config; ignored by deterministic commands)");
    if (s.points) sub->add_option("--points", opt.points, "Grid size (overrides config)");
    if (s.d) sub->add_option("--d", opt.d, "Distortion level (overrides config)");
    if (std::string(s.name) == "wyner") sub->add_option("--a0", opt.a0, "Crossover probability (overrides config)");
    if (std::string(s.name) == "det-decoder" || std::string(s.name) == "empirical")
      sub->add_option("--rc", opt.rc, "Common-randomness rate (overrides config)");
    if (std::string(s.name) == "simulate") sub->add_option("--records", opt.records, "Per-trial CSV output");
  }

  std::vector<std::string> rev(args.rbegin(), args.rend() - (args.empty() ? 0 : 1));
  try {
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kExitOk : kExitValidation;
  }
  const std::string name = app.get_subcommands().front()->get_name();

  try {
    json j = load_config(opt.config);
    if (!j.is_object()) throw ValidationError(name + ": config must be a JSON object");
    if (opt.seed && (name == "i0" || name == "simulate" || name == "softcover")) j["seed"] = *opt.seed;
    if (opt.points) j["points"] = *opt.points;
    if (opt.d) j["d"] = *opt.d;
    if (opt.a0) j["a0"] = *opt.a0;
    if (opt.rc) j["rc"] = *opt.rc;
    if (!opt.records.empty()) j["records"] = opt.records;
    Config c(std::move(j), name);

    std::string text;
    if (name == "region-bsc") text = cmd_region_bsc(c);
    else if (name == "region-gauss") text = cmd_region_gauss(c);
    else if (name == "mmi") text = cmd_mmi(c);
    else if (name == "wyner") text = cmd_wyner(c);
    else if (name == "c0") text = cmd_c0(c);
    else if (name == "i0") text = cmd_i0(c);
    else if (name == "det-decoder") text = cmd_variation(c, true);
    else if (name == "empirical") text = cmd_variation(c, false);
    else if (name == "synthesis-bsc") text = cmd_synthesis_bsc(c);
    else if (name == "simulate") text = cmd_simulate(c, err);
    else text = cmd_softcover(c);
    Output{opt.out.empty() ? std::nullopt : std::optional<std::string>(opt.out), out}.write(text);
    return kExitOk;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const json::exception& e) {
    err << "error: " << name << ": " << e.what() << "\n";
    return kExitValidation;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << "\n";
    return kExitDomain;
  } catch (const CapExceeded& e) {
    err << "error: " << e.what() << "\n";
    return kExitCap;
  }
}

}  // namespace ocrd::cli
