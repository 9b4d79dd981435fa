#include <gtest/gtest.h>

#include <cmath>

#include "ocrd/codesim.hpp"
#include "ocrd/region.hpp"

using namespace ocrd;

namespace {

const Pmf kHalf = Pmf::bernoulli(0.5);
const DistortionMatrix kHam = DistortionMatrix::hamming(2);

// U = Y through the minimizing coupling of the uniform bit at D = 0.25.
MarkovTriple output_triple() {
  return triple_through_output(mmi_constrained_output(kHalf, kHalf, kHam, 0.25).argmin.joint);
}

Codebook explicit_codebook(const MarkovTriple& t, std::size_t n, std::size_t rows, std::size_t cols,
                           std::vector<std::uint32_t> symbols) {
  return Codebook(t, n, 0.0, 0.0, 0, rows, cols, std::move(symbols));
}

SimConfig base_config(double rate, double common_rate, std::size_t n, std::size_t trials) {
  SimConfig c;
  c.triple = output_triple();
  c.rho = kHam;
  c.n = n;
  c.rate = rate;
  c.common_rate = common_rate;
  c.trials = trials;
  c.seed = 2024;
  return c;
}

}  // namespace

TEST(IndexSet, Sizes) {
  EXPECT_EQ(index_set_size(4, 1.0), 16u);
  EXPECT_EQ(index_set_size(4, 0.5), 4u);
  EXPECT_EQ(index_set_size(7, 0.0), 1u);
  EXPECT_EQ(index_set_size(1, 3.7), 13u);
  EXPECT_EQ(index_set_size(10, 0.3), 8u);
  EXPECT_THROW(index_set_size(2, -0.1), ValidationError);
  EXPECT_THROW(index_set_size(100, 1.0), CapExceeded);
}

TEST(Codebook, ShapeAndSymbolFrequencies) {
  const MarkovTriple t(Pmf({0.2, 0.3, 0.5}), Channel::constant(3, kHalf), Channel::constant(3, kHalf));
  const Codebook small = generate_codebook(t, 4, 1.0, 0.5, 7);
  EXPECT_EQ(small.rows(), 16u);
  EXPECT_EQ(small.cols(), 4u);
  EXPECT_EQ(small.symbols().size(), 16u * 4u * 4u);
  const Codebook big = generate_codebook(t, 10, 1.0, 0.5, 8);
  const double total = static_cast<double>(big.symbols().size());
  std::vector<double> counts(3, 0.0);
  for (auto s : big.symbols()) counts[s] += 1.0;
  for (std::size_t u = 0; u < 3; ++u) {
    const double p = t.p_u()[u], sd = std::sqrt(p * (1 - p) / total);
    EXPECT_NEAR(counts[u] / total, p, 4 * sd);
  }
}

TEST(Codebook, SeedReproducibleAndCapped) {
  const MarkovTriple t = output_triple();
  const Codebook a = generate_codebook(t, 6, 1.0, 1.0, 99), b = generate_codebook(t, 6, 1.0, 1.0, 99);
  const Codebook c = generate_codebook(t, 6, 1.0, 1.0, 100);
  EXPECT_TRUE(std::ranges::equal(a.symbols(), b.symbols()));
  EXPECT_FALSE(std::ranges::equal(a.symbols(), c.symbols()));
  EXPECT_THROW(generate_codebook(t, 20, 1.0, 0.5, 1, 1 << 20), CapExceeded);
  EXPECT_THROW(generate_codebook(t, 0, 1.0, 0.5, 1), ValidationError);
}

TEST(Encoder, SingleCodewordAlwaysChosen) {
  const Codebook cb = generate_codebook(output_triple(), 3, 0.0, 0.0, 1);
  Rng rng(3);
  const std::vector<std::uint32_t> x{0, 1, 1};
  for (int i = 0; i < 20; ++i) EXPECT_EQ(likelihood_encode(cb, x, 0, rng).j, 0u);
}

TEST(Encoder, IdentityChannelFindsTheMatchingWord) {
  const MarkovTriple t(kHalf, Channel::identity(2), Channel::identity(2));
  const Codebook cb = explicit_codebook(t, 2, 4, 1, {0, 0, 0, 1, 1, 0, 1, 1});
  Rng rng(5);
  const std::vector<std::uint32_t> x{1, 0};
  for (int i = 0; i < 20; ++i) {
    const EncodeResult r = likelihood_encode(cb, x, 0, rng);
    EXPECT_EQ(r.j, 2u);
    EXPECT_FALSE(r.zero_likelihood);
  }
}

TEST(Encoder, PosteriorProportionalToLikelihood) {
  const MarkovTriple t(kHalf, Channel::bsc(0.25), Channel::identity(2));
  const Codebook cb = explicit_codebook(t, 1, 2, 1, {0, 1});
  Rng rng(11);
  const std::vector<std::uint32_t> x{0};
  const int draws = 100000;
  int hits = 0;
  for (int i = 0; i < draws; ++i) hits += likelihood_encode(cb, x, 0, rng).j == 0 ? 1 : 0;
  EXPECT_NEAR(hits / double(draws), 0.75, 3 * std::sqrt(0.75 * 0.25 / draws));
}

TEST(Encoder, ZeroLikelihoodFallsBackToUniform) {
  const MarkovTriple t(kHalf, Channel::identity(2), Channel::identity(2));
  const Codebook cb = explicit_codebook(t, 1, 2, 1, {0, 0});
  Rng rng(13);
  const std::vector<std::uint32_t> x{1};
  const int draws = 20000;
  int hits = 0;
  for (int i = 0; i < draws; ++i) {
    const EncodeResult r = likelihood_encode(cb, x, 0, rng);
    EXPECT_TRUE(r.zero_likelihood);
    hits += r.j == 1 ? 1 : 0;
  }
  EXPECT_NEAR(hits / double(draws), 0.5, 3 * std::sqrt(0.25 / draws));
}

TEST(Encoder, LongBlocksDoNotUnderflow) {
  // Both likelihoods are far below the smallest double; log-space scoring
  // still separates them.
  const std::size_t n = 10000;
  const MarkovTriple t(kHalf, Channel::bsc(0.1), Channel::identity(2));
  std::vector<std::uint32_t> symbols(2 * n);
  for (std::size_t i = 0; i < n; ++i) symbols[n + i] = static_cast<std::uint32_t>(i % 2);
  const Codebook cb = explicit_codebook(t, n, 2, 1, symbols);
  std::vector<std::uint32_t> x(symbols.begin() + n, symbols.end());
  for (std::size_t i = 0; i < n; i += 10) x[i] ^= 1u;
  Rng rng(17);
  const EncodeResult r = likelihood_encode(cb, x, 0, rng);
  EXPECT_EQ(r.j, 1u);
  EXPECT_FALSE(r.zero_likelihood);
  EXPECT_THROW(likelihood_encode(cb, x, 1, rng), ValidationError);
}

TEST(Decoder, ChannelStatistics) {
  const std::size_t n = 10000;
  std::vector<std::uint32_t> symbols(n);
  for (std::size_t i = 0; i < n; ++i) symbols[i] = static_cast<std::uint32_t>((i / 3) % 2);
  const MarkovTriple t(kHalf, Channel::identity(2), Channel::bsc(0.1));
  const Codebook cb = explicit_codebook(t, n, 1, 1, symbols);
  Rng rng(19);
  const auto same = decode(cb, 0, 0, Channel::identity(2), rng);
  EXPECT_TRUE(std::ranges::equal(same, symbols));
  const auto constant = decode(cb, 0, 0, Channel({{0.0, 1.0}, {0.0, 1.0}}), rng);
  EXPECT_TRUE(std::ranges::all_of(constant, [](std::uint32_t s) { return s == 1; }));
  const auto noisy = decode(cb, 0, 0, Channel::bsc(0.1), rng);
  const double flips = block_distortion(kHam, symbols, noisy);
  EXPECT_NEAR(flips, 0.1, 3 * std::sqrt(0.09 / n));
  EXPECT_THROW(decode(cb, 1, 0, Channel::bsc(0.1), rng), ValidationError);
}

TEST(BlockOutputLaw, ProductOfRows) {
  const Channel w = Channel::bsc(0.2);
  const std::vector<std::uint32_t> v{0, 1};
  const auto law = block_output_law(w, v);
  ASSERT_EQ(law.size(), 4u);
  EXPECT_NEAR(law[0], 0.8 * 0.2, 1e-15);
  EXPECT_NEAR(law[1], 0.8 * 0.8, 1e-15);
  EXPECT_NEAR(law[2], 0.2 * 0.2, 1e-15);
  EXPECT_NEAR(law[3], 0.2 * 0.8, 1e-15);
}

TEST(ExactAnalysis, IdealDistortionAveragesToSingleLetterValue) {
  // Every codebook of two length-2 codewords over a 2-letter U, weighted by
  // its probability under P_U.
  const MarkovTriple t(Pmf({0.3, 0.7}), Channel({{0.9, 0.1}, {0.2, 0.8}}), Channel({{0.6, 0.4}, {0.05, 0.95}}));
  const double target = t.distortion(kHam);
  double avg = 0.0, weight = 0.0;
  for (std::uint32_t code = 0; code < 16; ++code) {
    std::vector<std::uint32_t> s(4);
    double w = 1.0;
    for (int b = 0; b < 4; ++b) {
      s[b] = (code >> b) & 1u;
      w *= t.p_u()[s[b]];
    }
    const ExactAnalysis a = analyze_codebook_exact(explicit_codebook(t, 2, 2, 1, s), kHam, false);
    avg += w * a.ideal_distortion;
    weight += w;
  }
  EXPECT_NEAR(weight, 1.0, 1e-12);
  EXPECT_NEAR(avg, target, 1e-12);
}

TEST(ExactAnalysis, CorrectionMatchesTargetLaw) {
  const Codebook cb = generate_codebook(output_triple(), 4, 1.0, 0.5, 31);
  const ExactAnalysis a = analyze_codebook_exact(cb, kHam, true, &kHam);
  EXPECT_TRUE(a.corrected);
  EXPECT_LE(a.tv_corrected, 1e-12);
  EXPECT_GT(a.tv_output, 0.0);
  EXPECT_LE(a.corrected_distortion, a.code_distortion + a.correction_cost + 1e-12);
  // Per-letter Hamming never exceeds the block mismatch indicator, whose
  // optimal cost is the block TV.
  EXPECT_LE(a.correction_cost, a.tv_output + 1e-12);
  EXPECT_THROW(analyze_codebook_exact(cb, kHam, true, nullptr), ValidationError);
}

TEST(Simulation, CorrectedRunsHitTheTargetAndRespectTheBound) {
  for (std::size_t n : {2, 4, 6}) {
    SimConfig c = base_config(1.0, 1.0, n, 20);
    c.correction = true;
    const SimReport r = run_simulation(c);
    EXPECT_EQ(r.mode, SimMode::exact);
    EXPECT_LE(r.tv_output_vs_iid, 1e-12) << "n=" << n;
    ASSERT_TRUE(r.max_bound_excess.has_value());
    EXPECT_LE(*r.max_bound_excess, 1e-12);
    for (const auto& t : r.trials) EXPECT_LE(t.end_to_end_distortion, t.distortion_bound + 1e-12);
  }
}

TEST(Simulation, OutputTvShrinksWithBlockLength) {
  std::vector<double> tv;
  for (std::size_t n : {2, 4, 6}) tv.push_back(run_simulation(base_config(1.0, 1.0, n, 100)).tv_output_vs_iid);
  EXPECT_GT(tv[0], tv[1]);
  EXPECT_GT(tv[1], tv[2]);
  EXPECT_LT(tv[2], 0.5);
}

TEST(Simulation, SourceTvShrinksWithBlockLength) {
  std::vector<double> tv;
  for (std::size_t n : {2, 4, 6}) tv.push_back(*run_simulation(base_config(1.0, 1.0, n, 100)).tv_source);
  EXPECT_GT(tv[0], tv[2]);
}

TEST(Simulation, DeterministicAcrossThreadCounts) {
  SimConfig a = base_config(1.0, 0.5, 4, 12);
  a.correction = true;
  SimConfig b = a;
  b.threads = 4;
  const SimReport ra = run_simulation(a), rb = run_simulation(b);
  EXPECT_EQ(ra.tv_output_vs_iid, rb.tv_output_vs_iid);
  EXPECT_EQ(ra.mean_distortion, rb.mean_distortion);
  ASSERT_EQ(ra.trials.size(), rb.trials.size());
  for (std::size_t i = 0; i < ra.trials.size(); ++i) {
    EXPECT_EQ(ra.trials[i].codebook_seed, rb.trials[i].codebook_seed);
    EXPECT_EQ(ra.trials[i].j, rb.trials[i].j);
    EXPECT_EQ(ra.trials[i].sample_distortion, rb.trials[i].sample_distortion);
  }
  SimConfig other = a;
  other.seed = a.seed + 1;
  EXPECT_NE(run_simulation(other).trials[0].codebook_seed, ra.trials[0].codebook_seed);
}

TEST(Simulation, MonteCarloModeIsLabelled) {
  SimConfig c = base_config(0.3, 0.0, 40, 50);
  const SimReport r = run_simulation(c);
  EXPECT_EQ(r.mode, SimMode::monte_carlo);
  EXPECT_TRUE(r.tv_is_estimate);
  EXPECT_FALSE(r.caveat.empty());
  EXPECT_FALSE(r.tv_softcover.has_value());
  EXPECT_TRUE(std::isnan(r.trials[0].distortion_bound));
  c.correction = true;
  const SimReport rc = run_simulation(c);
  EXPECT_LT(rc.tv_output_vs_iid, 0.05);
}

TEST(Simulation, ForcedExactBeyondCapsThrows) {
  SimConfig c = base_config(0.3, 0.0, 40, 1);
  c.mode = SimModeRequest::exact;
  EXPECT_THROW(run_simulation(c), CapExceeded);
  SimConfig big = base_config(1.0, 1.0, 20, 1);
  EXPECT_THROW(run_simulation(big), CapExceeded);
}

TEST(Simulation, Validation) {
  SimConfig c = base_config(1.0, 0.0, 2, 1);
  c.rho = DistortionMatrix::hamming(3);
  EXPECT_THROW(run_simulation(c), ValidationError);
  SimConfig d = base_config(1.0, 0.0, 0, 1);
  EXPECT_THROW(run_simulation(d), ValidationError);
  SimConfig e = base_config(-1.0, 0.0, 2, 1);
  EXPECT_THROW(run_simulation(e), ValidationError);
}

TEST(SoftCovering, Anchors) {
  // Independent channel: every codebook induces exactly the target.
  EXPECT_NEAR(soft_covering_exact(kHalf, Channel::constant(2, Pmf({0.3, 0.7})), 3, 0.5, 1, 4), 0.0, 1e-12);
  // One codeword through a noiseless channel: a point mass against uniform.
  EXPECT_NEAR(soft_covering_exact(kHalf, Channel::identity(2), 1, 0.0, 1, 4), 0.5, 1e-12);
}

TEST(SoftCovering, DecreasesWithBlockLengthAboveMutualInformation) {
  std::vector<double> tv;
  for (std::size_t n : {2, 4, 6}) tv.push_back(soft_covering_exact(kHalf, Channel::bsc(0.1), n, 1.5, 3, 32));
  EXPECT_GT(tv[0], tv[1]);
  EXPECT_GT(tv[1], tv[2]);
}

TEST(SoftCovering, CapsAndValidation) {
  EXPECT_THROW(soft_covering_exact(kHalf, Channel::bsc(0.1), 30, 1.0, 1, 1), CapExceeded);
  EXPECT_THROW(soft_covering_exact(kHalf, Channel::bsc(0.1), 0, 1.0, 1, 1), ValidationError);
  EXPECT_THROW(soft_covering_exact(Pmf::uniform(3), Channel::bsc(0.1), 2, 1.0, 1, 1), ValidationError);
}
