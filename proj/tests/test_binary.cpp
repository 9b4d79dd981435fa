#include <gtest/gtest.h>

#include "ocrd/region.hpp"
#include "oracles.hpp"

using namespace ocrd;

namespace {

// I(X,Y;U) by enumeration of the triple.
double joint_information(const MarkovTriple& t) {
  const std::size_t nx = t.x_size(), ny = t.y_size();
  Matrix m(t.aux_size(), nx * ny);
  for (std::size_t u = 0; u < t.aux_size(); ++u)
    for (std::size_t x = 0; x < nx; ++x)
      for (std::size_t y = 0; y < ny; ++y) m(u, x * ny + y) = t.p_u()[u] * t.x_given_u()(u, x) * t.y_given_u()(u, y);
  return mutual_information(JointPmf(std::move(m)));
}

// Brute-force boundary of the symmetric inner bound: minimize
// max(1 - h(a1), 1 - h(a2) - rc) over a grid of (a1, a2) with
// a1 + a2 - 2 a1 a2 <= d.
double boundary_oracle(double d, double rc, int steps = 4000) {
  double best = kInf;
  for (int i = 0; i <= steps; ++i) {
    const double a1 = 0.5 * i / steps;
    // largest admissible a2 for this a1 (1 - h is decreasing on [0, 1/2])
    if (a1 > d) break;
    const double a2 = std::min(0.5, (d - a1) / (1.0 - 2.0 * a1));
    best = std::min(best, std::max(1.0 - oracle::h2(a1), 1.0 - oracle::h2(a2) - rc));
  }
  return best;
}

}  // namespace

TEST(Wyner, Values) {
  EXPECT_DOUBLE_EQ(wyner_bsc(0.0), 1.0);
  EXPECT_NEAR(wyner_bsc(0.5), 0.0, 1e-15);
  EXPECT_NEAR(wyner_bsc(0.25), 0.609526, 1e-6);
  EXPECT_NEAR(bsc_half_crossover(0.25), 0.146447, 1e-6);
  EXPECT_THROW(wyner_bsc(0.6), DomainError);
  EXPECT_THROW(wyner_bsc(-0.1), DomainError);
}

TEST(Wyner, EqualsJointInformationOfTheTriple) {
  for (int k = 0; k <= 20; ++k) {
    const double a0 = 0.5 * k / 20.0;
    const MarkovTriple t = wyner_bsc_triple(a0);
    EXPECT_NEAR(wyner_bsc(a0), joint_information(t), 1e-12);
    // X and Y are connected through BSC(a0).
    EXPECT_NEAR(t.joint_xy()(0, 1), 0.5 * a0, 1e-15);
  }
}

TEST(C0, AnchorsAndMonotone) {
  EXPECT_DOUBLE_EQ(c0_bsc(0.0), 1.0);
  EXPECT_NEAR(c0_bsc(0.5), 0.0, 1e-15);
  EXPECT_NEAR(c0_bsc(0.25), 0.609526, 1e-6);
  EXPECT_DOUBLE_EQ(synthesis_inner_min_sum_rate_bsc(0.25), c0_bsc(0.25));
  for (int k = 1; k <= 50; ++k) EXPECT_LT(c0_bsc(0.5 * k / 50), c0_bsc(0.5 * (k - 1) / 50));
  EXPECT_THROW(c0_bsc(0.51), DomainError);
  EXPECT_THROW(synthesis_inner_min_sum_rate_bsc(-0.01), DomainError);
}

TEST(BscBoundary, Endpoints) {
  const double want_r0[] = {0.3991, 0.5920, 0.8279};
  const double ds[] = {0.25, 0.15, 0.05};
  for (int k = 0; k < 3; ++k) {
    const double d = ds[k];
    const double astar = 0.5 * (1.0 - std::sqrt(1.0 - 2.0 * d));
    const BscBoundaryPoint p0 = bsc_boundary_point(d, 0.0);
    EXPECT_NEAR(p0.r_min, 1.0 - oracle::h2(astar), 1e-9);
    EXPECT_NEAR(p0.r_min, want_r0[k], 1e-4);
    EXPECT_NEAR(p0.a1, p0.a2, 1e-9);
    const BscBoundaryPoint p1 = bsc_boundary_point(d, oracle::h2(d));
    EXPECT_NEAR(p1.r_min, 1.0 - oracle::h2(d), 1e-9);
    EXPECT_NEAR(p1.a1, d, 1e-9);
    EXPECT_NEAR(p1.a2, 0.0, 1e-9);
  }
}

TEST(BscBoundary, SolvesBothEquations) {
  for (double d : {0.05, 0.15, 0.25, 0.4}) {
    for (int k = 0; k <= 10; ++k) {
      const double rc = oracle::h2(d) * k / 10.0;
      const BscBoundaryPoint p = bsc_boundary_point(d, rc);
      EXPECT_NEAR(p.a1 + p.a2 - 2 * p.a1 * p.a2, d, 1e-12);
      EXPECT_NEAR(oracle::h2(p.a1) - oracle::h2(p.a2), rc, 1e-8);
      EXPECT_NEAR(p.r_min, 1.0 - oracle::h2(p.a1), 1e-15);
    }
  }
}

TEST(BscBoundary, MatchesBruteForce) {
  for (double d : {0.05, 0.15, 0.25, 0.4}) {
    for (int k = 0; k <= 6; ++k) {
      const double rc = 1.2 * oracle::h2(d) * k / 6.0;
      EXPECT_NEAR(bsc_boundary_point(d, rc).r_min, boundary_oracle(d, rc), 2e-3) << d << " " << rc;
    }
  }
}

TEST(BscBoundary, CurveShape) {
  const double d = 0.25, hd = oracle::h2(d);
  std::vector<double> grid;
  for (int k = 0; k <= 40; ++k) grid.push_back(1.5 * hd * k / 40);
  const RegionCurve c = bsc_boundary(d, grid);
  EXPECT_TRUE(c.well_formed());
  EXPECT_EQ(c.tag, RegionTag::main_inner);
  for (std::size_t k = 1; k < c.points.size(); ++k) {
    if (c.points[k].rc < hd - 1e-9) {
      EXPECT_LT(c.points[k].r_min, c.points[k - 1].r_min);
    } else {
      EXPECT_NEAR(c.points[k].r_min, 1.0 - hd, 1e-12);
    }
  }
}

TEST(BscBoundary, Sandwich) {
  for (int k = 1; k < 50; ++k) {
    const double d = 0.5 * k / 50.0;
    const double r0 = bsc_boundary_point(d, 0.0).r_min;
    EXPECT_GE(r0, 1.0 - oracle::h2(d) - 1e-12);
    EXPECT_GT(c0_bsc(d), r0);
  }
}

TEST(BscBoundary, ConvexInDistortion) {
  for (double rc : {0.0, 0.1, 0.3}) {
    std::vector<double> v, w;
    for (int k = 0; k < 50; ++k) {
      const double d = 0.01 + 0.48 * k / 49.0;
      v.push_back(bsc_boundary_point(d, rc).r_min);
      w.push_back(1.0 - binary_entropy(d));
    }
    for (std::size_t k = 1; k + 1 < v.size(); ++k) {
      EXPECT_GE(v[k - 1] - 2 * v[k] + v[k + 1], -1e-8);
      EXPECT_GE(w[k - 1] - 2 * w[k] + w[k + 1], -1e-8);
    }
  }
}

TEST(BscBoundary, TripleRealizesThePoint) {
  const BscBoundaryPoint p = bsc_boundary_point(0.25, 0.2);
  const MarkovTriple t = bsc_boundary_triple(p);
  EXPECT_NEAR(t.distortion(DistortionMatrix::hamming(2)), 0.25, 1e-12);
  EXPECT_NEAR(t.i_xu(), p.r_min, 1e-9);
  EXPECT_NEAR(t.i_yu() - t.i_xu(), 0.2, 1e-8);
  EXPECT_NEAR(t.induced_x()[0], 0.5, 1e-15);
  EXPECT_NEAR(t.induced_y()[0], 0.5, 1e-15);
}

TEST(BscBoundary, Errors) {
  EXPECT_THROW(bsc_boundary_point(0.6, 0.0), DomainError);
  EXPECT_THROW(bsc_boundary_point(0.0, 0.0), DomainError);
  EXPECT_THROW(bsc_boundary_point(0.25, -1.0), ValidationError);
  EXPECT_THROW(bsc_boundary(0.25, {0.2, 0.1}), ValidationError);
}
