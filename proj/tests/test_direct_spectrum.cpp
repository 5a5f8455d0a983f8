#include "nlsbif/direct_spectrum.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace nlsbif;

TEST(Discretize, RejectsNonUniformGridAndBadPower) {
  const GridPtr gl = make_grid(10.0, 100, QuadratureRule::gauss_legendre_composite);
  EXPECT_THROW(discretize_L(3.0, gl), std::invalid_argument);
  EXPECT_THROW(discretize_free(gl), std::invalid_argument);
  EXPECT_THROW(discretize_L(5.0, make_grid(10.0, 101)), std::invalid_argument);
  EXPECT_THROW(gap_eigenvalue(0.9, 10.0, 101), std::invalid_argument);
}

TEST(Discretize, FreeOperatorHasGap) {
  for (auto bc : {Boundary::dirichlet, Boundary::periodic}) {
    for (auto scheme : {FdScheme::fd2, FdScheme::fd4}) {
      const auto z = real_eigenvalues(discretize_free(make_grid(20.0, 201), bc, scheme));
      EXPECT_EQ(z.size(), 402u);
      for (double x : z) EXPECT_GE(std::abs(x), 1.0 - 1e-10);
    }
  }
}

TEST(Discretize, MatrixStructure) {
  const DiscretizedOperator op = discretize_L(3.0, make_grid(10.0, 101));
  const int n = 101;
  // sigma3: second block row is negated
  EXPECT_GT(op.matrix(0, 0), 0.0);
  EXPECT_LT(op.matrix(n, n), 0.0);
  EXPECT_NEAR(op.matrix(0, 0), -op.matrix(n, n), 1e-12);
  // potential coupling at the centre node is -(p-1)/2 * Q^2 with sign from sigma3
  EXPECT_NEAR(op.matrix(50, n + 50), -2.0, 1e-12);
  EXPECT_NEAR(op.matrix(n + 50, 50), 2.0, 1e-12);
  // fd4 band: offsets up to 2 only
  EXPECT_NE(op.matrix(10, 12), 0.0);
  EXPECT_EQ(op.matrix(10, 13), 0.0);
}

TEST(Spectrum, ZeroEigenvalueAtCubicPower) {
  const auto ev = dense_eigenvalues(discretize_L(3.0, make_grid(40.0, 2000)).matrix);
  double smallest = std::numeric_limits<double>::infinity();
  for (const auto& z : ev) smallest = std::min(smallest, std::abs(z));
  EXPECT_LE(smallest, 1e-3);
}

TEST(Spectrum, PlusMinusPairing) {
  for (double p : {2.4, 3.0, 3.6}) {
    const auto z = real_eigenvalues(discretize_L(p, make_grid(40.0, 801)));
    for (double a : z) {
      if (std::abs(a) >= 1.0 || std::abs(a) < 0.05) continue;  // gap eigenvalues away from the zero cluster
      double best = std::numeric_limits<double>::infinity();
      for (double b : z) best = std::min(best, std::abs(a + b));
      EXPECT_LE(best, 1e-8) << "p = " << p << ", z = " << a;
    }
  }
}

TEST(Spectrum, PeriodicBoundaryAgreesNearThreshold) {
  const double L = 40.0;
  GapOptions per;
  per.bc = Boundary::periodic;
  const GapEigenvalueResult a = gap_eigenvalue(3.8, L, points_for_spacing(L, 0.1));
  const GapEigenvalueResult b = gap_eigenvalue(3.8, L, points_for_spacing(L, 0.1), per);
  ASSERT_EQ(a.status, GapStatus::eigenvalue);
  ASSERT_EQ(b.status, GapStatus::eigenvalue);
  EXPECT_NEAR(a.candidate_z, b.candidate_z, 1e-4);
}

TEST(GapEigenvalue, BothSidesOfCubic) {
  for (double p : {3.6, 2.4}) {
    const double L = default_domain_length(p - 3.0);
    const GapEigenvalueResult g = gap_eigenvalue(p, L, points_for_spacing(L, 0.1));
    ASSERT_EQ(g.status, GapStatus::eigenvalue) << "p = " << p;
    ASSERT_TRUE(g.row.has_value());
    EXPECT_GT(g.row->z, 0.0);
    EXPECT_LT(g.row->z, 1.0);
    EXPECT_NEAR(g.row->alpha, std::sqrt(1.0 - g.row->z), 1e-15);
    EXPECT_NEAR(g.row->ratio, g.row->alpha / 0.36, 1e-12);
    EXPECT_GE(g.localization, 0.99);
    // eigenfunction tail bounded by C e^{-0.8 alpha |x|} on the outer quarter
    EXPECT_TRUE(g.tail_ok);
  }
}

TEST(GapEigenvalue, CubicPowerIsResonance) {
  const std::vector<ResonanceSample> s = resonance_signature({40.0, 80.0, 160.0}, 0.2);
  ASSERT_EQ(s.size(), 3u);
  for (const auto& r : s) EXPECT_EQ(r.status, GapStatus::resonance);
  for (std::size_t i = 1; i < s.size(); ++i) {
    EXPECT_LT(s[i].distance, s[i - 1].distance);
    // shrinks at least like 1/L
    EXPECT_LE(s[i].distance * s[i].L, s[i - 1].distance * s[i - 1].L);
  }
}

TEST(Scan, FitOnExactLaw) {
  std::vector<SpectrumScanRow> rows;
  for (double e : {-0.8, -0.4, 0.3, 0.6}) {
    const double a = 0.3 * e * e;
    rows.push_back({3.0 + e, e, 1.0 - a * a, a, 0.3});
  }
  const ScanFit f = fit_scan(rows);
  EXPECT_NEAR(f.exponent, 4.0, 1e-12);
  EXPECT_NEAR(f.alpha2, 0.3, 1e-12);
  EXPECT_EQ(f.count, 4);
}

TEST(Scan, RejectsCubicPowerAndRecordsFailures) {
  EXPECT_THROW(scan_bifurcation({3.0}), std::invalid_argument);
  // domain far too short for the tail at eps = 0.05: no localized eigenvalue
  const ScanResult r = scan_bifurcation({3.05}, [](double) { return 15.0; });
  EXPECT_TRUE(r.rows.empty());
  ASSERT_EQ(r.failures.size(), 1u);
  EXPECT_NEAR(r.failures[0].eps, 0.05, 1e-12);
}

TEST(Scan, DomainRule) {
  EXPECT_DOUBLE_EQ(default_domain_length(0.8), 40.0);
  EXPECT_NEAR(default_domain_length(0.4), 8.0 / (kAlpha2Reference * 0.16), 1e-12);
  EXPECT_EQ(points_for_spacing(40.0, 0.1), 801);
  EXPECT_EQ(points_for_spacing(70.3, 0.1) % 2, 1);
}
