#include <gtest/gtest.h>

#include <complex>

#include "conecount/geometry.hpp"
#include "conecount/rng.hpp"
#include "conecount/spectral.hpp"

using namespace conecount;

TEST(Spectral, MellinTransform) {
  EXPECT_NEAR(mellin({{1.0, 2.0}}, 1.0), 0.5, 1e-15);
  for (int n = 1; n < 6; ++n) {
    const double a = 0.7, b = 1.9;
    EXPECT_NEAR(mellin({{a, b}}, double(n)), (std::pow(a, -n) - std::pow(b, -n)) / n, 1e-14);
    EXPECT_GE(mellin({{a, b}}, double(n)), 0.0);
  }
  const std::complex<double> s(1.5, 2.0);
  const auto z = mellin({{1.0, 3.0}}, s);
  EXPECT_NEAR(std::abs(z - (std::pow(1.0, -s) - std::pow(3.0, -s)) / s), 0.0, 1e-14);
}

TEST(Spectral, MellinDominatedByMeasure) {
  // |rho^(s)| <= 2 rho^(n)^{s/n} for indicators.
  Rng rng(12);
  for (int i = 0; i < 2000; ++i) {
    const int n = 1 + i % 5;
    const double a = std::exp(rng.uniform(-3, 3)), b = a * std::exp(rng.uniform(0.01, 3));
    const double s = rng.uniform(0.5 * n + 1e-6, n - 1e-6);
    ASSERT_LE(mellin({{a, b}}, s), 2 * std::pow(mellin({{a, b}}, double(n)), s / n) * (1 + 1e-12));
  }
}

TEST(Spectral, PdValues) {
  EXPECT_EQ(p_d(3, 0, 1.7), 1.0);
  EXPECT_NEAR(p_d(2, 1, 1.5), 1.0 / 3, 1e-15);
  for (int n = 1; n <= 9; ++n)
    for (int d = 0; d <= 64; ++d)
      for (double t : {-30.0, -1.0, 0.0, 0.3, 7.0, 100.0}) {
        const std::complex<double> s(0.5 * n, t);
        ASSERT_NEAR(std::abs(p_d(n, d, s)), 1.0, 1e-10) << n << " " << d << " " << t;
        ASSERT_NEAR(std::abs(p_d(n, d, s) * p_d(n, d, double(n) - s) - 1.0), 0.0, 1e-10);
      }
}

TEST(Spectral, HarmonicDimensions) {
  EXPECT_EQ(harmonic_dimension(1, 0), 1);
  EXPECT_EQ(harmonic_dimension(1, 3), 2);
  EXPECT_EQ(harmonic_dimension(2, 3), 7);
  EXPECT_EQ(harmonic_dimension(3, 2), 9);
}

TEST(Spectral, ParsevalDeficitShrinks) {
  for (int n : {1, 2, 3}) {
    const ZonalExpansion full = zonal_expansion(n, 2.5, 32);
    EXPECT_NEAR(full.partial_sum(32), 1.0, 1e-12);
    for (int d = 1; d <= 32; ++d) EXPECT_NEAR(full.component(d), 0.0, 1e-12);
    const ZonalExpansion z = zonal_expansion(n, 0.8, 64);
    double prev = z.norm2;
    for (int D : {4, 8, 16, 32, 64}) {
      const double deficit = z.norm2 - z.partial_sum(D);
      EXPECT_GE(deficit, -1e-12);
      EXPECT_LT(deficit, prev);
      prev = deficit;
    }
    // Indicators have a jump, so the deficit decays only like 1/D.
    EXPECT_LT(z.norm2 - z.partial_sum(64), 0.05 * z.norm2);
  }
}

TEST(Spectral, FullSphereKeepsOnlyDegreeZero) {
  const SeparableFunction f{3, {{1.0, 2.0}}, 2.0};
  const MValue M = m_ff(f, f, 2.2);
  EXPECT_NEAR(M.value, std::pow(mellin(f.rho, 2.2), 2), 1e-13);
  EXPECT_NEAR(M.tail_bound, 0.0, 1e-12);
}

TEST(Spectral, ScalingLaw) {
  Rng rng(10);
  for (int i = 0; i < 100; ++i) {
    const int n = 1 + i % 4;
    const SeparableFunction f{n, {{0.5, 1.5}}, rng.uniform(0.3, 1.8)};
    const SeparableFunction g{n, {{1.0, 4.0}}, rng.uniform(0.3, 1.8)};
    const double l1 = std::exp(rng.uniform(-1, 1)), l2 = std::exp(rng.uniform(-1, 1));
    const double s = rng.uniform(0.5 * n + 0.05, n - 0.05);
    const double base = m_ff(f, g, s, 24).value;
    const double scaled = m_ff(f.scaled(l1), g.scaled(l2), s, 24).value;
    ASSERT_NEAR(scaled, std::pow(l1 * l2, s) * base, 1e-8 * std::max(1.0, std::abs(scaled)));
  }
}

TEST(Spectral, Symmetry) {
  const SeparableFunction f{2, {{1.0, 2.0}}, 0.6}, g{2, {{0.3, 0.9}}, 1.3};
  EXPECT_NEAR(m_ff(f, g, 1.4).value, m_ff(g, f, 1.4).value, 1e-15);
}

TEST(Spectral, RejectsBadInput) {
  const SeparableFunction f{2, {{1.0, 2.0}}, 0.6};
  EXPECT_THROW(m_ff(f, f, 0.9), std::invalid_argument);
  EXPECT_THROW(m_ff(f, f, 2.0), std::invalid_argument);
  EXPECT_THROW(f.scaled(-1), std::invalid_argument);
  EXPECT_THROW(mellin({{2.0, 1.0}}, 1.0), std::invalid_argument);
}

TEST(Spectral, MeasureOfBall) {
  const SeparableFunction f{2, {{1.0, 2.0}}, 0.5};
  EXPECT_NEAR(f.measure(), cap_measure_exact(2, 0.5) * (1.0 - 0.25) / 2, 1e-15);
}
