#include <gtest/gtest.h>

#include "conecount/enumeration.hpp"
#include "conecount/group.hpp"
#include "conecount/valdist.hpp"
#include "oracles.hpp"

using namespace conecount;

namespace {

const QuadraticSpace Q3 = QuadraticSpace::standard(3);

LinearMapOnCone projection(int m) {
  return LinearMapOnCone::classified(Q3, m, Eigen::MatrixXd::Identity(5, 5), Eigen::MatrixXd::Identity(m, m));
}

// Brute-force cone points of Q_3 with ||v|| = sqrt2 q <= T.
std::vector<oracle::Point> ball(double T) {
  std::vector<oracle::Point> out;
  for (const auto& p : oracle::brute_cone(oracle::identity_gram(4), static_cast<std::int64_t>(std::floor(T / std::sqrt(2.0)))))
    out.push_back(p);
  return out;
}

}  // namespace

TEST(ValueDistribution, Constants) {
  EXPECT_NEAR(c_nm(3, 1), 2 / M_PI, 1e-14);
  EXPECT_NEAR(c_nm(2, 1), 0.5, 1e-14);
  for (int n = 2; n < 10; ++n)
    for (int m = 1; m < n; ++m) EXPECT_GT(c_nm(n, m), 0);
  EXPECT_DOUBLE_EQ(v_L_identity(3, 1), 0.25);
  EXPECT_NEAR(v_L_identity(3, 2), 1 / std::sqrt(2.0), 1e-15);
  EXPECT_THROW(c_nm(3, 3), std::invalid_argument);
}

TEST(ValueDistribution, MonteCarloVLAtIdentity) {
  for (int m : {1, 2}) {
    const MonteCarloValue v = v_L(projection(m), 400000, 77);
    EXPECT_NEAR(v.value / v_L_identity(3, m), 1.0, 0.005) << m;
  }
}

TEST(ValueDistribution, PredictionScaling) {
  const LinearMapOnCone L = projection(1);
  EXPECT_NEAR(predict_linear_measure(L, 10.0, 50.0, 0.25), 2 / M_PI * 10 * 2500 * 0.25, 1e-9);
  EXPECT_NEAR(predict_linear_measure(L, 4.0, 80.0, 0.25) / predict_linear_measure(L, 4.0, 40.0, 0.25), 4.0, 1e-12);
  EXPECT_EQ(predict_linear_measure(L, 0.0, 80.0, 0.25), 0.0);
  const HomogeneousFormOnCone F =
      HomogeneousFormOnCone::make(Q3, 1.5, 1, 1, Eigen::MatrixXd::Identity(5, 5), Eigen::MatrixXd::Identity(2, 2));
  EXPECT_NEAR(predict_homog_measure(F, 2.0, 60.0, 1.0) / predict_homog_measure(F, 2.0, 30.0, 1.0), std::pow(2.0, 1.5), 1e-12);
}

TEST(ValueDistribution, FormHomogeneity) {
  Rng rng(3);
  for (int i = 0; i < 1000; ++i) {
    Eigen::VectorXd w(3);
    for (int j = 0; j < 3; ++j) w(j) = rng.normal();
    const double d = rng.uniform(1.1, 2.9), lam = rng.uniform(0.1, 5);
    EXPECT_NEAR(f_pq(lam * w, 2, d), std::pow(lam, d) * f_pq(w, 2, d), 1e-10 * std::pow(lam, d) * (1 + w.squaredNorm()));
  }
}

TEST(ValueDistribution, LinearCountAgainstBruteForce) {
  const LinearMapOnCone L = projection(1);
  const BoxUnion omega = parse_box("box:-5,5", 1);
  std::uint64_t want = 0;
  for (const auto& p : ball(50)) want += std::abs(p[0]) <= 5;
  EXPECT_EQ(count_linear(Q3, L, omega, 50, 1.0, 0.25).count, want);
  EXPECT_EQ(count_linear(Q3, L, parse_box("box:-1000000000,1000000000", 1), 50, 1.0, 0.25).count, ball(50).size());
  EXPECT_EQ(count_linear(Q3, L, parse_box("box:1000,2000", 1), 50, 1.0, 0.25).count, 0u);
}

TEST(ValueDistribution, HomogCountAgainstBruteForce) {
  const HomogeneousFormOnCone F =
      HomogeneousFormOnCone::make(Q3, 1.5, 1, 1, Eigen::MatrixXd::Identity(5, 5), Eigen::MatrixXd::Identity(2, 2));
  std::uint64_t want = 0;
  for (const auto& p : ball(40)) {
    const double f = std::pow(std::abs(double(p[0])), 1.5) - std::pow(std::abs(double(p[1])), 1.5);
    want += f >= -3 && f <= 3;
  }
  EXPECT_EQ(count_homog(Q3, F, parse_interval("interval:-3,3"), 40, 1.0, 1.0).count, want);
  EXPECT_EQ(count_homog(Q3, F, parse_interval("interval:-1000000000,1000000000"), 40, 1.0, 1.0).count, ball(40).size());
  EXPECT_EQ(count_homog(Q3, F, parse_interval("interval:100000000,1000000000"), 40, 1.0, 1.0).count, 0u);
}

TEST(ValueDistribution, DefiniteKernelGivesBoundedCounts) {
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(5, 1);
  M(4, 0) = 1.0;  // v -> v_5, the kernel is the positive definite hyperplane v_5 = 0
  const LinearMapOnCone L = LinearMapOnCone::from_matrix(3, M);
  EXPECT_FALSE(kernel_indefinite(Q3, L.matrix));
  EXPECT_TRUE(kernel_indefinite(Q3, projection(1).matrix));
  const BoxUnion omega = parse_box("box:-2,2", 1);
  EXPECT_EQ(count_linear(Q3, L, omega, 50, 1.0, 0.0).count, count_linear(Q3, L, omega, 200, 1.0, 0.0).count);
}

TEST(ValueDistribution, MonteCarloConeMeasure) {
  const LinearMapOnCone L = projection(1);
  const BoxUnion omega = parse_box("box:-2,2", 1);
  const MonteCarloValue mc = mc_linear_region_measure(L, omega, 100.0, 1000000, 5);
  const double pred = predict_linear_measure(L, omega.volume(), 100.0, v_L_identity(3, 1));
  EXPECT_LE(std::abs(mc.value - pred), 3 * mc.stderr_);
}

TEST(ValueDistribution, VFAtIdentityMatchesClosedForm) {
  const QuadraticSpace Q4 = QuadraticSpace::standard(4);
  const HomogeneousFormOnCone F =
      HomogeneousFormOnCone::make(Q4, 2.0, 2, 1, Eigen::MatrixXd::Identity(6, 6), Eigen::MatrixXd::Identity(3, 3));
  const MonteCarloValue v = v_F(F, 400000, 13);
  // At the identity the volume is evaluated by quadrature, so the standard error may be zero.
  EXPECT_NEAR(v.value, M_PI / std::sqrt(2.0), std::max(4 * v.stderr_, 1e-9));
}

TEST(ValueDistribution, ParsingAndValidation) {
  const BoxUnion b = parse_box("box:0,1;0,2|3,4;0,1", 2);
  EXPECT_DOUBLE_EQ(b.volume(), 3.0);
  Eigen::VectorXd w(2);
  w << 3.5, 0.5;
  EXPECT_TRUE(b.contains(w));
  w << 2.0, 0.5;
  EXPECT_FALSE(b.contains(w));
  EXPECT_THROW(parse_box("box:1,0", 1), std::invalid_argument);
  EXPECT_DOUBLE_EQ(parse_interval("interval:-2,3").length(), 5.0);
  EXPECT_THROW(HomogeneousFormOnCone::make(Q3, 2.0, 1, 2, Eigen::MatrixXd::Identity(5, 5), Eigen::MatrixXd::Identity(3, 3)),
               std::invalid_argument);
  Rng rng(1);
  for (int i = 0; i < 50; ++i) EXPECT_GE(std::abs(random_h(3, rng).determinant()), 0.1);
}

TEST(ValueDistribution, ClassifiedMapStructure) {
  Rng rng(6);
  const GroupElement g = random_element(3, rng);
  const Eigen::MatrixXd h = random_h(2, rng);
  const LinearMapOnCone L = LinearMapOnCone::classified(Q3, 2, g.m, h);
  Eigen::MatrixXd L0 = Eigen::MatrixXd::Zero(5, 2);
  L0(0, 0) = L0(1, 1) = 1;
  EXPECT_LT((L.matrix - g.m * Q3.tau * L0 * h).norm(), 1e-12);
}
