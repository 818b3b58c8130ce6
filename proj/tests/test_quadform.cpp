#include <gtest/gtest.h>

#include "conecount/quadform.hpp"
#include "conecount/rng.hpp"

using namespace conecount;

namespace {

RatMatrix diag(std::initializer_list<long> d) {
  const int k = static_cast<int>(d.size());
  RatMatrix J(k, std::vector<Rational>(k, Rational(0)));
  int i = 0;
  for (long x : d) J[i][i] = Rational(x), ++i;
  return J;
}

IntVec iv(std::initializer_list<long> xs) {
  IntVec v;
  for (long x : xs) v.emplace_back(x);
  return v;
}

}  // namespace

TEST(QuadForm, EvaluateIsotropicPoints) {
  EXPECT_EQ(evaluate(QuadraticSpace::standard(2), iv({3, 4, 0, 5})), Rational(0));
  EXPECT_EQ(evaluate(QuadraticSpace::standard(1), iv({1, 0, 1})), Rational(0));
  EXPECT_EQ(evaluate(QuadraticSpace::from_gram(diag({1, 2, -1})), iv({1, 2, 3})), Rational(0));
  EXPECT_EQ(evaluate(QuadraticSpace::standard(1), iv({1, 1, 1})), Rational(1));
}

TEST(QuadForm, DiagonalizeKnownCases) {
  const Eigen::MatrixXd t1 = diagonalize(QuadraticSpace::standard(3).J);
  EXPECT_TRUE(t1.isApprox(Eigen::MatrixXd::Identity(5, 5), 0.0));
  const Eigen::MatrixXd t2 = diagonalize(diag({1, 2, -1}));
  EXPECT_NEAR(t2(0, 0), 1.0, 1e-14);
  EXPECT_NEAR(t2(1, 1), std::sqrt(2.0), 1e-14);
  EXPECT_NEAR(t2(2, 2), 1.0, 1e-14);
  const Eigen::MatrixXd t3 = diagonalize(diag({4, 1, -9}));
  EXPECT_NEAR(t3(0, 0), 2.0, 1e-14);
  EXPECT_NEAR(t3(1, 1), 1.0, 1e-14);
  EXPECT_NEAR(t3(2, 2), 3.0, 1e-14);
}

TEST(QuadForm, QNormExamples) {
  EXPECT_NEAR(q_norm(QuadraticSpace::standard(2), iv({3, 4, 0, 5})), std::sqrt(50.0), 1e-12);
  EXPECT_NEAR(q_norm(QuadraticSpace::from_gram(diag({1, 2, -1})), iv({1, 2, 3})), std::sqrt(18.0), 1e-12);
  EXPECT_EQ(q_norm(QuadraticSpace::standard(2), iv({0, 0, 0, 0})), 0.0);
}

TEST(QuadForm, SignatureAndTauShape) {
  RatMatrix J = diag({2, 3, 5, -7});
  J[0][1] = J[1][0] = Rational(1, 2);
  const QuadraticSpace Q = QuadraticSpace::from_gram(J);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Q.J_double());
  int pos = 0, neg = 0;
  for (int i = 0; i < 4; ++i) (es.eigenvalues()(i) > 0 ? pos : neg)++;
  EXPECT_EQ(pos, 3);
  EXPECT_EQ(neg, 1);
  // tau = k a: tau tau^t has the same eigenvectors as k, so tau^t tau is diagonal.
  const Eigen::MatrixXd a2 = Q.tau.transpose() * Q.tau;
  EXPECT_LT((a2 - Eigen::MatrixXd(a2.diagonal().asDiagonal())).norm(), 1e-10);
}

TEST(QuadForm, RejectsWrongSignature) {
  EXPECT_THROW(QuadraticSpace::from_gram(diag({1, 1, 1})), std::invalid_argument);
  EXPECT_THROW(QuadraticSpace::from_gram(diag({1, -1, -1})), std::invalid_argument);
}

TEST(QuadForm, EvaluateMatchesStandardFormAfterTau) {
  RatMatrix J = diag({3, 2, 5, -1});
  J[0][2] = J[2][0] = Rational(1);
  J[1][2] = J[2][1] = Rational(-1, 3);
  const std::vector<QuadraticSpace> forms = {QuadraticSpace::standard(2), QuadraticSpace::from_gram(diag({1, 2, 7, -3})),
                                             QuadraticSpace::from_gram(J)};
  Rng rng(11);
  for (const auto& Q : forms) {
    for (int t = 0; t < 10000; ++t) {
      IntVec v;
      Eigen::VectorXd vd(Q.dim());
      for (int i = 0; i < Q.dim(); ++i) {
        const long x = static_cast<long>(rng.uniform(-50, 50));
        v.emplace_back(x);
        vd(i) = static_cast<double>(x);
      }
      const double exact = static_cast<double>(evaluate(Q, v));
      const Eigen::VectorXd w = (vd.transpose() * Q.tau).transpose();
      ASSERT_LE(std::abs(exact - standard_value(w)), 1e-8 * (1 + vd.squaredNorm()));
    }
  }
}

TEST(QuadForm, QNormInvariantUnderStabilizer) {
  const QuadraticSpace Q = QuadraticSpace::from_gram(diag({1, 2, 3, -1}));
  Rng rng(5);
  for (int t = 0; t < 200; ++t) {
    Eigen::MatrixXd G(3, 3);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) G(i, j) = rng.normal();
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(G);
    Eigen::MatrixXd K = Eigen::MatrixXd::Identity(4, 4);
    K.topLeftCorner(3, 3) = qr.householderQ();
    const Eigen::MatrixXd k = Q.tau * K * Q.tau.inverse();
    Eigen::VectorXd v(4);
    for (int i = 0; i < 4; ++i) v(i) = rng.uniform(-10, 10);
    const Eigen::VectorXd vk = (v.transpose() * k).transpose();
    EXPECT_NEAR(q_norm(Q, vk), q_norm(Q, v), 1e-10 * (1 + q_norm(Q, v)));
  }
}

TEST(QuadForm, FormTextParsing) {
  const FormSpec f = parse_form_text("n=1\n1 0 0\n0 2 0\n0 0 -1\n");
  EXPECT_EQ(f.space.n, 1);
  ASSERT_TRUE(f.ellipsoid.has_value());
  EXPECT_EQ(f.ellipsoid->A[1][1], Rational(2));
  const FormSpec g = parse_form_text("ellipsoid\n2 1\n1 2\n");
  ASSERT_TRUE(g.ellipsoid.has_value());
  EXPECT_EQ(g.space.n, 1);
  EXPECT_EQ(g.space.J[2][2], Rational(-1));
  EXPECT_THROW(parse_form_text("ellipsoid\n1 2\n2 1\n"), std::invalid_argument);
  EXPECT_THROW(parse_form_text("hello\n"), std::invalid_argument);
  EXPECT_EQ(load_form("standard:3").space.n, 3);
}

TEST(QuadForm, FingerprintStable) {
  EXPECT_EQ(QuadraticSpace::standard(2).fingerprint(), QuadraticSpace::standard(2).fingerprint());
  EXPECT_NE(QuadraticSpace::standard(2).fingerprint(), QuadraticSpace::from_gram(diag({1, 2, 1, -1})).fingerprint());
}
