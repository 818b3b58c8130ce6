#pragma once

#include "conecount/counting.hpp"
#include "conecount/group.hpp"
#include "conecount/quadform.hpp"

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <vector>

namespace conecount {

// v -> v M with M an (n+2) x m matrix. Classified maps carry M = g tau L_0 h.
struct LinearMapOnCone {
  int n = 0;
  int m = 0;
  Eigen::MatrixXd matrix;
  std::optional<Eigen::MatrixXd> g;  // element of SO^+_{Q_n}(R)
  std::optional<Eigen::MatrixXd> h;  // invertible m x m

  Eigen::VectorXd apply(const Eigen::VectorXd& v) const { return (v.transpose() * matrix).transpose(); }

  static LinearMapOnCone classified(const QuadraticSpace& Q, int m, const Eigen::MatrixXd& g, const Eigen::MatrixXd& h);
  static LinearMapOnCone from_matrix(int n, const Eigen::MatrixXd& M);
};

// F(v) = F^{(d)}_{p,q}(v g tau L_0 h).
struct HomogeneousFormOnCone {
  int n = 0;
  int m = 0;
  double d = 2.0;
  int p = 1;
  int q = 1;
  Eigen::MatrixXd g;
  Eigen::MatrixXd h;
  Eigen::MatrixXd matrix;  // g tau L_0 h

  double operator()(const Eigen::VectorXd& v) const;

  static HomogeneousFormOnCone make(const QuadraticSpace& Q, double d, int p, int q, const Eigen::MatrixXd& g,
                                    const Eigen::MatrixXd& h);
};

// sum_{j<=p} |w_j|^d - sum_{j>p} |w_j|^d
double f_pq(const Eigen::VectorXd& w, int p, double d);

// Finite union of axis boxes in R^m.
struct BoxUnion {
  std::vector<std::pair<Eigen::VectorXd, Eigen::VectorXd>> boxes;  // closed [lo, hi]

  bool contains(const Eigen::VectorXd& w) const;
  double volume() const;  // boxes assumed disjoint
};

struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  bool contains(double x) const { return x >= lo && x <= hi; }
  double length() const { return hi > lo ? hi - lo : 0.0; }
};

// "box:a1,b1;a2,b2;..." with m pairs per box and boxes separated by '|'.
BoxUnion parse_box(const std::string& text, int m);
// "interval:a,b"
Interval parse_interval(const std::string& text);

// Q restricted to {v : v M = 0} has both signs.
bool kernel_indefinite(const QuadraticSpace& Q, const Eigen::MatrixXd& M);

double c_nm(int n, int m);

struct MonteCarloValue {
  double value = 0.0;
  double stderr_ = 0.0;
  std::size_t samples = 0;
};

// Closed form 2^{-(n-m)/2}/(n-m) at g = id.
double v_L_identity(int n, int m);
// E_omega ||(0, omega, 1) g^{-1}||^{-(n-m)} / (n-m), omega uniform on S^{n-m}.
MonteCarloValue v_L(const LinearMapOnCone& L, std::size_t samples, std::uint64_t seed, int threads = 1);
MonteCarloValue v_F(const HomogeneousFormOnCone& F, std::size_t samples, std::uint64_t seed, int threads = 1);

double predict_linear_measure(const LinearMapOnCone& L, double omega_volume, double T, double VL);
double predict_homog_measure(const HomogeneousFormOnCone& F, double interval_length, double T, double VF);
double homog_error_exponent(double d, int m);

// Cone measure of {v : ||v|| <= T, v M in Omega} under t^{n-1} dt dsigma_n.
MonteCarloValue mc_linear_region_measure(const LinearMapOnCone& L, const BoxUnion& omega, double T, std::size_t samples,
                                         std::uint64_t seed, int threads = 1);

CountReport count_linear(const QuadraticSpace& Q, const LinearMapOnCone& L, const BoxUnion& omega, double T,
                         double omega_hat, double VL, int threads = 1);
CountReport count_homog(const QuadraticSpace& Q, const HomogeneousFormOnCone& F, const Interval& I, double T,
                        double omega_hat, double VF, int threads = 1);

// h with entries uniform in (-1,1), redrawn while |det h| < 0.1.
Eigen::MatrixXd random_h(int m, Rng& rng);

}  // namespace conecount
