#pragma once

#include "conecount/rng.hpp"

#include <Eigen/Dense>

#include <optional>

namespace conecount {

// Iwasawa coordinates g = u_x a_y k when known.
struct IwasawaTag {
  Eigen::VectorXd x;
  double y = 1.0;
  Eigen::MatrixXd k;
};

// Element of SO^+_{Q_n}(R) acting on row vectors: v -> v m.
struct GroupElement {
  Eigen::MatrixXd m;
  std::optional<IwasawaTag> tag;

  int n() const { return static_cast<int>(m.rows()) - 2; }
  Eigen::VectorXd act(const Eigen::VectorXd& v) const;
  GroupElement inverse() const;
  GroupElement operator*(const GroupElement& other) const;
  double op_norm() const;
  // Q_n preserved, det 1 and the positive sheet kept, to tolerance.
  bool is_valid(double tol = 1e-9) const;
};

GroupElement identity_element(int n);
GroupElement iwasawa_u(const Eigen::VectorXd& x);
GroupElement iwasawa_a(int n, double y);
// diag(R, 1) with R in SO(n+1).
GroupElement rotation_k(const Eigen::MatrixXd& R);
// diag(1, R, 1) with R in SO(n).
GroupElement rotation_m(const Eigen::MatrixXd& R);

// k_alpha with e_0 k_alpha = (alpha, 1): the rotation in the plane of alpha_0
// and alpha. For alpha = -alpha_0 the first two coordinates are negated.
GroupElement section(const Eigen::VectorXd& alpha);

double op_norm(const Eigen::MatrixXd& m);
// J_n g^t J_n
Eigen::MatrixXd group_inverse(const Eigen::MatrixXd& g);

Eigen::VectorXd sample_sphere(int n, Rng& rng);
// Uniform point of the chordal cap of radius r about `center` (r < 2).
Eigen::VectorXd sample_cap(const Eigen::VectorXd& center, double r, Rng& rng);
// Haar measure on SO(dim) via QR of a Gaussian matrix.
Eigen::MatrixXd haar_so(int dim, Rng& rng);

// u_{x1} a_{y1} k1 u_{x2} a_{y2} k2 with x uniform in [-xb, xb]^n,
// log y uniform in [-ly, ly] and Haar k.
GroupElement random_element(int n, Rng& rng, double xb = 0.5, double ly = 0.4);

// p = m a_y u_x in the parabolic subgroup P fixing the line of e_0.
struct ParabolicParts {
  Eigen::MatrixXd m;  // SO(n) block
  double y = 1.0;
  Eigen::VectorXd x;
  double residual = 0.0;  // ||p - m a_y u_x||
};
ParabolicParts decompose_parabolic(const Eigen::MatrixXd& p);

struct NeighborhoodSpec {
  enum class Kind { G_eps_r_alpha, P_eps, P_tilde_eps };
  Kind kind = Kind::G_eps_r_alpha;
  double eps = 0.1;
  double r = 0.5;
  Eigen::VectorXd alpha;  // G_eps_r_alpha only

  int n = 1;

  bool contains(const GroupElement& g) const;
  // Draws from an Iwasawa box inside the set and confirms membership exactly.
  // Throws std::runtime_error after max_tries rejections.
  GroupElement sample(Rng& rng, int max_tries = 10000) const;

  static NeighborhoodSpec G(double eps, double r, const Eigen::VectorXd& alpha);
  static NeighborhoodSpec P(int n, double eps);
  static NeighborhoodSpec P_tilde(int n, double eps);
};

}  // namespace conecount
