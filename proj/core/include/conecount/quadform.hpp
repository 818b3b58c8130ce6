#pragma once

#include "conecount/rational.hpp"

#include <Eigen/Dense>

#include <optional>
#include <string>

namespace conecount {

// Rational quadratic form Q(v) = v J v^t of signature (n+1,1) together with
// a real tau = k a such that Q(v) = Q_n(v tau).
struct QuadraticSpace {
  int n = 0;
  RatMatrix J;
  Eigen::MatrixXd tau;
  Rational det_J;

  int dim() const { return n + 2; }
  Eigen::MatrixXd J_double() const;
  // True when J = diag(A, -1) for a positive definite block A.
  bool is_ellipsoid_block() const;
  std::string fingerprint() const;

  static QuadraticSpace standard(int n);
  static QuadraticSpace from_gram(const RatMatrix& J);
};

// Positive definite form on R^{n+1}; its light cone lives in Q(x,y) = A(x) - y^2.
struct EllipsoidForm {
  int n = 0;
  RatMatrix A;
  std::vector<std::vector<BigInt>> A_int;  // s_A * A
  BigInt s_A = 1;
  bool diagonal = false;
  QuadraticSpace space;
  Eigen::MatrixXd A_double;
  Eigen::MatrixXd tau_tilde;      // A = tau_tilde tau_tilde^t
  Eigen::MatrixXd tau_tilde_inv;
  Eigen::VectorXd inv_diag;       // diagonal of A^{-1}

  int dim() const { return n + 1; }
  // A(x) for a real vector of length n+1.
  double value(const Eigen::VectorXd& x) const;
  // Maps a unit vector alpha in S^n to the point x = alpha tau_tilde^{-1} of S_A.
  Eigen::VectorXd from_sphere(const Eigen::VectorXd& alpha) const;
  Eigen::VectorXd to_sphere(const Eigen::VectorXd& x) const;

  static EllipsoidForm standard(int n);
  static EllipsoidForm from_gram(const RatMatrix& A);
  static std::optional<EllipsoidForm> from_space(const QuadraticSpace& Q);
};

// A parsed form: always a QuadraticSpace, plus the ellipsoid view when J has block shape.
struct FormSpec {
  QuadraticSpace space;
  std::optional<EllipsoidForm> ellipsoid;
  std::string label;
};

// "standard:n", or the path of a form file ("n=<int>" + J rows, or "ellipsoid" + A rows).
FormSpec load_form(const std::string& spec);
FormSpec parse_form_text(const std::string& text, const std::string& label = "inline");

Rational evaluate(const QuadraticSpace& Q, const IntVec& v);
Rational evaluate(const QuadraticSpace& Q, const std::vector<Rational>& v);
double evaluate(const QuadraticSpace& Q, const Eigen::VectorXd& v);

// Q_n(w) = w_1^2 + ... + w_{n+1}^2 - w_{n+2}^2.
double standard_value(const Eigen::VectorXd& w);

Eigen::MatrixXd diagonalize(const RatMatrix& J);

double q_norm(const QuadraticSpace& Q, const Eigen::VectorXd& v);
double q_norm(const QuadraticSpace& Q, const IntVec& v);

Eigen::VectorXd to_double(const IntVec& v);
RatMatrix rational_identity(int size);

}  // namespace conecount
