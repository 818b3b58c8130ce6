#include "conecount/quadform.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace conecount {

namespace {

Eigen::MatrixXd to_double(const RatMatrix& M) {
  Eigen::MatrixXd out(M.size(), M.size());
  for (std::size_t i = 0; i < M.size(); ++i)
    for (std::size_t j = 0; j < M.size(); ++j)
      out(i, j) = static_cast<double>(M[i][j]);
  return out;
}

void check_square_symmetric(const RatMatrix& M) {
  for (const auto& row : M)
    if (row.size() != M.size()) throw std::invalid_argument("matrix is not square");
  for (std::size_t i = 0; i < M.size(); ++i)
    for (std::size_t j = 0; j < i; ++j)
      if (M[i][j] != M[j][i]) throw std::invalid_argument("matrix is not symmetric");
}

Rational determinant(RatMatrix M) {
  const std::size_t n = M.size();
  Rational det = 1;
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    while (piv < n && M[piv][c] == 0) ++piv;
    if (piv == n) return 0;
    if (piv != c) {
      std::swap(M[piv], M[c]);
      det = -det;
    }
    det *= M[c][c];
    for (std::size_t r = c + 1; r < n; ++r) {
      if (M[r][c] == 0) continue;
      Rational f = M[r][c] / M[c][c];
      for (std::size_t k = c; k < n; ++k) M[r][k] -= f * M[c][k];
    }
  }
  return det;
}

bool is_diagonal(const RatMatrix& M) {
  for (std::size_t i = 0; i < M.size(); ++i)
    for (std::size_t j = 0; j < M.size(); ++j)
      if (i != j && M[i][j] != 0) return false;
  return true;
}

// Largest-magnitude entry of every column made positive (first index on ties).
void fix_signs(Eigen::MatrixXd& k) {
  for (Eigen::Index c = 0; c < k.cols(); ++c) {
    Eigen::Index best = 0;
    for (Eigen::Index r = 1; r < k.rows(); ++r)
      if (std::abs(k(r, c)) > std::abs(k(best, c)) + 1e-12) best = r;
    if (k(best, c) < 0) k.col(c) *= -1.0;
  }
}

// k a with positive eigenvalues descending (ties by eigensolver order) and
// negative ones after them.
Eigen::MatrixXd eigen_tau(const Eigen::MatrixXd& Jd) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Jd);
  if (es.info() != Eigen::Success) throw std::runtime_error("eigensolver did not converge");
  const Eigen::Index m = Jd.rows();
  std::vector<Eigen::Index> order(m);
  std::iota(order.begin(), order.end(), 0);
  const auto& t = es.eigenvalues();
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    bool pa = t(a) > 0, pb = t(b) > 0;
    if (pa != pb) return pa;
    return t(a) > t(b);
  });
  Eigen::MatrixXd k(m, m);
  Eigen::VectorXd a(m);
  for (Eigen::Index j = 0; j < m; ++j) {
    k.col(j) = es.eigenvectors().col(order[j]);
    a(j) = std::sqrt(std::abs(t(order[j])));
  }
  fix_signs(k);
  return k * a.asDiagonal();
}

Eigen::MatrixXd diagonal_tau(const RatMatrix& J) {
  const int m = static_cast<int>(J.size());
  std::vector<int> order;
  for (int i = 0; i < m; ++i)
    if (J[i][i] > 0) order.push_back(i);
  for (int i = 0; i < m; ++i)
    if (J[i][i] < 0) order.push_back(i);
  Eigen::MatrixXd tau = Eigen::MatrixXd::Zero(m, m);
  for (int j = 0; j < m; ++j)
    tau(order[j], j) = std::sqrt(std::abs(static_cast<double>(J[order[j]][order[j]])));
  return tau;
}

bool is_block_last(const RatMatrix& J) {
  const std::size_t m = J.size();
  for (std::size_t i = 0; i + 1 < m; ++i)
    if (J[i][m - 1] != 0) return false;
  return J[m - 1][m - 1] < 0;
}

void check_signature(const RatMatrix& J) {
  if (determinant(J) == 0) throw std::invalid_argument("form is degenerate");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(to_double(J), Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw std::runtime_error("eigensolver did not converge");
  int neg = 0;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
    if (es.eigenvalues()(i) < 0) ++neg;
  if (neg != 1) throw std::invalid_argument("form does not have signature (n+1,1)");
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::vector<std::string> split_ws(const std::string& line) {
  std::istringstream is(line);
  std::vector<std::string> out;
  std::string tok;
  while (is >> tok) out.push_back(tok);
  return out;
}

}  // namespace

RatMatrix rational_identity(int size) {
  RatMatrix I(size, std::vector<Rational>(size, Rational(0)));
  for (int i = 0; i < size; ++i) I[i][i] = 1;
  return I;
}

Eigen::MatrixXd diagonalize(const RatMatrix& J) {
  check_square_symmetric(J);
  check_signature(J);
  if (is_diagonal(J)) return diagonal_tau(J);
  const int m = static_cast<int>(J.size());
  if (is_block_last(J)) {
    RatMatrix A(m - 1, std::vector<Rational>(m - 1));
    for (int i = 0; i + 1 < m; ++i)
      for (int j = 0; j + 1 < m; ++j) A[i][j] = J[i][j];
    Eigen::MatrixXd tau = Eigen::MatrixXd::Zero(m, m);
    tau.topLeftCorner(m - 1, m - 1) = eigen_tau(to_double(A));
    tau(m - 1, m - 1) = std::sqrt(-static_cast<double>(J[m - 1][m - 1]));
    return tau;
  }
  return eigen_tau(to_double(J));
}

Eigen::MatrixXd QuadraticSpace::J_double() const { return to_double(J); }

bool QuadraticSpace::is_ellipsoid_block() const {
  return is_block_last(J) && J.back().back() == -1;
}

std::string QuadraticSpace::fingerprint() const {
  std::string canon = "n=" + std::to_string(n) + ";";
  for (const auto& row : J) {
    for (const auto& x : row) canon += to_string(x) + ",";
    canon += ";";
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(canon)));
  return buf;
}

QuadraticSpace QuadraticSpace::standard(int n) {
  if (n < 1) throw std::invalid_argument("n must be positive");
  RatMatrix J = rational_identity(n + 2);
  J[n + 1][n + 1] = -1;
  return from_gram(J);
}

QuadraticSpace QuadraticSpace::from_gram(const RatMatrix& J) {
  check_square_symmetric(J);
  if (J.size() < 3) throw std::invalid_argument("form needs dimension at least 3");
  QuadraticSpace Q;
  Q.n = static_cast<int>(J.size()) - 2;
  Q.J = J;
  Q.tau = diagonalize(J);
  Q.det_J = determinant(J);
  return Q;
}

double EllipsoidForm::value(const Eigen::VectorXd& x) const { return x.dot(A_double * x); }

Eigen::VectorXd EllipsoidForm::from_sphere(const Eigen::VectorXd& alpha) const {
  return tau_tilde_inv.transpose() * alpha;
}

Eigen::VectorXd EllipsoidForm::to_sphere(const Eigen::VectorXd& x) const {
  return tau_tilde.transpose() * x;
}

EllipsoidForm EllipsoidForm::standard(int n) {
  return from_gram(rational_identity(n + 1));
}

EllipsoidForm EllipsoidForm::from_gram(const RatMatrix& A) {
  check_square_symmetric(A);
  if (A.size() < 2) throw std::invalid_argument("ellipsoid form needs dimension at least 2");
  for (std::size_t k = 1; k <= A.size(); ++k) {
    RatMatrix lead(k, std::vector<Rational>(k));
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t j = 0; j < k; ++j) lead[i][j] = A[i][j];
    if (determinant(lead) <= 0) throw std::invalid_argument("ellipsoid form is not positive definite");
  }
  EllipsoidForm E;
  E.n = static_cast<int>(A.size()) - 1;
  E.A = A;
  E.diagonal = is_diagonal(A);
  BigInt s = 1;
  for (const auto& row : A)
    for (const auto& x : row) s = lcm(s, denominator(x));
  E.s_A = s;
  E.A_int.assign(A.size(), std::vector<BigInt>(A.size()));
  for (std::size_t i = 0; i < A.size(); ++i)
    for (std::size_t j = 0; j < A.size(); ++j) E.A_int[i][j] = numerator(Rational(A[i][j] * s));
  RatMatrix J(A.size() + 1, std::vector<Rational>(A.size() + 1, Rational(0)));
  for (std::size_t i = 0; i < A.size(); ++i)
    for (std::size_t j = 0; j < A.size(); ++j) J[i][j] = A[i][j];
  J.back().back() = -1;
  E.space = QuadraticSpace::from_gram(J);
  E.A_double = to_double(A);
  E.tau_tilde = E.space.tau.topLeftCorner(E.n + 1, E.n + 1);
  E.tau_tilde_inv = E.tau_tilde.inverse();
  E.inv_diag = E.A_double.inverse().diagonal();
  return E;
}

std::optional<EllipsoidForm> EllipsoidForm::from_space(const QuadraticSpace& Q) {
  if (!Q.is_ellipsoid_block()) return std::nullopt;
  RatMatrix A(Q.n + 1, std::vector<Rational>(Q.n + 1));
  for (int i = 0; i <= Q.n; ++i)
    for (int j = 0; j <= Q.n; ++j) A[i][j] = Q.J[i][j];
  try {
    return from_gram(A);
  } catch (const std::invalid_argument&) {
    return std::nullopt;
  }
}

FormSpec parse_form_text(const std::string& text, const std::string& label) {
  std::istringstream is(text);
  std::string line;
  std::vector<std::vector<std::string>> rows;
  std::string header;
  while (std::getline(is, line)) {
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    auto toks = split_ws(line);
    if (toks.empty()) continue;
    if (header.empty()) {
      header = toks[0];
      for (std::size_t i = 1; i < toks.size(); ++i) header += toks[i];
      continue;
    }
    rows.push_back(toks);
  }
  auto to_matrix = [&](std::size_t size) {
    if (rows.size() != size) throw std::invalid_argument("form file: expected " + std::to_string(size) + " rows");
    RatMatrix M(size, std::vector<Rational>(size));
    for (std::size_t i = 0; i < size; ++i) {
      if (rows[i].size() != size) throw std::invalid_argument("form file: row " + std::to_string(i + 1) + " has wrong length");
      for (std::size_t j = 0; j < size; ++j) M[i][j] = parse_rational(rows[i][j]);
    }
    return M;
  };
  FormSpec spec;
  spec.label = label;
  if (header == "ellipsoid") {
    auto A = to_matrix(rows.size());
    spec.ellipsoid = EllipsoidForm::from_gram(A);
    spec.space = spec.ellipsoid->space;
    return spec;
  }
  if (header.rfind("n=", 0) == 0) {
    int n = std::stoi(header.substr(2));
    if (n < 1) throw std::invalid_argument("form file: n must be positive");
    spec.space = QuadraticSpace::from_gram(to_matrix(n + 2));
    spec.ellipsoid = EllipsoidForm::from_space(spec.space);
    return spec;
  }
  throw std::invalid_argument("form file: first line must be 'n=<int>' or 'ellipsoid'");
}

FormSpec load_form(const std::string& spec) {
  if (spec.rfind("standard:", 0) == 0) {
    int n = std::stoi(spec.substr(9));
    FormSpec out;
    out.ellipsoid = EllipsoidForm::standard(n);
    out.space = out.ellipsoid->space;
    out.label = spec;
    return out;
  }
  std::ifstream in(spec);
  if (!in) throw std::invalid_argument("cannot open form file: " + spec);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_form_text(ss.str(), spec);
}

Rational evaluate(const QuadraticSpace& Q, const IntVec& v) {
  if (static_cast<int>(v.size()) != Q.dim()) throw std::invalid_argument("dimension mismatch");
  Rational acc = 0;
  for (int i = 0; i < Q.dim(); ++i) {
    if (v[i] == 0) continue;
    Rational row = 0;
    for (int j = 0; j < Q.dim(); ++j)
      if (v[j] != 0 && Q.J[i][j] != 0) row += Q.J[i][j] * v[j];
    acc += row * v[i];
  }
  return acc;
}

Rational evaluate(const QuadraticSpace& Q, const std::vector<Rational>& v) {
  if (static_cast<int>(v.size()) != Q.dim()) throw std::invalid_argument("dimension mismatch");
  Rational acc = 0;
  for (int i = 0; i < Q.dim(); ++i)
    for (int j = 0; j < Q.dim(); ++j) acc += v[i] * Q.J[i][j] * v[j];
  return acc;
}

double evaluate(const QuadraticSpace& Q, const Eigen::VectorXd& v) {
  if (v.size() != Q.dim()) throw std::invalid_argument("dimension mismatch");
  return v.dot(Q.J_double() * v);
}

double standard_value(const Eigen::VectorXd& w) {
  const Eigen::Index m = w.size();
  return w.head(m - 1).squaredNorm() - w(m - 1) * w(m - 1);
}

double q_norm(const QuadraticSpace& Q, const Eigen::VectorXd& v) {
  if (v.size() != Q.dim()) throw std::invalid_argument("dimension mismatch");
  return (Q.tau.transpose() * v).norm();
}

double q_norm(const QuadraticSpace& Q, const IntVec& v) { return q_norm(Q, to_double(v)); }

Eigen::VectorXd to_double(const IntVec& v) {
  Eigen::VectorXd out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out(i) = static_cast<double>(v[i]);
  return out;
}

}  // namespace conecount
