#include "conecount/group.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace conecount {

namespace {

Eigen::MatrixXd jn(int n) {
  Eigen::MatrixXd J = Eigen::MatrixXd::Identity(n + 2, n + 2);
  J(n + 1, n + 1) = -1.0;
  return J;
}

Eigen::VectorXd e0_row(int n) {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(n + 2);
  v(0) = -1.0;
  v(n + 1) = 1.0;
  return v;
}

void check_orthogonal(const Eigen::MatrixXd& R) {
  if (R.rows() != R.cols()) throw std::invalid_argument("rotation must be square");
  const double err = (R * R.transpose() - Eigen::MatrixXd::Identity(R.rows(), R.cols())).cwiseAbs().maxCoeff();
  if (err > 1e-10) throw std::invalid_argument("matrix is not orthogonal");
}

// Chordal distance between the directions of a and b/sqrt 2 scaled to the unit sphere.
double direction_gap(const Eigen::VectorXd& w, const Eigen::VectorXd& alpha_tilde) {
  return (w / w.norm() - alpha_tilde / std::sqrt(2.0)).norm();
}

}  // namespace

Eigen::VectorXd GroupElement::act(const Eigen::VectorXd& v) const { return (v.transpose() * m).transpose(); }

GroupElement GroupElement::inverse() const { return GroupElement{group_inverse(m), std::nullopt}; }

GroupElement GroupElement::operator*(const GroupElement& other) const { return GroupElement{m * other.m, std::nullopt}; }

double GroupElement::op_norm() const { return conecount::op_norm(m); }

bool GroupElement::is_valid(double tol) const {
  const int d = static_cast<int>(m.rows());
  if (d < 3 || m.cols() != d) return false;
  const Eigen::MatrixXd J = jn(d - 2);
  const double scale = std::max(1.0, m.squaredNorm());
  if ((m * J * m.transpose() - J).cwiseAbs().maxCoeff() > tol * scale) return false;
  if (std::abs(m.determinant() - 1.0) > tol * scale) return false;
  return m(d - 1, d - 1) > 0;
}

GroupElement identity_element(int n) {
  GroupElement g{Eigen::MatrixXd::Identity(n + 2, n + 2), IwasawaTag{Eigen::VectorXd::Zero(n), 1.0, Eigen::MatrixXd::Identity(n + 1, n + 1)}};
  return g;
}

GroupElement iwasawa_u(const Eigen::VectorXd& x) {
  const int n = static_cast<int>(x.size());
  const double h = 0.5 * x.squaredNorm();
  Eigen::MatrixXd u = Eigen::MatrixXd::Identity(n + 2, n + 2);
  u(0, 0) = 1.0 - h;
  u(0, n + 1) = h;
  u(n + 1, 0) = -h;
  u(n + 1, n + 1) = 1.0 + h;
  for (int i = 0; i < n; ++i) {
    u(0, 1 + i) = x(i);
    u(n + 1, 1 + i) = x(i);
    u(1 + i, 0) = -x(i);
    u(1 + i, n + 1) = x(i);
  }
  return GroupElement{u, IwasawaTag{x, 1.0, Eigen::MatrixXd::Identity(n + 1, n + 1)}};
}

GroupElement iwasawa_a(int n, double y) {
  if (!(y > 0)) throw std::invalid_argument("y must be positive");
  Eigen::MatrixXd a = Eigen::MatrixXd::Identity(n + 2, n + 2);
  const double c = 0.5 * (y + 1.0 / y), s = 0.5 * (y - 1.0 / y);
  a(0, 0) = c;
  a(0, n + 1) = s;
  a(n + 1, 0) = s;
  a(n + 1, n + 1) = c;
  return GroupElement{a, IwasawaTag{Eigen::VectorXd::Zero(n), y, Eigen::MatrixXd::Identity(n + 1, n + 1)}};
}

GroupElement rotation_k(const Eigen::MatrixXd& R) {
  check_orthogonal(R);
  const int d = static_cast<int>(R.rows());
  Eigen::MatrixXd k = Eigen::MatrixXd::Identity(d + 1, d + 1);
  k.topLeftCorner(d, d) = R;
  return GroupElement{k, IwasawaTag{Eigen::VectorXd::Zero(d - 1), 1.0, R}};
}

GroupElement rotation_m(const Eigen::MatrixXd& R) {
  const int n = static_cast<int>(R.rows());
  if (n == 0) return identity_element(0);
  check_orthogonal(R);
  Eigen::MatrixXd k = Eigen::MatrixXd::Identity(n + 2, n + 2);
  k.block(1, 1, n, n) = R;
  Eigen::MatrixXd kt = Eigen::MatrixXd::Identity(n + 1, n + 1);
  kt.block(1, 1, n, n) = R;
  return GroupElement{k, IwasawaTag{Eigen::VectorXd::Zero(n), 1.0, kt}};
}

GroupElement section(const Eigen::VectorXd& alpha) {
  const int d = static_cast<int>(alpha.size());
  if (std::abs(alpha.norm() - 1.0) > 1e-10) throw std::invalid_argument("alpha must be a unit vector");
  Eigen::VectorXd a = Eigen::VectorXd::Zero(d);
  a(0) = -1.0;
  const double c = a.dot(alpha);
  Eigen::VectorXd w = alpha - c * a;
  const double s = w.norm();
  Eigen::MatrixXd R = Eigen::MatrixXd::Identity(d, d);
  if (s < 1e-15) {
    if (c < 0) {
      R(0, 0) = -1.0;
      R(1, 1) = -1.0;
    }
  } else {
    w /= s;
    R += (c - 1.0) * (a * a.transpose() + w * w.transpose()) + s * (a * w.transpose() - w * a.transpose());
  }
  Eigen::MatrixXd k = Eigen::MatrixXd::Identity(d + 1, d + 1);
  k.topLeftCorner(d, d) = R;
  return GroupElement{k, IwasawaTag{Eigen::VectorXd::Zero(d - 1), 1.0, R}};
}

double op_norm(const Eigen::MatrixXd& m) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  return svd.singularValues()(0);
}

Eigen::MatrixXd group_inverse(const Eigen::MatrixXd& g) {
  const Eigen::MatrixXd J = jn(static_cast<int>(g.rows()) - 2);
  return J * g.transpose() * J;
}

Eigen::VectorXd sample_sphere(int n, Rng& rng) {
  Eigen::VectorXd v(n + 1);
  double nrm = 0.0;
  do {
    for (int i = 0; i <= n; ++i) v(i) = rng.normal();
    nrm = v.norm();
  } while (nrm < 1e-300);
  return v / nrm;
}

Eigen::VectorXd sample_cap(const Eigen::VectorXd& center, double r, Rng& rng) {
  const int n = static_cast<int>(center.size()) - 1;
  if (r >= 2.0) return sample_sphere(n, rng);
  // Small caps: draw from the tangent-ball cover and reject.
  const double thr = 1.0 - 0.5 * r * r;
  const double theta = 2.0 * std::asin(0.5 * r);
  if (theta < 0.5) {
    const double rho = std::tan(theta);
    for (;;) {
      Eigen::VectorXd w(n + 1);
      for (int i = 0; i <= n; ++i) w(i) = rng.normal();
      w -= w.dot(center) * center;
      const double wn = w.norm();
      if (wn == 0.0) continue;
      const double rad = rho * std::pow(rng.uniform(), 1.0 / n);
      Eigen::VectorXd p = center + w * (rad / wn);
      const double p2 = p.squaredNorm();
      // Density correction of the gnomonic projection: (1 + |t|^2)^{-(n+1)/2}.
      if (rng.uniform() > std::pow(p2, -0.5 * (n + 1))) continue;
      p /= std::sqrt(p2);
      if (p.dot(center) > thr) return p;
    }
  }
  for (;;) {
    Eigen::VectorXd p = sample_sphere(n, rng);
    if (p.dot(center) > thr) return p;
  }
}

Eigen::MatrixXd haar_so(int dim, Rng& rng) {
  if (dim <= 0) return Eigen::MatrixXd(0, 0);
  Eigen::MatrixXd G(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) G(i, j) = rng.normal();
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(G);
  Eigen::MatrixXd Q = qr.householderQ();
  Eigen::MatrixXd R = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < dim; ++j)
    if (R(j, j) < 0) Q.col(j) *= -1.0;
  if (Q.determinant() < 0) Q.col(0) *= -1.0;
  return Q;
}

GroupElement random_element(int n, Rng& rng, double xb, double ly) {
  GroupElement g = identity_element(n);
  for (int f = 0; f < 2; ++f) {
    Eigen::VectorXd x(n);
    for (int i = 0; i < n; ++i) x(i) = rng.uniform(-xb, xb);
    const double y = std::exp(rng.uniform(-ly, ly));
    g = g * iwasawa_u(x) * iwasawa_a(n, y) * rotation_k(haar_so(n + 1, rng));
  }
  g.tag.reset();
  return g;
}

ParabolicParts decompose_parabolic(const Eigen::MatrixXd& p) {
  const int n = static_cast<int>(p.rows()) - 2;
  ParabolicParts out;
  const Eigen::VectorXd ep = (e0_row(n).transpose() * p).transpose();
  out.y = 1.0 / ep(n + 1);
  out.m = p.block(1, 1, n, n);
  out.x = -(out.m.transpose() * p.block(1, 0, n, 1));
  if (!(out.y > 0)) {
    out.residual = std::numeric_limits<double>::infinity();
    return out;
  }
  Eigen::MatrixXd mm = Eigen::MatrixXd::Identity(n + 2, n + 2);
  mm.block(1, 1, n, n) = out.m;
  const Eigen::MatrixXd rec = mm * iwasawa_a(n, out.y).m * iwasawa_u(out.x).m;
  out.residual = (rec - p).cwiseAbs().maxCoeff();
  return out;
}

namespace {

bool in_P_prime(const Eigen::MatrixXd& p, double eps) {
  const ParabolicParts parts = decompose_parabolic(p);
  const int n = static_cast<int>(p.rows()) - 2;
  if (!(parts.residual < 1e-9 * std::max(1.0, p.cwiseAbs().maxCoeff()))) return false;
  if (n > 0 && (parts.m * parts.m.transpose() - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff() > 1e-9) return false;
  return std::max(parts.y, 1.0 / parts.y) < 1.0 + eps / 4 && parts.x.norm() < eps / 4;
}

}  // namespace

bool NeighborhoodSpec::contains(const GroupElement& g) const {
  switch (kind) {
    case Kind::G_eps_r_alpha: {
      if (!(g.op_norm() < 1.0 + eps)) return false;
      const int d = static_cast<int>(alpha.size());
      Eigen::VectorXd at(d + 1);
      at.head(d) = alpha;
      at(d) = 1.0;
      const Eigen::VectorXd w1 = g.act(at);
      const Eigen::VectorXd w2 = g.inverse().act(at);
      return std::max(direction_gap(w1, at), direction_gap(w2, at)) < r * eps;
    }
    case Kind::P_eps: {
      const ParabolicParts parts = decompose_parabolic(g.m);
      if (!(parts.residual < 1e-9)) return false;
      return g.op_norm() < 1.0 + eps;
    }
    case Kind::P_tilde_eps:
      return in_P_prime(g.m, eps) && in_P_prime(group_inverse(g.m), eps);
  }
  return false;
}

GroupElement NeighborhoodSpec::sample(Rng& rng, int max_tries) const {
  const int dim_n = kind == Kind::G_eps_r_alpha ? static_cast<int>(alpha.size()) - 1 : n;
  auto ball = [&](double radius) {
    Eigen::VectorXd x(dim_n);
    if (dim_n == 0) return x;
    double nrm;
    do {
      for (int i = 0; i < dim_n; ++i) x(i) = rng.normal();
      nrm = x.norm();
    } while (nrm == 0.0);
    return Eigen::VectorXd(x * (radius * std::pow(rng.uniform(), 1.0 / dim_n) / nrm));
  };
  for (int attempt = 0; attempt < max_tries; ++attempt) {
    GroupElement g;
    if (kind == Kind::G_eps_r_alpha) {
      const double e = eps / 4;
      const Eigen::VectorXd a1 = sample_cap([&] {
        Eigen::VectorXd a0 = Eigen::VectorXd::Zero(dim_n + 1);
        a0(0) = -1.0;
        return a0;
      }(), r * e, rng);
      const GroupElement g0 = iwasawa_u(ball(e)) * iwasawa_a(dim_n, 1.0 + rng.uniform(-e, e)) *
                              rotation_m(haar_so(dim_n, rng)) * section(a1);
      const GroupElement k = section(alpha);
      g = k.inverse() * g0 * k;
    } else if (kind == Kind::P_eps) {
      const double e = eps / 4;
      g = iwasawa_u(ball(e)) * iwasawa_a(dim_n, 1.0 + rng.uniform(-e, e)) * rotation_m(haar_so(dim_n, rng));
    } else {
      const double e = eps / 8;
      const double ly = std::log1p(e);
      g = rotation_m(haar_so(dim_n, rng)) * iwasawa_a(dim_n, std::exp(rng.uniform(-ly, ly))) * iwasawa_u(ball(e));
    }
    if (contains(g)) return g;
  }
  throw std::runtime_error("neighborhood sampler exceeded its rejection budget");
}

NeighborhoodSpec NeighborhoodSpec::G(double eps, double r, const Eigen::VectorXd& alpha) {
  if (!(eps > 0 && eps < 1) || !(r > 0 && r < 1)) throw std::invalid_argument("eps and r must lie in (0,1)");
  NeighborhoodSpec s;
  s.kind = Kind::G_eps_r_alpha;
  s.eps = eps;
  s.r = r;
  s.alpha = alpha;
  s.n = static_cast<int>(alpha.size()) - 1;
  return s;
}

NeighborhoodSpec NeighborhoodSpec::P(int n, double eps) {
  if (!(eps > 0 && eps < 1)) throw std::invalid_argument("eps must lie in (0,1)");
  NeighborhoodSpec s;
  s.kind = Kind::P_eps;
  s.eps = eps;
  s.n = n;
  return s;
}

NeighborhoodSpec NeighborhoodSpec::P_tilde(int n, double eps) {
  if (!(eps > 0 && eps < 1)) throw std::invalid_argument("eps must lie in (0,1)");
  NeighborhoodSpec s;
  s.kind = Kind::P_tilde_eps;
  s.eps = eps;
  s.n = n;
  return s;
}

}  // namespace conecount
