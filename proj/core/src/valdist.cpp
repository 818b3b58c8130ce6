#include "conecount/valdist.hpp"
#include "conecount/parallel.hpp"

#include <boost/math/special_functions/gamma.hpp>

#include <cmath>
#include <functional>
#include <sstream>
#include <stdexcept>

namespace conecount {

namespace {

constexpr std::size_t kBlock = 1 << 15;

Eigen::MatrixXd projection_L0(int n, int m) {
  Eigen::MatrixXd L0 = Eigen::MatrixXd::Zero(n + 2, m);
  for (int i = 0; i < m; ++i) L0(i, i) = 1.0;
  return L0;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, sep)) out.push_back(cur);
  return out;
}

double num(const std::string& s) { return static_cast<double>(parse_rational(s)); }

Eigen::MatrixXd inverse_of(const Eigen::MatrixXd& g) { return group_inverse(g); }

template <class Sampler>
MonteCarloValue run_blocks(std::size_t samples, std::uint64_t seed, int threads, Sampler draw) {
  if (samples == 0) throw std::invalid_argument("sample count must be positive");
  const std::size_t blocks = (samples + kBlock - 1) / kBlock;
  struct Acc {
    double s = 0.0, s2 = 0.0;
  };
  auto parts = parallel_map<Acc>(blocks, threads, [&](std::size_t b) {
    Rng rng(derive_seed(seed, b));
    const std::size_t count = std::min(kBlock, samples - b * kBlock);
    Acc a;
    for (std::size_t i = 0; i < count; ++i) {
      const double x = draw(rng);
      a.s += x;
      a.s2 += x * x;
    }
    return a;
  });
  double s = 0.0, s2 = 0.0;
  for (const auto& a : parts) {
    s += a.s;
    s2 += a.s2;
  }
  const double N = static_cast<double>(samples);
  MonteCarloValue out;
  out.value = s / N;
  out.stderr_ = std::sqrt(std::max(0.0, s2 / N - out.value * out.value) / N);
  out.samples = samples;
  return out;
}

// Uniform point of the L^d unit sphere in R^k under the cone measure.
Eigen::VectorXd sample_ld_sphere(int k, double d, Rng& rng) {
  Eigen::VectorXd x(k);
  double nd = 0.0;
  do {
    nd = 0.0;
    for (int i = 0; i < k; ++i) {
      const double g = boost::math::gamma_p_inv(1.0 / d, std::max(rng.uniform(), 1e-300));
      const double mag = std::pow(g, 1.0 / d);
      x(i) = rng.uniform() < 0.5 ? -mag : mag;
      nd += g;
    }
  } while (nd <= 0.0);
  return x / std::pow(nd, 1.0 / d);
}

// Total cone measure of the L^d unit sphere in R^k: k vol(B_d^k).
double ld_sphere_mass(int k, double d) {
  return k * std::pow(2.0 * std::tgamma(1.0 + 1.0 / d), k) / std::tgamma(1.0 + k / d);
}

}  // namespace

LinearMapOnCone LinearMapOnCone::classified(const QuadraticSpace& Q, int m, const Eigen::MatrixXd& g, const Eigen::MatrixXd& h) {
  const int n = Q.n;
  if (m < 1 || m >= n) throw std::invalid_argument("need 1 <= m < n");
  if (g.rows() != n + 2 || g.cols() != n + 2) throw std::invalid_argument("g has the wrong size");
  if (h.rows() != m || h.cols() != m) throw std::invalid_argument("h has the wrong size");
  if (std::abs(h.determinant()) < 1e-12) throw std::invalid_argument("h must be invertible");
  LinearMapOnCone L;
  L.n = n;
  L.m = m;
  L.g = g;
  L.h = h;
  L.matrix = g * Q.tau * projection_L0(n, m) * h;
  return L;
}

LinearMapOnCone LinearMapOnCone::from_matrix(int n, const Eigen::MatrixXd& M) {
  if (M.rows() != n + 2) throw std::invalid_argument("matrix must have n+2 rows");
  LinearMapOnCone L;
  L.n = n;
  L.m = static_cast<int>(M.cols());
  L.matrix = M;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(M);
  if (lu.rank() != L.m) throw std::invalid_argument("linear map must have rank m");
  return L;
}

double f_pq(const Eigen::VectorXd& w, int p, double d) {
  double s = 0.0;
  for (Eigen::Index j = 0; j < w.size(); ++j) s += (j < p ? 1.0 : -1.0) * std::pow(std::abs(w(j)), d);
  return s;
}

double HomogeneousFormOnCone::operator()(const Eigen::VectorXd& v) const {
  return f_pq((v.transpose() * matrix).transpose(), p, d);
}

HomogeneousFormOnCone HomogeneousFormOnCone::make(const QuadraticSpace& Q, double d, int p, int q, const Eigen::MatrixXd& g,
                                                  const Eigen::MatrixXd& h) {
  HomogeneousFormOnCone F;
  F.n = Q.n;
  F.m = p + q;
  if (!(p >= q && q >= 1)) throw std::invalid_argument("need p >= q >= 1");
  if (F.m >= F.n) throw std::invalid_argument("need m = p + q < n");
  if (!(d > 1.0 && d < F.m)) throw std::invalid_argument("need 1 < d < m");
  if (g.rows() != F.n + 2 || h.rows() != F.m || h.cols() != F.m) throw std::invalid_argument("g or h has the wrong size");
  if (std::abs(h.determinant()) < 1e-12) throw std::invalid_argument("h must be invertible");
  F.d = d;
  F.p = p;
  F.q = q;
  F.g = g;
  F.h = h;
  F.matrix = g * Q.tau * projection_L0(F.n, F.m) * h;
  return F;
}

bool BoxUnion::contains(const Eigen::VectorXd& w) const {
  for (const auto& [lo, hi] : boxes) {
    bool in = true;
    for (Eigen::Index i = 0; i < w.size() && in; ++i) in = w(i) >= lo(i) && w(i) <= hi(i);
    if (in) return true;
  }
  return false;
}

double BoxUnion::volume() const {
  double v = 0.0;
  for (const auto& [lo, hi] : boxes) v += (hi - lo).cwiseMax(0.0).prod();
  return v;
}

BoxUnion parse_box(const std::string& text, int m) {
  if (text.rfind("box:", 0) != 0) throw std::invalid_argument("target must start with 'box:'");
  BoxUnion out;
  for (const auto& part : split(text.substr(4), '|')) {
    auto pairs = split(part, ';');
    if (static_cast<int>(pairs.size()) != m) throw std::invalid_argument("box needs one 'a,b' pair per coordinate");
    Eigen::VectorXd lo(m), hi(m);
    for (int i = 0; i < m; ++i) {
      auto ab = split(pairs[i], ',');
      if (ab.size() != 2) throw std::invalid_argument("box pair must be 'a,b'");
      lo(i) = num(ab[0]);
      hi(i) = num(ab[1]);
      if (!(hi(i) >= lo(i))) throw std::invalid_argument("box bounds out of order");
    }
    out.boxes.emplace_back(lo, hi);
  }
  return out;
}

Interval parse_interval(const std::string& text) {
  if (text.rfind("interval:", 0) != 0) throw std::invalid_argument("target must start with 'interval:'");
  auto ab = split(text.substr(9), ',');
  if (ab.size() != 2) throw std::invalid_argument("interval:a,b");
  Interval I{num(ab[0]), num(ab[1])};
  if (!(I.hi >= I.lo)) throw std::invalid_argument("interval bounds out of order");
  return I;
}

bool kernel_indefinite(const QuadraticSpace& Q, const Eigen::MatrixXd& M) {
  // Left null space of M: v M = 0 <=> M^t v^t = 0.
  Eigen::FullPivLU<Eigen::MatrixXd> lu(M.transpose());
  const Eigen::MatrixXd K = lu.kernel();  // columns span the kernel
  if (K.cols() == 0) return false;
  const Eigen::MatrixXd G = K.transpose() * Q.J_double() * K;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(G);
  const auto& ev = es.eigenvalues();
  const double scale = std::max(1.0, ev.cwiseAbs().maxCoeff());
  return ev.minCoeff() < -1e-12 * scale && ev.maxCoeff() > 1e-12 * scale;
}

double c_nm(int n, int m) {
  if (m < 1 || m >= n) throw std::invalid_argument("need 1 <= m < n");
  return (n - m + 1) * std::exp(std::lgamma(0.5 * (n + 3)) - std::lgamma(0.5 * (n - m + 3))) /
         ((n + 1) * std::pow(M_PI, 0.5 * m));
}

double v_L_identity(int n, int m) {
  if (m < 1 || m >= n) throw std::invalid_argument("need 1 <= m < n");
  return std::pow(2.0, -0.5 * (n - m)) / (n - m);
}

MonteCarloValue v_L(const LinearMapOnCone& L, std::size_t samples, std::uint64_t seed, int threads) {
  if (!L.g) throw std::invalid_argument("V_L needs a classified map g tau L_0 h");
  const int n = L.n, m = L.m;
  const Eigen::MatrixXd gi = inverse_of(*L.g);
  MonteCarloValue r = run_blocks(samples, seed, threads, [&](Rng& rng) {
    const Eigen::VectorXd om = sample_sphere(n - m, rng);
    Eigen::VectorXd v = Eigen::VectorXd::Zero(n + 2);
    v.segment(m, n - m + 1) = om;
    v(n + 1) = 1.0;
    return std::pow((v.transpose() * gi).norm(), -(n - m)) / (n - m);
  });
  return r;
}

MonteCarloValue v_F(const HomogeneousFormOnCone& F, std::size_t samples, std::uint64_t seed, int threads) {
  const int n = F.n, m = F.m, p = F.p, q = F.q;
  const double d = F.d;
  const Eigen::MatrixXd gi = inverse_of(F.g);
  const Eigen::MatrixXd hi = F.h.inverse();
  const double mass = ld_sphere_mass(p, d) * ld_sphere_mass(q, d);
  return run_blocks(samples, seed, threads, [&](Rng& rng) {
    Eigen::VectorXd wt(m);
    wt.head(p) = sample_ld_sphere(p, d, rng);
    wt.tail(q) = sample_ld_sphere(q, d, rng);
    const Eigen::VectorXd wh = (wt.transpose() * hi).transpose();
    const double whn = wh.norm();
    // t has density (m-d) t^{m-d-1} on [0,1].
    const double t = std::pow(rng.uniform(), 1.0 / (m - d));
    const double s = std::sqrt(std::max(0.0, 1.0 - t * t));
    const Eigen::VectorXd om = sample_sphere(n - m, rng);
    Eigen::VectorXd v(n + 2);
    v.head(m) = (t / whn) * wh;
    v.segment(m, n - m + 1) = s * om;
    v(n + 1) = 1.0;
    const double rmax = 1.0 / (v.transpose() * gi).norm();
    return mass * std::pow(whn, d - m) * std::pow(s, n - m - 1) * std::pow(rmax, n - d) / ((n - d) * (m - d));
  });
}

double predict_linear_measure(const LinearMapOnCone& L, double omega_volume, double T, double VL) {
  if (!L.h) throw std::invalid_argument("prediction needs a classified map");
  return c_nm(L.n, L.m) * omega_volume * std::pow(T, L.n - L.m) * VL / std::abs(L.h->determinant());
}

double predict_homog_measure(const HomogeneousFormOnCone& F, double interval_length, double T, double VF) {
  return c_nm(F.n, F.m) * interval_length * std::pow(T, F.n - F.d) * VF / (std::abs(F.h.determinant()) * F.d);
}

double homog_error_exponent(double d, int m) { return std::min(d / 4.0, (m - d) / 2.0); }

MonteCarloValue mc_linear_region_measure(const LinearMapOnCone& L, const BoxUnion& omega, double T, std::size_t samples,
                                         std::uint64_t seed, int threads) {
  const int n = L.n;
  const double R = T / std::sqrt(2.0);
  const double ball = std::pow(R, n) / n;
  MonteCarloValue r = run_blocks(samples, seed, threads, [&](Rng& rng) {
    const double t = R * std::pow(rng.uniform(), 1.0 / n);
    const Eigen::VectorXd a = sample_sphere(n, rng);
    Eigen::VectorXd v(n + 2);
    v.head(n + 1) = t * a;
    v(n + 1) = t;
    return omega.contains(L.apply(v)) ? 1.0 : 0.0;
  });
  r.value *= ball;
  r.stderr_ *= ball;
  return r;
}

namespace {

std::uint64_t count_filtered(const QuadraticSpace& Q, double T, int threads, const std::function<bool(const Eigen::VectorXd&)>& keep) {
  const auto pts = enumerate_by_norm(Q, T, threads);
  std::uint64_t c = 0;
  Eigen::VectorXd v(Q.dim());
  for (const auto& p : pts) {
    for (int i = 0; i < Q.dim(); ++i) v(i) = p.v[i].convert_to<double>();
    if (keep(v)) ++c;
  }
  return c;
}

}  // namespace

CountReport count_linear(const QuadraticSpace& Q, const LinearMapOnCone& L, const BoxUnion& omega, double T,
                         double omega_hat, double VL, int threads) {
  const std::uint64_t c = count_filtered(Q, T, threads, [&](const Eigen::VectorXd& v) { return omega.contains(L.apply(v)); });
  const double main = L.h ? omega_hat * predict_linear_measure(L, omega.volume(), T, VL) : 0.0;
  CountReport r = CountReport::make(c, main);
  r.meta = {{"kind", "linear"}, {"T", std::to_string(T)}, {"form", Q.fingerprint()}};
  return r;
}

CountReport count_homog(const QuadraticSpace& Q, const HomogeneousFormOnCone& F, const Interval& I, double T,
                        double omega_hat, double VF, int threads) {
  const std::uint64_t c = count_filtered(Q, T, threads, [&](const Eigen::VectorXd& v) { return I.contains(F(v)); });
  CountReport r = CountReport::make(c, omega_hat * predict_homog_measure(F, I.length(), T, VF));
  r.meta = {{"kind", "homog"}, {"T", std::to_string(T)}, {"form", Q.fingerprint()}};
  return r;
}

Eigen::MatrixXd random_h(int m, Rng& rng) {
  Eigen::MatrixXd h(m, m);
  do {
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) h(i, j) = rng.uniform(-1.0, 1.0);
  } while (std::abs(h.determinant()) < 0.1);
  return h;
}

}  // namespace conecount
