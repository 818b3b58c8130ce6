#include "conecount/counting.hpp"
#include "conecount/parallel.hpp"

#include <boost/multiprecision/cpp_bin_float.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace conecount {

namespace {

using HiFloat = boost::multiprecision::cpp_bin_float_50;

std::string num(double x) {
  std::ostringstream os;
  os.precision(17);
  os << x;
  return os.str();
}

std::string vec(const Eigen::VectorXd& v) {
  std::ostringstream os;
  os.precision(17);
  for (Eigen::Index i = 0; i < v.size(); ++i) os << (i ? "," : "") << v(i);
  return os.str();
}

// Strict test p . w > q (1 - r^2/2), i.e. ||p/q - x||_A < r when w = A x.
bool in_cap(const PointView& p, const Eigen::VectorXd& w, double q, double r) {
  const int d = p.dim();
  double dot = 0.0, mag = 0.0;
  for (int i = 0; i < d; ++i) {
    dot += p[i] * w(i);
    mag += std::abs(p[i] * w(i));
  }
  const double thr = q * (1.0 - 0.5 * r * r);
  const double diff = dot - thr;
  if (std::abs(diff) > 1e-12 * std::max(1.0, mag + std::abs(q))) return diff > 0;
  HiFloat acc = 0;
  for (int i = 0; i < d; ++i) acc += HiFloat(p.exact(i).convert_to<double>()) * HiFloat(w(i));
  HiFloat rr = HiFloat(r);
  acc -= HiFloat(q) * (HiFloat(1) - rr * rr / 2);
  return acc > 0;
}

std::size_t stripe_count(std::int64_t qmax) { return static_cast<std::size_t>(std::max<std::int64_t>(1, std::min<std::int64_t>(qmax, 64))); }

std::vector<double> sorted_grid(const std::vector<double>& Ts) {
  if (Ts.empty()) throw std::invalid_argument("T grid is empty");
  for (double T : Ts)
    if (!(T > 0)) throw std::invalid_argument("T must be positive");
  return Ts;
}

}  // namespace

CountReport CountReport::make(std::uint64_t count, double main_term) {
  CountReport r;
  r.count = count;
  r.main_term = main_term;
  r.discrepancy = static_cast<double>(count) - main_term;
  r.relative_error = std::abs(r.discrepancy) / std::max(main_term, 1.0);
  return r;
}

KappaEstimate estimate_kappa(const EllipsoidForm& E, double T_fit, int threads) {
  const std::uint64_t c = count_all(E, T_fit, threads);
  if (c < 1000) throw std::runtime_error("T_fit too small: fewer than 1000 points for the kappa estimate");
  const std::uint64_t half = count_all(E, T_fit / 2, threads);
  KappaEstimate k;
  k.T_fit = T_fit;
  k.count = c;
  k.kappa = static_cast<double>(c) / std::pow(T_fit, E.n);
  const double k_half = static_cast<double>(half) / std::pow(T_fit / 2, E.n);
  // Assumes an error of relative order 1/T.
  k.kappa_extrapolated = 2.0 * k.kappa - k_half;
  k.omega = E.n * k.kappa;
  k.varkappa = c_cap(E.n) * k.kappa;
  k.source = "estimated@T=" + num(T_fit);
  return k;
}

KappaEstimate supplied_kappa(int n, double kappa) {
  if (!(kappa > 0)) throw std::invalid_argument("kappa must be positive");
  KappaEstimate k;
  k.kappa = kappa;
  k.omega = n * kappa;
  k.varkappa = c_cap(n) * kappa;
  k.kappa_extrapolated = kappa;
  k.source = "supplied";
  return k;
}

ExponentTable predicted_exponents(int n) {
  if (n < 1) throw std::invalid_argument("n must be positive");
  ExponentTable t;
  t.n = n;
  t.s_n = (n + 2) / 2;
  t.cq_positive = n > 1 && n % 8 == 1;
  t.beta = t.cq_positive ? 2.0 * t.s_n / n : 1.0;
  t.beta_alt = t.cq_positive ? static_cast<double>(n) / (n + 1) : 1.0;
  const double b = t.beta;
  t.cap_r_exponent = (3.0 - b) * n / (2.0 * n + 3.0);
  t.cap_T_exponent = (2.0 - b) * n / (2.0 * n + 3.0);
  t.generic_exponent = 1.0 - (2.0 - b) / (n + 4.0);
  t.khintchine_exponent = (n + 3.0) / (n + 4.0);
  t.d_full = 2 * n + 1;
  t.full_delta_exponent = -1.0 / (t.d_full + 2.0);
  t.full_mass_exponent = 1.0 - (2.0 - b) / (t.d_full + 2.0);
  t.d_parabolic = n + 1;
  t.parabolic_mass_exponent = 1.0 - (2.0 - b) / (t.d_parabolic + 3.0);
  return t;
}

CountReport count_cap(const EllipsoidForm& E, const Eigen::VectorXd& alpha, double r, double T,
                      const KappaEstimate& kappa, int threads) {
  if (!(r > 0)) throw std::invalid_argument("r must be positive");
  if (static_cast<int>(alpha.size()) != E.n + 1) throw std::invalid_argument("alpha has the wrong dimension");
  const std::int64_t qmax = last_layer_below(T);
  std::uint64_t count = 0;
  if (r >= 2.0) {
    count = count_all(E, T, threads);
  } else if (qmax >= 1) {
    LayerEnumerator en(E);
    const Eigen::VectorXd x = E.from_sphere(alpha);
    const Eigen::VectorXd w = E.A_double * x;
    const std::size_t stripes = stripe_count(qmax);
    auto parts = parallel_map<std::uint64_t>(stripes, threads, [&](std::size_t s) {
      std::uint64_t c = 0;
      for (std::int64_t q = 1 + static_cast<std::int64_t>(s); q <= qmax; q += static_cast<std::int64_t>(stripes))
        en.layer(q, en.cap_box(q, x, r), [&](const PointView& p) {
          if (in_cap(p, w, static_cast<double>(q), r)) ++c;
        });
      return c;
    });
    count = std::accumulate(parts.begin(), parts.end(), std::uint64_t(0));
  }
  CountReport rep = CountReport::make(count, kappa.kappa * std::pow(T, E.n) * cap_measure_exact(E.n, r));
  rep.meta = {{"alpha", vec(alpha)}, {"r", num(r)}, {"T", num(T)}, {"form", E.space.fingerprint()}, {"kappa_source", kappa.source}};
  return rep;
}

CountReport count_khintchine(const EllipsoidForm& E, const Eigen::VectorXd& alpha, const Psi& psi, double T,
                             const KappaEstimate& kappa, int threads) {
  if (static_cast<int>(alpha.size()) != E.n + 1) throw std::invalid_argument("alpha has the wrong dimension");
  const std::int64_t qmax = last_layer_below(T);
  std::uint64_t count = 0;
  if (qmax >= 1) {
    LayerEnumerator en(E);
    const Eigen::VectorXd x = E.from_sphere(alpha);
    const Eigen::VectorXd w = E.A_double * x;
    const std::size_t stripes = stripe_count(qmax);
    auto parts = parallel_map<std::uint64_t>(stripes, threads, [&](std::size_t s) {
      std::uint64_t c = 0;
      for (std::int64_t q = 1 + static_cast<std::int64_t>(s); q <= qmax; q += static_cast<std::int64_t>(stripes)) {
        const double r = psi(static_cast<double>(q));
        if (r >= 2.0) {
          c += en.layer_count(q);
          continue;
        }
        en.layer(q, en.cap_box(q, x, r), [&](const PointView& p) {
          if (in_cap(p, w, static_cast<double>(q), r)) ++c;
        });
      }
      return c;
    });
    count = std::accumulate(parts.begin(), parts.end(), std::uint64_t(0));
  }
  CountReport rep = CountReport::make(count, E.n * kappa.varkappa * j_sum(psi, E.n, T));
  rep.meta = {{"alpha", vec(alpha)}, {"psi", psi.describe()}, {"T", num(T)}, {"form", E.space.fingerprint()}, {"kappa_source", kappa.source}};
  return rep;
}

IdentityCheck cross_check_identity(const EllipsoidForm& E, const Eigen::VectorXd& alpha, double r, double T) {
  IdentityCheck out;
  const std::int64_t qmax = last_layer_below(T);
  const Eigen::VectorXd x = E.from_sphere(alpha);
  const Eigen::VectorXd w = E.A_double * x;
  const Sector sector{T, SphericalCap{alpha, r}};
  const Eigen::MatrixXd& tau = E.space.tau;
  const int m = E.n + 2;
  bool agree = true;
  LayerEnumerator en(E);
  Eigen::VectorXd v(m);
  for (std::int64_t q = 1; q <= qmax; ++q) {
    en.layer(q, [&](const PointView& p) {
      const bool lhs = in_cap(p, w, static_cast<double>(q), r);
      for (int i = 0; i + 1 < m; ++i) v(i) = p[i];
      v(m - 1) = static_cast<double>(q);
      const bool rhs = sector.contains((v.transpose() * tau).transpose());
      out.lhs += lhs;
      out.rhs += rhs;
      agree = agree && lhs == rhs;
    });
  }
  out.equal = agree && out.lhs == out.rhs;
  return out;
}

double j_sum(const Psi& psi, int n, double T) {
  double s = 0.0;
  for (std::int64_t q = 1; static_cast<double>(q) < T; ++q) s += std::pow(static_cast<double>(q), n - 1) * std::pow(psi(static_cast<double>(q)), n);
  return s;
}

double i_sum(const Psi& psi, int n, double T) {
  double s = 0.0;
  for (std::int64_t q = 1; static_cast<double>(q) < T; ++q) s += std::pow(static_cast<double>(q), n - 1) * std::pow(psi(static_cast<double>(q)), n + 2);
  return s;
}

namespace {

template <class RadiusFn>
std::vector<std::vector<std::uint64_t>> batch_impl(const EllipsoidForm& E, const std::vector<Eigen::VectorXd>& alphas,
                                                   const std::vector<double>& Ts, int threads, RadiusFn radius) {
  const std::vector<double> grid = sorted_grid(Ts);
  const double Tmax = *std::max_element(grid.begin(), grid.end());
  const std::int64_t qmax = last_layer_below(Tmax);
  const std::size_t nq = alphas.size(), nt = grid.size();
  std::vector<Eigen::VectorXd> ws;
  for (const auto& a : alphas) {
    if (static_cast<int>(a.size()) != E.n + 1) throw std::invalid_argument("alpha has the wrong dimension");
    ws.push_back(E.A_double * E.from_sphere(a));
  }
  LayerEnumerator en(E);
  const std::size_t stripes = stripe_count(qmax);
  using Table = std::vector<std::uint64_t>;
  auto parts = parallel_map<Table>(stripes, threads, [&](std::size_t s) {
    Table t(nq * nt, 0);
    std::vector<double> rq(nq * nt);
    std::vector<double> rmax(nq);
    for (std::int64_t q = 1 + static_cast<std::int64_t>(s); q <= qmax; q += static_cast<std::int64_t>(stripes)) {
      const double qd = static_cast<double>(q);
      for (std::size_t a = 0; a < nq; ++a) {
        rmax[a] = 0.0;
        for (std::size_t j = 0; j < nt; ++j) {
          const double r = qd < grid[j] ? radius(a, j, qd) : -1.0;
          rq[a * nt + j] = r;
          rmax[a] = std::max(rmax[a], r);
        }
      }
      en.layer(q, [&](const PointView& p) {
        for (std::size_t a = 0; a < nq; ++a) {
          if (rmax[a] <= 0.0) continue;
          if (rmax[a] < 2.0 && !in_cap(p, ws[a], qd, rmax[a])) continue;
          for (std::size_t j = 0; j < nt; ++j) {
            const double r = rq[a * nt + j];
            if (r <= 0.0) continue;
            if (r >= 2.0 || r == rmax[a] || in_cap(p, ws[a], qd, r)) ++t[a * nt + j];
          }
        }
      }, false);
    }
    return t;
  });
  std::vector<std::vector<std::uint64_t>> out(nq, std::vector<std::uint64_t>(nt, 0));
  for (const auto& t : parts)
    for (std::size_t a = 0; a < nq; ++a)
      for (std::size_t j = 0; j < nt; ++j) out[a][j] += t[a * nt + j];
  return out;
}

}  // namespace

std::vector<std::vector<std::uint64_t>> count_caps_batch(const EllipsoidForm& E, const std::vector<CapQuery>& queries,
                                                         const std::vector<double>& Ts, int threads) {
  std::vector<Eigen::VectorXd> alphas;
  for (const auto& q : queries) {
    if (q.radius.size() != 1 && q.radius.size() != Ts.size()) throw std::invalid_argument("radius list must have 1 or |T| entries");
    for (double r : q.radius)
      if (!(r > 0)) throw std::invalid_argument("r must be positive");
    alphas.push_back(q.alpha);
  }
  return batch_impl(E, alphas, Ts, threads, [&](std::size_t a, std::size_t j, double) {
    const auto& rs = queries[a].radius;
    return rs.size() == 1 ? rs[0] : rs[j];
  });
}

std::vector<std::vector<std::uint64_t>> count_psi_batch(const EllipsoidForm& E, const std::vector<Eigen::VectorXd>& alphas,
                                                        const Psi& psi, const std::vector<double>& Ts, int threads) {
  return batch_impl(E, alphas, Ts, threads, [&](std::size_t, std::size_t, double q) { return psi(q); });
}

}  // namespace conecount
