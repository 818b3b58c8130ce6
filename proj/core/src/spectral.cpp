#include "conecount/spectral.hpp"
#include "conecount/geometry.hpp"

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/special_functions/binomial.hpp>
#include <boost/math/special_functions/gegenbauer.hpp>

#include <cmath>
#include <stdexcept>

namespace conecount {

namespace {

using GL = boost::math::quadrature::gauss<double, 512>;

void check_rho(const Intervals& rho) {
  if (rho.empty()) throw std::invalid_argument("rho needs at least one interval");
  for (const auto& [a, b] : rho)
    if (!(a > 0) || !(b > a)) throw std::invalid_argument("rho intervals must satisfy 0 < a < b");
}

// Normalized zonal polynomial with P_d(1) = 1.
double zonal(int n, int d, double theta) {
  if (n == 1) return std::cos(d * theta);
  const double lam = 0.5 * (n - 1);
  const unsigned dd = static_cast<unsigned>(d);
  return boost::math::gegenbauer(dd, lam, std::cos(theta)) / boost::math::gegenbauer(dd, lam, 1.0);
}

}  // namespace

SeparableFunction SeparableFunction::scaled(double lambda) const {
  if (!(lambda > 0)) throw std::invalid_argument("lambda must be positive");
  SeparableFunction f = *this;
  for (auto& [a, b] : f.rho) {
    a /= lambda;
    b /= lambda;
  }
  return f;
}

double SeparableFunction::measure() const { return cap_measure_exact(n, cap_r) * mellin(rho, static_cast<double>(n)); }

std::complex<double> mellin(const Intervals& rho, std::complex<double> s) {
  check_rho(rho);
  if (std::abs(s) == 0.0) throw std::invalid_argument("Mellin transform undefined at s = 0");
  std::complex<double> acc = 0.0;
  for (const auto& [a, b] : rho) acc += std::pow(a, -s) - std::pow(b, -s);
  return acc / s;
}

double mellin(const Intervals& rho, double s) { return mellin(rho, std::complex<double>(s, 0.0)).real(); }

std::complex<double> p_d(int n, int d, std::complex<double> s) {
  if (d < 0) throw std::invalid_argument("d must be nonnegative");
  std::complex<double> acc = 1.0;
  for (int i = 0; i < d; ++i) {
    if (std::abs(s + static_cast<double>(i)) == 0.0) throw std::invalid_argument("P_d has a pole at s = -i");
    acc *= (static_cast<double>(n + i) - s) / (s + static_cast<double>(i));
  }
  return acc;
}

double p_d(int n, int d, double s) { return p_d(n, d, std::complex<double>(s, 0.0)).real(); }

double harmonic_dimension(int n, int d) {
  if (d == 0) return 1.0;
  if (n == 1) return 2.0;
  return (2.0 * d + n - 1) / (d + n - 1) * boost::math::binomial_coefficient<double>(d + n - 1, d);
}

double ZonalExpansion::partial_sum(int D) const {
  double s = 0.0;
  for (int d = 0; d <= D && d < static_cast<int>(a.size()); ++d) s += component(d);
  return s;
}

ZonalExpansion zonal_expansion(int n, double cap_r, int D_max) {
  if (n < 1) throw std::invalid_argument("n must be positive");
  if (D_max < 0) throw std::invalid_argument("D_max must be nonnegative");
  if (!(cap_r > 0)) throw std::invalid_argument("cap radius must be positive");
  ZonalExpansion z;
  z.norm2 = cap_measure_exact(n, cap_r);
  const double theta0 = cap_r >= 2.0 ? M_PI : 2.0 * std::asin(0.5 * cap_r);
  const double total = GL::integrate([&](double t) { return std::pow(std::sin(t), n - 1); }, 0.0, M_PI);
  for (int d = 0; d <= D_max; ++d) {
    z.N.push_back(harmonic_dimension(n, d));
    if (cap_r >= 2.0) {
      z.a.push_back(d == 0 ? 1.0 : 0.0);
      continue;
    }
    const double num = GL::integrate([&](double t) { return zonal(n, d, t) * std::pow(std::sin(t), n - 1); }, 0.0, theta0);
    z.a.push_back(num / total);
  }
  return z;
}

MValue m_ff(const SeparableFunction& f, const SeparableFunction& g, double s, int D_max) {
  if (f.n != g.n) throw std::invalid_argument("functions live on different cones");
  const int n = f.n;
  if (!(s > 0.5 * n && s < n)) throw std::invalid_argument("s must lie in (n/2, n)");
  const ZonalExpansion zf = zonal_expansion(n, f.cap_r, D_max);
  const ZonalExpansion zg = f.cap_r == g.cap_r ? zf : zonal_expansion(n, g.cap_r, D_max);
  double sum = 0.0;
  for (int d = 0; d <= D_max; ++d) sum += p_d(n, d, s) * zf.N[d] * zf.a[d] * zg.a[d];
  // P_d(s) is decreasing in d for real s in (n/2, n); Cauchy-Schwarz on the rest.
  const double rest_f = std::max(0.0, zf.norm2 - zf.partial_sum(D_max));
  const double rest_g = std::max(0.0, zg.norm2 - zg.partial_sum(D_max));
  const double radial = mellin(f.rho, s) * mellin(g.rho, s);
  MValue out;
  out.value = radial * sum;
  out.tail_bound = std::abs(radial) * p_d(n, D_max + 1, s) * std::sqrt(rest_f * rest_g);
  out.D_max = D_max;
  return out;
}

}  // namespace conecount
