#pragma once

#include <complex>
#include <utility>
#include <vector>

namespace conecount {

using Intervals = std::vector<std::pair<double, double>>;

// f(e_0 a_y k) = rho(y) phi(k): rho the indicator of intervals in y away from 0,
// phi the indicator of the chordal cap of radius cap_r about alpha_0
// (the whole sphere when cap_r >= 2).
struct SeparableFunction {
  int n = 1;
  Intervals rho;
  double cap_r = 2.0;

  // f_lambda(v) = f(v / lambda), i.e. rho_lambda(y) = rho(lambda y).
  SeparableFunction scaled(double lambda) const;
  // Cone measure m(B) = sigma_n(cap) * rho^(n).
  double measure() const;
};

// int_0^inf rho(y) y^{-(s+1)} dy
std::complex<double> mellin(const Intervals& rho, std::complex<double> s);
double mellin(const Intervals& rho, double s);

// prod_{i<d} (n - s + i)/(s + i); 1 for d = 0.
std::complex<double> p_d(int n, int d, std::complex<double> s);
double p_d(int n, int d, double s);

// Dimension of degree-d spherical harmonics on S^n.
double harmonic_dimension(int n, int d);

// Zonal expansion of the cap indicator: ||phi_d||^2 = N_d a_d^2 with
// a_d = <phi, P_d(cos theta)> in the normalized measure.
struct ZonalExpansion {
  std::vector<double> a;
  std::vector<double> N;
  double norm2 = 0.0;  // ||phi||^2 = sigma_n(cap)

  double component(int d) const { return N[d] * a[d] * a[d]; }
  double partial_sum(int D) const;
};
ZonalExpansion zonal_expansion(int n, double cap_r, int D_max);

struct MValue {
  double value = 0.0;       // truncated sum through D_max
  double tail_bound = 0.0;  // bound on the omitted terms
  int D_max = 0;
};

// M_{f,f'}(s) for real s in (n/2, n).
MValue m_ff(const SeparableFunction& f, const SeparableFunction& g, double s, int D_max = 64);

}  // namespace conecount
