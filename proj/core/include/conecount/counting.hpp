#pragma once

#include "conecount/enumeration.hpp"
#include "conecount/geometry.hpp"

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace conecount {

struct KappaEstimate {
  double kappa = 0.0;     // N(T)/T^n
  double omega = 0.0;     // n kappa
  double varkappa = 0.0;  // c_cap(n) kappa
  double T_fit = 0.0;
  std::uint64_t count = 0;
  // Two-point extrapolation from T_fit/2 and T_fit; diagnostic only.
  double kappa_extrapolated = 0.0;
  std::string source;  // "estimated@T=..." or "supplied"
};

KappaEstimate estimate_kappa(const EllipsoidForm& E, double T_fit, int threads = 1);
KappaEstimate supplied_kappa(int n, double kappa);

struct CountReport {
  std::uint64_t count = 0;
  double main_term = 0.0;
  double discrepancy = 0.0;
  double relative_error = 0.0;
  std::vector<std::pair<std::string, std::string>> meta;

  static CountReport make(std::uint64_t count, double main_term);
};

struct ExponentTable {
  int n = 0;
  int s_n = 0;
  bool cq_positive = false;
  double beta = 1.0;      // 2 s_n / n when c_Q > 0
  double beta_alt = 1.0;  // n/(n+1) when c_Q > 0, reported alongside beta
  double cap_r_exponent = 0.0;  // r^{-(3-beta)n/(2n+3)}
  double cap_T_exponent = 0.0;  // T^{-(2-beta)n/(2n+3)}
  double generic_exponent = 0.0;     // 1 - (2-beta)/(n+4)
  double khintchine_exponent = 0.0;  // (n+3)/(n+4)
  int d_full = 0;                    // 2n+1
  double full_delta_exponent = 0.0;  // -1/(d+2)
  double full_mass_exponent = 0.0;   // 1 - (2-beta)/(d+2)
  int d_parabolic = 0;               // n+1
  double parabolic_mass_exponent = 0.0;  // 1 - (2-beta)/(d+3)
};

// c_Q > 0 is decided by the standard-form rule n > 1, n = 1 mod 8.
ExponentTable predicted_exponents(int n);

// #{primitive (p,q): ||p/q - x||_A < r, 1 <= q < T} with x = alpha tau~^{-1}.
CountReport count_cap(const EllipsoidForm& E, const Eigen::VectorXd& alpha, double r, double T,
                      const KappaEstimate& kappa, int threads = 1);
// Same count with per-layer radius psi(q).
CountReport count_khintchine(const EllipsoidForm& E, const Eigen::VectorXd& alpha, const Psi& psi, double T,
                             const KappaEstimate& kappa, int threads = 1);

// Counts the reduction identity both ways (rational points in an A-cap and
// cone points v tau in a sector) and reports whether they agree point by point.
struct IdentityCheck {
  bool equal = false;
  std::uint64_t lhs = 0;
  std::uint64_t rhs = 0;
};
IdentityCheck cross_check_identity(const EllipsoidForm& E, const Eigen::VectorXd& alpha, double r, double T);

double j_sum(const Psi& psi, int n, double T);
double i_sum(const Psi& psi, int n, double T);

// Batch counting: one enumeration up to max(Ts), every query tested per point.
// radius has one entry (shared) or one per T. Result is [query][T index].
struct CapQuery {
  Eigen::VectorXd alpha;
  std::vector<double> radius;
};
std::vector<std::vector<std::uint64_t>> count_caps_batch(const EllipsoidForm& E, const std::vector<CapQuery>& queries,
                                                         const std::vector<double>& Ts, int threads = 1);
std::vector<std::vector<std::uint64_t>> count_psi_batch(const EllipsoidForm& E, const std::vector<Eigen::VectorXd>& alphas,
                                                        const Psi& psi, const std::vector<double>& Ts, int threads = 1);

}  // namespace conecount
