#pragma once

#include <Eigen/Dense>

#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace conecount {

// v = r (alpha, 1) on the positive cone of Q_n.
struct PolarPoint {
  double r = 0.0;
  Eigen::VectorXd alpha;
};

PolarPoint to_polar(const Eigen::VectorXd& v);
Eigen::VectorXd from_polar(const PolarPoint& p);

// alpha_0 = (-1, 0, ..., 0) in S^n and e_0 = (alpha_0, 1).
Eigen::VectorXd alpha0(int n);
Eigen::VectorXd e0(int n);

double c_cap(int n);
// Normalized measure of the open chordal cap of radius r on S^n.
double cap_measure_exact(int n, double r);
double cap_measure_leading(int n, double r);

enum class MeasureMode { exact, leading };
double sector_measure(int n, double T, double r, MeasureMode mode = MeasureMode::exact);

struct SphericalCap {
  Eigen::VectorXd center;
  double radius = 0.0;

  bool contains(const Eigen::VectorXd& alpha) const;
  // <alpha', center> - (1 - r^2/2); positive strictly inside.
  double margin(const Eigen::VectorXd& alpha) const;
};

struct Sector {
  double T = 0.0;
  SphericalCap cap;

  bool contains(const Eigen::VectorXd& v) const;
};

// Decreasing positive function from a small symbolic family. Each family is
// held constant below its knot so that it is continuous and non-increasing on
// [0, inf). The optional amplitude and dilation give amp * psi(dilation * t).
struct Psi {
  enum class Family { power, logpower, constant, shifted_power };
  Family family = Family::constant;
  double c = 1.0;
  double lambda = 0.0;
  double shift = 0.0;
  double amp = 1.0;
  double dilation = 1.0;

  double operator()(double t) const;
  // Point below which psi is constant (in the undilated variable).
  double knot() const;
  // psi^{+-}_eps(t) = (1 +- eps) psi((1 + eps)^{-+1} t).
  Psi perturbed(double eps, int sign) const;
  std::string describe() const;

  static Psi parse(const std::string& text);
  static Psi power(double c, double lambda);
  static Psi logpower(double lambda, double c = 1.0);
  static Psi constant(double c);
  static Psi shifted_power(double c, double shift, double lambda);
};

// E_{psi,T}: cone points with 0 < v_{n+2} < T and ||e_0 - v/v_{n+2}|| < psi(v_{n+2}).
struct ApproxRegion {
  Psi psi;
  double T = 0.0;

  // 2(v_1 + v_{n+2}) < v_{n+2} psi(v_{n+2})^2
  bool contains(const Eigen::VectorXd& v) const;
  bool contains_norm_form(const Eigen::VectorXd& v) const;
};

// Indicator rho(y) phi(k) at v = e_0 a_y k: y-intervals times a union of caps
// (a cap flagged as complement contributes its complement).
struct GeneralizedSector {
  std::vector<std::pair<double, double>> rho;
  std::vector<SphericalCap> caps;
  std::vector<bool> complement;

  bool bounded() const;
  bool contains(const Eigen::VectorXd& v) const;
};

enum class RegionMode { quadrature, leading };

// int_0^T t^{n-1} psi(t)^n dt
double calJ(const Psi& psi, int n, double T);
// Measure of E_{psi,T} under the cone measure t^{n-1} dt dsigma_n.
double region_measure(const Psi& psi, int n, double T, RegionMode mode = RegionMode::quadrature);

using Region = std::variant<SphericalCap, Sector, ApproxRegion>;

// "cap:<r>@<alpha csv>", "sector:<T>,<r>@<alpha csv>", "region:psi=<family:params>,T=<T>".
Region parse_region(const std::string& text, int n);
Eigen::VectorXd parse_unit_vector(const std::string& csv, int n);

bool contains(const Region& region, const Eigen::VectorXd& v);

}  // namespace conecount
