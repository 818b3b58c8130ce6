#include "conecount/geometry.hpp"
#include "conecount/rational.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>

namespace conecount {

namespace {

using HiFloat = boost::multiprecision::cpp_bin_float_50;

constexpr double kGuard = 1e-12;

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, sep)) out.push_back(cur);
  return out;
}

std::map<std::string, std::string> parse_params(const std::string& s) {
  std::map<std::string, std::string> out;
  for (const auto& kv : split(s, ',')) {
    if (kv.empty()) continue;
    auto eq = kv.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("expected key=value in '" + s + "'");
    out[kv.substr(0, eq)] = kv.substr(eq + 1);
  }
  return out;
}

double param(const std::map<std::string, std::string>& p, const std::string& key, double fallback) {
  auto it = p.find(key);
  if (it == p.end()) return fallback;
  return static_cast<double>(parse_rational(it->second));
}

}  // namespace

PolarPoint to_polar(const Eigen::VectorXd& v) {
  const Eigen::Index m = v.size();
  if (m < 3) throw std::invalid_argument("cone vector too short");
  const double last = v(m - 1);
  if (!(last > 0)) throw std::invalid_argument("last coordinate must be positive");
  const double q = v.head(m - 1).squaredNorm() - last * last;
  if (std::abs(q) > 1e-9 * v.squaredNorm()) throw std::invalid_argument("vector is not on the light cone");
  PolarPoint p;
  p.r = last;
  p.alpha = v.head(m - 1) / last;
  return p;
}

Eigen::VectorXd from_polar(const PolarPoint& p) {
  Eigen::VectorXd v(p.alpha.size() + 1);
  v.head(p.alpha.size()) = p.r * p.alpha;
  v(p.alpha.size()) = p.r;
  return v;
}

Eigen::VectorXd alpha0(int n) {
  Eigen::VectorXd a = Eigen::VectorXd::Zero(n + 1);
  a(0) = -1.0;
  return a;
}

Eigen::VectorXd e0(int n) {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(n + 2);
  v(0) = -1.0;
  v(n + 1) = 1.0;
  return v;
}

double c_cap(int n) {
  if (n < 1) throw std::invalid_argument("n must be positive");
  const double x = 0.5 * (n + 3);
  return std::exp(std::lgamma(x) - std::lgamma(0.5 * (n + 2))) / (std::sqrt(M_PI) * (n + 1));
}

double cap_measure_exact(int n, double r) {
  if (!(r > 0)) throw std::invalid_argument("cap radius must be positive");
  if (n < 1) throw std::invalid_argument("n must be positive");
  if (r >= 2.0) return 1.0;
  // sin^2 of the colatitude, computed without cancellation.
  const double s2 = std::min(1.0, r * r * (1.0 - 0.25 * r * r));
  const double half = 0.5 * boost::math::ibeta(0.5 * n, 0.5, s2);
  return r * r <= 2.0 ? half : 1.0 - half;
}

double cap_measure_leading(int n, double r) {
  if (!(r > 0)) throw std::invalid_argument("cap radius must be positive");
  return c_cap(n) * std::pow(r, n);
}

double sector_measure(int n, double T, double r, MeasureMode mode) {
  if (!(T > 0)) throw std::invalid_argument("T must be positive");
  const double cap = mode == MeasureMode::exact ? cap_measure_exact(n, r) : cap_measure_leading(n, r);
  return std::pow(T, n) / n * cap;
}

double SphericalCap::margin(const Eigen::VectorXd& alpha) const {
  const double thr = 1.0 - 0.5 * radius * radius;
  double m = alpha.dot(center) - thr;
  if (std::abs(m) < kGuard) {
    HiFloat acc = 0;
    for (Eigen::Index i = 0; i < alpha.size(); ++i) acc += HiFloat(alpha(i)) * HiFloat(center(i));
    HiFloat rr = HiFloat(radius);
    acc -= HiFloat(1) - rr * rr / 2;
    m = static_cast<double>(acc);
    if (m == 0.0) m = acc > 0 ? std::numeric_limits<double>::denorm_min() : (acc < 0 ? -std::numeric_limits<double>::denorm_min() : 0.0);
  }
  return m;
}

bool SphericalCap::contains(const Eigen::VectorXd& alpha) const { return margin(alpha) > 0; }

bool Sector::contains(const Eigen::VectorXd& v) const {
  const Eigen::Index m = v.size();
  const double last = v(m - 1);
  if (!(last > 0) || !(last < T)) return false;
  return cap.contains(v.head(m - 1) / last);
}

double Psi::knot() const {
  switch (family) {
    case Family::power:
      return lambda > 0 ? 1.0 : 0.0;
    case Family::logpower:
      return std::exp(lambda);
    default:
      return 0.0;
  }
}

double Psi::operator()(double t) const {
  double s = std::max(0.0, dilation * t);
  double base = 0.0;
  switch (family) {
    case Family::constant:
      base = c;
      break;
    case Family::power:
      base = lambda == 0.0 || s <= 1.0 ? c : c * std::pow(s, -lambda);
      break;
    case Family::logpower: {
      double x = std::max(s, knot());
      base = c * std::pow(std::log(x), lambda) / x;
      break;
    }
    case Family::shifted_power:
      base = c * std::pow(s + shift, -lambda);
      break;
  }
  return amp * base;
}

Psi Psi::perturbed(double eps, int sign) const {
  Psi p = *this;
  if (sign >= 0) {
    p.amp *= 1.0 + eps;
    p.dilation /= 1.0 + eps;
  } else {
    p.amp *= 1.0 - eps;
    p.dilation *= 1.0 + eps;
  }
  return p;
}

std::string Psi::describe() const {
  std::ostringstream os;
  os.precision(17);
  switch (family) {
    case Family::constant:
      os << "const:c=" << c;
      break;
    case Family::power:
      os << "pow:c=" << c << ",lambda=" << lambda;
      break;
    case Family::logpower:
      os << "logpow:c=" << c << ",lambda=" << lambda;
      break;
    case Family::shifted_power:
      os << "spow:c=" << c << ",shift=" << shift << ",lambda=" << lambda;
      break;
  }
  if (amp != 1.0) os << ",amp=" << amp;
  if (dilation != 1.0) os << ",dilation=" << dilation;
  return os.str();
}

Psi Psi::power(double c, double lambda) {
  if (!(c > 0)) throw std::invalid_argument("psi: c must be positive");
  if (lambda < 0) throw std::invalid_argument("psi: lambda must be nonnegative (psi must not increase)");
  Psi p;
  p.family = Family::power;
  p.c = c;
  p.lambda = lambda;
  return p;
}

Psi Psi::logpower(double lambda, double c) {
  if (!(c > 0)) throw std::invalid_argument("psi: c must be positive");
  if (lambda < 0) throw std::invalid_argument("psi: lambda must be nonnegative");
  Psi p;
  p.family = Family::logpower;
  p.c = c;
  p.lambda = lambda;
  return p;
}

Psi Psi::constant(double c) {
  if (!(c > 0)) throw std::invalid_argument("psi: c must be positive");
  Psi p;
  p.family = Family::constant;
  p.c = c;
  return p;
}

Psi Psi::shifted_power(double c, double shift, double lambda) {
  if (!(c > 0)) throw std::invalid_argument("psi: c must be positive");
  if (!(shift > 0)) throw std::invalid_argument("psi: shift must be positive");
  if (lambda < 0) throw std::invalid_argument("psi: lambda must be nonnegative");
  Psi p;
  p.family = Family::shifted_power;
  p.c = c;
  p.shift = shift;
  p.lambda = lambda;
  return p;
}

Psi Psi::parse(const std::string& text) {
  auto colon = text.find(':');
  std::string fam = text.substr(0, colon);
  auto params = parse_params(colon == std::string::npos ? "" : text.substr(colon + 1));
  Psi p;
  if (fam == "pow") p = power(param(params, "c", 1.0), param(params, "lambda", 1.0));
  else if (fam == "logpow") p = logpower(param(params, "lambda", 1.0), param(params, "c", 1.0));
  else if (fam == "const") p = constant(param(params, "c", 1.0));
  else if (fam == "spow") p = shifted_power(param(params, "c", 1.0), param(params, "shift", 1.0), param(params, "lambda", 0.5));
  else throw std::invalid_argument("unknown psi family '" + fam + "'");
  p.amp = param(params, "amp", 1.0);
  p.dilation = param(params, "dilation", 1.0);
  if (!(p.amp > 0) || !(p.dilation > 0)) throw std::invalid_argument("psi: amp and dilation must be positive");
  return p;
}

bool ApproxRegion::contains(const Eigen::VectorXd& v) const {
  const Eigen::Index m = v.size();
  const double last = v(m - 1);
  if (!(last > 0) || !(last < T)) return false;
  const double ps = psi(last);
  const double lhs = 2.0 * (v(0) + last);
  const double rhs = last * ps * ps;
  double diff = rhs - lhs;
  if (std::abs(diff) < kGuard * std::max(1.0, std::abs(rhs))) {
    HiFloat h = HiFloat(last) * HiFloat(ps) * HiFloat(ps) - 2 * (HiFloat(v(0)) + HiFloat(last));
    return h > 0;
  }
  return diff > 0;
}

bool ApproxRegion::contains_norm_form(const Eigen::VectorXd& v) const {
  const Eigen::Index m = v.size();
  const double last = v(m - 1);
  if (!(last > 0) || !(last < T)) return false;
  Eigen::VectorXd u = v / last;
  Eigen::VectorXd e = e0(static_cast<int>(m) - 2);
  return (e - u).norm() < psi(last);
}

bool GeneralizedSector::bounded() const {
  for (const auto& iv : rho)
    if (!(iv.first > 0)) return false;
  return !rho.empty();
}

bool GeneralizedSector::contains(const Eigen::VectorXd& v) const {
  const Eigen::Index m = v.size();
  const double last = v(m - 1);
  if (!(last > 0)) return false;
  const double y = 1.0 / last;
  bool in_rho = false;
  for (const auto& iv : rho)
    if (y >= iv.first && y <= iv.second) in_rho = true;
  if (!in_rho) return false;
  Eigen::VectorXd alpha = v.head(m - 1) / last;
  for (std::size_t i = 0; i < caps.size(); ++i) {
    bool in = caps[i].contains(alpha);
    if (i < complement.size() && complement[i]) in = !in;
    if (in) return true;
  }
  return false;
}

namespace {

template <class F>
double integrate_split(F f, double T, std::vector<double> knots) {
  using boost::math::quadrature::gauss_kronrod;
  knots.push_back(0.0);
  knots.push_back(T);
  std::sort(knots.begin(), knots.end());
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
    double a = std::max(0.0, knots[i]), b = std::min(T, knots[i + 1]);
    if (!(b > a)) continue;
    total += gauss_kronrod<double, 61>::integrate(f, a, b, 30, 1e-11);
  }
  return total;
}

std::vector<double> psi_knots(const Psi& psi, double T) {
  std::vector<double> k;
  const double kn = psi.knot() / psi.dilation;
  if (kn > 0 && kn < T) k.push_back(kn);
  // Point where the cap radius reaches 2 and the cap saturates.
  if (psi(0.0) > 2.0 && psi(T) < 2.0) {
    double lo = 0.0, hi = T;
    for (int it = 0; it < 200; ++it) {
      double mid = 0.5 * (lo + hi);
      (psi(mid) > 2.0 ? lo : hi) = mid;
    }
    k.push_back(0.5 * (lo + hi));
  }
  return k;
}

}  // namespace

double calJ(const Psi& psi, int n, double T) {
  if (!(T > 0)) return 0.0;
  auto f = [&](double t) { return std::pow(t, n - 1) * std::pow(psi(t), n); };
  return integrate_split(f, T, psi_knots(psi, T));
}

double region_measure(const Psi& psi, int n, double T, RegionMode mode) {
  if (!(T > 0)) return 0.0;
  if (mode == RegionMode::leading) return c_cap(n) * calJ(psi, n, T);
  auto f = [&](double t) { return std::pow(t, n - 1) * cap_measure_exact(n, psi(t)); };
  return integrate_split(f, T, psi_knots(psi, T));
}

Eigen::VectorXd parse_unit_vector(const std::string& csv, int n) {
  auto parts = split(csv, ',');
  if (static_cast<int>(parts.size()) != n + 1)
    throw std::invalid_argument("alpha must have " + std::to_string(n + 1) + " components");
  std::vector<long double> x;
  long double norm2 = 0;
  for (const auto& s : parts) {
    Rational r = parse_rational(s);
    long double d = static_cast<long double>(numerator(r).convert_to<long double>() / denominator(r).convert_to<long double>());
    x.push_back(d);
    norm2 += d * d;
  }
  if (norm2 == 0) throw std::invalid_argument("alpha must be nonzero");
  long double nrm = std::sqrt(norm2);
  Eigen::VectorXd out(n + 1);
  for (int i = 0; i <= n; ++i) out(i) = static_cast<double>(x[i] / nrm);
  return out;
}

Region parse_region(const std::string& text, int n) {
  auto colon = text.find(':');
  if (colon == std::string::npos) throw std::invalid_argument("region needs a kind prefix");
  std::string kind = text.substr(0, colon);
  std::string body = text.substr(colon + 1);
  if (kind == "cap" || kind == "sector") {
    auto at = body.find('@');
    if (at == std::string::npos) throw std::invalid_argument("region needs '@<alpha>'");
    Eigen::VectorXd alpha = parse_unit_vector(body.substr(at + 1), n);
    auto nums = split(body.substr(0, at), ',');
    if (kind == "cap") {
      if (nums.size() != 1) throw std::invalid_argument("cap:<r>@<alpha>");
      return SphericalCap{alpha, static_cast<double>(parse_rational(nums[0]))};
    }
    if (nums.size() != 2) throw std::invalid_argument("sector:<T>,<r>@<alpha>");
    return Sector{static_cast<double>(parse_rational(nums[0])),
                  SphericalCap{alpha, static_cast<double>(parse_rational(nums[1]))}};
  }
  if (kind == "region") {
    auto tpos = body.rfind(",T=");
    if (body.rfind("psi=", 0) != 0 || tpos == std::string::npos)
      throw std::invalid_argument("region:psi=<family:params>,T=<T>");
    ApproxRegion r;
    r.psi = Psi::parse(body.substr(4, tpos - 4));
    r.T = static_cast<double>(parse_rational(body.substr(tpos + 3)));
    return r;
  }
  throw std::invalid_argument("unknown region kind '" + kind + "'");
}

bool contains(const Region& region, const Eigen::VectorXd& v) {
  return std::visit(
      [&](const auto& r) -> bool {
        using R = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<R, SphericalCap>) {
          if (v.size() == r.center.size()) return r.contains(v);
          const Eigen::Index m = v.size();
          if (!(v(m - 1) > 0)) return false;
          return r.contains(v.head(m - 1) / v(m - 1));
        } else {
          return r.contains(v);
        }
      },
      region);
}

}  // namespace conecount
