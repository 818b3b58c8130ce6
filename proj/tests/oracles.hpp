#pragma once

// Test-side reference implementations. Nothing here calls into the library's
// enumeration or measure code, so agreement is an independent check.

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <set>
#include <vector>

namespace oracle {

using Point = std::vector<std::int64_t>;  // (p_1, ..., p_{n+1}, q)

inline std::int64_t gcd_all(const Point& v) {
  std::int64_t g = 0;
  for (auto x : v) g = std::gcd(g, x < 0 ? -x : x);
  return g;
}

// All primitive (p, q) with p A p^t = q^2 and 1 <= q <= q_max for an integer
// Gram matrix A. Scans the box |p_i| <= q sqrt((A^{-1})_ii) in the first d-1
// coordinates and solves the last one from the quadratic, checking every
// candidate root exactly in integers.
inline std::set<Point> brute_cone(const std::vector<std::vector<std::int64_t>>& A, std::int64_t q_max) {
  const int d = static_cast<int>(A.size());
  Eigen::MatrixXd Ad(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) Ad(i, j) = static_cast<double>(A[i][j]);
  const Eigen::MatrixXd inv = Ad.inverse();
  const int last = d - 1;
  const std::int64_t a = A[last][last];
  std::set<Point> out;
  for (std::int64_t q = 1; q <= q_max; ++q) {
    std::vector<std::int64_t> bound(d);
    for (int i = 0; i < d; ++i) bound[i] = static_cast<std::int64_t>(std::floor(q * std::sqrt(inv(i, i)) + 1e-9));
    Point p(d, 0);
    for (int i = 0; i < last; ++i) p[i] = -bound[i];
    while (true) {
      // a x^2 + 2 b x + c = q^2
      std::int64_t b = 0, c = 0;
      for (int i = 0; i < last; ++i) {
        b += A[i][last] * p[i];
        for (int j = 0; j < last; ++j) c += A[i][j] * p[i] * p[j];
      }
      const double disc = double(b) * b - double(a) * (c - q * q);
      if (disc >= 0) {
        std::set<std::int64_t> cands;
        for (double root : {(-b - std::sqrt(disc)) / a, (-b + std::sqrt(disc)) / a})
          for (std::int64_t k = -1; k <= 1; ++k) cands.insert(static_cast<std::int64_t>(std::llround(root)) + k);
        for (std::int64_t x : cands) {
          if (a * x * x + 2 * b * x + c != q * q) continue;
          Point v = p;
          v[last] = x;
          v.push_back(q);
          if (gcd_all(v) == 1) out.insert(v);
        }
      }
      int k = 0;
      while (k < last && p[k] == bound[k]) p[k] = -bound[k], ++k;
      if (k == last) break;
      ++p[k];
    }
  }
  return out;
}

inline std::vector<std::vector<std::int64_t>> identity_gram(int d) {
  std::vector<std::vector<std::int64_t>> A(d, std::vector<std::int64_t>(d, 0));
  for (int i = 0; i < d; ++i) A[i][i] = 1;
  return A;
}

// Normalized measure of the chordal cap on S^n for n = 1, 2, 3 via the
// elementary angle formulas.
inline double cap_fraction(int n, double r) {
  if (r >= 2) return 1.0;
  const double c = 1.0 - r * r / 2.0;
  const double th = std::acos(c);
  switch (n) {
    case 1:
      return th / M_PI;
    case 2:
      return (1.0 - c) / 2.0;
    case 3:
      return (th - std::sin(th) * std::cos(th)) / M_PI;
  }
  return -1.0;
}

// c_cap(n) = Gamma((n+3)/2) / (sqrt(pi) (n+1) Gamma(n/2 + 1)).
inline double c_cap(int n) {
  return std::tgamma((n + 3) / 2.0) / (std::sqrt(M_PI) * (n + 1) * std::tgamma(n / 2.0 + 1.0));
}

// Chordal distance test written directly from the definition ||a - b|| < r.
inline bool in_cap(const Eigen::VectorXd& a, const Eigen::VectorXd& center, double r) { return (a - center).norm() < r; }

}  // namespace oracle
