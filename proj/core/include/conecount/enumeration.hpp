#pragma once

#include "conecount/quadform.hpp"

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <utility>
#include <vector>

namespace conecount {

struct ConePoint {
  IntVec v;      // (p_1, ..., p_{n+1}, q)
  BigInt q;
  double qnorm = 0.0;
};

// One primitive solution p of A(p) = q^2, handed to visitors without copying.
// Coordinates live either in machine integers or in BigInts.
class PointView {
public:
  PointView(const std::int64_t* small, int dim) : small_(small), dim_(dim) {}
  PointView(const BigInt* big, int dim) : big_(big), dim_(dim) {}

  int dim() const { return dim_; }
  double operator[](int i) const { return small_ ? static_cast<double>(small_[i]) : static_cast<double>(big_[i]); }
  BigInt exact(int i) const { return small_ ? BigInt(small_[i]) : big_[i]; }
  IntVec exact() const;

private:
  const std::int64_t* small_ = nullptr;
  const BigInt* big_ = nullptr;
  int dim_ = 0;
};

using PointVisitor = std::function<void(const PointView&)>;

// Closed real intervals for each coordinate of p; a search restriction, not a
// membership test.
using CoordBox = std::vector<std::pair<double, double>>;

// Layer-by-denominator enumeration of primitive points on the cone of
// Q(x,y) = A(x) - y^2. Per layer the equation p A_int p^t = s_A q^2 is solved
// by Fincke-Pohst style branch and bound whose level bounds come from exact
// integer Schur complements, so no boundary point is ever lost to rounding.
class LayerEnumerator {
public:
  explicit LayerEnumerator(const EllipsoidForm& E);
  ~LayerEnumerator();
  LayerEnumerator(const LayerEnumerator&) = delete;
  LayerEnumerator& operator=(const LayerEnumerator&) = delete;

  const EllipsoidForm& form() const { return E_; }

  // Visits the primitive points of layer q in lexicographic order of p
  // (any order when `ordered` is false).
  void layer(std::int64_t q, const PointVisitor& fn, bool ordered = true) const;
  // Same, restricted to a coordinate box.
  void layer(std::int64_t q, const CoordBox& box, const PointVisitor& fn) const;
  void layer(const BigInt& q, const PointVisitor& fn) const;

  std::uint64_t layer_count(std::int64_t q) const;

  // Box |p_i - q x_i| <= q r sqrt((A^{-1})_ii) containing every p with
  // ||p/q - x||_A < r.
  CoordBox cap_box(std::int64_t q, const Eigen::VectorXd& x, double r) const;

private:
  struct Impl;
  const EllipsoidForm& E_;
  std::unique_ptr<Impl> impl_;
};

// Pull-style stream over layers 1..q_max.
class PrimitiveStream {
public:
  PrimitiveStream(const EllipsoidForm& E, std::int64_t q_max);
  bool next(ConePoint& out);

private:
  LayerEnumerator enumer_;
  std::int64_t q_max_;
  std::int64_t q_ = 0;
  std::vector<IntVec> buffer_;
  std::size_t pos_ = 0;
};

std::vector<ConePoint> enumerate_primitive(const EllipsoidForm& E, std::int64_t q_max, int threads = 1);

// All primitive cone points with ||v||_Q <= T. Ellipsoid-block forms use the
// cutoff 2 q^2 <= T^2; other forms fall back to a norm-ball box search.
std::vector<ConePoint> enumerate_by_norm(const QuadraticSpace& Q, double T, int threads = 1);

// Primitive points with 1 <= q < T.
std::uint64_t count_all(const EllipsoidForm& E, double T, int threads = 1);

// Largest integer q with q < T.
std::int64_t last_layer_below(double T);

}  // namespace conecount
