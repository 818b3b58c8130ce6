#include "conecount/enumeration.hpp"
#include "conecount/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace conecount {

int default_threads() {
  unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : static_cast<int>(hc);
}

int resolve_threads(int requested) { return requested > 0 ? requested : default_threads(); }

IntVec PointView::exact() const {
  IntVec out(dim_);
  for (int i = 0; i < dim_; ++i) out[i] = exact(i);
  return out;
}

namespace {

using i128 = __int128;

template <class Int>
Int isqrt_floor(const Int& x);

template <>
std::int64_t isqrt_floor(const std::int64_t& x) {
  auto s = static_cast<std::int64_t>(std::sqrt(static_cast<double>(x)));
  while (s > 0 && s * s > x) --s;
  while ((s + 1) * (s + 1) <= x) ++s;
  return s;
}

template <>
i128 isqrt_floor(const i128& x) {
  auto s = static_cast<i128>(std::sqrt(static_cast<long double>(x)));
  while (s > 0 && s * s > x) --s;
  while ((s + 1) * (s + 1) <= x) ++s;
  return s;
}

template <>
BigInt isqrt_floor(const BigInt& x) {
  return boost::multiprecision::sqrt(x);
}

template <class Int>
Int floor_div(const Int& a, const Int& b) {  // b > 0
  Int q = a / b;
  if ((a % b) != 0 && a < 0) q -= 1;
  return q;
}

template <class Int>
Int ceil_div(const Int& a, const Int& b) {  // b > 0
  Int q = a / b;
  if ((a % b) != 0 && a > 0) q += 1;
  return q;
}

std::uint64_t ugcd(std::uint64_t a, std::uint64_t b) { return std::gcd(a, b); }

std::int64_t to_i64(const BigInt& x) { return x.convert_to<std::int64_t>(); }

template <class Int>
Int from_big(const BigInt& x) {
  if constexpr (std::is_same_v<Int, BigInt>) {
    return x;
  } else if constexpr (std::is_same_v<Int, i128>) {
    // Values stored here are bounded well inside 64 bits by construction.
    return static_cast<i128>(to_i64(x));
  } else {
    return to_i64(x);
  }
}

// Per-level quadratic data: level i sees the prefix p_0..p_i and the minimum
// of the form over the remaining real coordinates, scaled to integers.
template <class Int>
struct Engine {
  int dim = 0;
  std::vector<std::vector<Int>> M;
  std::vector<Int> D;

  template <class F>
  void run(const Int& N, const std::vector<std::pair<Int, Int>>* box, bool nonneg, F& emit) const {
    std::vector<Int> p(dim, Int(0));
    rec(0, p, N, box, nonneg, emit);
  }

  template <class F>
  void rec(int i, std::vector<Int>& p, const Int& N, const std::vector<std::pair<Int, Int>>* box, bool nonneg,
           F& emit) const {
    const int w = i + 1;
    const Int* Mi = M[i].data();
    const Int& a = Mi[i * w + i];
    Int b = 0;
    for (int j = 0; j < i; ++j) b += Mi[i * w + j] * p[j];
    Int c = 0;
    for (int j = 0; j < i; ++j) {
      Int row = 0;
      for (int k = 0; k < i; ++k) row += Mi[j * w + k] * p[k];
      c += row * p[j];
    }
    if (i == dim - 1) {
      Int disc = b * b - a * (c - N);
      if (disc < 0) return;
      Int s = isqrt_floor<Int>(disc);
      if (s * s != disc) return;
      Int r1 = -b - s, r2 = -b + s;
      auto accept = [&](const Int& num) {
        if (num % a != 0) return;
        Int x = num / a;
        if (nonneg && x < 0) return;
        if (box && (x < (*box)[i].first || x > (*box)[i].second)) return;
        p[i] = x;
        emit(p);
      };
      accept(r1);
      if (s != 0) accept(r2);
      return;
    }
    Int disc = b * b - a * (c - D[i] * N);
    if (disc < 0) return;
    Int s = isqrt_floor<Int>(disc);
    Int lo = ceil_div<Int>(-b - s, a);
    Int hi = floor_div<Int>(s - b, a);
    if (nonneg && lo < 0) lo = 0;
    if (box) {
      if (lo < (*box)[i].first) lo = (*box)[i].first;
      if (hi > (*box)[i].second) hi = (*box)[i].second;
    }
    for (Int x = lo; x <= hi; ++x) {
      p[i] = x;
      rec(i + 1, p, N, box, nonneg, emit);
    }
  }
};


// Machine-integer engine for the common case. The last two levels are fused
// so the innermost loop is a handful of multiply-adds and one square root.
struct Fast64 {
  int dim = 0;
  std::vector<std::vector<std::int64_t>> M;
  std::vector<std::int64_t> D;

  static std::int64_t isq(std::int64_t x) { return isqrt_floor<std::int64_t>(x); }

  template <class F>
  void run(std::int64_t N, const std::int64_t* blo, const std::int64_t* bhi, bool nonneg, F& emit) const {
    std::int64_t p[16] = {};
    if (dim == 1) {
      last(p, N, blo, bhi, nonneg, emit);
      return;
    }
    rec(0, p, N, blo, bhi, nonneg, emit);
  }

  template <class F>
  void last(std::int64_t* p, std::int64_t N, const std::int64_t* blo, const std::int64_t* bhi, bool nonneg,
            F& emit) const {
    const int L = dim - 1;
    const std::int64_t* ML = M[L].data();
    const int w = dim;
    std::int64_t a = ML[L * w + L], b = 0, c = 0;
    for (int j = 0; j < L; ++j) {
      b += ML[L * w + j] * p[j];
      std::int64_t row = 0;
      for (int k = 0; k < L; ++k) row += ML[j * w + k] * p[k];
      c += row * p[j];
    }
    std::int64_t disc = b * b - a * (c - N);
    if (disc < 0) return;
    std::int64_t s = isq(disc);
    if (s * s != disc) return;
    emit_roots(p, a, b, s, blo, bhi, nonneg, emit);
  }

  template <class F>
  void emit_roots(std::int64_t* p, std::int64_t a, std::int64_t b, std::int64_t s, const std::int64_t* blo,
                  const std::int64_t* bhi, bool nonneg, F& emit) const {
    const int L = dim - 1;
    std::int64_t r[2] = {-b - s, -b + s};
    for (int t = 0; t < (s == 0 ? 1 : 2); ++t) {
      if (r[t] % a != 0) continue;
      std::int64_t x = r[t] / a;
      if (nonneg && x < 0) continue;
      if (blo && (x < blo[L] || x > bhi[L])) continue;
      p[L] = x;
      emit(p);
    }
  }

  template <class F>
  void rec(int i, std::int64_t* p, std::int64_t N, const std::int64_t* blo, const std::int64_t* bhi, bool nonneg,
           F& emit) const {
    const int w = i + 1;
    const std::int64_t* Mi = M[i].data();
    const std::int64_t a = Mi[i * w + i];
    std::int64_t b = 0, c = 0;
    for (int j = 0; j < i; ++j) {
      b += Mi[i * w + j] * p[j];
      std::int64_t row = 0;
      for (int k = 0; k < i; ++k) row += Mi[j * w + k] * p[k];
      c += row * p[j];
    }
    std::int64_t disc = b * b - a * (c - D[i] * N);
    if (disc < 0) return;
    std::int64_t s = isq(disc);
    std::int64_t lo = ceil_div<std::int64_t>(-b - s, a);
    std::int64_t hi = floor_div<std::int64_t>(s - b, a);
    if (nonneg && lo < 0) lo = 0;
    if (blo) {
      lo = std::max(lo, blo[i]);
      hi = std::min(hi, bhi[i]);
    }
    if (lo > hi) return;
    if (i + 2 < dim) {
      for (std::int64_t x = lo; x <= hi; ++x) {
        p[i] = x;
        rec(i + 1, p, N, blo, bhi, nonneg, emit);
      }
      return;
    }
    // i == dim - 2: fuse with the last level.
    const int L = dim - 1;
    const int wl = dim;
    const std::int64_t* ML = M[L].data();
    const std::int64_t aL = ML[L * wl + L];
    const std::int64_t mL = ML[L * wl + i];
    const std::int64_t e = ML[i * wl + i];
    std::int64_t bL0 = 0, u = 0, cL0 = 0;
    for (int j = 0; j < i; ++j) {
      bL0 += ML[L * wl + j] * p[j];
      u += ML[i * wl + j] * p[j];
      std::int64_t row = 0;
      for (int k = 0; k < i; ++k) row += ML[j * wl + k] * p[k];
      cL0 += row * p[j];
    }
    for (std::int64_t x = lo; x <= hi; ++x) {
      const std::int64_t bL = bL0 + mL * x;
      const std::int64_t cL = cL0 + x * (2 * u + e * x);
      const std::int64_t discL = bL * bL - aL * (cL - N);
      if (discL < 0) continue;
      auto sL = static_cast<std::int64_t>(std::sqrt(static_cast<double>(discL)));
      if (sL * sL != discL) {
        sL = isq(discL);
        if (sL * sL != discL) continue;
      }
      p[i] = x;
      emit_roots(p, aL, bL, sL, blo, bhi, nonneg, emit);
    }
  }
};

// Diagonal forms with all coefficients equal: p_0 >= p_1 >= ... >= 0 with
// sum p_i^2 = R, expanded afterwards by permutations and signs.
struct SortedSquares {
  int dim = 0;

  template <class F>
  void run(std::int64_t R, F& emit) const {
    std::int64_t p[16] = {};
    rec(0, p, R, std::numeric_limits<std::int64_t>::max(), emit);
  }

  static std::int64_t ceil_sqrt(std::int64_t x) {
    std::int64_t s = isqrt_floor<std::int64_t>(x);
    return s * s == x ? s : s + 1;
  }

  template <class F>
  void rec(int i, std::int64_t* p, std::int64_t R, std::int64_t cap, F& emit) const {
    const int k = dim - i;
    if (k == 1) {
      std::int64_t s = isqrt_floor<std::int64_t>(R);
      if (s * s == R && s <= cap) {
        p[i] = s;
        emit(p);
      }
      return;
    }
    std::int64_t hi = std::min(cap, isqrt_floor<std::int64_t>(R));
    std::int64_t lo = ceil_sqrt((R + k - 1) / k);
    if (k == 2) {
      for (std::int64_t x = lo; x <= hi; ++x) {
        const std::int64_t rem = R - x * x;
        auto y = static_cast<std::int64_t>(std::sqrt(static_cast<double>(rem)));
        if (y * y != rem) {
          y = isqrt_floor<std::int64_t>(rem);
          if (y * y != rem) continue;
        }
        if (y > x) continue;
        p[i] = x;
        p[i + 1] = y;
        emit(p);
      }
      return;
    }
    for (std::int64_t x = lo; x <= hi; ++x) {
      p[i] = x;
      rec(i + 1, p, R - x * x, x, emit);
    }
  }
};

template <class Int>
Engine<Int> make_engine(const std::vector<std::vector<BigInt>>& Mb, const std::vector<BigInt>& Db) {
  Engine<Int> e;
  e.dim = static_cast<int>(Mb.size());
  for (const auto& m : Mb) {
    std::vector<Int> row;
    row.reserve(m.size());
    for (const auto& x : m) row.push_back(from_big<Int>(x));
    e.M.push_back(std::move(row));
  }
  for (const auto& d : Db) e.D.push_back(from_big<Int>(d));
  return e;
}

bool lex_less(const std::int64_t* a, const std::int64_t* b, int dim) {
  return std::lexicographical_compare(a, a + dim, b, b + dim);
}

}  // namespace

struct LayerEnumerator::Impl {
  int dim = 0;
  bool diagonal = false;
  bool equal_diag = false;
  std::int64_t diag_coef = 1;
  BigInt sA;
  std::int64_t sA64 = 1;
  std::vector<std::vector<BigInt>> Mb;
  std::vector<BigInt> Db;
  Fast64 f64;
  SortedSquares sorted;
  Engine<i128> e128;
  Engine<BigInt> ebig;
  double bound_coef = 0.0;  // intermediate magnitude <= bound_coef * q^2
  double p_coef = 0.0;      // |p_i| <= p_coef * q

  int tier(double q) const {
    double b = bound_coef * q * q;
    if (b < 0x1.0p60 && sA64 > 0) return 0;
    if (b < 0x1.0p120 && sA64 > 0) return 1;
    return 2;
  }

  bool primitive64(std::int64_t q, const std::int64_t* p) const {
    std::uint64_t g = static_cast<std::uint64_t>(q);
    for (int i = 0; i < dim && g != 1; ++i) g = ugcd(g, static_cast<std::uint64_t>(p[i] < 0 ? -p[i] : p[i]));
    return g == 1;
  }

  void emit_sorted(std::vector<std::int64_t>& flat, bool ordered, const PointVisitor& fn) const {
    const std::size_t count = flat.size() / dim;
    if (!ordered) {
      for (std::size_t k = 0; k < count; ++k) fn(PointView(flat.data() + k * dim, dim));
      return;
    }
    std::vector<std::size_t> idx(count);
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](std::size_t x, std::size_t y) {
      return lex_less(flat.data() + x * dim, flat.data() + y * dim, dim);
    });
    for (auto k : idx) fn(PointView(flat.data() + k * dim, dim));
  }

  void push_signs(std::vector<std::int64_t>& flat, const std::int64_t* p) const {
    int nz[16];
    int cnt = 0;
    for (int i = 0; i < dim; ++i)
      if (p[i] != 0) nz[cnt++] = i;
    for (std::size_t mask = 0; mask < (std::size_t(1) << cnt); ++mask) {
      const std::size_t base = flat.size();
      flat.insert(flat.end(), p, p + dim);
      for (int b = 0; b < cnt; ++b)
        if (mask & (std::size_t(1) << b)) flat[base + nz[b]] = -flat[base + nz[b]];
    }
  }

  void run_fast(std::int64_t q, const CoordBox* box, bool ordered, const PointVisitor& fn) const {
    const std::int64_t N = sA64 * q * q;
    if (box) {
      std::int64_t blo[16], bhi[16];
      const double cap = p_coef * static_cast<double>(q) + 2.0;
      for (int i = 0; i < dim; ++i) {
        double lo = std::max(std::floor((*box)[i].first) - 1.0, -cap);
        double hi = std::min(std::ceil((*box)[i].second) + 1.0, cap);
        if (lo > hi) return;
        blo[i] = static_cast<std::int64_t>(lo);
        bhi[i] = static_cast<std::int64_t>(hi);
      }
      auto emit = [&](const std::int64_t* p) {
        if (primitive64(q, p)) fn(PointView(p, dim));
      };
      f64.run(N, blo, bhi, false, emit);
      return;
    }
    if (equal_diag) {
      if (N % diag_coef != 0) return;
      std::vector<std::int64_t> flat;
      std::int64_t asc[16];
      auto emit = [&](const std::int64_t* p) {
        if (!primitive64(q, p)) return;
        std::reverse_copy(p, p + dim, asc);
        do {
          push_signs(flat, asc);
        } while (std::next_permutation(asc, asc + dim));
      };
      sorted.run(N / diag_coef, emit);
      emit_sorted(flat, ordered, fn);
      return;
    }
    if (diagonal) {
      std::vector<std::int64_t> flat;
      auto emit = [&](const std::int64_t* p) {
        if (primitive64(q, p)) push_signs(flat, p);
      };
      f64.run(N, nullptr, nullptr, true, emit);
      emit_sorted(flat, ordered, fn);
      return;
    }
    auto emit = [&](const std::int64_t* p) {
      if (primitive64(q, p)) fn(PointView(p, dim));
    };
    f64.run(N, nullptr, nullptr, false, emit);
  }

  template <class Int, class Store>
  void run_layer(const Engine<Int>& eng, const Int& q, const Int& N, const CoordBox* box, bool ordered,
                 const PointVisitor& fn) const;
};

LayerEnumerator::LayerEnumerator(const EllipsoidForm& E) : E_(E), impl_(std::make_unique<Impl>()) {
  auto& I = *impl_;
  I.dim = E.n + 1;
  I.diagonal = E.diagonal;
  I.sA = E.s_A;
  I.sA64 = E.s_A < BigInt(std::numeric_limits<std::int64_t>::max() / 4) ? to_i64(E.s_A) : -1;
  const int d = I.dim;
  RatMatrix Ar(d, std::vector<Rational>(d));
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) Ar[i][j] = Rational(E.A_int[i][j]);
  double mmax = 1.0, dmax = 1.0;
  for (int i = 0; i < d; ++i) {
    const int f = d - 1 - i;  // free coordinates i+1..d-1
    // Inverse of the free block by Gauss-Jordan over the rationals.
    RatMatrix inv = rational_identity(f);
    RatMatrix blk(f, std::vector<Rational>(f));
    for (int r = 0; r < f; ++r)
      for (int c = 0; c < f; ++c) blk[r][c] = Ar[i + 1 + r][i + 1 + c];
    Rational det = 1;
    for (int c = 0; c < f; ++c) {
      int piv = c;
      while (blk[piv][c] == 0) ++piv;
      if (piv != c) {
        std::swap(blk[piv], blk[c]);
        std::swap(inv[piv], inv[c]);
        det = -det;
      }
      det *= blk[c][c];
      Rational pv = blk[c][c];
      for (int k = 0; k < f; ++k) {
        blk[c][k] /= pv;
        inv[c][k] /= pv;
      }
      for (int r = 0; r < f; ++r) {
        if (r == c || blk[r][c] == 0) continue;
        Rational fac = blk[r][c];
        for (int k = 0; k < f; ++k) {
          blk[r][k] -= fac * blk[c][k];
          inv[r][k] -= fac * inv[c][k];
        }
      }
    }
    const int w = i + 1;
    std::vector<BigInt> Mi(w * w);
    for (int r = 0; r < w; ++r)
      for (int c = 0; c < w; ++c) {
        Rational s = Ar[r][c];
        for (int x = 0; x < f; ++x)
          for (int y = 0; y < f; ++y) s -= Ar[r][i + 1 + x] * inv[x][y] * Ar[i + 1 + y][c];
        Rational scaled = s * det;
        if (denominator(scaled) != 1) throw std::logic_error("Schur complement is not integral");
        Mi[r * w + c] = numerator(scaled);
        mmax = std::max(mmax, std::abs(static_cast<double>(Mi[r * w + c])));
      }
    I.Mb.push_back(std::move(Mi));
    I.Db.push_back(numerator(det));
    dmax = std::max(dmax, std::abs(static_cast<double>(numerator(det))));
  }
  const double sA = static_cast<double>(E.s_A);
  double pc = 0.0;
  for (int i = 0; i < d; ++i) pc = std::max(pc, std::sqrt(E.inv_diag(i)));
  I.p_coef = pc * 1.01 + 1e-9;
  I.bound_coef = 4.0 * d * d * mmax * mmax * I.p_coef * I.p_coef + 2.0 * mmax * dmax * sA + 16.0;
  if (I.tier(1.0) == 0) {
    auto e = make_engine<std::int64_t>(I.Mb, I.Db);
    I.f64.dim = e.dim;
    I.f64.M = e.M;
    I.f64.D = e.D;
  }
  I.sorted.dim = d;
  if (E.diagonal && I.tier(1.0) == 0) {
    I.equal_diag = true;
    for (int i = 1; i < d; ++i)
      if (E.A_int[i][i] != E.A_int[0][0]) I.equal_diag = false;
    I.diag_coef = to_i64(E.A_int[0][0]);
  }
  if (I.tier(1.0) <= 1) I.e128 = make_engine<i128>(I.Mb, I.Db);
  I.ebig = make_engine<BigInt>(I.Mb, I.Db);
}

LayerEnumerator::~LayerEnumerator() = default;

template <class Int, class Store>
void LayerEnumerator::Impl::run_layer(const Engine<Int>& eng, const Int& q, const Int& N, const CoordBox* box,
                                      bool ordered, const PointVisitor& fn) const {
  auto primitive = [&](const std::vector<Int>& p) {
    if constexpr (std::is_same_v<Int, BigInt>) {
      BigInt g = q;
      for (const auto& x : p) g = boost::multiprecision::gcd(g, x);
      return g == 1 || g == -1;
    } else {
      std::uint64_t g = static_cast<std::uint64_t>(q);
      for (const auto& x : p) {
        if (g == 1) return true;
        g = ugcd(g, static_cast<std::uint64_t>(x < 0 ? -x : x));
      }
      return g == 1;
    }
  };
  auto store = [](const Int& x) -> Store {
    if constexpr (std::is_same_v<Store, BigInt>) return BigInt(x);
    else return static_cast<std::int64_t>(x);
  };
  auto view = [&](const Store* s) { return PointView(s, dim); };

  if (box) {
    std::vector<std::pair<Int, Int>> ib(dim);
    for (int i = 0; i < dim; ++i) {
      double lo = std::floor((*box)[i].first) - 1.0;
      double hi = std::ceil((*box)[i].second) + 1.0;
      double cap = p_coef * static_cast<double>(q) + 2.0;
      lo = std::max(lo, -cap);
      hi = std::min(hi, cap);
      if (lo > hi) return;
      ib[i] = {Int(static_cast<std::int64_t>(lo)), Int(static_cast<std::int64_t>(hi))};
    }
    std::vector<Store> buf(dim);
    auto emit = [&](const std::vector<Int>& p) {
      if (!primitive(p)) return;
      for (int i = 0; i < dim; ++i) buf[i] = store(p[i]);
      fn(view(buf.data()));
    };
    eng.run(N, &ib, false, emit);
    return;
  }
  if (!diagonal) {
    std::vector<Store> buf(dim);
    auto emit = [&](const std::vector<Int>& p) {
      if (!primitive(p)) return;
      for (int i = 0; i < dim; ++i) buf[i] = store(p[i]);
      fn(view(buf.data()));
    };
    eng.run(N, nullptr, false, emit);
    return;
  }
  // Diagonal forms: enumerate the nonnegative orthant and expand signs.
  std::vector<Store> flat;
  auto emit = [&](const std::vector<Int>& p) {
    if (!primitive(p)) return;
    std::vector<int> nz;
    for (int i = 0; i < dim; ++i)
      if (p[i] != 0) nz.push_back(i);
    const std::size_t combos = std::size_t(1) << nz.size();
    for (std::size_t mask = 0; mask < combos; ++mask) {
      for (int i = 0; i < dim; ++i) flat.push_back(store(p[i]));
      Store* row = flat.data() + flat.size() - dim;
      for (std::size_t b = 0; b < nz.size(); ++b)
        if (mask & (std::size_t(1) << b)) row[nz[b]] = -row[nz[b]];
    }
  };
  eng.run(N, nullptr, true, emit);
  const std::size_t count = flat.size() / dim;
  if (!ordered) {
    for (std::size_t k = 0; k < count; ++k) fn(view(flat.data() + k * dim));
    return;
  }
  std::vector<std::size_t> idx(count);
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t x, std::size_t y) {
    const Store* a = flat.data() + x * dim;
    const Store* b = flat.data() + y * dim;
    if constexpr (std::is_same_v<Store, std::int64_t>) return lex_less(a, b, dim);
    else return std::lexicographical_compare(a, a + dim, b, b + dim);
  });
  for (auto k : idx) fn(view(flat.data() + k * dim));
}

void LayerEnumerator::layer(std::int64_t q, const PointVisitor& fn, bool ordered) const {
  if (q < 1) return;
  const auto& I = *impl_;
  switch (I.tier(static_cast<double>(q))) {
    case 0:
      I.run_fast(q, nullptr, ordered, fn);
      break;
    case 1:
      I.run_layer<i128, std::int64_t>(I.e128, q, static_cast<i128>(I.sA64) * q * q, nullptr, ordered, fn);
      break;
    default:
      I.run_layer<BigInt, BigInt>(I.ebig, BigInt(q), I.sA * q * q, nullptr, ordered, fn);
  }
}

void LayerEnumerator::layer(std::int64_t q, const CoordBox& box, const PointVisitor& fn) const {
  if (q < 1) return;
  if (static_cast<int>(box.size()) != impl_->dim) throw std::invalid_argument("box dimension mismatch");
  const auto& I = *impl_;
  switch (I.tier(static_cast<double>(q))) {
    case 0:
      I.run_fast(q, &box, true, fn);
      break;
    case 1:
      I.run_layer<i128, std::int64_t>(I.e128, q, static_cast<i128>(I.sA64) * q * q, &box, true, fn);
      break;
    default:
      I.run_layer<BigInt, BigInt>(I.ebig, BigInt(q), I.sA * q * q, &box, true, fn);
  }
}

void LayerEnumerator::layer(const BigInt& q, const PointVisitor& fn) const {
  if (q < 1) return;
  if (q < BigInt(1) << 31) {
    layer(to_i64(q), fn, true);
    return;
  }
  const auto& I = *impl_;
  I.run_layer<BigInt, BigInt>(I.ebig, q, I.sA * q * q, nullptr, true, fn);
}

std::uint64_t LayerEnumerator::layer_count(std::int64_t q) const {
  std::uint64_t c = 0;
  layer(q, [&](const PointView&) { ++c; }, false);
  return c;
}

CoordBox LayerEnumerator::cap_box(std::int64_t q, const Eigen::VectorXd& x, double r) const {
  CoordBox box(impl_->dim);
  const double qd = static_cast<double>(q);
  for (int i = 0; i < impl_->dim; ++i) {
    double half = qd * r * std::sqrt(E_.inv_diag(i)) * (1.0 + 1e-9) + 1e-6;
    box[i] = {qd * x(i) - half, qd * x(i) + half};
  }
  return box;
}

PrimitiveStream::PrimitiveStream(const EllipsoidForm& E, std::int64_t q_max) : enumer_(E), q_max_(q_max) {}

bool PrimitiveStream::next(ConePoint& out) {
  while (pos_ >= buffer_.size()) {
    if (q_ >= q_max_) return false;
    ++q_;
    buffer_.clear();
    pos_ = 0;
    enumer_.layer(q_, [&](const PointView& p) { buffer_.push_back(p.exact()); });
  }
  out.v = buffer_[pos_++];
  out.v.push_back(BigInt(q_));
  out.q = q_;
  out.qnorm = std::sqrt(2.0) * static_cast<double>(q_);
  return true;
}

std::vector<ConePoint> enumerate_primitive(const EllipsoidForm& E, std::int64_t q_max, int threads) {
  std::vector<ConePoint> out;
  if (q_max < 1) return out;
  LayerEnumerator en(E);
  const std::size_t chunks = static_cast<std::size_t>(std::min<std::int64_t>(q_max, 256));
  auto parts = parallel_map<std::vector<ConePoint>>(chunks, threads, [&](std::size_t c) {
    std::vector<ConePoint> local;
    std::int64_t lo = 1 + static_cast<std::int64_t>(c) * q_max / static_cast<std::int64_t>(chunks);
    std::int64_t hi = static_cast<std::int64_t>(c + 1) * q_max / static_cast<std::int64_t>(chunks);
    for (std::int64_t q = lo; q <= hi; ++q) {
      en.layer(q, [&](const PointView& p) {
        ConePoint cp;
        cp.v = p.exact();
        cp.v.push_back(BigInt(q));
        cp.q = q;
        cp.qnorm = std::sqrt(2.0) * static_cast<double>(q);
        local.push_back(std::move(cp));
      });
    }
    return local;
  });
  for (auto& part : parts)
    for (auto& p : part) out.push_back(std::move(p));
  return out;
}

std::int64_t last_layer_below(double T) {
  if (!(T > 1.0)) return 0;
  auto q = static_cast<std::int64_t>(std::ceil(T)) - 1;
  while (static_cast<double>(q) >= T) --q;
  return q;
}

std::uint64_t count_all(const EllipsoidForm& E, double T, int threads) {
  const std::int64_t qmax = last_layer_below(T);
  if (qmax < 1) return 0;
  LayerEnumerator en(E);
  const std::size_t stripes = static_cast<std::size_t>(std::min<std::int64_t>(qmax, 64));
  auto parts = parallel_map<std::uint64_t>(stripes, threads, [&](std::size_t s) {
    std::uint64_t c = 0;
    for (std::int64_t q = 1 + static_cast<std::int64_t>(s); q <= qmax; q += static_cast<std::int64_t>(stripes))
      c += en.layer_count(q);
    return c;
  });
  return std::accumulate(parts.begin(), parts.end(), std::uint64_t(0));
}

namespace {

// Best-effort search for forms without the ellipsoid block shape: every
// integer v in the ball ||v tau|| <= T, tested exactly for Q(v) = 0.
std::vector<ConePoint> box_search(const QuadraticSpace& Q, double T) {
  const int m = Q.dim();
  Eigen::MatrixXd G = Q.tau * Q.tau.transpose();
  Eigen::MatrixXd Gi = G.inverse();
  std::vector<std::int64_t> lim(m);
  for (int i = 0; i < m; ++i) lim[i] = static_cast<std::int64_t>(std::floor(T * std::sqrt(Gi(i, i)) + 1e-9));
  std::vector<ConePoint> out;
  std::vector<std::int64_t> v(m);
  for (int i = 0; i < m; ++i) v[i] = -lim[i];
  Eigen::VectorXd vd(m);
  while (true) {
    for (int i = 0; i < m; ++i) vd(i) = static_cast<double>(v[i]);
    Eigen::VectorXd w = Q.tau.transpose() * vd;
    double norm = w.norm();
    if (w(m - 1) > 0 && norm <= T * (1 + 1e-12)) {
      IntVec iv(v.begin(), v.end());
      if (evaluate(Q, iv) == 0 && vector_gcd(iv) == 1) {
        ConePoint cp;
        cp.v = iv;
        cp.q = iv.back();
        cp.qnorm = norm;
        out.push_back(std::move(cp));
      }
    }
    int k = m - 1;
    while (k >= 0 && v[k] == lim[k]) {
      v[k] = -lim[k];
      --k;
    }
    if (k < 0) break;
    ++v[k];
  }
  return out;
}

}  // namespace

std::vector<ConePoint> enumerate_by_norm(const QuadraticSpace& Q, double T, int threads) {
  if (!(T > 0)) throw std::invalid_argument("T must be positive");
  auto E = EllipsoidForm::from_space(Q);
  if (!E) return box_search(Q, T);
  auto qm = static_cast<std::int64_t>(std::floor(T / std::sqrt(2.0)));
  const long double T2 = static_cast<long double>(T) * T;
  while (2.0L * (qm + 1) * (qm + 1) <= T2) ++qm;
  while (qm > 0 && 2.0L * qm * qm > T2) --qm;
  return enumerate_primitive(*E, qm, threads);
}

}  // namespace conecount
