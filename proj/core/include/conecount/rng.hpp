#pragma once

#include <cstdint>
#include <vector>

namespace conecount {

// Counter-based generator: the n-th draw of stream s under seed k is a pure
// function of (k, s, n). Splitting is free, so parallel runs stay
// reproducible regardless of how work is scheduled.
class Rng {
public:
  Rng(std::uint64_t seed, std::uint64_t stream = 0) : seed_(seed), stream_(stream) {}

  std::uint64_t next_u64();
  double uniform();                      // [0,1)
  double uniform(double lo, double hi);  // [lo,hi)
  double normal();
  std::vector<double> normal_vector(int dim);

  Rng split(std::uint64_t child) const;
  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }

private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t counter_ = 0;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

std::uint64_t mix64(std::uint64_t x);
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b = 0);

}  // namespace conecount
