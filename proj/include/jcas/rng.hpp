// Counter-based random number generation with named streams.
//
// Every sampler is keyed by (seed, stream); equal keys give identical
// sequences regardless of what other streams drew in between, so module-level
// reproducibility survives reordering of the surrounding code.
#pragma once

#include <complex>
#include <cstdint>
#include <string_view>
#include <vector>

namespace jcas {

uint64_t fnv1a64(std::string_view s);
uint64_t mix64(uint64_t x);

class Rng {
 public:
  Rng() : Rng(0, 0) {}
  Rng(uint64_t seed, uint64_t stream);
  Rng(uint64_t seed, std::string_view stream) : Rng(seed, fnv1a64(stream)) {}

  // Independent child stream; deterministic in (this stream, name, index).
  Rng fork(std::string_view name, uint64_t index = 0) const;

  uint64_t next_u64();
  double uniform();                      // [0, 1)
  double uniform(double lo, double hi);  // [lo, hi)
  // N(0, variance)
  double normal(double variance = 1.0);
  // Circularly symmetric CN(0, variance): re, im independent N(0, variance/2).
  std::complex<double> cnormal(double variance = 1.0);

  uint64_t seed() const { return seed_; }
  uint64_t stream() const { return stream_; }

 private:
  uint64_t seed_ = 0, stream_ = 0;
  uint64_t key_ = 0, counter_ = 0;
};

// n i.i.d. CN(0, variance) samples. Throws std::invalid_argument for
// variance < 0.
std::vector<std::complex<double>> cnormal_sample(std::size_t n, double variance, Rng& rng);

}  // namespace jcas
