#include "jcas/rng.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace jcas {

uint64_t fnv1a64(std::string_view s) {
  uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

uint64_t mix64(uint64_t x) {
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ull;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebull;
  x ^= x >> 31;
  return x;
}

namespace {
constexpr uint64_t kGamma = 0x9e3779b97f4a7c15ull;
}

Rng::Rng(uint64_t seed, uint64_t stream)
    : seed_(seed), stream_(stream), key_(mix64(seed + kGamma) ^ mix64(stream)), counter_(0) {}

Rng Rng::fork(std::string_view name, uint64_t index) const {
  Rng child = *this;
  child.stream_ = mix64(stream_ ^ fnv1a64(name)) + mix64(index * kGamma + 1);
  child.key_ = mix64(seed_ + kGamma) ^ mix64(child.stream_);
  child.counter_ = 0;
  return child;
}

uint64_t Rng::next_u64() { return mix64(key_ + ++counter_ * kGamma); }

double Rng::uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

double Rng::normal(double variance) {
  if (variance < 0.0) throw std::invalid_argument("normal: negative variance");
  // Box-Muller; u1 in (0, 1] keeps the log finite.
  const double u1 = (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1) * variance) *
         std::cos(2.0 * std::numbers::pi * u2);
}

std::complex<double> Rng::cnormal(double variance) {
  if (variance < 0.0) throw std::invalid_argument("cnormal: negative variance");
  const double u1 = (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
  const double u2 = uniform();
  const double r = std::sqrt(-std::log(u1) * variance);
  return {r * std::cos(2.0 * std::numbers::pi * u2),
          r * std::sin(2.0 * std::numbers::pi * u2)};
}

std::vector<std::complex<double>> cnormal_sample(std::size_t n, double variance, Rng& rng) {
  if (variance < 0.0) throw std::invalid_argument("cnormal_sample: negative variance");
  std::vector<std::complex<double>> out(n);
  for (auto& z : out) z = rng.cnormal(variance);
  return out;
}

}  // namespace jcas
