#include <doctest.h>

#include <cmath>
#include <complex>

#include "jcas/rng.hpp"

using namespace jcas;
using cdouble = std::complex<double>;

TEST_CASE("cnormal_sample with zero variance returns zeros") {
  Rng rng(7, "test");
  const auto v = cnormal_sample(4, 0.0, rng);
  REQUIRE(v.size() == 4);
  for (const auto& z : v) CHECK(z == cdouble{0.0, 0.0});
}

TEST_CASE("cnormal_sample rejects negative variance") {
  Rng rng(7, "test");
  CHECK_THROWS_AS(cnormal_sample(4, -1.0, rng), std::invalid_argument);
}

TEST_CASE("sample mean of |x|^2 matches the variance at n = 1e6") {
  Rng rng(42, "power");
  const std::size_t n = 1000000;
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += std::norm(rng.cnormal(1.0));
  acc /= static_cast<double>(n);
  CHECK(acc == doctest::Approx(1.0).epsilon(0.01));
}

TEST_CASE("real-part variance is half the complex variance") {
  Rng rng(43, "realpart");
  const std::size_t n = 1000000;
  double sum = 0.0, sq = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double re = rng.cnormal(4.0).real();
    sum += re;
    sq += re * re;
  }
  const double mean = sum / n;
  const double var = sq / n - mean * mean;
  CHECK(var == doctest::Approx(2.0).epsilon(0.02));
}

TEST_CASE("equal (seed, stream) gives bitwise-equal sequences") {
  Rng a(123, "channel-noise");
  Rng b(123, "channel-noise");
  for (int i = 0; i < 1000; ++i) {
    CHECK(a.next_u64() == b.next_u64());
  }
  Rng c(123, "channel-noise");
  Rng d(123, "target-draw");
  bool all_equal = true;
  for (int i = 0; i < 100; ++i) all_equal = all_equal && (c.next_u64() == d.next_u64());
  CHECK_FALSE(all_equal);
}

TEST_CASE("forked streams are reproducible and order-independent") {
  Rng root(9, "train");
  Rng a = root.fork("epoch", 3).fork("minibatch", 5);
  // Drawing from root does not disturb the child's stream.
  root.next_u64();
  Rng b = root.fork("epoch", 3).fork("minibatch", 5);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("uniform stays in [0, 1)") {
  Rng rng(1, "u");
  for (int i = 0; i < 10000; ++i) {
    const double x = rng.uniform();
    CHECK(x >= 0.0);
    CHECK(x < 1.0);
  }
}
