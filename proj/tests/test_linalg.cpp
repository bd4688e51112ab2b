#include <doctest.h>

#include <cmath>

#include "jcas/linalg.hpp"
#include "jcas/rng.hpp"

using namespace jcas;

namespace {

CMat random_hermitian(std::size_t n, Rng& rng) {
  CMat a(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    a(i, i) = rng.normal(1.0);
    for (std::size_t j = i + 1; j < n; ++j) {
      a(i, j) = rng.cnormal(1.0);
      a(j, i) = std::conj(a(i, j));
    }
  }
  return a;
}

double reconstruction_residual(const CMat& a, const EigResult& eig) {
  // max |A V - V diag(lambda)|
  const std::size_t n = a.rows();
  double worst = 0.0;
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i) {
      cdouble av = 0.0;
      for (std::size_t j = 0; j < n; ++j) av += a(i, j) * eig.vectors(j, k);
      worst = std::max(worst, std::abs(av - eig.values[k] * eig.vectors(i, k)));
    }
  return worst;
}

}  // namespace

TEST_CASE("eig of the identity") {
  const EigResult r = hermitian_eig(CMat::identity(3));
  for (double v : r.values) CHECK(v == doctest::Approx(1.0));
}

TEST_CASE("eig of a diagonal matrix sorts descending") {
  CMat a(3, 3);
  a(0, 0) = 3.0;
  a(1, 1) = 1.0;
  a(2, 2) = 2.0;
  const EigResult r = hermitian_eig(a);
  CHECK(r.values[0] == doctest::Approx(3.0));
  CHECK(r.values[1] == doctest::Approx(2.0));
  CHECK(r.values[2] == doctest::Approx(1.0));
  // Permuted standard basis: eigenvector of lambda=3 is e0.
  CHECK(std::abs(r.vectors(0, 0)) == doctest::Approx(1.0));
  CHECK(std::abs(r.vectors(2, 1)) == doctest::Approx(1.0));
}

TEST_CASE("rank-1 outer product has one unit eigenvalue") {
  Rng rng(5, "rank1");
  const std::size_t n = 6;
  CVec a(n);
  double norm = 0.0;
  for (auto& v : a) {
    v = rng.cnormal(1.0);
    norm += std::norm(v);
  }
  norm = std::sqrt(norm);
  for (auto& v : a) v /= norm;
  CMat m(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) m(i, j) = a[i] * std::conj(a[j]);
  const EigResult r = hermitian_eig(m);
  CHECK(r.values[0] == doctest::Approx(1.0).epsilon(1e-10));
  for (std::size_t k = 1; k < n; ++k) CHECK(std::abs(r.values[k]) < 1e-10);
  // First eigenvector collinear with a: |<v, a>| = 1.
  cdouble dot = 0.0;
  for (std::size_t i = 0; i < n; ++i) dot += std::conj(r.vectors(i, 0)) * a[i];
  CHECK(std::abs(dot) == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("eig reconstruction residual stays below 1e-8 on random matrices") {
  Rng rng(11, "eig-sweep");
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 2 + rng.next_u64() % 31;  // up to 32
    const CMat a = random_hermitian(n, rng);
    const EigResult r = hermitian_eig(a);
    const double scale = std::max(max_abs(a), 1e-30);
    CHECK(reconstruction_residual(a, r) < 1e-8 * scale);
    // Orthonormal columns.
    for (std::size_t c1 = 0; c1 < n; ++c1)
      for (std::size_t c2 = c1; c2 < n; ++c2) {
        cdouble dot = 0.0;
        for (std::size_t i = 0; i < n; ++i)
          dot += std::conj(r.vectors(i, c1)) * r.vectors(i, c2);
        const double expect = c1 == c2 ? 1.0 : 0.0;
        CHECK(std::abs(dot - expect) < 1e-9);
      }
  }
}

TEST_CASE("non-Hermitian input is rejected") {
  CMat a(2, 2);
  a(0, 1) = {1.0, 0.0};
  a(1, 0) = {0.5, 0.0};
  CHECK_THROWS_AS(hermitian_eig(a), std::invalid_argument);
}

TEST_CASE("lstsq with identity returns B") {
  const std::size_t n = 4;
  CMat b(n, 2);
  Rng rng(3, "lstsq");
  for (std::size_t i = 0; i < b.size(); ++i) b.data()[i] = rng.cnormal(1.0);
  const LstsqResult r = lstsq(CMat::identity(n), b);
  for (std::size_t i = 0; i < b.size(); ++i)
    CHECK(std::abs(r.x.data()[i] - b.data()[i]) < 1e-12);
  CHECK_FALSE(r.flagged);
}

TEST_CASE("lstsq solves a diagonal system") {
  CMat a(2, 2), b(2, 1);
  a(0, 0) = 2.0;
  a(1, 1) = 4.0;
  b(0, 0) = 2.0;
  b(1, 0) = 4.0;
  const LstsqResult r = lstsq(a, b);
  CHECK(std::abs(r.x(0, 0) - 1.0) < 1e-12);
  CHECK(std::abs(r.x(1, 0) - 1.0) < 1e-12);
}

TEST_CASE("lstsq recovers a constructed exact solution") {
  Rng rng(17, "lstsq-exact");
  CMat a(8, 3), x0(3, 2);
  for (std::size_t i = 0; i < a.size(); ++i) a.data()[i] = rng.cnormal(1.0);
  for (std::size_t i = 0; i < x0.size(); ++i) x0.data()[i] = rng.cnormal(1.0);
  const CMat b = cmatmul(a, x0);
  const LstsqResult r = lstsq(a, b);
  for (std::size_t i = 0; i < x0.size(); ++i)
    CHECK(std::abs(r.x.data()[i] - x0.data()[i]) < 1e-10);
}

TEST_CASE("lstsq residual is orthogonal to the column space") {
  Rng rng(19, "lstsq-orth");
  for (int trial = 0; trial < 50; ++trial) {
    CMat a(10, 4), b(10, 3);
    for (std::size_t i = 0; i < a.size(); ++i) a.data()[i] = rng.cnormal(1.0);
    for (std::size_t i = 0; i < b.size(); ++i) b.data()[i] = rng.cnormal(1.0);
    const LstsqResult r = lstsq(a, b);
    const CMat ax = cmatmul(a, r.x);
    CMat resid(10, 3);
    for (std::size_t i = 0; i < resid.size(); ++i)
      resid.data()[i] = ax.data()[i] - b.data()[i];
    const CMat proj = cmatmul_hn(a, resid);
    CHECK(max_abs(proj) < 1e-8 * max_abs(a) * max_abs(b));
  }
}

TEST_CASE("lstsq flags rank deficiency and returns the minimum-norm solution") {
  CMat a(4, 2), b(4, 1);
  for (std::size_t i = 0; i < 4; ++i) {
    a(i, 0) = 1.0;
    a(i, 1) = 1.0;  // duplicated column
    b(i, 0) = 2.0;
  }
  const LstsqResult r = lstsq(a, b);
  CHECK(r.flagged);
  // Minimum-norm splits the weight equally.
  CHECK(std::abs(r.x(0, 0) - 1.0) < 1e-10);
  CHECK(std::abs(r.x(1, 0) - 1.0) < 1e-10);
}

TEST_CASE("lstsq rejects wide systems") {
  CHECK_THROWS_AS(lstsq(CMat(2, 3), CMat(2, 1)), std::invalid_argument);
}

TEST_CASE("hankel layout") {
  const CVec v{{1, 0}, {2, 0}, {3, 0}, {4, 0}};
  const CMat h = hankel(v, 2);
  REQUIRE(h.rows() == 2);
  REQUIRE(h.cols() == 3);
  CHECK(h(0, 0).real() == 1.0);
  CHECK(h(0, 1).real() == 2.0);
  CHECK(h(0, 2).real() == 3.0);
  CHECK(h(1, 0).real() == 2.0);
  CHECK(h(1, 1).real() == 3.0);
  CHECK(h(1, 2).real() == 4.0);

  const CMat row = hankel(v, 1);
  CHECK(row.rows() == 1);
  CHECK(row.cols() == 4);
  const CMat col = hankel(v, 4);
  CHECK(col.rows() == 4);
  CHECK(col.cols() == 1);
  CHECK_THROWS_AS(hankel(v, 5), std::invalid_argument);
  CHECK_THROWS_AS(hankel(v, 0), std::invalid_argument);
}

TEST_CASE("dense eigenvalues of small matrices") {
  // Eigenvalues of [[0, 1], [-1, 0]] are +-i.
  CMat a(2, 2);
  a(0, 1) = 1.0;
  a(1, 0) = -1.0;
  auto ev = dense_eigenvalues(a);
  std::sort(ev.begin(), ev.end(),
            [](cdouble l, cdouble r) { return l.imag() < r.imag(); });
  CHECK(std::abs(ev[0] - cdouble{0.0, -1.0}) < 1e-10);
  CHECK(std::abs(ev[1] - cdouble{0.0, 1.0}) < 1e-10);

  // A 3x3 with known spectrum {1, 2, 3} via a triangular matrix.
  CMat t(3, 3);
  t(0, 0) = 1.0;
  t(1, 1) = 2.0;
  t(2, 2) = 3.0;
  t(0, 1) = {0.3, -0.4};
  t(0, 2) = {-1.0, 0.2};
  t(1, 2) = {0.7, 0.7};
  auto ev3 = dense_eigenvalues(t);
  std::sort(ev3.begin(), ev3.end(),
            [](cdouble l, cdouble r) { return l.real() < r.real(); });
  CHECK(std::abs(ev3[0] - cdouble{1.0, 0.0}) < 1e-9);
  CHECK(std::abs(ev3[1] - cdouble{2.0, 0.0}) < 1e-9);
  CHECK(std::abs(ev3[2] - cdouble{3.0, 0.0}) < 1e-9);
}
