#include "jcas/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace jcas {

namespace {

double offdiag_norm(const CMat& a) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j)
      if (i != j) s += std::norm(a(i, j));
  return std::sqrt(s);
}

}  // namespace

EigResult hermitian_eig(const CMat& a) {
  if (a.rows() != a.cols()) throw std::invalid_argument("hermitian_eig: matrix not square");
  const std::size_t n = a.rows();
  const double scale = max_abs(a);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (std::abs(a(i, j) - std::conj(a(j, i))) > 1e-10 * std::max(scale, 1e-300))
        throw std::invalid_argument("hermitian_eig: input not Hermitian within tolerance");

  // Work on the exactly Hermitian part.
  CMat h(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) h(i, j) = 0.5 * (a(i, j) + std::conj(a(j, i)));

  CMat v = CMat::identity(n);
  const double tol = 1e-14 * std::max(scale, 1e-300) * static_cast<double>(n);
  for (int sweep = 0; sweep < 60 && offdiag_norm(h) > tol; ++sweep) {
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const cdouble apq = h(p, q);
        const double m = std::abs(apq);
        if (m <= 1e-300) continue;
        const double app = h(p, p).real();
        const double aqq = h(q, q).real();
        const double phi = std::arg(apq);
        const cdouble eip(std::cos(phi), std::sin(phi));   // e^{+i phi}
        const cdouble eim = std::conj(eip);                // e^{-i phi}
        const double tau = (aqq - app) / (2.0 * m);
        const double t = (tau >= 0.0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;

        // Unitary G: G(p,p)=c, G(p,q)=s, G(q,p)=-s e^{-i phi}, G(q,q)=c e^{-i phi}.
        // Rows: H <- G^H H
        for (std::size_t j = 0; j < n; ++j) {
          const cdouble hp = h(p, j), hq = h(q, j);
          h(p, j) = c * hp - s * eip * hq;
          h(q, j) = s * hp + c * eip * hq;
        }
        // Columns: H <- H G, and accumulate V <- V G.
        for (std::size_t i = 0; i < n; ++i) {
          const cdouble hp = h(i, p), hq = h(i, q);
          h(i, p) = c * hp - s * eim * hq;
          h(i, q) = s * hp + c * eim * hq;
          const cdouble vp = v(i, p), vq = v(i, q);
          v(i, p) = c * vp - s * eim * vq;
          v(i, q) = s * vp + c * eim * vq;
        }
        h(p, q) = 0.0;
        h(q, p) = 0.0;
      }
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
    return h(i, i).real() > h(j, j).real();
  });

  EigResult res;
  res.values.resize(n);
  res.vectors = CMat(n, n);
  for (std::size_t k = 0; k < n; ++k) {
    res.values[k] = h(order[k], order[k]).real();
    for (std::size_t i = 0; i < n; ++i) res.vectors(i, k) = v(i, order[k]);
  }
  return res;
}

LstsqResult lstsq(const CMat& a, const CMat& b) {
  if (a.rows() < a.cols()) throw std::invalid_argument("lstsq: A needs rows >= cols");
  if (a.rows() != b.rows()) throw std::invalid_argument("lstsq: row count mismatch");
  const std::size_t n = a.cols();

  const CMat gram = cmatmul_hn(a, a);
  const CMat rhs = cmatmul_hn(a, b);
  EigResult eig = hermitian_eig(gram);

  const double lmax = eig.values.empty() ? 0.0 : std::max(eig.values[0], 0.0);
  const double cutoff = lmax * static_cast<double>(std::max(a.rows(), a.cols())) * 1e-14;

  LstsqResult res;
  double lmin_kept = lmax;
  std::size_t rank = 0;
  std::vector<double> pinv(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    if (eig.values[i] > cutoff && eig.values[i] > 0.0) {
      pinv[i] = 1.0 / eig.values[i];
      lmin_kept = eig.values[i];
      ++rank;
    }
  }
  res.cond = (rank > 0 && lmin_kept > 0.0) ? std::sqrt(lmax / lmin_kept)
                                           : std::numeric_limits<double>::infinity();
  res.flagged = rank < n || res.cond > 1e12;

  // X = V diag(pinv) V^H rhs
  CMat tmp = cmatmul_hn(eig.vectors, rhs);  // n x k
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < tmp.cols(); ++j) tmp(i, j) *= pinv[i];
  res.x = cmatmul(eig.vectors, tmp);
  return res;
}

CMat hankel(const CVec& v, std::size_t l) {
  const std::size_t k = v.size();
  if (l < 1 || l > k) throw std::invalid_argument("hankel: L out of range");
  CMat h(l, k - l + 1);
  for (std::size_t i = 0; i < l; ++i)
    for (std::size_t j = 0; j + l <= k; ++j) h(i, j) = v[i + j];
  return h;
}

std::vector<cdouble> dense_eigenvalues(const CMat& a) {
  if (a.rows() != a.cols()) throw std::invalid_argument("dense_eigenvalues: not square");
  const std::size_t n = a.rows();
  if (n == 0) return {};
  if (n == 1) return {a(0, 0)};
  if (n > 8) throw std::invalid_argument("dense_eigenvalues: intended for n <= 8");

  // Faddeev-LeVerrier: char poly lambda^n + c[n-1] lambda^(n-1) + ... + c[0].
  std::vector<cdouble> c(n);
  CMat m = a;
  cdouble ck = 0.0;
  for (std::size_t k = 1; k <= n; ++k) {
    if (k > 1) {
      CMat shifted = m;
      for (std::size_t i = 0; i < n; ++i) shifted(i, i) += ck;
      m = cmatmul(a, shifted);
    }
    cdouble tr = 0.0;
    for (std::size_t i = 0; i < n; ++i) tr += m(i, i);
    ck = -tr / static_cast<double>(k);
    c[n - k] = ck;
  }

  auto poly = [&](cdouble z) {
    cdouble p = 1.0;
    for (std::size_t i = 0; i < n; ++i) p = p * z + c[n - 1 - i];
    return p;
  };

  // Durand-Kerner.
  std::vector<cdouble> z(n);
  const cdouble g(0.4, 0.9);
  z[0] = g;
  for (std::size_t i = 1; i < n; ++i) z[i] = z[i - 1] * g;
  for (int it = 0; it < 500; ++it) {
    double delta = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      cdouble denom = 1.0;
      for (std::size_t j = 0; j < n; ++j)
        if (j != i) denom *= z[i] - z[j];
      if (std::abs(denom) < 1e-300) denom = 1e-300;
      const cdouble step = poly(z[i]) / denom;
      z[i] -= step;
      delta = std::max(delta, std::abs(step));
    }
    if (delta < 1e-14) break;
  }
  return z;
}

}  // namespace jcas
