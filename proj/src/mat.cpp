#include "jcas/mat.hpp"

#include <algorithm>
#include <cmath>

namespace jcas {

void gemm(const Mat& a, const Mat& b, Mat& c, bool accumulate) {
  if (a.cols() != b.rows() || c.rows() != a.rows() || c.cols() != b.cols())
    throw std::invalid_argument("gemm: shape mismatch");
  if (!accumulate) c.fill(0.0);
  const std::size_t n = a.rows(), k = a.cols(), m = b.cols();
  for (std::size_t i = 0; i < n; ++i) {
    const double* arow = a.data() + i * k;
    double* crow = c.data() + i * m;
    for (std::size_t p = 0; p < k; ++p) {
      const double aip = arow[p];
      if (aip == 0.0) continue;
      const double* brow = b.data() + p * m;
      for (std::size_t j = 0; j < m; ++j) crow[j] += aip * brow[j];
    }
  }
}

void gemm_tn(const Mat& a, const Mat& b, Mat& c, bool accumulate) {
  if (a.rows() != b.rows() || c.rows() != a.cols() || c.cols() != b.cols())
    throw std::invalid_argument("gemm_tn: shape mismatch");
  if (!accumulate) c.fill(0.0);
  const std::size_t n = a.cols(), k = a.rows(), m = b.cols();
  for (std::size_t p = 0; p < k; ++p) {
    const double* arow = a.data() + p * n;
    const double* brow = b.data() + p * m;
    for (std::size_t i = 0; i < n; ++i) {
      const double aip = arow[i];
      if (aip == 0.0) continue;
      double* crow = c.data() + i * m;
      for (std::size_t j = 0; j < m; ++j) crow[j] += aip * brow[j];
    }
  }
}

void gemm_nt(const Mat& a, const Mat& b, Mat& c, bool accumulate) {
  if (a.cols() != b.cols() || c.rows() != a.rows() || c.cols() != b.rows())
    throw std::invalid_argument("gemm_nt: shape mismatch");
  if (!accumulate) c.fill(0.0);
  const std::size_t n = a.rows(), k = a.cols(), m = b.rows();
  for (std::size_t i = 0; i < n; ++i) {
    const double* arow = a.data() + i * k;
    double* crow = c.data() + i * m;
    for (std::size_t j = 0; j < m; ++j) {
      const double* brow = b.data() + j * k;
      double acc = 0.0;
      for (std::size_t p = 0; p < k; ++p) acc += arow[p] * brow[p];
      crow[j] += acc;
    }
  }
}

Mat matmul(const Mat& a, const Mat& b) {
  Mat c(a.rows(), b.cols());
  gemm(a, b, c, false);
  return c;
}

CMat cmatmul(const CMat& a, const CMat& b) {
  if (a.cols() != b.rows()) throw std::invalid_argument("cmatmul: shape mismatch");
  CMat c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t p = 0; p < a.cols(); ++p) {
      const cdouble aip = a(i, p);
      if (aip == 0.0) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += aip * b(p, j);
    }
  return c;
}

CMat cmatmul_hn(const CMat& a, const CMat& b) {
  if (a.rows() != b.rows()) throw std::invalid_argument("cmatmul_hn: shape mismatch");
  CMat c(a.cols(), b.cols());
  for (std::size_t p = 0; p < a.rows(); ++p)
    for (std::size_t i = 0; i < a.cols(); ++i) {
      const cdouble aip = std::conj(a(p, i));
      if (aip == 0.0) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += aip * b(p, j);
    }
  return c;
}

CMat cmatmul_nh(const CMat& a, const CMat& b) {
  if (a.cols() != b.cols()) throw std::invalid_argument("cmatmul_nh: shape mismatch");
  CMat c(a.rows(), b.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < b.rows(); ++j) {
      cdouble acc = 0.0;
      for (std::size_t p = 0; p < a.cols(); ++p) acc += a(i, p) * std::conj(b(j, p));
      c(i, j) = acc;
    }
  return c;
}

CMat adjoint(const CMat& a) {
  CMat c(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) c(j, i) = std::conj(a(i, j));
  return c;
}

double max_abs(const CMat& a) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a.data()[i]));
  return m;
}

}  // namespace jcas
