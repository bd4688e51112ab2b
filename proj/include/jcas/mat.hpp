// Dense row-major matrices of doubles and of complex doubles.
#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace jcas {

using cdouble = std::complex<double>;

class Mat {
 public:
  Mat() = default;
  Mat(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), v_(rows * cols, fill) {}

  static Mat identity(std::size_t n) {
    Mat m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return v_.size(); }
  bool empty() const { return v_.empty(); }

  double& operator()(std::size_t i, std::size_t j) { return v_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return v_[i * cols_ + j]; }

  double* data() { return v_.data(); }
  const double* data() const { return v_.data(); }
  std::span<double> row(std::size_t i) { return {v_.data() + i * cols_, cols_}; }
  std::span<const double> row(std::size_t i) const { return {v_.data() + i * cols_, cols_}; }

  bool same_shape(const Mat& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }

  void fill(double x) { std::fill(v_.begin(), v_.end(), x); }

 private:
  std::size_t rows_ = 0, cols_ = 0;
  std::vector<double> v_;
};

// C (+)= A * B. C must be preallocated rows(A) x cols(B).
void gemm(const Mat& a, const Mat& b, Mat& c, bool accumulate);
// C (+)= A^T * B
void gemm_tn(const Mat& a, const Mat& b, Mat& c, bool accumulate);
// C (+)= A * B^T
void gemm_nt(const Mat& a, const Mat& b, Mat& c, bool accumulate);

Mat matmul(const Mat& a, const Mat& b);

// Complex dense matrix, row-major; std::complex<double> keeps entries as
// interleaved (re, im) pairs.
class CMat {
 public:
  CMat() = default;
  CMat(std::size_t rows, std::size_t cols, cdouble fill = {})
      : rows_(rows), cols_(cols), v_(rows * cols, fill) {}

  static CMat identity(std::size_t n) {
    CMat m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return v_.size(); }
  bool empty() const { return v_.empty(); }

  cdouble& operator()(std::size_t i, std::size_t j) { return v_[i * cols_ + j]; }
  cdouble operator()(std::size_t i, std::size_t j) const { return v_[i * cols_ + j]; }

  cdouble* data() { return v_.data(); }
  const cdouble* data() const { return v_.data(); }
  std::span<cdouble> row(std::size_t i) { return {v_.data() + i * cols_, cols_}; }
  std::span<const cdouble> row(std::size_t i) const { return {v_.data() + i * cols_, cols_}; }

 private:
  std::size_t rows_ = 0, cols_ = 0;
  std::vector<cdouble> v_;
};

using CVec = std::vector<cdouble>;

CMat cmatmul(const CMat& a, const CMat& b);
// A^H * B
CMat cmatmul_hn(const CMat& a, const CMat& b);
// A * B^H
CMat cmatmul_nh(const CMat& a, const CMat& b);
CMat adjoint(const CMat& a);

double max_abs(const CMat& a);

}  // namespace jcas
