#pragma once

#include <cmath>
#include <functional>

#include "jcas/mat.hpp"

namespace jcas::testutil {

// Central finite differences of a scalar function with respect to every entry
// of `param` (perturbed in place and restored).
template <typename F>
Mat fd_grad(Mat& param, F&& eval, double eps = 1e-5) {
  Mat g(param.rows(), param.cols());
  for (std::size_t i = 0; i < param.size(); ++i) {
    const double orig = param.data()[i];
    param.data()[i] = orig + eps;
    const double up = eval();
    param.data()[i] = orig - eps;
    const double down = eval();
    param.data()[i] = orig;
    g.data()[i] = (up - down) / (2.0 * eps);
  }
  return g;
}

inline double l2_rel_err(const Mat& a, const Mat& b) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a.data()[i] - b.data()[i];
    num += d * d;
    den += b.data()[i] * b.data()[i];
  }
  return std::sqrt(num) / std::max(std::sqrt(den), 1e-12);
}

}  // namespace jcas::testutil
