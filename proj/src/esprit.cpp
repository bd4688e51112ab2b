#include "jcas/esprit.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace jcas {

CMat sample_covariance(const CMat& z) {
  if (z.cols() < 1) throw std::invalid_argument("sample_covariance: need u >= 1");
  CMat r = cmatmul_nh(z, z);
  const double inv = 1.0 / static_cast<double>(z.cols());
  for (std::size_t i = 0; i < r.size(); ++i) r.data()[i] *= inv;
  // Force exact Hermitian symmetry against rounding.
  for (std::size_t i = 0; i < r.rows(); ++i) {
    r(i, i) = r(i, i).real();
    for (std::size_t j = i + 1; j < r.cols(); ++j) {
      const cdouble m = 0.5 * (r(i, j) + std::conj(r(j, i)));
      r(i, j) = m;
      r(j, i) = std::conj(m);
    }
  }
  return r;
}

namespace {

EspritResult esprit_on_covariance(const CMat& r, std::size_t num_targets,
                                  double d_over_lambda) {
  const std::size_t k = r.rows();
  if (num_targets >= k)
    throw std::invalid_argument("esprit: target count must be below the aperture");
  EspritResult res;
  if (num_targets == 0) return res;

  const EigResult eig = hermitian_eig(r);
  // Dominant eigenvectors span the signal subspace.
  CMat upper(k - 1, num_targets), lower(k - 1, num_targets);
  for (std::size_t i = 0; i + 1 < k; ++i)
    for (std::size_t t = 0; t < num_targets; ++t) {
      upper(i, t) = eig.vectors(i, t);
      lower(i, t) = eig.vectors(i + 1, t);
    }
  const CMat psi = lstsq(upper, lower).x;
  const std::vector<cdouble> phases = dense_eigenvalues(psi);

  res.angles.reserve(num_targets);
  for (const cdouble& p : phases) {
    double s = std::arg(p) / (2.0 * std::numbers::pi * d_over_lambda);
    if (s < -1.0 || s > 1.0) {
      s = std::clamp(s, -1.0, 1.0);
      res.clamped = true;
    }
    res.angles.push_back(std::asin(s));
  }
  std::sort(res.angles.begin(), res.angles.end());
  return res;
}

}  // namespace

EspritResult esprit(const CMat& covariance, std::size_t num_targets,
                    const ArrayConfig& cfg) {
  if (covariance.rows() != cfg.num_antennas || covariance.cols() != cfg.num_antennas)
    throw std::invalid_argument("esprit: covariance does not match the array");
  return esprit_on_covariance(covariance, num_targets, cfg.d_over_lambda);
}

EspritResult esprit_single_snapshot(const CVec& snapshot, std::size_t num_targets,
                                    std::size_t subarray_len, const ArrayConfig& cfg) {
  if (snapshot.size() != cfg.num_antennas)
    throw std::invalid_argument("esprit_single_snapshot: snapshot length mismatch");
  const std::size_t k = snapshot.size();
  if (subarray_len < 1 || subarray_len > k)
    throw std::invalid_argument("esprit_single_snapshot: subarray length out of range");
  const std::size_t cols = k - subarray_len + 1;
  if (num_targets >= std::min(subarray_len, cols))
    throw std::invalid_argument("esprit_single_snapshot: too many targets for the lift");
  const CMat h = hankel(snapshot, subarray_len);
  CMat r = cmatmul_nh(h, h);
  const double inv = 1.0 / static_cast<double>(cols);
  for (std::size_t i = 0; i < r.size(); ++i) r.data()[i] *= inv;
  return esprit_on_covariance(r, num_targets, cfg.d_over_lambda);
}

EspritResult esprit_scan(const CMat& snapshots, std::size_t num_targets,
                         const ArrayConfig& cfg) {
  if (num_targets == 0) return {};
  if (snapshots.cols() == 1) {
    CVec z(snapshots.rows());
    for (std::size_t i = 0; i < z.size(); ++i) z[i] = snapshots(i, 0);
    const std::size_t l = (cfg.num_antennas + 1) / 2;
    return esprit_single_snapshot(z, num_targets, l, cfg);
  }
  return esprit(sample_covariance(snapshots), num_targets, cfg);
}

}  // namespace jcas
