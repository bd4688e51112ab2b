// Subspace angle estimation benchmark: covariance ESPRIT and a single-snapshot
// Hankel variant.
#pragma once

#include "jcas/array_channel.hpp"
#include "jcas/linalg.hpp"
#include "jcas/mat.hpp"

namespace jcas {

// R = (1/u) Z Z^H, Hermitian PSD by construction.
CMat sample_covariance(const CMat& z);

struct EspritResult {
  std::vector<double> angles;  // radians, ascending
  bool clamped = false;        // some arg(psi) mapped outside [-1, 1] before arcsin
};

// Rotational-invariance estimation on a covariance matrix with maximum-overlap
// subarrays. Requires T < K.
EspritResult esprit(const CMat& covariance, std::size_t num_targets,
                    const ArrayConfig& cfg);

// Single-snapshot variant: Hankel lift of the snapshot restores a rank-T
// factorization, then the covariance path runs with effective aperture L.
// Requires T < min(L, K - L + 1).
EspritResult esprit_single_snapshot(const CVec& snapshot, std::size_t num_targets,
                                    std::size_t subarray_len, const ArrayConfig& cfg);

// Dispatch: single-snapshot Hankel path for u = 1 (with L = ceil(K/2)),
// covariance path otherwise. T = 0 gives an empty result.
EspritResult esprit_scan(const CMat& snapshots, std::size_t num_targets,
                         const ArrayConfig& cfg);

}  // namespace jcas
