// Factorizations for small dense complex matrices.
#pragma once

#include "jcas/mat.hpp"

namespace jcas {

struct EigResult {
  std::vector<double> values;  // descending; ties keep original index order
  CMat vectors;                // orthonormal columns, vectors.col(i) <-> values[i]
};

// Eigendecomposition of a Hermitian matrix by cyclic Jacobi rotations.
// Input must satisfy max|A - A^H| < 1e-10 * max|A|; throws
// std::invalid_argument otherwise.
EigResult hermitian_eig(const CMat& a);

struct LstsqResult {
  CMat x;
  double cond = 0.0;     // sqrt of Gram-eigenvalue ratio
  bool flagged = false;  // rank deficient or cond > 1e12
};

// Minimum-norm least-squares solution of A X = B for A with rows >= cols.
LstsqResult lstsq(const CMat& a, const CMat& b);

// L x (K-L+1) Hankel matrix with entry (i, j) = v[i+j]; requires 1 <= L <= K.
CMat hankel(const CVec& v, std::size_t l);

// Eigenvalues of a small general complex matrix (characteristic polynomial +
// Durand-Kerner). Intended for n <= 8.
std::vector<cdouble> dense_eigenvalues(const CMat& a);

}  // namespace jcas
