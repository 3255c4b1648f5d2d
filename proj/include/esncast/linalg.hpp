#pragma once

#include <vector>

#include "esncast/common.hpp"

namespace esncast {

/// Solves A x = b for symmetric positive-definite A by in-place Cholesky.
/// A and b are destroyed; the solution lands in b. Returns false (leaving
/// b unspecified) when a pivot collapses, i.e. A is not SPD.
bool cholesky_solve_inplace(Matrix& A, std::vector<double>& b);

/// Minimum-norm solution of A x = b for symmetric PSD A via eigendecomposition,
/// dropping eigenvalues below rcond * max(eig). The fallback path for
/// rank-deficient normal equations; callers flag its use.
std::vector<double> pinv_solve(const Matrix& A, const std::vector<double>& b,
                               double rcond = 1e-12);

/// Largest-modulus eigenvalue of a general real square matrix.
double spectral_radius(const Matrix& A);

/// Largest singular value.
double max_singular_value(const Matrix& A);

/// Eigendecomposition of a symmetric matrix, eigenvalues descending.
/// Columns of `vectors` are the corresponding eigenvectors.
void symmetric_eigen(const Matrix& A, std::vector<double>& values, Matrix& vectors);

}  // namespace esncast
