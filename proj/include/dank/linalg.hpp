#pragma once

#include "dank/common.hpp"

namespace dank::linalg {

/// Eigendecomposition of a symmetric matrix, eigenvalues non-increasing.
struct EigenPair {
    Vector values;
    Matrix vectors;  // orthonormal columns, column k pairs with values[k]
};

struct MatrixNorms {
    double frobenius = 0.0;
    double spectral = 0.0;
    double nuclear = 0.0;
    double manhattan = 0.0;  // entry-wise l1
};

/// Relative symmetry tolerance: |A_ij - A_ji| <= kSymmetryTol * max(1, ||A||_F).
inline constexpr double kSymmetryTol = 1e-12;

bool is_symmetric(const Matrix& A, double rel_tol = kSymmetryTol);

/// Throws ConfigError when A is not square or not symmetric within tolerance.
void require_symmetric(const Matrix& A, const char* what);

/// Full eigendecomposition of a symmetric matrix (Householder tridiagonalisation
/// followed by implicit QR). Ties keep the solver's order after a stable sort.
EigenPair sym_eig(const Matrix& A);

/// Eigenvalues only, non-increasing.
Vector sym_eigenvalues(const Matrix& A);

/// Singular value soft-thresholding for symmetric input:
/// V * diag(sign(l) * max(0, |l| - threshold)) * V^T.
Matrix svt(const Matrix& A, double threshold);

/// As svt(), also reporting the nuclear norm of the result (sum of |shrunk values|).
Matrix svt(const Matrix& A, double threshold, double& nuclear_out);

/// svt(W W^T, threshold) for a tall W (n x k), computed through the k x k
/// matrix W^T W. Exact up to round-off; costs O(n k^2 + n^2 r) for r kept values.
Matrix svt_factored(const Matrix& W, double threshold, double& nuclear_out);

/// G with K ~= G G^T from the eigenpairs of K above rel_tol * lambda_max(K).
/// Returns an empty matrix when the kept rank exceeds max_rank.
Matrix psd_factor(const Matrix& K, double rel_tol, Index max_rank);

MatrixNorms norms(const Matrix& A);

double lambda_max(const Matrix& A);

/// Number of eigenvalues strictly above rel_tol * lambda_max.
Index numerical_rank(const Matrix& A, double rel_tol = 1e-6);

}  // namespace dank::linalg
