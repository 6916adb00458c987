#pragma once

#include "dank/common.hpp"

namespace dank::kernel {

/// Gaussian Gram matrix K_ij = exp(-||x_i - x_j||^2 / (2 sigma^2)) over the rows of X.
/// The result is exactly symmetric with a unit diagonal.
Matrix gaussian_gram(const Matrix& X, double sigma);

/// Train x test cross kernel, entry (i, j) = k(x_i, x'_j); shape n x m.
Matrix cross_gram(const Matrix& X_train, const Matrix& X_test, double sigma);

/// Squared Euclidean distances between rows, expanded form with round-off clamped to 0.
Matrix squared_distances(const Matrix& A, const Matrix& B);

/// Checks an externally supplied base kernel: square, symmetric, and
/// lambda_min >= -1e-8 * lambda_max. Throws DataError otherwise.
void validate_gram(const Matrix& K);

}  // namespace dank::kernel
