#include "dank/kernel.hpp"

#include "dank/linalg.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace dank::kernel {

namespace {

void require_finite(const Matrix& X, const char* what) {
    if (!X.allFinite()) throw DataError(std::string(what) + ": features must be finite");
}

void require_sigma(double sigma) {
    if (!(sigma > 0.0) || !std::isfinite(sigma)) {
        std::ostringstream os;
        os << "kernel width sigma must be positive and finite, got " << sigma;
        throw ConfigError(os.str());
    }
}

}  // namespace

Matrix squared_distances(const Matrix& A, const Matrix& B) {
    if (A.cols() != B.cols()) {
        std::ostringstream os;
        os << "feature dimension mismatch: " << A.cols() << " vs " << B.cols();
        throw ConfigError(os.str());
    }
    const Vector na = A.rowwise().squaredNorm();
    const Vector nb = B.rowwise().squaredNorm();
    Matrix D = -2.0 * (A * B.transpose());
    D.colwise() += na;
    D.rowwise() += nb.transpose();
    // Cancellation noise of order eps * (|a|^2 + |b|^2) is treated as zero distance,
    // so coincident points always map to exactly 1.
    const double eps = 8.0 * std::numeric_limits<double>::epsilon();
    for (Index j = 0; j < D.cols(); ++j)
        for (Index i = 0; i < D.rows(); ++i)
            if (D(i, j) <= eps * (na[i] + nb[j])) D(i, j) = 0.0;
    return D;
}

Matrix cross_gram(const Matrix& X_train, const Matrix& X_test, double sigma) {
    require_sigma(sigma);
    require_finite(X_train, "cross_gram");
    require_finite(X_test, "cross_gram");
    const double scale = -1.0 / (2.0 * sigma * sigma);
    return (squared_distances(X_train, X_test) * scale).array().exp().matrix();
}

Matrix gaussian_gram(const Matrix& X, double sigma) {
    if (X.rows() < 1 || X.cols() < 1) throw ConfigError("gaussian_gram: empty feature matrix");
    Matrix K = cross_gram(X, X, sigma);
    Matrix sym = 0.5 * (K + K.transpose());
    sym.diagonal().setOnes();
    return sym;
}

void validate_gram(const Matrix& K) {
    if (K.rows() != K.cols()) throw DataError("kernel matrix must be square");
    if (!K.allFinite()) throw DataError("kernel matrix has non-finite entries");
    if (!linalg::is_symmetric(K)) throw DataError("kernel matrix is not symmetric");
    const Vector lam = linalg::sym_eigenvalues(K);
    const double top = lam[0];
    const double bottom = lam[lam.size() - 1];
    if (bottom < -1e-8 * std::max(1.0, top)) {
        std::ostringstream os;
        os << "kernel matrix is not positive semi-definite (lambda_min = " << bottom
           << ", lambda_max = " << top << ")";
        throw DataError(os.str());
    }
}

}  // namespace dank::kernel
