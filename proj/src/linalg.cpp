#include "dank/linalg.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <vector>

namespace dank::linalg {

bool is_symmetric(const Matrix& A, double rel_tol) {
    if (A.rows() != A.cols()) return false;
    const double tol = rel_tol * std::max(1.0, A.norm());
    for (Index j = 0; j < A.cols(); ++j)
        for (Index i = j + 1; i < A.rows(); ++i)
            if (std::abs(A(i, j) - A(j, i)) > tol) return false;
    return true;
}

void require_symmetric(const Matrix& A, const char* what) {
    if (A.rows() != A.cols()) {
        std::ostringstream os;
        os << what << ": expected a square matrix, got " << A.rows() << "x" << A.cols();
        throw ConfigError(os.str());
    }
    if (!is_symmetric(A)) {
        throw ConfigError(std::string(what) + ": matrix is not symmetric");
    }
}

namespace {

// Eigen returns ascending eigenvalues; reorder to non-increasing with a stable
// sort so equal values keep the solver's relative order.
EigenPair sorted_pair(const Vector& values, const Matrix& vectors) {
    const Index n = values.size();
    std::vector<Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Index{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](Index a, Index b) { return values[a] > values[b]; });
    EigenPair out{Vector(n), Matrix(vectors.rows(), n)};
    for (Index k = 0; k < n; ++k) {
        out.values[k] = values[order[static_cast<std::size_t>(k)]];
        out.vectors.col(k) = vectors.col(order[static_cast<std::size_t>(k)]);
    }
    return out;
}

Eigen::SelfAdjointEigenSolver<Matrix> solve(const Matrix& A, int options) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(A, options);
    if (es.info() != Eigen::Success) {
        std::ostringstream os;
        os << "symmetric eigensolver did not converge (order " << A.rows()
           << ", ||A||_F = " << A.norm() << ")";
        throw NumericalError(os.str());
    }
    return es;
}

}  // namespace

EigenPair sym_eig(const Matrix& A) {
    require_symmetric(A, "sym_eig");
    if (A.rows() == 0) return {};
    auto es = solve(A, Eigen::ComputeEigenvectors);
    return sorted_pair(es.eigenvalues(), es.eigenvectors());
}

Vector sym_eigenvalues(const Matrix& A) {
    require_symmetric(A, "sym_eigenvalues");
    if (A.rows() == 0) return {};
    auto es = solve(A, Eigen::EigenvaluesOnly);
    Vector v = es.eigenvalues().reverse();
    return v;
}

Matrix svt(const Matrix& A, double threshold, double& nuclear_out) {
    if (!(threshold >= 0.0)) throw ConfigError("svt: threshold must be nonnegative");
    require_symmetric(A, "svt");
    if (threshold == 0.0) {
        // Identity map; the nuclear norm still needs the spectrum.
        nuclear_out = A.rows() == 0 ? 0.0 : sym_eigenvalues(A).cwiseAbs().sum();
        return A;
    }
    if (A.rows() == 0) {
        nuclear_out = 0.0;
        return A;
    }
    auto es = solve(A, Eigen::ComputeEigenvectors);
    const Vector& lam = es.eigenvalues();
    const Matrix& V = es.eigenvectors();
    Vector shrunk(lam.size());
    for (Index k = 0; k < lam.size(); ++k) {
        const double mag = std::max(0.0, std::abs(lam[k]) - threshold);
        shrunk[k] = lam[k] < 0 ? -mag : mag;
    }
    nuclear_out = shrunk.cwiseAbs().sum();

    // Only columns with a nonzero shrunk value contribute.
    std::vector<Index> keep;
    for (Index k = 0; k < shrunk.size(); ++k)
        if (shrunk[k] != 0.0) keep.push_back(k);
    Matrix W(A.rows(), static_cast<Index>(keep.size()));
    Vector s(static_cast<Index>(keep.size()));
    for (std::size_t c = 0; c < keep.size(); ++c) {
        W.col(static_cast<Index>(c)) = V.col(keep[c]);
        s[static_cast<Index>(c)] = shrunk[keep[c]];
    }
    Matrix out = W * s.asDiagonal() * W.transpose();
    // Exact symmetry for downstream consumers.
    Matrix sym = 0.5 * (out + out.transpose());
    return sym;
}

Matrix svt(const Matrix& A, double threshold) {
    double nuclear = 0.0;
    return svt(A, threshold, nuclear);
}

Matrix svt_factored(const Matrix& W, double threshold, double& nuclear_out) {
    if (!(threshold >= 0.0)) throw ConfigError("svt: threshold must be nonnegative");
    const Matrix S = W.transpose() * W;
    auto es = solve(S, Eigen::ComputeEigenvectors);
    const Vector& lam = es.eigenvalues();
    const Matrix& Q = es.eigenvectors();
    // Nonzero eigenvalues of W W^T are those of W^T W, with eigenvectors W q / sqrt(l).
    std::vector<Index> keep;
    nuclear_out = 0.0;
    for (Index k = 0; k < lam.size(); ++k) {
        if (lam[k] > threshold) {
            keep.push_back(k);
            nuclear_out += lam[k] - threshold;
        }
    }
    Matrix P(W.rows(), static_cast<Index>(keep.size()));
    for (std::size_t c = 0; c < keep.size(); ++c) {
        const Index k = keep[c];
        P.col(static_cast<Index>(c)) = (W * Q.col(k)) * std::sqrt((lam[k] - threshold) / lam[k]);
    }
    Matrix out = P * P.transpose();
    return 0.5 * (out + out.transpose());
}

Matrix psd_factor(const Matrix& K, double rel_tol, Index max_rank) {
    if (K.rows() == 0) return {};
    const EigenPair ep = sym_eig(K);
    const double cut = rel_tol * std::max(0.0, ep.values[0]);
    Index r = 0;
    while (r < ep.values.size() && ep.values[r] > cut) ++r;
    if (r > max_rank) return {};
    return ep.vectors.leftCols(r) * ep.values.head(r).cwiseSqrt().asDiagonal();
}

MatrixNorms norms(const Matrix& A) {
    MatrixNorms out;
    out.frobenius = A.norm();
    out.manhattan = A.cwiseAbs().sum();
    if (A.size() == 0) return out;
    Vector sv;
    if (A.rows() == A.cols() && is_symmetric(A)) {
        sv = sym_eigenvalues(A).cwiseAbs();
    } else {
        Eigen::JacobiSVD<Matrix> svd(A);
        sv = svd.singularValues();
    }
    out.spectral = sv.maxCoeff();
    out.nuclear = sv.sum();
    return out;
}

double lambda_max(const Matrix& A) {
    if (A.rows() == 0) return 0.0;
    return sym_eigenvalues(A)[0];
}

Index numerical_rank(const Matrix& A, double rel_tol) {
    if (A.rows() == 0) return 0;
    const Vector lam = sym_eigenvalues(A);
    const double cut = rel_tol * std::max(0.0, lam[0]);
    Index r = 0;
    for (Index k = 0; k < lam.size(); ++k)
        if (lam[k] > cut) ++r;
    return r;
}

}  // namespace dank::linalg
