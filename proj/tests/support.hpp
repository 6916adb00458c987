#pragma once

// Helpers shared by the test binaries. Nothing here calls the library code
// under test, so the helpers can serve as independent oracles.

#include "dank/common.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <vector>

namespace testing {

using dank::Index;
using dank::Matrix;
using dank::Vector;

inline Matrix random_matrix(Index r, Index c, std::mt19937_64& rng) {
    std::normal_distribution<double> n(0.0, 1.0);
    Matrix A(r, c);
    for (Index i = 0; i < r; ++i)
        for (Index j = 0; j < c; ++j) A(i, j) = n(rng);
    return A;
}

inline Matrix random_symmetric(Index n, std::mt19937_64& rng) {
    const Matrix A = random_matrix(n, n, rng);
    return 0.5 * (A + A.transpose());
}

/// Gaussian kernel written out directly, one pair at a time.
inline Matrix rbf(const Matrix& A, const Matrix& B, double sigma) {
    Matrix K(A.rows(), B.rows());
    for (Index i = 0; i < A.rows(); ++i)
        for (Index j = 0; j < B.rows(); ++j)
            K(i, j) = std::exp(-(A.row(i) - B.row(j)).squaredNorm() / (2.0 * sigma * sigma));
    return K;
}

inline Matrix random_gram(Index n, Index d, double sigma, std::mt19937_64& rng) {
    const Matrix X = random_matrix(n, d, rng);
    return rbf(X, X, sigma);
}

/// Balanced +-1 labels in random order.
inline Vector random_labels(Index n, std::mt19937_64& rng) {
    Vector y(n);
    for (Index i = 0; i < n; ++i) y[i] = i % 2 == 0 ? 1.0 : -1.0;
    std::shuffle(y.data(), y.data() + n, rng);
    return y;
}

/// Uniform box draw, then the heavier class is scaled down so alpha'y = 0.
inline Vector random_feasible(const Vector& y, double C, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, C);
    Vector a(y.size());
    for (Index i = 0; i < y.size(); ++i) a[i] = u(rng);
    double pos = 0.0, neg = 0.0;
    for (Index i = 0; i < y.size(); ++i) (y[i] > 0 ? pos : neg) += a[i];
    for (Index i = 0; i < y.size(); ++i) {
        if (y[i] > 0 && pos > neg) a[i] *= neg / pos;
        if (y[i] < 0 && neg > pos) a[i] *= pos / neg;
    }
    return a;
}

/// Uniform point of the box [0, C]^n.
inline Vector random_box(Index n, double C, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, C);
    Vector a(n);
    for (Index i = 0; i < n; ++i) a[i] = u(rng);
    return a;
}

/// Central differences of f at x.
inline Vector central_fd(const std::function<double(const Vector&)>& f, const Vector& x, double h) {
    Vector g(x.size());
    for (Index i = 0; i < x.size(); ++i) {
        Vector p = x, m = x;
        p[i] += h;
        m[i] -= h;
        g[i] = (f(p) - f(m)) / (2.0 * h);
    }
    return g;
}

/// Projection onto {0 <= x <= C, s'x = 0} by bisection on the multiplier mu of
/// x(mu) = clip(z - mu s). s'x(mu) is non-increasing in mu.
inline Vector bisect_projection(const Vector& z, const Vector& s, double C) {
    auto at = [&](double mu) {
        Vector x(z.size());
        for (Index i = 0; i < z.size(); ++i) x[i] = std::clamp(z[i] - mu * s[i], 0.0, C);
        return x;
    };
    double lo = -(z.cwiseAbs().maxCoeff() + C + 1.0), hi = -lo;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (s.dot(at(mid)) > 0.0) lo = mid;
        else hi = mid;
    }
    return at(0.5 * (lo + hi));
}

/// Exhaustive active-set projection for small n: every coordinate is fixed at 0,
/// fixed at C, or free; the free ones are z_i - mu s_i with mu from s'x = 0.
inline Vector brute_projection(const Vector& z, const Vector& s, double C) {
    const Index n = z.size();
    Index combos = 1;
    for (Index i = 0; i < n; ++i) combos *= 3;
    Vector best;
    double best_d = INFINITY;
    for (Index code = 0; code < combos; ++code) {
        Index c = code;
        std::vector<int> state(n);
        for (Index i = 0; i < n; ++i) {
            state[i] = static_cast<int>(c % 3);
            c /= 3;
        }
        double fixed = 0.0, zs = 0.0, ss = 0.0;
        for (Index i = 0; i < n; ++i) {
            if (state[i] == 1) fixed += s[i] * C;
            if (state[i] == 2) {
                zs += s[i] * z[i];
                ss += s[i] * s[i];
            }
        }
        double mu = 0.0;
        if (ss > 0.0) mu = (zs + fixed) / ss;
        else if (std::abs(fixed) > 1e-12) continue;
        Vector x(n);
        bool ok = true;
        for (Index i = 0; i < n; ++i) {
            x[i] = state[i] == 0 ? 0.0 : state[i] == 1 ? C : z[i] - mu * s[i];
            if (x[i] < -1e-12 || x[i] > C + 1e-12) ok = false;
        }
        if (!ok || std::abs(s.dot(x)) > 1e-9) continue;
        const double d = (x - z).squaredNorm();
        if (d < best_d) {
            best_d = d;
            best = x;
        }
    }
    return best;
}

/// Two Gaussian clouds centred at (+-1.5, 0) with spread 0.4: first half +1.
inline void separable_clouds(Index n, std::uint64_t seed, Matrix& X, Vector& y) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd(0.0, 0.4);
    X.resize(n, 2);
    y.resize(n);
    for (Index i = 0; i < n; ++i) {
        y[i] = i < n / 2 ? 1.0 : -1.0;
        X(i, 0) = y[i] * 1.5 + nd(rng);
        X(i, 1) = nd(rng);
    }
}

/// Symmetric eigenvalues through Eigen's self-adjoint solver.
inline Vector eigenvalues(const Matrix& A) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(A, Eigen::EigenvaluesOnly);
    return es.eigenvalues();
}

/// Singular values through Jacobi SVD, a different algorithm from the library's.
inline Vector singular_values(const Matrix& A) {
    Eigen::JacobiSVD<Matrix> svd(A);
    return svd.singularValues();
}

/// Plain SVM dual 1'a - 1/2 a'Y K Y a.
inline double svm_dual(const Vector& a, const Vector& y, const Matrix& K) {
    const Vector ay = a.cwiseProduct(y);
    return a.sum() - 0.5 * ay.dot(K * ay);
}

/// Reference SVM dual by unaccelerated projected gradient with step 1/lambda_max(K).
inline Vector reference_svm(const Matrix& K, const Vector& y, double C, int iters) {
    const double L = std::max(eigenvalues(K).maxCoeff(), 1e-12);
    Vector a = Vector::Zero(y.size());
    for (int t = 0; t < iters; ++t) {
        const Vector g = Vector::Ones(y.size()) - y.cwiseProduct(K * a.cwiseProduct(y));
        a = bisect_projection(a + g / L, y, C);
    }
    return a;
}

/// KKT bias of a plain SVM solution: median over margin support vectors, else
/// the midpoint of the interval left by bound-active points.
inline double reference_bias(const Vector& a, const Vector& y, const Matrix& K, double C) {
    const Vector g = K * a.cwiseProduct(y);
    std::vector<double> free;
    double lo = -INFINITY, hi = INFINITY;
    for (Index i = 0; i < y.size(); ++i) {
        const double b = y[i] - g[i];
        if (a[i] > 1e-6 * C && a[i] < (1 - 1e-6) * C) free.push_back(b);
        else if (a[i] <= 1e-6 * C) (y[i] > 0 ? lo : hi) = y[i] > 0 ? std::max(lo, b) : std::min(hi, b);
        else (y[i] > 0 ? hi : lo) = y[i] > 0 ? std::min(hi, b) : std::max(lo, b);
    }
    if (!free.empty()) {
        std::sort(free.begin(), free.end());
        const size_t m = free.size();
        return m % 2 ? free[m / 2] : 0.5 * (free[m / 2 - 1] + free[m / 2]);
    }
    return 0.5 * (lo + hi);
}

}  // namespace testing
