#include "doctest.h"
#include "support.hpp"

#include "dank/linalg.hpp"

using namespace dank;
using namespace dank::linalg;

namespace {

Matrix reconstruct(const EigenPair& e) {
    return e.vectors * e.values.asDiagonal() * e.vectors.transpose();
}

Matrix random_psd(Index n, std::mt19937_64& rng) {
    const Matrix B = testing::random_matrix(n, n, rng);
    return B * B.transpose();
}

}  // namespace

TEST_CASE("sym_eig on the identity") {
    const EigenPair e = sym_eig(Matrix::Identity(3, 3));
    CHECK((e.values - Vector::Ones(3)).norm() < 1e-14);
    CHECK((e.vectors.transpose() * e.vectors - Matrix::Identity(3, 3)).norm() < 1e-12);
}

TEST_CASE("sym_eig on diag(3, 1) gives axis vectors") {
    Matrix A = Matrix::Zero(2, 2);
    A(0, 0) = 3;
    A(1, 1) = 1;
    const EigenPair e = sym_eig(A);
    CHECK(e.values[0] == doctest::Approx(3.0));
    CHECK(e.values[1] == doctest::Approx(1.0));
    CHECK(std::abs(e.vectors(0, 0)) == doctest::Approx(1.0));
    CHECK(std::abs(e.vectors(1, 1)) == doctest::Approx(1.0));
    CHECK(std::abs(e.vectors(1, 0)) < 1e-14);
}

TEST_CASE("sym_eig reconstructs random symmetric matrices") {
    std::mt19937_64 rng(1);
    for (int rep = 0; rep < 20; ++rep) {
        const Matrix A = testing::random_symmetric(5, rng);
        const EigenPair e = sym_eig(A);
        CHECK((A - reconstruct(e)).norm() < 1e-10);
        CHECK((e.vectors.transpose() * e.vectors - Matrix::Identity(5, 5)).norm() < 1e-8);
        for (Index k = 1; k < 5; ++k) CHECK(e.values[k - 1] >= e.values[k]);
        // independent spectrum
        Vector ref = testing::eigenvalues(A).reverse();
        CHECK((ref - e.values).norm() < 1e-10);
    }
}

TEST_CASE("sym_eig is deterministic") {
    std::mt19937_64 rng(2);
    const Matrix A = testing::random_symmetric(30, rng);
    const EigenPair a = sym_eig(A), b = sym_eig(A);
    CHECK(a.values == b.values);
    CHECK(a.vectors == b.vectors);
}

TEST_CASE("non-symmetric input is rejected") {
    Matrix A = Matrix::Identity(3, 3);
    A(0, 1) = 1e-3;
    CHECK_THROWS_AS(sym_eig(A), ConfigError);
    CHECK_THROWS_AS(svt(A, 0.1), ConfigError);
    CHECK_THROWS_AS(sym_eig(Matrix::Zero(2, 3)), ConfigError);
    A(0, 1) = 1e-14;  // inside tolerance
    CHECK_NOTHROW(sym_eig(A));
}

TEST_CASE("svt analytic cases") {
    CHECK(svt(Matrix::Zero(4, 4), 0.005).norm() == 0.0);

    const Matrix ones = Matrix::Ones(3, 3);
    CHECK((svt(ones, 0.5) - (2.5 / 3.0) * ones).norm() < 1e-12);

    Matrix D = Matrix::Zero(2, 2);
    D(0, 0) = 2;
    D(1, 1) = 0.3;
    Matrix expect = Matrix::Zero(2, 2);
    expect(0, 0) = 1.5;
    CHECK((svt(D, 0.5) - expect).norm() < 1e-12);

    double nuc = 0;
    svt(ones, 0.5, nuc);
    CHECK(nuc == doctest::Approx(2.5));
    CHECK_THROWS_AS(svt(ones, -1.0), ConfigError);
}

TEST_CASE("svt shrinks negative eigenvalues toward zero too") {
    Matrix D = Matrix::Zero(2, 2);
    D(0, 0) = -2;
    D(1, 1) = 1;
    const Matrix S = svt(D, 0.5);
    CHECK(S(0, 0) == doctest::Approx(-1.5));
    CHECK(S(1, 1) == doctest::Approx(0.5));
}

TEST_CASE("svt with zero threshold is the identity map") {
    std::mt19937_64 rng(3);
    for (int rep = 0; rep < 10; ++rep) {
        const Matrix A = testing::random_symmetric(7, rng);
        CHECK((svt(A, 0.0) - A).norm() <= 1e-8 * A.norm());
    }
}

TEST_CASE("svt is non-expansive") {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(0.0, 3.0);
    for (int rep = 0; rep < 50; ++rep) {
        const Matrix A = testing::random_symmetric(6, rng), B = testing::random_symmetric(6, rng);
        const double t = u(rng);
        CHECK((svt(A, t) - svt(B, t)).norm() <= (A - B).norm() + 1e-12);
    }
}

TEST_CASE("svt keeps PSD input PSD and shifts the top eigenvalue") {
    std::mt19937_64 rng(5);
    for (int rep = 0; rep < 20; ++rep) {
        const Matrix A = random_psd(6, rng);
        const double lmax = testing::eigenvalues(A).maxCoeff();
        for (double t : {0.1, 0.5 * lmax, 2.0 * lmax}) {
            const Vector ev = testing::eigenvalues(svt(A, t));
            CHECK(ev.minCoeff() >= -1e-10);
            CHECK(ev.maxCoeff() == doctest::Approx(std::max(0.0, lmax - t)).epsilon(1e-10));
        }
    }
}

TEST_CASE("svt_factored matches svt on W W'") {
    std::mt19937_64 rng(6);
    for (Index k : {1, 3, 8}) {
        const Matrix W = testing::random_matrix(12, k, rng);
        const Matrix A = W * W.transpose();
        for (double t : {0.0, 0.3, 5.0}) {
            double n1 = 0, n2 = 0;
            const Matrix a = svt(A, t, n1), b = svt_factored(W, t, n2);
            CHECK((a - b).norm() < 1e-9 * std::max(1.0, A.norm()));
            CHECK(n1 == doctest::Approx(n2).epsilon(1e-9));
        }
    }
}

TEST_CASE("psd_factor reconstructs a low-rank PSD matrix") {
    std::mt19937_64 rng(7);
    const Matrix W = testing::random_matrix(10, 3, rng);
    const Matrix K = W * W.transpose();
    const Matrix G = psd_factor(K, 1e-12, 10);
    REQUIRE(G.rows() == 10);
    CHECK(G.cols() == 3);
    CHECK((G * G.transpose() - K).norm() < 1e-10 * K.norm());
    CHECK(psd_factor(K, 1e-12, 2).size() == 0);
}

TEST_CASE("norms of simple matrices") {
    const MatrixNorms I = norms(Matrix::Identity(3, 3));
    CHECK(I.frobenius == doctest::Approx(std::sqrt(3.0)));
    CHECK(I.spectral == doctest::Approx(1.0));
    CHECK(I.nuclear == doctest::Approx(3.0));
    CHECK(I.manhattan == doctest::Approx(3.0));

    const MatrixNorms J = norms(Matrix::Ones(2, 2));
    CHECK(J.frobenius == doctest::Approx(2.0));
    CHECK(J.spectral == doctest::Approx(2.0));
    CHECK(J.nuclear == doctest::Approx(2.0));
    CHECK(J.manhattan == doctest::Approx(4.0));
}

TEST_CASE("norms agree with an independent SVD") {
    std::mt19937_64 rng(8);
    for (int rep = 0; rep < 10; ++rep) {
        const Matrix A = testing::random_matrix(4, 5, rng);
        const Vector s = testing::singular_values(A);
        const MatrixNorms m = norms(A);
        CHECK(m.spectral == doctest::Approx(s.maxCoeff()).epsilon(1e-10));
        CHECK(m.nuclear == doctest::Approx(s.sum()).epsilon(1e-10));
        CHECK(m.frobenius == doctest::Approx(s.norm()).epsilon(1e-10));
        CHECK(m.manhattan == doctest::Approx(A.cwiseAbs().sum()));
    }
}

TEST_CASE("trace is at most the nuclear norm, with equality for PSD") {
    std::mt19937_64 rng(9);
    for (int rep = 0; rep < 20; ++rep) {
        const Matrix A = testing::random_symmetric(4, rng);
        const double nuc = testing::eigenvalues(A).cwiseAbs().sum();
        CHECK(norms(A).nuclear == doctest::Approx(nuc).epsilon(1e-10));
        CHECK(A.trace() <= norms(A).nuclear + 1e-12);
        const Matrix P = random_psd(4, rng);
        CHECK(norms(P).nuclear == doctest::Approx(P.trace()).epsilon(1e-10));
    }
}

TEST_CASE("lambda_max and numerical_rank") {
    std::mt19937_64 rng(10);
    const Matrix W = testing::random_matrix(9, 4, rng);
    const Matrix A = W * W.transpose();
    CHECK(lambda_max(A) == doctest::Approx(testing::eigenvalues(A).maxCoeff()).epsilon(1e-10));
    CHECK(numerical_rank(A) == 4);
    CHECK(numerical_rank(Matrix::Ones(5, 5)) == 1);
    CHECK(numerical_rank(Matrix::Identity(5, 5)) == 5);
    CHECK(is_symmetric(A));
}
