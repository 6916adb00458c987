#include "doctest.h"
#include "support.hpp"

#include "dank/data.hpp"
#include "dank/svr.hpp"

using namespace dank;
using namespace dank::svr;

namespace {

solver::SolverConfig config(double C, double tau, double eta) {
    solver::SolverConfig c;
    c.C = C;
    c.tau = tau;
    c.eta = eta;
    return c;
}

// Uniform box draws for both blocks, then the larger block scaled so 1'(ah - ac) = 0.
void random_pair(Index n, double C, std::mt19937_64& rng, Vector& ah, Vector& ac) {
    std::uniform_real_distribution<double> u(0.0, C);
    ah.resize(n);
    ac.resize(n);
    for (Index i = 0; i < n; ++i) {
        ah[i] = u(rng);
        ac[i] = u(rng);
    }
    const double sh = ah.sum(), sc = ac.sum();
    if (sh > sc) ah *= sc / sh;
    else ac *= sh / sc;
}

// Plain eps-SVR dual over the stacked vector, solved by unaccelerated projected gradient.
void reference_svr(const Matrix& K, const Vector& y, double C, double eps, int iters, Vector& ah, Vector& ac) {
    const Index n = y.size();
    const double L = 2.0 * testing::eigenvalues(K).maxCoeff();
    Vector z = Vector::Zero(2 * n), s(2 * n);
    s << Vector::Ones(n), -Vector::Ones(n);
    for (int t = 0; t < iters; ++t) {
        const Vector d = z.head(n) - z.tail(n);
        const Vector Kd = K * d;
        Vector g(2 * n);
        g << -eps * Vector::Ones(n) - Kd + y, -eps * Vector::Ones(n) + Kd - y;
        z = testing::bisect_projection(z + g / L, s, C);
    }
    ah = z.head(n);
    ac = z.tail(n);
}

}  // namespace

TEST_CASE("svr_gamma examples") {
    std::mt19937_64 rng(1);
    const Matrix K = testing::random_gram(3, 2, 1.0, rng);
    Vector a(3);
    a << 0.3, 0.1, 0.7;
    CHECK(svr_gamma(a, a, K, 1.0).norm() == 0.0);

    Matrix K1(1, 1);
    K1 << 1;
    Vector h(1), c(1);
    h << 2.5;
    c << 0.5;
    CHECK(svr_gamma(h, c, K1, 1.0)(0, 0) == doctest::Approx(1.0));

    Vector ah, ac;
    random_pair(3, 1.0, rng, ah, ac);
    const Matrix G = svr_gamma(ah, ac, K, 0.6);
    const Vector d = ah - ac;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) CHECK(G(i, j) == doctest::Approx(d[i] * K(i, j) * d[j] / (4 * 0.6)));
}

TEST_CASE("svr_f mirrors f_of_alpha") {
    std::mt19937_64 rng(2);
    const Matrix K = testing::random_gram(3, 2, 1.0, rng);
    const Vector z = Vector::Zero(3);
    CHECK((svr_f(z, z, K, config(1, 0.01, 1)) - ((3 - 0.005) / 3) * Matrix::Ones(3, 3)).norm() < 1e-12);
    CHECK((svr_f(z, z, K, config(1, 0.0, 1)) - Matrix::Ones(3, 3)).norm() < 1e-12);

    // inner minimality against PSD perturbations
    const solver::SolverConfig c = config(1.0, 0.2, 0.4);
    Vector ah, ac;
    random_pair(3, 1.0, rng, ah, ac);
    const Matrix target = Matrix::Ones(3, 3) + svr_gamma(ah, ac, K, c.eta);
    const Matrix F = svr_f(ah, ac, K, c);
    auto inner = [&](const Matrix& G) {
        return (G - target).squaredNorm() + c.tau * testing::eigenvalues(G).cwiseAbs().sum();
    };
    int worse = 0;
    for (int k = 0; k < 500; ++k) {
        const Matrix B = testing::random_matrix(3, 3, rng);
        if (inner(F + 0.05 * B * B.transpose() / B.squaredNorm()) < inner(F) - 1e-12) ++worse;
    }
    CHECK(worse == 0);
}

TEST_CASE("svr_grad examples") {
    std::mt19937_64 rng(3);
    const Index n = 5;
    const Matrix K = testing::random_gram(n, 2, 0.8, rng);
    Vector y(n);
    for (Index i = 0; i < n; ++i) y[i] = std::sin(static_cast<double>(i));
    const double eps = 0.1;
    const solver::SolverConfig c = config(1.0, 0.01, 0.3);
    const Vector z = Vector::Zero(n);
    auto [gh0, gc0] = svr_grad(z, z, K, y, eps, c);
    CHECK((gh0 - (y.array() - eps).matrix()).norm() < 1e-14);
    CHECK((gc0 - (-y.array() - eps).matrix()).norm() < 1e-14);

    for (int rep = 0; rep < 10; ++rep) {
        Vector ah, ac;
        random_pair(n, c.C, rng, ah, ac);
        auto [gh, gc] = svr_grad(ah, ac, K, y, eps, c);
        CHECK((gh + gc + 2 * eps * Vector::Ones(n)).cwiseAbs().maxCoeff() < 1e-12);
        const Vector fh = testing::central_fd(
            [&](const Vector& x) { return svr_objective_h(x, ac, K, y, eps, c); }, ah, 1e-5);
        const Vector fc = testing::central_fd(
            [&](const Vector& x) { return svr_objective_h(ah, x, K, y, eps, c); }, ac, 1e-5);
        CHECK((gh - fh).cwiseAbs().maxCoeff() <= 1e-5);
        CHECK((gc - fc).cwiseAbs().maxCoeff() <= 1e-5);
    }
}

TEST_CASE("lipschitz_svr") {
    // 2 (2 + 9 * 2 * 1 * 2 / 4) = 22
    CHECK(lipschitz_svr(2, 1.0, Matrix::Identity(2, 2), 1.0) == doctest::Approx(22.0));
    CHECK(lipschitz_svr(2, 1.0, Matrix::Identity(2, 2), 1e15) == doctest::Approx(4.0));

    std::mt19937_64 rng(4);
    const Index n = 10;
    const Matrix K = testing::random_gram(n, 2, 0.5, rng);
    Vector y(n);
    for (Index i = 0; i < n; ++i) y[i] = 0.1 * static_cast<double>(i);
    const solver::SolverConfig c = config(2.0, 0.01, 0.05);
    const double L = lipschitz_svr(n, c.C, K, c.eta);
    int violations = 0;
    for (int k = 0; k < 100; ++k) {
        Vector h1, c1, h2, c2;
        random_pair(n, c.C, rng, h1, c1);
        random_pair(n, c.C, rng, h2, c2);
        auto [gh1, gc1] = svr_grad(h1, c1, K, y, 0.1, c);
        auto [gh2, gc2] = svr_grad(h2, c2, K, y, 0.1, c);
        const double lhs = std::hypot((gh1 - gh2).norm(), (gc1 - gc2).norm());
        if (lhs > 2 * L * ((h1 - h2).norm() + (c1 - c2).norm())) ++violations;
    }
    CHECK(violations == 0);
}

TEST_CASE("F is Lipschitz in the SVR duals") {
    std::mt19937_64 rng(5);
    const Index n = 8;
    const Matrix K = testing::random_gram(n, 2, 0.7, rng);
    const solver::SolverConfig c = config(1.0, 0.1, 0.2);
    for (int k = 0; k < 50; ++k) {
        Vector h1, c1, h2, c2;
        random_pair(n, c.C, rng, h1, c1);
        random_pair(n, c.C, rng, h2, c2);
        const double lhs = (svr_f(h1, c1, K, c) - svr_f(h2, c2, K, c)).norm();
        const double rhs = K.norm() / (4 * c.eta) * (h1 - c1 + h2 - c2).norm() * (h1 - c1 - h2 + c2).norm();
        CHECK(lhs <= rhs + 1e-12);
    }
}

TEST_CASE("projection keeps both boxes and the equality") {
    std::mt19937_64 rng(6);
    std::normal_distribution<double> nd(0.3, 1.0);
    for (int rep = 0; rep < 20; ++rep) {
        Vector z(8);
        for (Index i = 0; i < 8; ++i) z[i] = nd(rng);
        const Vector p = project_svr(z, 1.0, solver::ProjectionMethod::exact, 10);
        CHECK(p.minCoeff() >= 0.0);
        CHECK(p.maxCoeff() <= 1.0);
        CHECK(std::abs(p.head(4).sum() - p.tail(4).sum()) < 1e-9);
        Vector s(8);
        s << Vector::Ones(4), -Vector::Ones(4);
        CHECK((p - testing::brute_projection(z, s, 1.0)).norm() < 1e-9);
    }
}

TEST_CASE("constant targets stay at zero duals and predict the constant") {
    Matrix X(6, 1);
    X << 0, 1, 2, 3, 4, 5;
    const Vector y = Vector::Constant(6, 2.5);
    SvrTrainOptions o;
    o.sigma = 0.5;
    o.epsilon = 0.0;
    const SvrModel m = svr_train(X, y, o);
    CHECK(m.alpha_hat.norm() == 0.0);
    CHECK(m.alpha_check.norm() == 0.0);
    Matrix T(3, 1);
    T << -1, 2.5, 10;
    const Vector p = svr_predict(m, T);
    for (Index j = 0; j < 3; ++j) CHECK(p[j] == doctest::Approx(2.5));
}

TEST_CASE("frozen solve on linear data matches a reference eps-SVR") {
    Matrix X(5, 1);
    X << 0, 0.25, 0.5, 0.75, 1.0;
    const Vector y = (2.0 * X.col(0)).array() + 0.5;
    const double eps = 0.05, C = 10.0, sigma = 0.5;
    SvrTrainOptions o;
    o.sigma = sigma;
    o.epsilon = eps;
    o.scale_features = false;
    o.scale_targets = false;
    o.solver.C = C;
    o.solver.tau = 0.0;
    o.solver.freeze_f = true;
    o.solver.tol = 1e-10;
    o.solver.t_max = 20000;
    const SvrModel m = svr_train(X, y, o);

    const Matrix K = testing::rbf(X, X, sigma);
    Vector ah, ac;
    reference_svr(K, y, C, eps, 50000, ah, ac);
    const Vector d = ah - ac;
    // bias from free variables of the reference
    double b = 0;
    int cnt = 0;
    const Vector g = K * d;
    for (Index i = 0; i < 5; ++i) {
        if (ah[i] > 1e-6 && ah[i] < C - 1e-6) b += y[i] - g[i] - eps, ++cnt;
        if (ac[i] > 1e-6 && ac[i] < C - 1e-6) b += y[i] - g[i] + eps, ++cnt;
    }
    REQUIRE(cnt > 0);
    b /= cnt;
    Matrix T(4, 1);
    T << 0.1, 0.4, 0.6, 0.9;
    const Vector ref = (testing::rbf(X, T, sigma).transpose() * d).array() + b;
    const Vector p = svr_predict(m, T);
    CHECK((p - ref).cwiseAbs().maxCoeff() <= 2 * eps);
    // training points sit inside the tube
    CHECK((svr_predict(m, X) - y).cwiseAbs().maxCoeff() <= eps + 1e-6);
}

TEST_CASE("iterates of svr_solve are feasible") {
    std::mt19937_64 rng(7);
    const Index n = 10;
    const Matrix K = testing::random_gram(n, 2, 0.6, rng);
    Vector y(n);
    for (Index i = 0; i < n; ++i) y[i] = std::cos(static_cast<double>(i));
    solver::SolverConfig c = config(1.0, 0.01, 0.5);
    c.t_max = 200;
    int bad = 0;
    auto ok = [&](const Vector& z) {
        return z.minCoeff() >= 0.0 && z.maxCoeff() <= c.C &&
               std::abs(z.head(n).sum() - z.tail(n).sum()) <= 1e-6 * std::max(1.0, z.norm());
    };
    const SvrSolveResult r = svr_solve(K, y, c, 0.1, [&](const solver::IterateView& it) {
        if (!ok(it.alpha) || !ok(it.theta) || !ok(it.beta)) ++bad;
    });
    CHECK(bad == 0);
    CHECK(r.trace.objective_history.size() == static_cast<size_t>(r.trace.iterations));
}

TEST_CASE("residuals shrink as C grows with eps = 0 and frozen F") {
    Matrix X(8, 1);
    for (Index i = 0; i < 8; ++i) X(i, 0) = static_cast<double>(i) / 7.0;
    Vector y(8);
    for (Index i = 0; i < 8; ++i) y[i] = std::sin(3.0 * X(i, 0));
    double prev = INFINITY;
    for (double C : {1.0, 10.0, 100.0}) {
        SvrTrainOptions o;
        o.sigma = 0.3;
        o.epsilon = 0.0;
        o.solver.C = C;
        o.solver.tau = 0.0;
        o.solver.freeze_f = true;
        o.solver.tol = 1e-10;
        o.solver.t_max = 50000;
        const SvrModel m = svr_train(X, y, o);
        const double r = (svr_predict(m, X) - y).cwiseAbs().sum();
        CHECK(r <= prev + 1e-9);
        prev = r;
    }
    CHECK(prev < 1e-2);
}

TEST_CASE("rmse") {
    Vector y(3), p(3);
    y << 1, 2, 5;
    p << 1, 2, 3;
    CHECK(rmse(y, y) == 0.0);
    CHECK(rmse(Vector::Constant(3, y.mean()), y) == doctest::Approx(1.0));
    const double mean = 8.0 / 3.0;
    const double denom = (1 - mean) * (1 - mean) + (2 - mean) * (2 - mean) + (5 - mean) * (5 - mean);
    CHECK(rmse(p, y) == doctest::Approx(4.0 / denom));
    // 4 / (25/9 + 4/9 + 49/9)
    CHECK(rmse(p, y) == doctest::Approx(36.0 / 78.0));
    CHECK_THROWS_AS(rmse(p, Vector::Ones(3)), DataError);
}
