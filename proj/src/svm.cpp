#include "dank/svm.hpp"

#include "dank/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace dank::svm {

SvmModel train(const Matrix& X, const Vector& y, const TrainOptions& opts) {
    if (X.rows() < 2) throw DataError("training needs at least two samples");
    if (y.size() != X.rows()) throw DataError("feature rows and label count differ");
    solver::validate_labels(y, opts.with_bias);

    SvmModel m;
    m.X_train = X;
    m.scaled = opts.scale_features;
    if (opts.scale_features) {
        m.scaler = data::fit_minmax(X);
        m.X_scaled = data::apply_minmax(m.scaler, X);
    } else {
        m.X_scaled = X;
    }
    m.y = y;
    m.sigma = opts.sigma;
    m.with_bias = opts.with_bias;

    const Matrix K = kernel::gaussian_gram(m.X_scaled, opts.sigma);
    solver::SolverConfig cfg = opts.solver;
    cfg.hyperplane = opts.with_bias;
    if (opts.auto_eta && !cfg.freeze_f) cfg.eta = solver::default_eta(K, y, cfg);
    m.config = cfg;

    auto res = solver::solve(K, y, cfg);
    m.alpha = std::move(res.state.alpha);
    m.F = std::move(res.F);
    m.iterations = res.trace.iterations;
    m.objective = res.objective;
    m.warnings = std::move(res.trace.warnings);
    m.bias = opts.with_bias ? recover_bias(m.alpha, y, m.F, K, cfg.C) : 0.0;
    return m;
}

Vector expansion(const Vector& alpha, const Vector& y, const Matrix& F, const Matrix& K) {
    return F.cwiseProduct(K) * alpha.cwiseProduct(y);
}

std::pair<double, double> kkt_bias_interval(const Vector& alpha, const Vector& y, const Matrix& F,
                                            const Matrix& K, double C) {
    const Vector g = expansion(alpha, y, F, K);
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();
    const double eps = 1e-6 * C;
    for (Index i = 0; i < alpha.size(); ++i) {
        const double edge = y[i] - g[i];  // bias putting point i exactly on its margin
        const bool at_zero = alpha[i] <= eps;
        const bool at_c = alpha[i] >= C - eps;
        // alpha_i = 0 needs y_i f_i >= 1; alpha_i = C needs y_i f_i <= 1.
        if (at_zero) {
            if (y[i] > 0) lo = std::max(lo, edge);
            else hi = std::min(hi, edge);
        } else if (at_c) {
            if (y[i] > 0) hi = std::min(hi, edge);
            else lo = std::max(lo, edge);
        }
    }
    return {lo, hi};
}

double recover_bias(const Vector& alpha, const Vector& y, const Matrix& F, const Matrix& K, double C) {
    const Vector g = expansion(alpha, y, F, K);
    std::vector<double> cand;
    for (Index i = 0; i < alpha.size(); ++i)
        if (alpha[i] > 1e-6 * C && alpha[i] < (1.0 - 1e-6) * C) cand.push_back(y[i] - g[i]);
    if (!cand.empty()) {
        const std::size_t mid = cand.size() / 2;
        std::nth_element(cand.begin(), cand.begin() + static_cast<long>(mid), cand.end());
        if (cand.size() % 2 == 1) return cand[mid];
        const double upper = cand[mid];
        const double lower = *std::max_element(cand.begin(), cand.begin() + static_cast<long>(mid));
        return 0.5 * (lower + upper);
    }
    const auto [lo, hi] = kkt_bias_interval(alpha, y, F, K, C);
    const bool flo = std::isfinite(lo), fhi = std::isfinite(hi);
    if (flo && fhi) return 0.5 * (lo + hi);
    if (flo) return lo;
    if (fhi) return hi;
    return 0.0;
}

namespace {

/// ranks[k] = 1-based position of k when `order` is sorted by key, ties by index.
std::vector<Index> ranks_by(const Eigen::Ref<const Vector>& key) {
    const Index n = key.size();
    std::vector<Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Index{0});
    std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) { return key[a] < key[b]; });
    std::vector<Index> rank(static_cast<std::size_t>(n));
    for (Index p = 0; p < n; ++p) rank[static_cast<std::size_t>(order[static_cast<std::size_t>(p)])] = p + 1;
    return rank;
}

}  // namespace

Matrix reciprocal_nn(const Matrix& X_train, const Matrix& X_test) {
    if (X_train.cols() != X_test.cols()) {
        std::ostringstream os;
        os << "feature dimension mismatch: model has " << X_train.cols() << ", input has "
           << X_test.cols();
        throw DataError(os.str());
    }
    const Matrix D = kernel::squared_distances(X_train, X_test);
    const Index n = D.rows(), m = D.cols();
    Matrix R(n, m);  // r: rank of test j among tests, seen from train i
    for (Index i = 0; i < n; ++i) {
        const Vector row = D.row(i).transpose();
        const auto rk = ranks_by(row);
        for (Index j = 0; j < m; ++j) R(i, j) = static_cast<double>(rk[static_cast<std::size_t>(j)]);
    }
    Matrix M(n, m);
    for (Index j = 0; j < m; ++j) {
        const auto rk = ranks_by(D.col(j));
        for (Index i = 0; i < n; ++i)
            M(i, j) = 1.0 / (R(i, j) * static_cast<double>(rk[static_cast<std::size_t>(i)]));
    }
    return M;
}

std::vector<Index> extension_sources(const Matrix& M) {
    std::vector<Index> src(static_cast<std::size_t>(M.cols()));
    for (Index j = 0; j < M.cols(); ++j) {
        Index best = 0;
        for (Index i = 1; i < M.rows(); ++i)
            if (M(i, j) > M(best, j)) best = i;
        src[static_cast<std::size_t>(j)] = best;
    }
    return src;
}

Matrix extend_F(const Matrix& F, const Matrix& M) {
    if (F.rows() != M.rows()) throw ConfigError("extend_F: F and M disagree on the training size");
    const auto src = extension_sources(M);
    Matrix out(F.rows(), M.cols());
    for (Index j = 0; j < M.cols(); ++j) out.col(j) = F.col(src[static_cast<std::size_t>(j)]);
    return out;
}

Prediction predict(const SvmModel& model, const Matrix& X_test) {
    if (X_test.cols() != model.X_train.cols()) {
        std::ostringstream os;
        os << "feature dimension mismatch: model has " << model.X_train.cols() << ", input has "
           << X_test.cols();
        throw DataError(os.str());
    }
    const Matrix Xs = model.scaled ? data::apply_minmax(model.scaler, X_test) : X_test;
    const Matrix Kx = kernel::cross_gram(model.X_scaled, Xs, model.sigma);
    const Matrix Fx = extend_F(model.F, reciprocal_nn(model.X_scaled, Xs));
    Prediction p;
    p.decision = Fx.cwiseProduct(Kx).transpose() * model.alpha.cwiseProduct(model.y);
    p.decision.array() += model.bias;
    p.labels = p.decision.unaryExpr([](double v) { return v >= 0.0 ? 1.0 : -1.0; });
    return p;
}

double accuracy(const Vector& predicted, const Vector& truth) {
    if (predicted.size() != truth.size() || truth.size() == 0)
        throw DataError("accuracy: length mismatch or empty input");
    Index hits = 0;
    for (Index i = 0; i < truth.size(); ++i)
        if (predicted[i] == truth[i]) ++hits;
    return static_cast<double>(hits) / static_cast<double>(truth.size());
}

}  // namespace dank::svm
