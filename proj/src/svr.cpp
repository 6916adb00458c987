#include "dank/svr.hpp"

#include "dank/detail/accelerated.hpp"
#include "dank/kernel.hpp"
#include "dank/linalg.hpp"
#include "dank/svm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace dank::svr {

namespace {

void require_pair(const Vector& ah, const Vector& ac, const Matrix& K) {
    if (ah.size() != ac.size() || K.rows() != K.cols() || ah.size() != K.rows()) {
        std::ostringstream os;
        os << "shape mismatch: alpha_hat " << ah.size() << ", alpha_check " << ac.size() << ", K "
           << K.rows() << "x" << K.cols();
        throw ConfigError(os.str());
    }
}

void require_targets(const Vector& y, Index n) {
    if (y.size() != n) throw ConfigError("target length does not match K");
    for (Index i = 0; i < n; ++i)
        if (!std::isfinite(y[i])) throw DataError("targets must be finite");
}

double penalty(const Matrix& F, double nuclear, const solver::SolverConfig& cfg) {
    return cfg.eta * (F.array() - 1.0).matrix().squaredNorm() + cfg.tau * cfg.eta * nuclear;
}

}  // namespace

Matrix svr_gamma(const Vector& alpha_hat, const Vector& alpha_check, const Matrix& K, double eta) {
    require_pair(alpha_hat, alpha_check, K);
    const Vector d = alpha_hat - alpha_check;
    return (d.asDiagonal() * K * d.asDiagonal()) / (4.0 * eta);
}

SvrEvaluation svr_evaluate(const Vector& alpha_hat, const Vector& alpha_check, const Matrix& K,
                           const Vector& y, double epsilon, const solver::SolverConfig& cfg,
                           const Matrix* factor) {
    require_pair(alpha_hat, alpha_check, K);
    const Index n = K.rows();
    const Vector d = alpha_hat - alpha_check;
    SvrEvaluation ev;
    Vector v;
    double pen = 0.0;
    if (cfg.freeze_f) {
        ev.F = Matrix::Ones(n, n);
        ev.nuclear = static_cast<double>(n);
        v = K * d;
    } else {
        ev.F = solver::adaptive_matrix(d, K, cfg.eta, cfg.tau, ev.nuclear, factor);
        v = ev.F.cwiseProduct(K) * d;
        pen = penalty(ev.F, ev.nuclear, cfg);
    }
    ev.h = -epsilon * (alpha_hat.sum() + alpha_check.sum()) + y.dot(d) - 0.5 * d.dot(v) + pen;
    ev.g_hat = (y - v).array() - epsilon;
    ev.g_check = (v - y).array() - epsilon;
    return ev;
}

Matrix svr_f(const Vector& alpha_hat, const Vector& alpha_check, const Matrix& K,
             const solver::SolverConfig& cfg) {
    return svr_evaluate(alpha_hat, alpha_check, K, Vector::Zero(K.rows()), 0.0, cfg).F;
}

double svr_objective_h(const Vector& alpha_hat, const Vector& alpha_check, const Matrix& K,
                       const Vector& y, double epsilon, const solver::SolverConfig& cfg) {
    return svr_evaluate(alpha_hat, alpha_check, K, y, epsilon, cfg).h;
}

double svr_objective_H(const Vector& alpha_hat, const Vector& alpha_check, const Matrix& K,
                       const Vector& y, double epsilon, const Matrix& F,
                       const solver::SolverConfig& cfg) {
    require_pair(alpha_hat, alpha_check, K);
    const Vector d = alpha_hat - alpha_check;
    double h = -epsilon * (alpha_hat.sum() + alpha_check.sum()) + y.dot(d) -
               0.5 * d.dot(F.cwiseProduct(K) * d);
    if (!cfg.freeze_f) {
        const double nuc = cfg.tau == 0.0 ? 0.0 : linalg::norms(F).nuclear;
        h += penalty(F, nuc, cfg);
    }
    return h;
}

std::pair<Vector, Vector> svr_grad(const Vector& alpha_hat, const Vector& alpha_check, const Matrix& K,
                                   const Vector& y, double epsilon, const solver::SolverConfig& cfg) {
    auto ev = svr_evaluate(alpha_hat, alpha_check, K, y, epsilon, cfg);
    return {std::move(ev.g_hat), std::move(ev.g_check)};
}

double lipschitz_svr(Index n, double C, const Matrix& K, double eta) {
    const double nn = static_cast<double>(n);
    return 2.0 * (nn + 9.0 * nn * C * C * K.squaredNorm() / (4.0 * eta));
}

double svr_step_lipschitz(const Matrix& K, const solver::SolverConfig& cfg) {
    if (cfg.lipschitz > 0.0) return cfg.lipschitz;
    if (cfg.freeze_f || cfg.step == solver::StepRule::gram) return K.norm();
    return lipschitz_svr(K.rows(), cfg.C, K, cfg.eta);
}

Vector project_svr(const Vector& stacked, double C, solver::ProjectionMethod method, int rounds) {
    const Index n = stacked.size() / 2;
    Vector s(2 * n);
    s.head(n).setOnes();
    s.tail(n).setConstant(-1.0);
    return solver::project_feasible(stacked, s, C, method, rounds);
}

SvrSolveResult svr_solve(const Matrix& K, const Vector& y, const solver::SolverConfig& cfg,
                         double epsilon, const solver::Observer& observer) {
    cfg.validate();
    const Index n = K.rows();
    if (K.cols() != n) throw ConfigError("svr_solve: K must be square");
    require_targets(y, n);
    if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) throw ConfigError("epsilon must be nonnegative");
    kernel::validate_gram(K);

    const double L = svr_step_lipschitz(K, cfg);
    const Matrix factor = (!cfg.freeze_f && cfg.tau > 0.0) ? solver::gram_factor(K) : Matrix();
    const Matrix* fp = factor.size() > 0 ? &factor : nullptr;
    solver::detail::AscentSpec spec;
    spec.evaluate = [&](const Vector& z) {
        auto ev = svr_evaluate(z.head(n), z.tail(n), K, y, epsilon, cfg, fp);
        solver::Evaluation out;
        out.F = std::move(ev.F);
        out.nuclear = ev.nuclear;
        out.h = ev.h;
        out.grad.resize(2 * n);
        out.grad << ev.g_hat, ev.g_check;
        return out;
    };
    spec.project = [&](const Vector& z) {
        if (!cfg.hyperplane) return z.cwiseMax(0.0).cwiseMin(cfg.C).eval();
        return project_svr(z, cfg.C, cfg.projection, cfg.projection_rounds);
    };
    spec.step_norm = [n](const Vector& a, const Vector& b) {
        return ((a.head(n) - a.tail(n)) - (b.head(n) - b.tail(n))).norm();
    };
    spec.theta_step = 1.0 / (2.0 * L);
    spec.beta_step = 1.0 / (4.0 * L);

    auto outcome = solver::detail::run_ascent(spec, Vector::Zero(2 * n), cfg, observer);
    outcome.trace.lipschitz = L;
    if (!cfg.freeze_f && cfg.tau >= 2.0 * static_cast<double>(n))
        outcome.trace.warnings.push_back("tau >= 2n: the adaptive matrix may collapse to zero");

    SvrSolveResult res;
    res.alpha_hat = outcome.point.head(n);
    res.alpha_check = outcome.point.tail(n);
    res.F = std::move(outcome.final_eval.F);
    res.objective = outcome.final_eval.h;
    res.trace = std::move(outcome.trace);
    return res;
}

double svr_default_eta(const Matrix& K, const Vector& y, const solver::SolverConfig& cfg, double epsilon) {
    solver::SolverConfig pre = cfg;
    pre.freeze_f = true;
    pre.tau = 0.0;
    pre.variant = solver::Variant::nesterov;
    pre.lipschitz = K.norm();
    const auto res = svr_solve(K, y, pre, epsilon);
    const double eta = (res.alpha_hat - res.alpha_check).squaredNorm();
    return eta > 0.0 ? eta : 0.1 * cfg.C * cfg.C;
}

double svr_recover_bias(const Vector& alpha_hat, const Vector& alpha_check, const Vector& y,
                        const Matrix& F, const Matrix& K, double C, double epsilon) {
    const Vector d = alpha_hat - alpha_check;
    const Vector g = F.cwiseProduct(K) * d;
    const double lo_tol = 1e-6 * C, hi_tol = (1.0 - 1e-6) * C;
    std::vector<double> cand;
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();
    for (Index i = 0; i < d.size(); ++i) {
        const double r = y[i] - g[i];
        // alpha_hat_i free: r - b = eps; alpha_check_i free: r - b = -eps.
        if (alpha_hat[i] > lo_tol && alpha_hat[i] < hi_tol) cand.push_back(r - epsilon);
        if (alpha_check[i] > lo_tol && alpha_check[i] < hi_tol) cand.push_back(r + epsilon);
        if (alpha_hat[i] <= lo_tol) lo = std::max(lo, r - epsilon);
        else if (alpha_hat[i] >= hi_tol) hi = std::min(hi, r - epsilon);
        if (alpha_check[i] <= lo_tol) hi = std::min(hi, r + epsilon);
        else if (alpha_check[i] >= hi_tol) lo = std::max(lo, r + epsilon);
    }
    if (!cand.empty()) {
        std::sort(cand.begin(), cand.end());
        const std::size_t m = cand.size() / 2;
        return cand.size() % 2 == 1 ? cand[m] : 0.5 * (cand[m - 1] + cand[m]);
    }
    const bool flo = std::isfinite(lo), fhi = std::isfinite(hi);
    if (flo && fhi) return 0.5 * (lo + hi);
    if (flo) return lo;
    if (fhi) return hi;
    return 0.0;
}

SvrModel svr_train(const Matrix& X, const Vector& y, const SvrTrainOptions& opts) {
    if (X.rows() < 2) throw DataError("training needs at least two samples");
    if (y.size() != X.rows()) throw DataError("feature rows and target count differ");
    require_targets(y, X.rows());

    SvrModel m;
    m.X_train = X;
    m.scaled = opts.scale_features;
    if (opts.scale_features) {
        m.scaler = data::fit_minmax(X);
        m.X_scaled = data::apply_minmax(m.scaler, X);
    } else {
        m.X_scaled = X;
    }
    m.y = y;
    m.targets_scaled = opts.scale_targets;
    if (opts.scale_targets) {
        m.target_min = y.minCoeff();
        m.target_max = y.maxCoeff();
        const double range = m.target_max - m.target_min;
        m.y_scaled = range > 0.0 ? ((y.array() - m.target_min) / range).matrix()
                                 : Vector::Zero(y.size()).eval();
    } else {
        m.target_min = 0.0;
        m.target_max = 1.0;
        m.y_scaled = y;
    }
    m.sigma = opts.sigma;
    m.epsilon = opts.epsilon;

    const Matrix K = kernel::gaussian_gram(m.X_scaled, opts.sigma);
    solver::SolverConfig cfg = opts.solver;
    if (opts.auto_eta && !cfg.freeze_f) cfg.eta = svr_default_eta(K, m.y_scaled, cfg, opts.epsilon);
    m.config = cfg;

    auto res = svr_solve(K, m.y_scaled, cfg, opts.epsilon);
    m.alpha_hat = std::move(res.alpha_hat);
    m.alpha_check = std::move(res.alpha_check);
    m.F = std::move(res.F);
    m.iterations = res.trace.iterations;
    m.objective = res.objective;
    m.warnings = std::move(res.trace.warnings);
    m.bias = cfg.hyperplane
                 ? svr_recover_bias(m.alpha_hat, m.alpha_check, m.y_scaled, m.F, K, cfg.C, opts.epsilon)
                 : 0.0;
    return m;
}

Vector svr_predict(const SvrModel& model, const Matrix& X_test) {
    if (X_test.cols() != model.X_train.cols()) {
        std::ostringstream os;
        os << "feature dimension mismatch: model has " << model.X_train.cols() << ", input has "
           << X_test.cols();
        throw DataError(os.str());
    }
    const Matrix Xs = model.scaled ? data::apply_minmax(model.scaler, X_test) : X_test;
    const Matrix Kx = kernel::cross_gram(model.X_scaled, Xs, model.sigma);
    const Matrix Fx = svm::extend_F(model.F, svm::reciprocal_nn(model.X_scaled, Xs));
    Vector out = Fx.cwiseProduct(Kx).transpose() * (model.alpha_hat - model.alpha_check);
    out.array() += model.bias;
    if (model.targets_scaled) out = (out.array() * (model.target_max - model.target_min) + model.target_min).matrix();
    return out;
}

double rmse(const Vector& predictions, const Vector& targets) {
    if (predictions.size() != targets.size() || targets.size() == 0)
        throw DataError("rmse: length mismatch or empty input");
    const double mean = targets.mean();
    const double denom = (targets.array() - mean).square().sum();
    if (!(denom > 0.0)) throw DataError("rmse is undefined for constant targets");
    return (predictions - targets).squaredNorm() / denom;
}

}  // namespace dank::svr
