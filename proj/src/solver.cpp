#include "dank/solver.hpp"

#include "dank/detail/accelerated.hpp"
#include "dank/kernel.hpp"
#include "dank/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace dank::solver {

std::string to_string(Variant v) {
    switch (v) {
        case Variant::nesterov: return "nesterov";
        case Variant::pgd: return "pgd";
        case Variant::monotone: return "monotone";
    }
    return "nesterov";
}

Variant parse_variant(const std::string& s) {
    if (s == "nesterov") return Variant::nesterov;
    if (s == "pgd") return Variant::pgd;
    if (s == "monotone" || s == "monotone-nesterov") return Variant::monotone;
    throw ConfigError("unknown solver variant '" + s + "'");
}

std::string to_string(StepRule r) { return r == StepRule::gram ? "gram" : "theory"; }

StepRule parse_step_rule(const std::string& s) {
    if (s == "theory") return StepRule::theory;
    if (s == "gram") return StepRule::gram;
    throw ConfigError("unknown step rule '" + s + "' (expected theory or gram)");
}

void SolverConfig::validate() const {
    std::ostringstream os;
    if (!(C > 0.0) || !std::isfinite(C)) os << "C must be positive (got " << C << "); ";
    if (!(eta > 0.0) || !std::isfinite(eta)) os << "eta must be positive (got " << eta << "); ";
    if (!(tau >= 0.0) || !std::isfinite(tau)) os << "tau must be nonnegative (got " << tau << "); ";
    if (t_max < 1) os << "t_max must be at least 1; ";
    if (!(tol >= 0.0)) os << "tol must be nonnegative; ";
    if (!(lipschitz >= 0.0) || !std::isfinite(lipschitz)) os << "lipschitz override must be nonnegative; ";
    if (projection_rounds < 1) os << "projection_rounds must be at least 1; ";
    const std::string msg = os.str();
    if (!msg.empty()) throw ConfigError("invalid solver configuration: " + msg);
}

bool is_feasible(const DualState& s, double C, double hyper_tol) {
    for (Index i = 0; i < s.alpha.size(); ++i)
        if (!(s.alpha[i] >= 0.0 && s.alpha[i] <= C)) return false;
    const double resid = std::abs(s.alpha.dot(s.y));
    return resid <= hyper_tol * std::max(1.0, s.alpha.norm());
}

void validate_labels(const Vector& y, bool need_both) {
    bool pos = false, neg = false;
    for (Index i = 0; i < y.size(); ++i) {
        if (y[i] == 1.0) pos = true;
        else if (y[i] == -1.0) neg = true;
        else {
            std::ostringstream os;
            os << "label " << i << " is " << y[i] << "; classification labels must be +1 or -1";
            throw DataError(os.str());
        }
    }
    if (need_both && !(pos && neg))
        throw DataError("classification needs both classes; the labels contain a single class");
}

namespace {

void require_shapes(const Vector& alpha, const Vector& y, const Matrix& K) {
    if (K.rows() != K.cols() || alpha.size() != K.rows() || y.size() != K.rows()) {
        std::ostringstream os;
        os << "shape mismatch: alpha " << alpha.size() << ", y " << y.size() << ", K " << K.rows()
           << "x" << K.cols();
        throw ConfigError(os.str());
    }
}

}  // namespace

Matrix gamma(const Vector& alpha, const Vector& y, const Matrix& K, double eta) {
    require_shapes(alpha, y, K);
    const Vector a = alpha.cwiseProduct(y);
    return (a.asDiagonal() * K * a.asDiagonal()) / (4.0 * eta);
}

Matrix adaptive_matrix(const Vector& a, const Matrix& K, double eta, double tau, double& nuclear,
                       const Matrix* factor) {
    const Index n = K.rows();
    if (tau > 0.0 && factor != nullptr && factor->rows() == n && factor->cols() + 1 < n) {
        Matrix W(n, factor->cols() + 1);
        W.col(0).setOnes();
        W.rightCols(factor->cols()) = (a / (2.0 * std::sqrt(eta))).asDiagonal() * (*factor);
        return linalg::svt_factored(W, 0.5 * tau, nuclear);
    }
    Matrix A = (a.asDiagonal() * K * a.asDiagonal()) / (4.0 * eta);
    A.array() += 1.0;
    A = 0.5 * (A + A.transpose());
    if (tau == 0.0) {
        // Thresholding at zero is the identity; 11' + Gamma is PSD so ||F||_* = trace.
        nuclear = A.trace();
        return A;
    }
    return linalg::svt(A, 0.5 * tau, nuclear);
}

Matrix gram_factor(const Matrix& K) {
    const Index n = K.rows();
    return linalg::psd_factor(K, 1e-13, (3 * n) / 5);
}

Evaluation evaluate(const Vector& alpha, const Vector& y, const Matrix& K, const SolverConfig& cfg,
                    const Matrix* factor) {
    require_shapes(alpha, y, K);
    const Index n = K.rows();
    const Vector a = alpha.cwiseProduct(y);
    Evaluation ev;
    if (cfg.freeze_f) {
        ev.F = Matrix::Ones(n, n);
        ev.nuclear = static_cast<double>(n);
        const Vector v = K * a;
        ev.h = alpha.sum() - 0.5 * a.dot(v);
        ev.grad = Vector::Ones(n) - y.cwiseProduct(v);
        return ev;
    }
    ev.F = adaptive_matrix(a, K, cfg.eta, cfg.tau, ev.nuclear, factor);
    const Vector v = ev.F.cwiseProduct(K) * a;
    const double dev = (ev.F.array() - 1.0).matrix().squaredNorm();
    ev.h = alpha.sum() - 0.5 * a.dot(v) + cfg.eta * dev + cfg.tau * cfg.eta * ev.nuclear;
    ev.grad = Vector::Ones(n) - y.cwiseProduct(v);
    return ev;
}

Matrix f_of_alpha(const Vector& alpha, const Vector& y, const Matrix& K, const SolverConfig& cfg) {
    return evaluate(alpha, y, K, cfg).F;
}

double objective_h(const Vector& alpha, const Vector& y, const Matrix& K, const SolverConfig& cfg) {
    return evaluate(alpha, y, K, cfg).h;
}

Vector grad_h(const Vector& alpha, const Vector& y, const Matrix& K, const SolverConfig& cfg) {
    return evaluate(alpha, y, K, cfg).grad;
}

double objective_H(const Vector& alpha, const Vector& y, const Matrix& K, const Matrix& F,
                   const SolverConfig& cfg) {
    require_shapes(alpha, y, K);
    if (F.rows() != K.rows() || F.cols() != K.cols()) throw ConfigError("objective_H: F shape mismatch");
    const Vector a = alpha.cwiseProduct(y);
    const double quad = a.dot(F.cwiseProduct(K) * a);
    if (cfg.freeze_f) return alpha.sum() - 0.5 * quad;
    const double dev = (F.array() - 1.0).matrix().squaredNorm();
    const double nuc = cfg.tau == 0.0 ? 0.0 : linalg::norms(F).nuclear;
    return alpha.sum() - 0.5 * quad + cfg.eta * dev + cfg.tau * cfg.eta * nuc;
}

double lipschitz_svm(Index n, double C, const Matrix& K, double eta) {
    const double nn = static_cast<double>(n);
    return nn + 3.0 * nn * C * C * K.squaredNorm() / (4.0 * eta);
}

double lipschitz_pgd(Index n, double C, const Matrix& K, double eta, double tau) {
    return spectral_bound(n, C, linalg::lambda_max(K), eta, tau);
}

double spectral_bound(Index n, double C, double lambda_max_K, double eta, double tau) {
    const double nn = static_cast<double>(n);
    return nn - 0.5 * tau + nn * C * C * lambda_max_K / (4.0 * eta);
}

Vector exact_projection(const Vector& z, const Vector& s, double C) {
    const Index n = z.size();
    if (s.size() != n) throw ConfigError("exact_projection: sign vector length mismatch");
    if (n == 0) return z;
    auto point = [&](double mu) {
        return (z - mu * s).cwiseMax(0.0).cwiseMin(C).eval();
    };
    auto g = [&](double mu) { return s.dot(point(mu)); };

    // g(mu) = s'clip(z - mu s) is non-increasing and piecewise linear with kinks
    // where a coordinate enters or leaves the box.
    std::vector<double> bp;
    bp.reserve(static_cast<std::size_t>(2 * n));
    for (Index i = 0; i < n; ++i) {
        bp.push_back(z[i] * s[i]);
        bp.push_back((z[i] - C) * s[i]);
    }
    std::sort(bp.begin(), bp.end());
    bp.erase(std::unique(bp.begin(), bp.end()), bp.end());

    // First breakpoint with g <= 0.
    std::size_t lo = 0, hi = bp.size();
    while (lo < hi) {
        const std::size_t mid = (lo + hi) / 2;
        if (g(bp[mid]) <= 0.0) hi = mid;
        else lo = mid + 1;
    }
    double mu;
    if (lo == 0) {
        mu = bp.front();
    } else if (lo == bp.size()) {
        mu = bp.back();
    } else {
        const double a = bp[lo - 1], b = bp[lo];
        const double ga = g(a), gb = g(b);
        mu = (ga == gb) ? b : a + ga * (b - a) / (ga - gb);
    }
    return point(mu);
}

Vector alternating_projection(const Vector& z, const Vector& s, double C, int rounds) {
    const double n = static_cast<double>(z.size());
    Vector x = z;
    for (int r = 0; r < rounds; ++r) {
        x = x.cwiseMax(0.0).cwiseMin(C);
        x -= (s.dot(x) / n) * s;
    }
    return x.cwiseMax(0.0).cwiseMin(C);
}

Vector project_feasible(const Vector& alpha, const Vector& y, double C, ProjectionMethod method,
                        int rounds) {
    if (method == ProjectionMethod::alternating) return alternating_projection(alpha, y, C, rounds);
    return exact_projection(alpha, y, C);
}

double convergence_bound(double L, const Vector& alpha0, const Vector& alpha_star, int t) {
    const double tt = static_cast<double>(t);
    return 8.0 * L * (alpha0 - alpha_star).squaredNorm() / ((tt + 1.0) * (tt + 2.0));
}

double step_lipschitz(const Matrix& K, const SolverConfig& cfg) {
    if (cfg.lipschitz > 0.0) return cfg.lipschitz;
    if (cfg.freeze_f || cfg.step == StepRule::gram) return K.norm();
    if (cfg.variant == Variant::pgd) return lipschitz_pgd(K.rows(), cfg.C, K, cfg.eta, cfg.tau);
    return lipschitz_svm(K.rows(), cfg.C, K, cfg.eta);
}

SolveResult solve(const Matrix& K, const Vector& y, const SolverConfig& cfg, const Observer& observer) {
    cfg.validate();
    const Index n = K.rows();
    if (K.cols() != n || y.size() != n) throw ConfigError("solve: K and y shapes disagree");
    validate_labels(y, cfg.hyperplane);
    kernel::validate_gram(K);

    const double L = step_lipschitz(K, cfg);
    const Matrix factor = (!cfg.freeze_f && cfg.tau > 0.0) ? gram_factor(K) : Matrix();
    const Matrix* fp = factor.size() > 0 ? &factor : nullptr;
    detail::AscentSpec spec;
    spec.evaluate = [&](const Vector& a) { return evaluate(a, y, K, cfg, fp); };
    if (cfg.hyperplane) {
        spec.project = [&](const Vector& a) {
            return project_feasible(a, y, cfg.C, cfg.projection, cfg.projection_rounds);
        };
    } else {
        spec.project = [&](const Vector& a) { return a.cwiseMax(0.0).cwiseMin(cfg.C).eval(); };
    }
    spec.step_norm = [](const Vector& a, const Vector& b) { return (a - b).norm(); };
    spec.theta_step = 1.0 / L;
    spec.beta_step = 1.0 / (2.0 * L);

    auto outcome = detail::run_ascent(spec, Vector::Zero(n), cfg, observer);
    outcome.trace.lipschitz = L;
    if (!cfg.freeze_f && cfg.tau >= 2.0 * static_cast<double>(n))
        outcome.trace.warnings.push_back("tau >= 2n: the adaptive matrix may collapse to zero");

    SolveResult res;
    res.state = {std::move(outcome.point), y};
    res.F = std::move(outcome.final_eval.F);
    res.objective = outcome.final_eval.h;
    res.trace = std::move(outcome.trace);
    return res;
}

double default_eta(const Matrix& K, const Vector& y, const SolverConfig& cfg) {
    SolverConfig pre = cfg;
    pre.freeze_f = true;
    pre.tau = 0.0;
    pre.variant = Variant::nesterov;
    pre.lipschitz = K.norm();
    const auto res = solve(K, y, pre);
    const double eta = res.state.alpha.squaredNorm();
    return eta > 0.0 ? eta : 0.1 * cfg.C * cfg.C;
}

}  // namespace dank::solver
