#pragma once

// epsilon-SVR with a learned adaptive kernel. The dual variables are the pair
// (alpha_hat, alpha_check); F depends on them only through their difference.

#include "dank/common.hpp"
#include "dank/data.hpp"
#include "dank/solver.hpp"

#include <vector>

namespace dank::svr {

/// diag(d) K diag(d) / (4 eta) with d = alpha_hat - alpha_check.
Matrix svr_gamma(const Vector& alpha_hat, const Vector& alpha_check, const Matrix& K, double eta);

/// svt(11' + Gamma, tau/2); 11' when cfg.freeze_f.
Matrix svr_f(const Vector& alpha_hat, const Vector& alpha_check, const Matrix& K,
             const solver::SolverConfig& cfg);

struct SvrEvaluation {
    Matrix F;
    double nuclear = 0.0;
    double h = 0.0;
    Vector g_hat;
    Vector g_check;
};

/// h = -eps 1'(ah + ac) + y'(ah - ac) - 1/2 d'(F.*K)d + eta ||F - 11'||^2 + tau eta ||F||_*
/// at F = svr_f, with both partial gradients.
SvrEvaluation svr_evaluate(const Vector& alpha_hat, const Vector& alpha_check, const Matrix& K,
                           const Vector& y, double epsilon, const solver::SolverConfig& cfg,
                           const Matrix* factor = nullptr);

double svr_objective_h(const Vector& alpha_hat, const Vector& alpha_check, const Matrix& K,
                       const Vector& y, double epsilon, const solver::SolverConfig& cfg);

/// Objective for an arbitrary F.
double svr_objective_H(const Vector& alpha_hat, const Vector& alpha_check, const Matrix& K,
                       const Vector& y, double epsilon, const Matrix& F,
                       const solver::SolverConfig& cfg);

/// g_hat = -eps 1 - (F.*K) d + y,  g_check = -eps 1 + (F.*K) d - y.
std::pair<Vector, Vector> svr_grad(const Vector& alpha_hat, const Vector& alpha_check, const Matrix& K,
                                   const Vector& y, double epsilon, const solver::SolverConfig& cfg);

/// 2 (n + 9 n C^2 ||K||_F^2 / (4 eta)).
double lipschitz_svr(Index n, double C, const Matrix& K, double eta);

/// Lipschitz constant used by svr_solve for this configuration.
double svr_step_lipschitz(const Matrix& K, const solver::SolverConfig& cfg);

/// Projection of the stacked vector [ah; ac] onto box x box with 1'(ah - ac) = 0.
Vector project_svr(const Vector& stacked, double C, solver::ProjectionMethod method, int rounds);

struct SvrSolveResult {
    Vector alpha_hat;
    Vector alpha_check;
    Matrix F;
    double objective = 0.0;
    solver::SolveTrace trace;
};

/// Accelerated projected gradient from zero with steps 1/(2L) and 1/(4L).
SvrSolveResult svr_solve(const Matrix& K, const Vector& y, const solver::SolverConfig& cfg,
                         double epsilon, const solver::Observer& observer = {});

/// eta = ||alpha_hat - alpha_check||^2 of a frozen-F solve; 0.1 C^2 if that vanishes.
double svr_default_eta(const Matrix& K, const Vector& y, const solver::SolverConfig& cfg, double epsilon);

/// Median of the epsilon-shifted KKT biases over free dual variables, else the
/// midpoint of the interval implied by bound-active ones.
double svr_recover_bias(const Vector& alpha_hat, const Vector& alpha_check, const Vector& y,
                        const Matrix& F, const Matrix& K, double C, double epsilon);

struct SvrTrainOptions {
    double sigma = 1.0;
    double epsilon = 0.1;
    solver::SolverConfig solver;
    bool auto_eta = true;
    bool scale_features = true;
    /// Min-max scale targets to [0, 1] before solving; predictions are mapped back.
    bool scale_targets = true;
};

struct SvrModel {
    Matrix X_train;
    Matrix X_scaled;
    Vector y;         // targets as supplied
    Vector y_scaled;  // targets the solver saw
    Vector alpha_hat;
    Vector alpha_check;
    Matrix F;
    double bias = 0.0;
    double sigma = 1.0;
    double epsilon = 0.1;
    solver::SolverConfig config;
    data::Scaler scaler;
    bool scaled = true;
    double target_min = 0.0;
    double target_max = 1.0;
    bool targets_scaled = true;
    int iterations = 0;
    double objective = 0.0;
    std::vector<std::string> warnings;
};

SvrModel svr_train(const Matrix& X, const Vector& y, const SvrTrainOptions& opts);

/// Predictions in the original target units.
Vector svr_predict(const SvrModel& model, const Matrix& X_test);

/// sum (pred - y)^2 / sum (y - mean y)^2. Throws DataError on constant targets.
double rmse(const Vector& predictions, const Vector& targets);

}  // namespace dank::svr
