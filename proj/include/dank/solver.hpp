#pragma once

// Saddle-point solver for the adaptive-kernel SVM dual:
//
//   max_{alpha in A} min_{F psd}  1'a - 1/2 a'Y(F.*K)Ya + eta ||F - 11'||_F^2 + tau eta ||F||_*
//
// with A = { alpha : alpha'y = 0, 0 <= alpha <= C }. The inner problem has the
// closed form F(alpha) = svt(11' + Gamma(alpha), tau/2), which turns the outer
// problem into a smooth concave maximisation of h(alpha) solved by projected
// gradient with Nesterov acceleration.

#include "dank/common.hpp"

#include <functional>
#include <string>
#include <vector>

namespace dank::solver {

enum class Variant { nesterov, pgd, monotone };
enum class ProjectionMethod { exact, alternating };
/// theory: the Lipschitz constant of the convergence theorem for the variant.
/// gram: L = ||K||_F, the constant of the frozen-F problem, used as a step size.
enum class StepRule { theory, gram };

std::string to_string(Variant v);
Variant parse_variant(const std::string& s);
std::string to_string(StepRule r);
StepRule parse_step_rule(const std::string& s);

struct SolverConfig {
    double C = 1.0;
    double tau = 0.01;
    double eta = 1.0;
    int t_max = 2000;
    double tol = 1e-4;
    int projection_rounds = 10;
    Variant variant = Variant::nesterov;
    ProjectionMethod projection = ProjectionMethod::exact;
    StepRule step = StepRule::theory;
    /// Hold F at 11' and drop both penalty terms: the plain SVM dual.
    bool freeze_f = false;
    /// Enforce alpha'y = 0. Off for the bias-free decomposed subproblems.
    bool hyperplane = true;
    /// Positive value replaces the theoretical Lipschitz constant.
    double lipschitz = 0.0;

    void validate() const;
};

/// Dual iterate with its labels.
struct DualState {
    Vector alpha;
    Vector y;
};

/// Box holds exactly and |alpha'y| <= hyper_tol * max(1, ||alpha||).
bool is_feasible(const DualState& s, double C, double hyper_tol = 1e-6);

enum class Termination { tolerance, max_iter };

struct SolveTrace {
    int iterations = 0;
    /// h(alpha^(t)) for t = 0 .. iterations-1.
    std::vector<double> objective_history;
    /// h(theta^(t)); filled by the monotone variant only.
    std::vector<double> theta_objective_history;
    /// ||alpha^(t+1) - alpha^(t)||_2 for each iteration.
    std::vector<double> alpha_step_history;
    Termination terminated_by = Termination::max_iter;
    double lipschitz = 0.0;
    std::vector<std::string> warnings;
};

/// Everything the inner minimisation yields at one dual point.
struct Evaluation {
    Matrix F;
    double nuclear = 0.0;  // ||F||_*
    double h = 0.0;
    Vector grad;
};

/// Gamma(alpha) = diag(alpha.*y) K diag(alpha.*y) / (4 eta).
Matrix gamma(const Vector& alpha, const Vector& y, const Matrix& K, double eta);

/// F(alpha) = svt(11' + Gamma(alpha), tau / 2); 11' when cfg.freeze_f.
Matrix f_of_alpha(const Vector& alpha, const Vector& y, const Matrix& K, const SolverConfig& cfg);

/// svt(11' + diag(a) K diag(a) / (4 eta), tau/2) and its nuclear norm. With a
/// factor G (K ~= G G^T, few columns) the thresholding runs on the small side.
Matrix adaptive_matrix(const Vector& a, const Matrix& K, double eta, double tau, double& nuclear,
                       const Matrix* factor = nullptr);

/// Factor of K for adaptive_matrix, or an empty matrix when K is not low rank enough to pay off.
Matrix gram_factor(const Matrix& K);

Evaluation evaluate(const Vector& alpha, const Vector& y, const Matrix& K, const SolverConfig& cfg,
                    const Matrix* factor = nullptr);

/// H(alpha, F) for an arbitrary symmetric F.
double objective_H(const Vector& alpha, const Vector& y, const Matrix& K, const Matrix& F,
                   const SolverConfig& cfg);

/// h(alpha) = H(alpha, F(alpha)).
double objective_h(const Vector& alpha, const Vector& y, const Matrix& K, const SolverConfig& cfg);

/// 1 - Y (F(alpha) .* K) Y alpha.
Vector grad_h(const Vector& alpha, const Vector& y, const Matrix& K, const SolverConfig& cfg);

/// n + 3 n C^2 ||K||_F^2 / (4 eta).
double lipschitz_svm(Index n, double C, const Matrix& K, double eta);

/// n - tau/2 + n C^2 lambda_max(K) / (4 eta).
double lipschitz_pgd(Index n, double C, const Matrix& K, double eta, double tau);

/// Upper bound on lambda_max(F(alpha)) over the feasible set.
double spectral_bound(Index n, double C, double lambda_max_K, double eta, double tau);

/// Euclidean projection onto { 0 <= z <= C, s'z = 0 } for sign vector s.
/// Solved exactly through the monotone scalar dual in the shift mu.
Vector exact_projection(const Vector& z, const Vector& s, double C);

/// `rounds` alternations of (clip to [0, C], z <- z - (s'z / n) s), then a final clip.
Vector alternating_projection(const Vector& z, const Vector& s, double C, int rounds);

Vector project_feasible(const Vector& alpha, const Vector& y, double C,
                        ProjectionMethod method = ProjectionMethod::exact, int rounds = 10);

/// 8 L ||alpha0 - alpha*||^2 / ((t + 1)(t + 2)).
double convergence_bound(double L, const Vector& alpha0, const Vector& alpha_star, int t);

struct IterateView {
    int t;
    const Vector& alpha;
    const Vector& theta;
    const Vector& beta;
};
using Observer = std::function<void(const IterateView&)>;

struct SolveResult {
    DualState state;
    Matrix F;
    double objective = 0.0;  // h at the returned alpha
    SolveTrace trace;
};

/// Runs the accelerated projected-gradient loop from alpha = 0.
SolveResult solve(const Matrix& K, const Vector& y, const SolverConfig& cfg,
                  const Observer& observer = {});

/// Lipschitz constant the solver would use for this configuration.
double step_lipschitz(const Matrix& K, const SolverConfig& cfg);

/// eta = ||alpha||^2 of a preliminary frozen-F solve (step from L0 = ||K||_F);
/// falls back to 0.1 C^2 when that alpha vanishes.
double default_eta(const Matrix& K, const Vector& y, const SolverConfig& cfg);

/// Labels must be +-1; with `need_both`, both classes must appear.
void validate_labels(const Vector& y, bool need_both);

}  // namespace dank::solver
