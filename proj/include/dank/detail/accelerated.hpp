#pragma once

// Shared projected-gradient driver for the SVM and SVR duals. Both are concave
// maximisations over a polytope; they differ only in the objective, the
// projection, the step factors and the norm used by the stopping rule.

#include "dank/solver.hpp"

#include <cmath>

namespace dank::solver::detail {

struct AscentSpec {
    /// Objective value and gradient at a feasible point.
    std::function<Evaluation(const Vector&)> evaluate;
    std::function<Vector(const Vector&)> project;
    /// Distance between consecutive iterates used by the stopping rule.
    std::function<double(const Vector&, const Vector&)> step_norm;
    double theta_step = 0.0;  // gradient step of the theta update
    double beta_step = 0.0;   // weight on the accumulated (t+1)-weighted gradients
};

struct AscentOutcome {
    Vector point;
    Evaluation final_eval;
    SolveTrace trace;
};

inline AscentOutcome run_ascent(const AscentSpec& spec, const Vector& start, const SolverConfig& cfg,
                                const Observer& observer) {
    AscentOutcome out;
    SolveTrace& trace = out.trace;
    const Vector alpha0 = start;
    Vector alpha = alpha0;
    Vector grad_sum = Vector::Zero(alpha0.size());
    Vector theta_prev;
    double h_theta_prev = 0.0;

    trace.terminated_by = Termination::max_iter;
    for (int t = 0; t < cfg.t_max; ++t) {
        const Evaluation ev = spec.evaluate(alpha);
        trace.objective_history.push_back(ev.h);

        Vector theta = spec.project(alpha + spec.theta_step * ev.grad);
        Vector next;
        if (cfg.variant == Variant::pgd) {
            next = theta;
            if (observer) observer({t, alpha, theta, theta});
        } else {
            if (cfg.variant == Variant::monotone) {
                // theta^(t) = argmax h over {theta^(t-1), theta~^(t), alpha^(t)}; earlier
                // candidates win ties, and h(alpha^(t)) is reused from this iteration.
                const double h_tilde = spec.evaluate(theta).h;
                double best = h_tilde;
                if (t > 0 && h_theta_prev >= best) {
                    theta = theta_prev;
                    best = h_theta_prev;
                }
                if (ev.h > best) {
                    theta = alpha;
                    best = ev.h;
                }
                theta_prev = theta;
                h_theta_prev = best;
                trace.theta_objective_history.push_back(best);
            }
            grad_sum += static_cast<double>(t + 1) * ev.grad;
            const Vector beta = spec.project(alpha0 + spec.beta_step * grad_sum);
            next = (static_cast<double>(t + 1) * theta + 2.0 * beta) / static_cast<double>(t + 3);
            if (observer) observer({t, alpha, theta, beta});
        }

        const double step = spec.step_norm(next, alpha);
        trace.alpha_step_history.push_back(step);
        alpha = std::move(next);
        trace.iterations = t + 1;
        if (step <= cfg.tol) {
            trace.terminated_by = Termination::tolerance;
            break;
        }
    }
    out.final_eval = spec.evaluate(alpha);
    out.point = std::move(alpha);
    return out;
}

}  // namespace dank::solver::detail
