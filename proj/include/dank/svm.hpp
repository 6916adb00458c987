#pragma once

// Binary classification with a learned adaptive kernel F .* K.

#include "dank/common.hpp"
#include "dank/data.hpp"
#include "dank/solver.hpp"

#include <optional>
#include <vector>

namespace dank::svm {

struct TrainOptions {
    double sigma = 1.0;
    solver::SolverConfig solver;
    /// Resolve eta from a preliminary frozen-F solve, ignoring solver.eta.
    bool auto_eta = true;
    /// Keep alpha'y = 0 and recover a bias. Off gives the bias-free problem.
    bool with_bias = true;
    /// Min-max scale the features before building K.
    bool scale_features = true;
};

struct SvmModel {
    Matrix X_train;   // as supplied
    Matrix X_scaled;  // after the stored scaler
    Vector y;
    Vector alpha;
    Matrix F;
    double bias = 0.0;
    double sigma = 1.0;
    solver::SolverConfig config;
    data::Scaler scaler;
    bool scaled = true;
    bool with_bias = true;
    /// Cluster index per training point when F is block-diagonal (scalable mode);
    /// empty for a dense F.
    std::vector<int> partition;
    int iterations = 0;
    double objective = 0.0;
    std::vector<std::string> warnings;
};

/// Trains on raw features. Throws DataError on degenerate labels, ConfigError on bad sigma/config.
SvmModel train(const Matrix& X, const Vector& y, const TrainOptions& opts);

/// sum_j alpha_j y_j F_ij K_ij for every i.
Vector expansion(const Vector& alpha, const Vector& y, const Matrix& F, const Matrix& K);

/// Median of y_i - g_i over margin support vectors (1e-6 C < alpha_i < (1 - 1e-6) C),
/// else the midpoint of the KKT interval implied by the bound-active points.
double recover_bias(const Vector& alpha, const Vector& y, const Matrix& F, const Matrix& K, double C);

/// The interval [lo, hi] of biases consistent with KKT at bound-active points.
std::pair<double, double> kkt_bias_interval(const Vector& alpha, const Vector& y, const Matrix& F,
                                            const Matrix& K, double C);

/// M_ij = 1/(r s): r is the 1-based rank of test point j among all test points by
/// distance to x_i, s the rank of x_i among all training points by distance to x'_j.
/// Distance ties go to the lower index.
Matrix reciprocal_nn(const Matrix& X_train, const Matrix& X_test);

/// Column j of the result is column argmax_i M_ij of F (smallest i on ties).
Matrix extend_F(const Matrix& F, const Matrix& M);

/// Row index selected for each test column by extend_F.
std::vector<Index> extension_sources(const Matrix& M);

struct Prediction {
    Vector labels;
    Vector decision;
};

/// Scales X_test with the stored scaler, extends F and evaluates the decision rule.
/// sign(0) maps to +1.
Prediction predict(const SvmModel& model, const Matrix& X_test);

/// Fraction of matching labels.
double accuracy(const Vector& predicted, const Vector& truth);

}  // namespace dank::svm
