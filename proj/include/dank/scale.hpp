#pragma once

// Decomposition mode: k-means partition, independent block subproblems without
// bias or nuclear norm, block-diagonal assembly, and the approximation bounds
// that relate the decomposed solution to the whole problem.

#include "dank/common.hpp"
#include "dank/solver.hpp"
#include "dank/svm.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace dank::scale {

struct Partition {
    std::vector<int> assign;  // cluster of each point, in [0, clusters)
    int clusters = 0;

    std::vector<Index> sizes() const;
    /// Point indices of every cluster, ascending.
    std::vector<std::vector<Index>> members() const;
};

/// Validates cover and non-emptiness; throws ConfigError otherwise.
Partition make_partition(std::vector<int> assign, int clusters);

/// Lloyd iterations from k-means++ seeding (at most 100, or until every centroid
/// moves less than 1e-8). Empty clusters take the point of the largest cluster
/// farthest from its centroid.
Partition kmeans_partition(const Matrix& X, int v, std::uint64_t seed);

struct BlockSolution {
    Vector alpha_bar;
    /// n x n assembly; entries across clusters are 1.
    Matrix F_bar;
    std::vector<solver::SolveTrace> traces;  // per cluster
    /// Sum of block objectives, i.e. H-bar(alpha_bar, F_bar) on the masked kernel.
    double objective = 0.0;
    int single_class_blocks = 0;
};

/// Subproblem configuration: tau = 0 and box-only projection, other fields from cfg.
solver::SolverConfig block_config(const solver::SolverConfig& cfg);

/// Solves every block of K independently and assembles the result.
BlockSolution solve_blocks(const Matrix& K, const Vector& y, const Partition& p,
                           const solver::SolverConfig& cfg);

/// K with cross-cluster entries zeroed.
Matrix masked_kernel(const Matrix& K, const Partition& p);

/// F with cross-cluster entries set to 1.
Matrix assemble_off_block(const Matrix& F, const Partition& p);

/// Sum of |K_ij| over pairs in different clusters.
double q_pi(const Matrix& K, const Partition& p);

/// Whole-problem reference: the bias-free, tau = 0 problem on the full K.
struct ExactSolution {
    Vector alpha;
    Matrix F;
    double objective = 0.0;  // H(alpha*, F*)
};

ExactSolution solve_exact(const Matrix& K, const Vector& y, const solver::SolverConfig& cfg);

struct BoundReport {
    int clusters = 0;
    double Q = 0.0;
    double B1 = 0.0;
    double B2 = 0.0;
    double B = 0.0;
    double objective_gap_bound = 0.0;
    double alpha_gap_bound = 0.0;
    double F_gap_bound = 0.0;
    double F_gap_crude = 0.0;  // n max(sqrt(B), B)
    // Filled when the exact solution is supplied; negative otherwise.
    double objective_gap = -1.0;  // |H* - H-bar|
    double alpha_gap = -1.0;      // ||alpha* - alpha_bar||^2
    double F_gap = -1.0;          // ||F* - F_bar||_F
    double kappa = 1.0;
    std::vector<Index> screened;  // strict rule
    Index screened_loose = 0;     // count with the positive threshold
    Index true_nonsupport = -1;   // alpha*_i <= 1e-8 count, when known
    Index screened_false_positives = -1;
    std::vector<std::string> warnings;
};

/// Strict screening: indices with alpha_bar_i = 0 whose masked-gradient entry is at
/// most -(B + B2) C (||K-bar_i||_1 + kappa). loose_count receives the number that
/// pass with the threshold's sign flipped.
std::vector<Index> screen_nonsupport(const BlockSolution& approx, const Vector& y, const Matrix& K_bar,
                                     double B, double B2, double C, double kappa,
                                     Index* loose_count = nullptr);

BoundReport bound_report(const std::optional<ExactSolution>& exact, const BlockSolution& approx,
                         const Matrix& K, const Vector& y, const Partition& p,
                         const solver::SolverConfig& cfg, double kappa = 1.0);

struct ScalableOptions {
    svm::TrainOptions train;  // with_bias and tau are overridden
    int clusters = 1;
    std::uint64_t seed = 0;
};

/// Scalable training: eta from the bias-free frozen solve on the whole set,
/// k-means partition, block solves. The model has bias 0 and a block-diagonal F
/// with unit entries across clusters.
svm::SvmModel train_scalable(const Matrix& X, const Vector& y, const ScalableOptions& opts);

}  // namespace dank::scale
