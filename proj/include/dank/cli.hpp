#pragma once

// Command-line front end: train, predict, eval, bounds, grid.

#include "dank/common.hpp"
#include "dank/solver.hpp"

#include <cstdint>
#include <iosfwd>
#include <vector>

namespace dank::cli {

/// 2^-5 .. 2^5, the grid used for both sigma and C.
std::vector<double> default_grid();

struct CvResult {
    double sigma = 1.0;
    double C = 1.0;
    double score = 0.0;  // mean fold accuracy (svm) or mean fold RMSE (svr)
};

/// Grid search over (sigma, C). Best mean accuracy wins; ties go to the
/// smaller C, then the larger sigma. Folds train the frozen-F SVM unless
/// `adaptive`, which trains the full model from `base` with automatic eta.
CvResult cv_select_svm(const Matrix& X, const Vector& y, const std::vector<double>& sigmas,
                       const std::vector<double>& Cs, int folds, std::uint64_t seed,
                       const solver::SolverConfig& base, bool adaptive = false);

/// Same search for SVR, minimising mean fold RMSE.
CvResult cv_select_svr(const Matrix& X, const Vector& y, const std::vector<double>& sigmas,
                       const std::vector<double>& Cs, int folds, std::uint64_t seed,
                       const solver::SolverConfig& base, double epsilon, bool adaptive = false);

/// Runs one command. Returns the process exit code:
/// 0 success, 1 usage error, 2 data error, 3 numerical failure.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace dank::cli
