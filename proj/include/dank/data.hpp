#pragma once

#include "dank/common.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace dank::data {

enum class LabelMode { classification, regression };

struct Dataset {
    Matrix X;
    Vector y;
    LabelMode mode = LabelMode::classification;
    std::vector<std::string> feature_names;
    std::string provenance;

    Index size() const { return X.rows(); }
    Index dim() const { return X.cols(); }
};

/// Per-feature min-max scaler fitted on training data.
struct Scaler {
    Vector min;
    Vector max;

    Index dim() const { return min.size(); }
};

/// Parses "<label> <index>:<value> ..." lines (1-based, strictly ascending indices).
/// Blank lines and '#' comments are skipped. Throws DataError naming the line.
Dataset parse_libsvm(std::istream& in, LabelMode mode = LabelMode::classification);

/// Writes the non-zero entries of each row with 17 significant digits.
void write_libsvm(std::ostream& out, const Dataset& ds);

/// Parses comma-separated rows. The first row is a header when any of its fields
/// is not numeric. label_column < 0 counts from the end (-1 = last column).
Dataset parse_csv(std::istream& in, LabelMode mode = LabelMode::classification, int label_column = -1);

/// Loads by extension: ".csv" -> CSV, anything else -> libsvm. "-" reads standard input.
Dataset load(const std::string& path, LabelMode mode, int label_column = -1);

/// Maps {0, 1} labels onto {-1, +1}. Returns true when a conversion happened.
bool coerce_binary_labels(Dataset& ds);

Scaler fit_minmax(const Matrix& X);
/// (x - min) / (max - min) per feature; constant features map to 0.
Matrix apply_minmax(const Scaler& s, const Matrix& X);
Matrix inverse_minmax(const Scaler& s, const Matrix& X);

/// Shuffled folds over [0, n), sizes differing by at most one.
std::vector<std::vector<Index>> kfold(Index n, int k, std::uint64_t seed);

/// Rows of ds selected by idx.
Dataset subset(const Dataset& ds, const std::vector<Index>& idx);

/// Random split: first element holds round(fraction * n) shuffled rows.
std::pair<std::vector<Index>, std::vector<Index>> split_indices(Index n, double fraction, std::uint64_t seed);

// ---- synthetic generators -------------------------------------------------

struct StepParams {
    double s = 3.0;  // step height
    double w = 2.0;  // period
    double a = 0.05; // smoothness
};

double step_function(const StepParams& p, double x);

/// Step function sampled at the given abscissae.
Dataset gen_step(const StepParams& p, const std::vector<double>& grid);

/// n equally spaced points on [lo, hi].
std::vector<double> linspace(double lo, double hi, int n);

/// 42.659 (0.1 + (u - 0.5)(g1 + 0.05)), g1 = (u-.5)^4 - 10 (u-.5)^2 (v-.5)^2 + 5 (v-.5)^4.
double surface_2d(double u, double v);

/// res x res grid on [-0.5, 0.5]^2 (400 points by default).
Dataset gen_2d(int res = 20);

/// Two interleaved noisy arcs with balanced +-1 labels. The default noise makes
/// the classes overlap, as in the clowns data it stands in for.
Dataset gen_two_class_toy(Index n, std::uint64_t seed, double noise = 0.3);

/// Isotropic 2-d Gaussian blobs. Point i belongs to blob i % centers; labels
/// alternate between consecutive passes over the blobs, so every blob mixes classes.
/// Inside a blob the two classes sit `separation` apart along the first axis.
Dataset gen_blobs(Index n, int centers, double spread, std::uint64_t seed, double box = 10.0,
                  double separation = 0.0);

}  // namespace dank::data
