#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace dank {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

// Error taxonomy. The CLI maps each family onto a process exit code:
// ConfigError -> 1, DataError -> 2, NumericalError -> 3.

/// Bad parameter, flag combination or shape mismatch.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Input data is unusable: parse failures, non-finite values, degenerate labels.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A numerical routine failed to reach its tolerance.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace dank
