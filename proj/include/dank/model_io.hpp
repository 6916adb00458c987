#pragma once

// Versioned plain-text model files. Every real number is written with 17
// significant digits so a save/load round trip is bit-exact.

#include "dank/svm.hpp"
#include "dank/svr.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

namespace dank::io {

inline constexpr int kModelVersion = 1;

struct ModelFile {
    std::string task = "svm";  // svm | svr
    std::string mode = "exact";  // exact | scalable
    int clusters = 1;
    std::uint64_t seed = 0;
    std::optional<svm::SvmModel> svm;
    std::optional<svr::SvrModel> svr;
};

void save_model(std::ostream& out, const ModelFile& m);
ModelFile load_model(std::istream& in);

/// Throws DataError when the file cannot be opened or parsed.
void save_model_file(const std::string& path, const ModelFile& m);
ModelFile load_model_file(const std::string& path);

/// "%.17e" formatting used throughout the file.
std::string format_real(double v);

}  // namespace dank::io
