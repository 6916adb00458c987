#include "dank/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <numeric>
#include <random>
#include <sstream>

namespace dank::data {

namespace {

[[noreturn]] void fail(std::size_t line, const std::string& msg) {
    std::ostringstream os;
    os << "line " << line << ": " << msg;
    throw DataError(os.str());
}

bool parse_double(std::string_view tok, double& out) {
    if (tok.empty()) return false;
    std::string s(tok);
    char* end = nullptr;
    out = std::strtod(s.c_str(), &end);
    return end == s.c_str() + s.size();
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

Dataset assemble(const std::vector<std::vector<double>>& rows, const std::vector<double>& labels,
                 Index d, LabelMode mode) {
    Dataset ds;
    ds.mode = mode;
    ds.X = Matrix::Zero(static_cast<Index>(rows.size()), d);
    ds.y = Vector(static_cast<Index>(labels.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t j = 0; j < rows[i].size(); ++j)
            ds.X(static_cast<Index>(i), static_cast<Index>(j)) = rows[i][j];
        ds.y[static_cast<Index>(i)] = labels[i];
    }
    return ds;
}

}  // namespace

Dataset parse_libsvm(std::istream& in, LabelMode mode) {
    std::vector<std::vector<double>> rows;
    std::vector<double> labels;
    Index d = 0;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string_view body = line;
        if (auto hash = body.find('#'); hash != std::string_view::npos) body = body.substr(0, hash);
        body = trim(body);
        if (body.empty()) continue;

        std::istringstream ts{std::string(body)};
        std::string tok;
        ts >> tok;
        double label = 0.0;
        if (!parse_double(tok, label)) fail(lineno, "malformed label '" + tok + "'");
        if (!std::isfinite(label)) fail(lineno, "non-finite label");

        std::vector<double> row;
        long last = 0;
        while (ts >> tok) {
            const auto colon = tok.find(':');
            if (colon == std::string::npos) fail(lineno, "malformed token '" + tok + "'");
            long idx = 0;
            const auto* b = tok.data();
            const auto res = std::from_chars(b, b + colon, idx);
            if (res.ec != std::errc() || res.ptr != b + colon || idx < 1)
                fail(lineno, "malformed feature index in '" + tok + "'");
            double value = 0.0;
            if (!parse_double(std::string_view(tok).substr(colon + 1), value))
                fail(lineno, "malformed feature value in '" + tok + "'");
            if (!std::isfinite(value)) fail(lineno, "non-finite feature value in '" + tok + "'");
            if (idx <= last) fail(lineno, "feature indices must be strictly ascending");
            last = idx;
            row.resize(static_cast<std::size_t>(idx), 0.0);
            row[static_cast<std::size_t>(idx - 1)] = value;
        }
        d = std::max<Index>(d, static_cast<Index>(row.size()));
        rows.push_back(std::move(row));
        labels.push_back(label);
    }
    if (rows.empty()) throw DataError("libsvm input contains no samples");
    return assemble(rows, labels, d, mode);
}

void write_libsvm(std::ostream& out, const Dataset& ds) {
    const auto old = out.precision();
    out << std::setprecision(17);
    for (Index i = 0; i < ds.size(); ++i) {
        out << ds.y[i];
        for (Index j = 0; j < ds.dim(); ++j)
            if (ds.X(i, j) != 0.0) out << ' ' << (j + 1) << ':' << ds.X(i, j);
        out << '\n';
    }
    out.precision(old);
}

Dataset parse_csv(std::istream& in, LabelMode mode, int label_column) {
    std::vector<std::vector<double>> rows;
    std::vector<double> labels;
    std::vector<std::string> header;
    std::size_t width = 0;
    std::string line;
    std::size_t lineno = 0;
    bool first = true;
    while (std::getline(in, line)) {
        ++lineno;
        std::string_view body = trim(line);
        if (body.empty()) continue;
        std::vector<std::string> fields;
        std::string cur;
        for (char c : body) {
            if (c == ',') {
                fields.emplace_back(trim(cur));
                cur.clear();
            } else {
                cur.push_back(c);
            }
        }
        fields.emplace_back(trim(cur));

        std::vector<double> values(fields.size());
        bool numeric = true;
        for (std::size_t k = 0; k < fields.size(); ++k)
            if (!parse_double(fields[k], values[k])) numeric = false;
        if (first && !numeric) {
            header = fields;
            width = fields.size();
            first = false;
            continue;
        }
        first = false;
        if (!numeric) fail(lineno, "non-numeric field");
        if (width == 0) width = fields.size();
        if (fields.size() != width) {
            std::ostringstream os;
            os << "ragged row: expected " << width << " fields, got " << fields.size();
            fail(lineno, os.str());
        }
        if (width < 2) fail(lineno, "need at least one feature and a label");
        for (double v : values)
            if (!std::isfinite(v)) fail(lineno, "non-finite value");
        const long lc = label_column < 0 ? static_cast<long>(width) + label_column : label_column;
        if (lc < 0 || lc >= static_cast<long>(width)) fail(lineno, "label column out of range");
        labels.push_back(values[static_cast<std::size_t>(lc)]);
        values.erase(values.begin() + lc);
        rows.push_back(std::move(values));
    }
    if (rows.empty()) throw DataError("CSV input contains no samples");
    Dataset ds = assemble(rows, labels, static_cast<Index>(width - 1), mode);
    if (!header.empty()) {
        const long lc = label_column < 0 ? static_cast<long>(width) + label_column : label_column;
        header.erase(header.begin() + lc);
        ds.feature_names = std::move(header);
    }
    return ds;
}

Dataset load(const std::string& path, LabelMode mode, int label_column) {
    const bool csv = path.size() >= 4 && path.substr(path.size() - 4) == ".csv";
    Dataset ds;
    if (path == "-") {
        ds = parse_libsvm(std::cin, mode);
    } else {
        std::ifstream f(path);
        if (!f) throw DataError("cannot open '" + path + "'");
        ds = csv ? parse_csv(f, mode, label_column) : parse_libsvm(f, mode);
    }
    ds.provenance = path;
    return ds;
}

bool coerce_binary_labels(Dataset& ds) {
    bool all01 = true, any0 = false;
    for (Index i = 0; i < ds.y.size(); ++i) {
        if (ds.y[i] == 0.0) any0 = true;
        else if (ds.y[i] != 1.0) all01 = false;
    }
    if (!(all01 && any0)) return false;
    for (Index i = 0; i < ds.y.size(); ++i) ds.y[i] = ds.y[i] == 0.0 ? -1.0 : 1.0;
    return true;
}

Scaler fit_minmax(const Matrix& X) {
    if (X.rows() == 0) throw DataError("cannot fit a scaler on zero samples");
    return {X.colwise().minCoeff().transpose(), X.colwise().maxCoeff().transpose()};
}

Matrix apply_minmax(const Scaler& s, const Matrix& X) {
    if (X.cols() != s.dim()) throw ConfigError("scaler dimension mismatch");
    Matrix out(X.rows(), X.cols());
    for (Index j = 0; j < X.cols(); ++j) {
        const double range = s.max[j] - s.min[j];
        if (range > 0.0) out.col(j) = (X.col(j).array() - s.min[j]) / range;
        else out.col(j).setZero();
    }
    return out;
}

Matrix inverse_minmax(const Scaler& s, const Matrix& X) {
    if (X.cols() != s.dim()) throw ConfigError("scaler dimension mismatch");
    Matrix out(X.rows(), X.cols());
    for (Index j = 0; j < X.cols(); ++j) {
        const double range = s.max[j] - s.min[j];
        out.col(j) = (X.col(j).array() * range + s.min[j]).matrix();
    }
    return out;
}

std::vector<std::vector<Index>> kfold(Index n, int k, std::uint64_t seed) {
    if (k < 2 || k > n) throw ConfigError("kfold: need 2 <= k <= n");
    std::vector<Index> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), Index{0});
    std::mt19937_64 rng(seed);
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<std::vector<Index>> folds(static_cast<std::size_t>(k));
    for (std::size_t i = 0; i < perm.size(); ++i) folds[i % static_cast<std::size_t>(k)].push_back(perm[i]);
    for (auto& f : folds) std::sort(f.begin(), f.end());
    return folds;
}

Dataset subset(const Dataset& ds, const std::vector<Index>& idx) {
    Dataset out;
    out.mode = ds.mode;
    out.feature_names = ds.feature_names;
    out.provenance = ds.provenance;
    out.X.resize(static_cast<Index>(idx.size()), ds.dim());
    out.y.resize(static_cast<Index>(idx.size()));
    for (std::size_t r = 0; r < idx.size(); ++r) {
        out.X.row(static_cast<Index>(r)) = ds.X.row(idx[r]);
        out.y[static_cast<Index>(r)] = ds.y[idx[r]];
    }
    return out;
}

std::pair<std::vector<Index>, std::vector<Index>> split_indices(Index n, double fraction,
                                                                std::uint64_t seed) {
    std::vector<Index> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), Index{0});
    std::mt19937_64 rng(seed);
    std::shuffle(perm.begin(), perm.end(), rng);
    const auto cut = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
    std::vector<Index> a(perm.begin(), perm.begin() + static_cast<long>(cut));
    std::vector<Index> b(perm.begin() + static_cast<long>(cut), perm.end());
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    return {a, b};
}

double step_function(const StepParams& p, double x) {
    const double fl = std::floor(x / p.w);
    const double inner = p.a * x / p.w - p.a * fl - p.a / 2.0;
    return (std::tanh(inner) / (2.0 * std::tanh(p.a / 2.0)) + 0.5 + fl) * p.s;
}

Dataset gen_step(const StepParams& p, const std::vector<double>& grid) {
    Dataset ds;
    ds.mode = LabelMode::regression;
    ds.provenance = "step";
    ds.X.resize(static_cast<Index>(grid.size()), 1);
    ds.y.resize(static_cast<Index>(grid.size()));
    for (std::size_t i = 0; i < grid.size(); ++i) {
        ds.X(static_cast<Index>(i), 0) = grid[i];
        ds.y[static_cast<Index>(i)] = step_function(p, grid[i]);
    }
    return ds;
}

std::vector<double> linspace(double lo, double hi, int n) {
    std::vector<double> out(static_cast<std::size_t>(std::max(n, 0)));
    if (n == 1) {
        out[0] = lo;
        return out;
    }
    for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (n - 1);
    return out;
}

double surface_2d(double u, double v) {
    const double du = u - 0.5, dv = v - 0.5;
    const double g1 = std::pow(du, 4) - 10.0 * du * du * dv * dv + 5.0 * std::pow(dv, 4);
    return 42.659 * (0.1 + du * (g1 + 0.05));
}

Dataset gen_2d(int res) {
    if (res < 1) throw ConfigError("gen_2d: resolution must be positive");
    const auto g = linspace(-0.5, 0.5, res);
    Dataset ds;
    ds.mode = LabelMode::regression;
    ds.provenance = "surface-2d";
    ds.X.resize(static_cast<Index>(res) * res, 2);
    ds.y.resize(static_cast<Index>(res) * res);
    Index r = 0;
    for (double u : g)
        for (double v : g) {
            ds.X(r, 0) = u;
            ds.X(r, 1) = v;
            ds.y[r] = surface_2d(u, v);
            ++r;
        }
    return ds;
}

Dataset gen_two_class_toy(Index n, std::uint64_t seed, double noise) {
    if (n < 2) throw ConfigError("gen_two_class_toy: need at least two points");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> jitter(0.0, noise);
    const double pi = std::acos(-1.0);
    Dataset ds;
    ds.mode = LabelMode::classification;
    ds.provenance = "two-arcs";
    ds.X.resize(n, 2);
    ds.y.resize(n);
    for (Index i = 0; i < n; ++i) {
        const bool upper = (i % 2) == 0;
        const double t = pi * unit(rng);
        double x, y;
        if (upper) {
            x = std::cos(t);
            y = std::sin(t);
        } else {
            x = 1.0 - std::cos(t);
            y = 0.5 - std::sin(t);
        }
        ds.X(i, 0) = x + jitter(rng);
        ds.X(i, 1) = y + jitter(rng);
        ds.y[i] = upper ? 1.0 : -1.0;
    }
    return ds;
}

Dataset gen_blobs(Index n, int centers, double spread, std::uint64_t seed, double box, double separation) {
    if (centers < 1 || n < centers) throw ConfigError("gen_blobs: need 1 <= centers <= n");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> loc(-box, box);
    std::normal_distribution<double> jitter(0.0, spread);
    Matrix mu(centers, 2);
    for (int c = 0; c < centers; ++c) {
        mu(c, 0) = loc(rng);
        mu(c, 1) = loc(rng);
    }
    Dataset ds;
    ds.mode = LabelMode::classification;
    ds.provenance = "blobs";
    ds.X.resize(n, 2);
    ds.y.resize(n);
    for (Index i = 0; i < n; ++i) {
        const int c = static_cast<int>(i % centers);
        ds.y[i] = (i / centers) % 2 == 0 ? 1.0 : -1.0;
        ds.X(i, 0) = mu(c, 0) + 0.5 * separation * ds.y[i] + jitter(rng);
        ds.X(i, 1) = mu(c, 1) + jitter(rng);
    }
    return ds;
}

}  // namespace dank::data
