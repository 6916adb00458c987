#include "dank/scale.hpp"

#include "dank/data.hpp"
#include "dank/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

namespace dank::scale {

std::vector<Index> Partition::sizes() const {
    std::vector<Index> s(static_cast<std::size_t>(clusters), 0);
    for (int c : assign) ++s[static_cast<std::size_t>(c)];
    return s;
}

std::vector<std::vector<Index>> Partition::members() const {
    std::vector<std::vector<Index>> m(static_cast<std::size_t>(clusters));
    for (std::size_t i = 0; i < assign.size(); ++i)
        m[static_cast<std::size_t>(assign[i])].push_back(static_cast<Index>(i));
    return m;
}

Partition make_partition(std::vector<int> assign, int clusters) {
    if (clusters < 1) throw ConfigError("partition needs at least one cluster");
    std::vector<Index> count(static_cast<std::size_t>(clusters), 0);
    for (int c : assign) {
        if (c < 0 || c >= clusters) throw ConfigError("partition label out of range");
        ++count[static_cast<std::size_t>(c)];
    }
    for (int c = 0; c < clusters; ++c)
        if (count[static_cast<std::size_t>(c)] == 0) {
            std::ostringstream os;
            os << "partition cluster " << c << " is empty";
            throw ConfigError(os.str());
        }
    return {std::move(assign), clusters};
}

Partition kmeans_partition(const Matrix& X, int v, std::uint64_t seed) {
    const Index n = X.rows();
    if (v < 1) throw ConfigError("number of clusters must be positive");
    if (v > n) {
        std::ostringstream os;
        os << "cannot form " << v << " clusters from " << n << " points";
        throw ConfigError(os.str());
    }
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    // k-means++ seeding.
    Matrix centers(v, X.cols());
    std::vector<bool> chosen(static_cast<std::size_t>(n), false);
    Index first = static_cast<Index>(unit(rng) * static_cast<double>(n));
    first = std::min(first, n - 1);
    centers.row(0) = X.row(first);
    chosen[static_cast<std::size_t>(first)] = true;
    Vector d2 = (X.rowwise() - centers.row(0)).rowwise().squaredNorm();
    for (int c = 1; c < v; ++c) {
        const double total = d2.sum();
        Index pick = -1;
        if (total > 0.0) {
            const double target = unit(rng) * total;
            double acc = 0.0;
            for (Index i = 0; i < n; ++i) {
                acc += d2[i];
                if (acc >= target && d2[i] > 0.0) {
                    pick = i;
                    break;
                }
            }
            if (pick < 0)
                for (Index i = n - 1; i >= 0; --i)
                    if (d2[i] > 0.0) {
                        pick = i;
                        break;
                    }
        }
        if (pick < 0) {
            // Every point coincides with a center: take the first unchosen index.
            for (Index i = 0; i < n; ++i)
                if (!chosen[static_cast<std::size_t>(i)]) {
                    pick = i;
                    break;
                }
        }
        chosen[static_cast<std::size_t>(pick)] = true;
        centers.row(c) = X.row(pick);
        d2 = d2.cwiseMin((X.rowwise() - centers.row(c)).rowwise().squaredNorm());
    }

    std::vector<int> assign(static_cast<std::size_t>(n), 0);
    auto assign_step = [&]() {
        const Matrix D = kernel::squared_distances(X, centers);
        for (Index i = 0; i < n; ++i) {
            Index best = 0;
            D.row(i).minCoeff(&best);
            assign[static_cast<std::size_t>(i)] = static_cast<int>(best);
        }
    };

    for (int iter = 0; iter < 100; ++iter) {
        assign_step();
        std::vector<Index> count(static_cast<std::size_t>(v), 0);
        for (int c : assign) ++count[static_cast<std::size_t>(c)];
        // Repair empty clusters from the largest one.
        for (int c = 0; c < v; ++c) {
            if (count[static_cast<std::size_t>(c)] > 0) continue;
            const auto largest = static_cast<int>(std::max_element(count.begin(), count.end()) - count.begin());
            Vector mean = Vector::Zero(X.cols());
            for (Index i = 0; i < n; ++i)
                if (assign[static_cast<std::size_t>(i)] == largest) mean += X.row(i).transpose();
            mean /= static_cast<double>(count[static_cast<std::size_t>(largest)]);
            Index far = -1;
            double far_d = -1.0;
            for (Index i = 0; i < n; ++i)
                if (assign[static_cast<std::size_t>(i)] == largest) {
                    const double d = (X.row(i).transpose() - mean).squaredNorm();
                    if (d > far_d) {
                        far_d = d;
                        far = i;
                    }
                }
            assign[static_cast<std::size_t>(far)] = c;
            --count[static_cast<std::size_t>(largest)];
            ++count[static_cast<std::size_t>(c)];
        }
        Matrix next = Matrix::Zero(v, X.cols());
        for (Index i = 0; i < n; ++i) next.row(assign[static_cast<std::size_t>(i)]) += X.row(i);
        for (int c = 0; c < v; ++c) next.row(c) /= static_cast<double>(count[static_cast<std::size_t>(c)]);
        const double shift = (next - centers).rowwise().norm().maxCoeff();
        centers = std::move(next);
        if (shift < 1e-8) break;
    }
    return make_partition(std::move(assign), v);
}

solver::SolverConfig block_config(const solver::SolverConfig& cfg) {
    solver::SolverConfig b = cfg;
    b.tau = 0.0;
    b.hyperplane = false;
    return b;
}

namespace {

Matrix take(const Matrix& K, const std::vector<Index>& idx) {
    const auto m = static_cast<Index>(idx.size());
    Matrix out(m, m);
    for (Index a = 0; a < m; ++a)
        for (Index b = 0; b < m; ++b) out(a, b) = K(idx[static_cast<std::size_t>(a)], idx[static_cast<std::size_t>(b)]);
    return out;
}

}  // namespace

BlockSolution solve_blocks(const Matrix& K, const Vector& y, const Partition& p,
                           const solver::SolverConfig& cfg) {
    const Index n = K.rows();
    if (static_cast<Index>(p.assign.size()) != n || y.size() != n)
        throw ConfigError("partition, labels and kernel sizes disagree");
    const solver::SolverConfig bcfg = block_config(cfg);
    BlockSolution out;
    out.alpha_bar = Vector::Zero(n);
    out.F_bar = Matrix::Ones(n, n);
    for (const auto& idx : p.members()) {
        const auto m = static_cast<Index>(idx.size());
        Vector yc(m);
        for (Index a = 0; a < m; ++a) yc[a] = y[idx[static_cast<std::size_t>(a)]];
        if ((yc.array() == yc[0]).all()) ++out.single_class_blocks;
        auto res = solver::solve(take(K, idx), yc, bcfg);
        for (Index a = 0; a < m; ++a) {
            const Index i = idx[static_cast<std::size_t>(a)];
            out.alpha_bar[i] = res.state.alpha[a];
            for (Index b = 0; b < m; ++b) out.F_bar(i, idx[static_cast<std::size_t>(b)]) = res.F(a, b);
        }
        out.objective += res.objective;
        out.traces.push_back(std::move(res.trace));
    }
    return out;
}

Matrix masked_kernel(const Matrix& K, const Partition& p) {
    Matrix out = K;
    for (Index i = 0; i < K.rows(); ++i)
        for (Index j = 0; j < K.cols(); ++j)
            if (p.assign[static_cast<std::size_t>(i)] != p.assign[static_cast<std::size_t>(j)]) out(i, j) = 0.0;
    return out;
}

Matrix assemble_off_block(const Matrix& F, const Partition& p) {
    Matrix out = F;
    for (Index i = 0; i < F.rows(); ++i)
        for (Index j = 0; j < F.cols(); ++j)
            if (p.assign[static_cast<std::size_t>(i)] != p.assign[static_cast<std::size_t>(j)]) out(i, j) = 1.0;
    return out;
}

double q_pi(const Matrix& K, const Partition& p) {
    if (static_cast<Index>(p.assign.size()) != K.rows()) throw ConfigError("q_pi: partition size mismatch");
    double q = 0.0;
    for (Index i = 0; i < K.rows(); ++i)
        for (Index j = 0; j < K.cols(); ++j)
            if (p.assign[static_cast<std::size_t>(i)] != p.assign[static_cast<std::size_t>(j)]) q += std::abs(K(i, j));
    return q;
}

ExactSolution solve_exact(const Matrix& K, const Vector& y, const solver::SolverConfig& cfg) {
    auto res = solver::solve(K, y, block_config(cfg));
    return {std::move(res.state.alpha), std::move(res.F), res.objective};
}

std::vector<Index> screen_nonsupport(const BlockSolution& approx, const Vector& y, const Matrix& K_bar,
                                     double B, double B2, double C, double kappa, Index* loose_count) {
    const Index n = K_bar.rows();
    const Vector a = approx.alpha_bar.cwiseProduct(y);
    const Vector grad = Vector::Ones(n) - y.cwiseProduct(approx.F_bar.cwiseProduct(K_bar) * a);
    std::vector<Index> out;
    Index loose = 0;
    for (Index i = 0; i < n; ++i) {
        if (approx.alpha_bar[i] != 0.0) continue;
        const double thr = (B + B2) * C * (K_bar.col(i).cwiseAbs().sum() + kappa);
        if (grad[i] <= -thr) out.push_back(i);
        if (grad[i] <= thr) ++loose;
    }
    if (loose_count) *loose_count = loose;
    return out;
}

BoundReport bound_report(const std::optional<ExactSolution>& exact, const BlockSolution& approx,
                         const Matrix& K, const Vector& y, const Partition& p,
                         const solver::SolverConfig& cfg, double kappa) {
    const Index n = K.rows();
    const double C = cfg.C;
    BoundReport r;
    r.clusters = p.clusters;
    r.kappa = kappa;
    r.Q = q_pi(K, p);

    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    bool nonpositive = false;
    auto visit = [&](double f) {
        if (f <= 0.0) {
            nonpositive = true;
            return;
        }
        lo = std::min(lo, f);
        hi = std::max(hi, f);
    };
    // Cross-cluster entries of F_bar (all 1) enter the proofs too, so every entry is visited.
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < n; ++j) {
            visit(approx.F_bar(i, j));
            if (exact) visit(exact->F(i, j));
        }
    if (nonpositive)
        r.warnings.push_back("F has nonpositive entries: the bounds assume 0 < B1");
    r.B1 = std::isfinite(lo) ? lo : 0.0;
    r.B2 = std::isfinite(hi) ? hi : 0.0;
    r.B = r.B2 - r.B1;

    const double kf = K.norm();
    const double nn = static_cast<double>(n);
    r.objective_gap_bound = 0.5 * r.B * C * C * r.Q;
    if (r.B1 > 0.0 && kf > 0.0) {
        r.alpha_gap_bound = r.B2 * C * C * r.Q / (r.B1 * kf) + 2.0 * r.B * C * C / r.B1;
        r.F_gap_bound = kf / (2.0 * cfg.eta) *
                            std::sqrt(nn * r.B2 * r.Q / (r.B1 * kf) + 2.0 * nn * r.B / r.B1) * C * C +
                        C * C * r.Q / (4.0 * cfg.eta);
    } else {
        r.alpha_gap_bound = std::numeric_limits<double>::infinity();
        r.F_gap_bound = std::numeric_limits<double>::infinity();
    }
    r.F_gap_crude = nn * std::max(std::sqrt(r.B), r.B);

    const Matrix K_bar = masked_kernel(K, p);
    r.screened = screen_nonsupport(approx, y, K_bar, r.B, r.B2, C, kappa, &r.screened_loose);

    if (exact) {
        r.objective_gap = std::abs(exact->objective - approx.objective);
        r.alpha_gap = (exact->alpha - approx.alpha_bar).squaredNorm();
        r.F_gap = (exact->F - approx.F_bar).norm();
        r.true_nonsupport = (exact->alpha.array() <= 1e-8).count();
        r.screened_false_positives = 0;
        for (Index i : r.screened)
            if (exact->alpha[i] > 1e-8) ++r.screened_false_positives;
    }
    return r;
}

svm::SvmModel train_scalable(const Matrix& X, const Vector& y, const ScalableOptions& opts) {
    if (X.rows() < 2) throw DataError("training needs at least two samples");
    if (y.size() != X.rows()) throw DataError("feature rows and label count differ");
    solver::validate_labels(y, false);

    svm::SvmModel m;
    m.X_train = X;
    m.scaled = opts.train.scale_features;
    if (m.scaled) {
        m.scaler = data::fit_minmax(X);
        m.X_scaled = data::apply_minmax(m.scaler, X);
    } else {
        m.X_scaled = X;
    }
    m.y = y;
    m.sigma = opts.train.sigma;
    m.with_bias = false;

    const Matrix K = kernel::gaussian_gram(m.X_scaled, m.sigma);
    solver::SolverConfig cfg = block_config(opts.train.solver);
    if (opts.train.auto_eta && !cfg.freeze_f) cfg.eta = solver::default_eta(K, y, cfg);
    m.config = cfg;

    const Partition p = kmeans_partition(m.X_scaled, opts.clusters, opts.seed);
    auto sol = solve_blocks(K, y, p, cfg);
    m.alpha = std::move(sol.alpha_bar);
    m.F = std::move(sol.F_bar);
    m.partition = p.assign;
    m.bias = 0.0;
    m.objective = sol.objective;
    for (const auto& t : sol.traces) {
        m.iterations = std::max(m.iterations, t.iterations);
        for (const auto& w : t.warnings) m.warnings.push_back(w);
    }
    if (sol.single_class_blocks > 0) {
        std::ostringstream os;
        os << sol.single_class_blocks << " cluster(s) contain a single class";
        m.warnings.push_back(os.str());
    }
    return m;
}

}  // namespace dank::scale
