#include "dank/cli.hpp"

#include "dank/data.hpp"
#include "dank/kernel.hpp"
#include "dank/linalg.hpp"
#include "dank/model_io.hpp"
#include "dank/scale.hpp"
#include "dank/svm.hpp"
#include "dank/svr.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>

namespace dank::cli {

std::vector<double> default_grid() {
    std::vector<double> g;
    for (int e = -5; e <= 5; ++e) g.push_back(std::ldexp(1.0, e));
    return g;
}

namespace {

bool better(const CvResult& cand, const CvResult& best, bool maximise) {
    constexpr double tie = 1e-12;
    const double d = maximise ? cand.score - best.score : best.score - cand.score;
    if (d > tie) return true;
    if (d < -tie) return false;
    if (cand.C != best.C) return cand.C < best.C;
    return cand.sigma > best.sigma;
}

solver::SolverConfig fold_config(const solver::SolverConfig& base, double C, bool adaptive) {
    solver::SolverConfig cfg = base;
    cfg.C = C;
    cfg.hyperplane = true;
    cfg.lipschitz = 0.0;
    if (!adaptive) {
        cfg.tau = 0.0;
        cfg.freeze_f = true;
    }
    return cfg;
}

}  // namespace

CvResult cv_select_svm(const Matrix& X, const Vector& y, const std::vector<double>& sigmas,
                       const std::vector<double>& Cs, int folds, std::uint64_t seed,
                       const solver::SolverConfig& base, bool adaptive) {
    const auto parts = data::kfold(X.rows(), folds, seed);
    data::Dataset all{X, y, data::LabelMode::classification, {}, {}};
    std::optional<CvResult> best;
    for (double sigma : sigmas) {
        for (double C : Cs) {
            double total = 0.0;
            for (std::size_t f = 0; f < parts.size(); ++f) {
                std::vector<Index> train_idx;
                for (std::size_t g = 0; g < parts.size(); ++g)
                    if (g != f) train_idx.insert(train_idx.end(), parts[g].begin(), parts[g].end());
                const auto tr = data::subset(all, train_idx);
                const auto te = data::subset(all, parts[f]);
                svm::TrainOptions o;
                o.sigma = sigma;
                o.solver = fold_config(base, C, adaptive);
                o.auto_eta = adaptive;
                const auto m = svm::train(tr.X, tr.y, o);
                total += svm::accuracy(svm::predict(m, te.X).labels, te.y);
            }
            const CvResult cand{sigma, C, total / static_cast<double>(parts.size())};
            if (!best || better(cand, *best, true)) best = cand;
        }
    }
    if (!best) throw ConfigError("cross-validation needs a non-empty grid");
    return *best;
}

CvResult cv_select_svr(const Matrix& X, const Vector& y, const std::vector<double>& sigmas,
                       const std::vector<double>& Cs, int folds, std::uint64_t seed,
                       const solver::SolverConfig& base, double epsilon, bool adaptive) {
    const auto parts = data::kfold(X.rows(), folds, seed);
    data::Dataset all{X, y, data::LabelMode::regression, {}, {}};
    std::optional<CvResult> best;
    for (double sigma : sigmas) {
        for (double C : Cs) {
            double total = 0.0;
            for (std::size_t f = 0; f < parts.size(); ++f) {
                std::vector<Index> train_idx;
                for (std::size_t g = 0; g < parts.size(); ++g)
                    if (g != f) train_idx.insert(train_idx.end(), parts[g].begin(), parts[g].end());
                const auto tr = data::subset(all, train_idx);
                const auto te = data::subset(all, parts[f]);
                svr::SvrTrainOptions o;
                o.sigma = sigma;
                o.epsilon = epsilon;
                o.solver = fold_config(base, C, adaptive);
                o.auto_eta = adaptive;
                const auto m = svr::svr_train(tr.X, tr.y, o);
                // A fold with constant targets has no relative error; score it by plain MSE.
                const Vector p = svr::svr_predict(m, te.X);
                const double var = (te.y.array() - te.y.mean()).square().sum();
                total += var > 0.0 ? svr::rmse(p, te.y) : (p - te.y).squaredNorm();
            }
            const CvResult cand{sigma, C, total / static_cast<double>(parts.size())};
            if (!best || better(cand, *best, false)) best = cand;
        }
    }
    if (!best) throw ConfigError("cross-validation needs a non-empty grid");
    return *best;
}

namespace {

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void row(std::ostream& out, const std::string& key, const std::string& value) { out << key << ',' << value << '\n'; }
void row(std::ostream& out, const std::string& key, double value) { row(out, key, num(value)); }

// Flags shared by train, eval and bounds.
struct TrainFlags {
    std::string task = "svm";
    std::string data;
    std::string test;
    double sigma = 1.0;
    double C = 1.0;
    double tau = 0.01;
    std::string eta = "auto";
    double epsilon = 0.1;
    std::string variant = "nesterov";
    std::string step = "theory";
    std::string mode = "exact";
    int clusters = 1;
    bool cv = false;
    int folds = 5;
    std::uint64_t seed = 0;
    int t_max = 2000;
    double tol = 1e-4;
    int label_column = -1;
    bool frozen = false;

    CLI::Option* sigma_opt = nullptr;
    CLI::Option* C_opt = nullptr;
    CLI::Option* eps_opt = nullptr;
    CLI::Option* clusters_opt = nullptr;
    CLI::Option* task_opt = nullptr;

    void add_common(CLI::App* app) {
        task_opt = app->add_option("--task", task, "svm or svr")->check(CLI::IsMember({"svm", "svr"}));
        app->add_option("--data", data, "training data (libsvm, or .csv; - for stdin)")->required();
        sigma_opt = app->add_option("--sigma", sigma, "Gaussian kernel width");
        C_opt = app->add_option("--C", C, "box constraint");
        app->add_option("--eta", eta, "auto, or a positive value");
        app->add_option("--variant", variant, "nesterov, pgd or monotone")
            ->check(CLI::IsMember({"nesterov", "pgd", "monotone"}));
        app->add_option("--seed", seed, "seed for folds, splits and k-means");
        app->add_option("--t-max", t_max, "iteration cap");
        app->add_option("--tol", tol, "stop when the dual step is below this");
        app->add_option("--label-column", label_column, "CSV label column, negative counts from the end");
    }

    void add_training(CLI::App* app) {
        add_common(app);
        app->add_option("--test", test, "held-out data for a test score");
        app->add_option("--tau", tau, "nuclear-norm weight");
        eps_opt = app->add_option("--epsilon", epsilon, "insensitive-tube half width (svr)");
        app->add_option("--step", step, "theory or gram")->check(CLI::IsMember({"theory", "gram"}));
        app->add_option("--mode", mode, "exact or scalable")->check(CLI::IsMember({"exact", "scalable"}));
        clusters_opt = app->add_option("--clusters", clusters, "k-means clusters in scalable mode");
        app->add_flag("--cv", cv, "pick sigma and C by cross-validation over 2^-5..2^5");
        app->add_option("--folds", folds, "cross-validation folds");
        app->add_flag("--frozen", frozen, "hold F at the all-ones matrix (plain SVM/SVR)");
    }

    void check_conflicts() const {
        if (cv && (sigma_opt->count() || C_opt->count()))
            throw ConfigError("--cv selects sigma and C; do not pass --sigma or --C with it");
        if (task == "svr" && mode == "scalable") throw ConfigError("scalable mode is implemented for --task svm only");
        if (clusters_opt && clusters_opt->count() && mode != "scalable")
            throw ConfigError("--clusters requires --mode scalable");
        if (eps_opt && eps_opt->count() && task != "svr") throw ConfigError("--epsilon applies to --task svr only");
        if (frozen && eta != "auto") throw ConfigError("--eta has no effect with --frozen");
    }

    solver::SolverConfig solver_config() const {
        solver::SolverConfig cfg;
        cfg.C = C;
        cfg.tau = tau;
        cfg.t_max = t_max;
        cfg.tol = tol;
        cfg.variant = solver::parse_variant(variant);
        cfg.step = solver::parse_step_rule(step);
        cfg.freeze_f = frozen;
        if (frozen) cfg.tau = 0.0;
        if (eta != "auto") {
            std::size_t pos = 0;
            double v = 0.0;
            try {
                v = std::stod(eta, &pos);
            } catch (const std::exception&) {
                pos = 0;
            }
            if (pos != eta.size() || !(v > 0.0) || !std::isfinite(v))
                throw ConfigError("--eta must be 'auto' or a positive number, got '" + eta + "'");
            cfg.eta = v;
        }
        return cfg;
    }

    bool auto_eta() const { return eta == "auto"; }
};

data::Dataset load_data(const std::string& path, const std::string& task, int label_column, std::ostream& err) {
    const auto mode = task == "svr" ? data::LabelMode::regression : data::LabelMode::classification;
    auto ds = data::load(path, mode, label_column);
    if (mode == data::LabelMode::classification && data::coerce_binary_labels(ds))
        err << "warning: labels {0,1} in '" << path << "' mapped to {-1,+1}\n";
    return ds;
}

struct Trained {
    io::ModelFile file;
    std::optional<CvResult> cv;
};

Trained train_on(const TrainFlags& fl, const data::Dataset& ds) {
    Trained out;
    TrainFlags f = fl;
    solver::SolverConfig cfg = f.solver_config();
    if (f.cv) {
        const auto grid = default_grid();
        out.cv = f.task == "svm" ? cv_select_svm(ds.X, ds.y, grid, grid, f.folds, f.seed, cfg)
                                 : cv_select_svr(ds.X, ds.y, grid, grid, f.folds, f.seed, cfg, f.epsilon);
        f.sigma = out.cv->sigma;
        cfg.C = out.cv->C;
    }
    out.file.task = f.task;
    out.file.mode = f.mode;
    out.file.clusters = f.mode == "scalable" ? f.clusters : 1;
    out.file.seed = f.seed;
    if (f.task == "svm") {
        svm::TrainOptions o;
        o.sigma = f.sigma;
        o.solver = cfg;
        o.auto_eta = f.auto_eta();
        if (f.mode == "scalable") {
            scale::ScalableOptions so;
            so.train = o;
            so.clusters = f.clusters;
            so.seed = f.seed;
            out.file.svm = scale::train_scalable(ds.X, ds.y, so);
        } else {
            out.file.svm = svm::train(ds.X, ds.y, o);
        }
    } else {
        svr::SvrTrainOptions o;
        o.sigma = f.sigma;
        o.epsilon = f.epsilon;
        o.solver = cfg;
        o.auto_eta = f.auto_eta();
        out.file.svr = svr::svr_train(ds.X, ds.y, o);
    }
    return out;
}

Index model_dim(const io::ModelFile& m) { return m.svm ? m.svm->X_train.cols() : m.svr->X_train.cols(); }

void require_dim(const io::ModelFile& m, const data::Dataset& ds) {
    if (ds.dim() != model_dim(m)) {
        std::ostringstream os;
        os << "feature dimension mismatch: model has " << model_dim(m) << ", data has " << ds.dim();
        throw DataError(os.str());
    }
}

// Accuracy for svm, RMSE for svr.
double score(const io::ModelFile& m, const data::Dataset& ds) {
    require_dim(m, ds);
    if (m.svm) return svm::accuracy(svm::predict(*m.svm, ds.X).labels, ds.y);
    return svr::rmse(svr::svr_predict(*m.svr, ds.X), ds.y);
}

void report(std::ostream& out, const Trained& t, const data::Dataset& train, const std::optional<data::Dataset>& test) {
    const auto& m = t.file;
    const bool is_svm = m.svm.has_value();
    const solver::SolverConfig& cfg = is_svm ? m.svm->config : m.svr->config;
    const Matrix& F = is_svm ? m.svm->F : m.svr->F;
    const std::string metric = is_svm ? "accuracy" : "rmse";
    out << "metric,value\n";
    row(out, "task", m.task);
    row(out, "mode", m.mode);
    if (m.mode == "scalable") row(out, "clusters", std::to_string(m.clusters));
    if (t.cv) row(out, "cv_score", t.cv->score);
    row(out, "sigma", is_svm ? m.svm->sigma : m.svr->sigma);
    row(out, "C", cfg.C);
    row(out, "tau", cfg.tau);
    row(out, "eta", cfg.eta);
    if (!is_svm) row(out, "epsilon", m.svr->epsilon);
    row(out, "iterations", std::to_string(is_svm ? m.svm->iterations : m.svr->iterations));
    row(out, "objective", is_svm ? m.svm->objective : m.svr->objective);
    row(out, "bias", is_svm ? m.svm->bias : m.svr->bias);
    row(out, "F_min", F.minCoeff());
    row(out, "F_max", F.maxCoeff());
    row(out, "F_rank", std::to_string(linalg::numerical_rank(F)));
    Index sv = 0;
    if (is_svm) sv = (m.svm->alpha.array() > 1e-8).count();
    else sv = ((m.svr->alpha_hat - m.svr->alpha_check).array().abs() > 1e-8).count();
    row(out, "support_vectors", std::to_string(sv));
    row(out, "train_" + metric, score(m, train));
    if (test) row(out, "test_" + metric, score(m, *test));
}

int cmd_train(const TrainFlags& f, const std::string& model_path, std::ostream& out, std::ostream& err) {
    f.check_conflicts();
    const auto ds = load_data(f.data, f.task, f.label_column, err);
    std::optional<data::Dataset> test;
    if (!f.test.empty()) test = load_data(f.test, f.task, f.label_column, err);
    const auto t = train_on(f, ds);
    for (const auto& w : t.file.svm ? t.file.svm->warnings : t.file.svr->warnings) err << "warning: " << w << '\n';
    report(out, t, ds, test);
    if (!model_path.empty()) io::save_model_file(model_path, t.file);
    return 0;
}

int cmd_predict(const std::string& model_path, const std::string& data_path, int label_column, bool decision,
                std::ostream& out, std::ostream& err) {
    const auto m = io::load_model_file(model_path);
    const auto ds = load_data(data_path, m.task, label_column, err);
    require_dim(m, ds);
    if (m.svm) {
        const auto p = svm::predict(*m.svm, ds.X);
        out << (decision ? "index,label,decision\n" : "index,label\n");
        for (Index i = 0; i < p.labels.size(); ++i) {
            out << i << ',' << (p.labels[i] > 0 ? "1" : "-1");
            if (decision) out << ',' << num(p.decision[i]);
            out << '\n';
        }
    } else {
        const Vector v = svr::svr_predict(*m.svr, ds.X);
        out << "index,value\n";
        for (Index i = 0; i < v.size(); ++i) out << i << ',' << num(v[i]) << '\n';
    }
    return 0;
}

int cmd_eval(const TrainFlags& f, const std::string& model_path, int repeats, double fraction, std::ostream& out,
             std::ostream& err) {
    out << "metric,mean,std,repeats\n";
    if (!model_path.empty()) {
        if (repeats != 1) throw ConfigError("--repeats retrains from flags; it cannot be combined with --model");
        const auto m = io::load_model_file(model_path);
        if (f.task_opt->count() && f.task != m.task) throw ConfigError("--task disagrees with the model file");
        const auto ds = load_data(f.data, m.task, f.label_column, err);
        out << (m.svm ? "accuracy" : "rmse") << ',' << num(score(m, ds)) << ",0,1\n";
        return 0;
    }
    f.check_conflicts();
    if (repeats < 1) throw ConfigError("--repeats must be at least 1");
    if (!(fraction > 0.0 && fraction < 1.0)) throw ConfigError("--train-fraction must lie in (0, 1)");
    const auto ds = load_data(f.data, f.task, f.label_column, err);
    std::vector<double> scores;
    for (int r = 0; r < repeats; ++r) {
        const auto [tr_idx, te_idx] = data::split_indices(ds.size(), fraction, f.seed + static_cast<std::uint64_t>(r));
        const auto tr = data::subset(ds, tr_idx);
        const auto te = data::subset(ds, te_idx);
        scores.push_back(score(train_on(f, tr).file, te));
    }
    double mean = 0.0;
    for (double s : scores) mean += s;
    mean /= static_cast<double>(scores.size());
    double var = 0.0;
    for (double s : scores) var += (s - mean) * (s - mean);
    const double sd = scores.size() > 1 ? std::sqrt(var / static_cast<double>(scores.size() - 1)) : 0.0;
    out << (f.task == "svm" ? "accuracy" : "rmse") << ',' << num(mean) << ',' << num(sd) << ',' << repeats << '\n';
    return 0;
}

std::vector<int> parse_int_list(const std::string& s, const char* flag) {
    std::vector<int> v;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        std::size_t pos = 0;
        int x = 0;
        try {
            x = std::stoi(tok, &pos);
        } catch (const std::exception&) {
            pos = 0;
        }
        if (tok.empty() || pos != tok.size()) throw ConfigError(std::string(flag) + ": bad entry '" + tok + "'");
        v.push_back(x);
    }
    if (v.empty()) throw ConfigError(std::string(flag) + " is empty");
    return v;
}

int cmd_bounds(const TrainFlags& f, const std::string& clusters_list, double kappa, std::ostream& out,
               std::ostream& err) {
    if (f.task != "svm") throw ConfigError("bounds is defined for --task svm");
    const auto ds = load_data(f.data, "svm", f.label_column, err);
    const auto vs = parse_int_list(clusters_list, "--clusters-list");
    solver::SolverConfig base = f.solver_config();
    base.tau = 0.0;
    const Matrix Xs = data::apply_minmax(data::fit_minmax(ds.X), ds.X);
    const Matrix K = kernel::gaussian_gram(Xs, f.sigma);
    solver::SolverConfig cfg = scale::block_config(base);
    if (f.auto_eta()) cfg.eta = solver::default_eta(K, ds.y, cfg);
    const auto exact = scale::solve_exact(K, ds.y, cfg);
    out << "clusters,Q,B1,B2,B,objective_gap,objective_bound,alpha_gap,alpha_bound,F_gap,F_bound,F_crude,"
           "screened,screened_loose,nonsupport,false_positives\n";
    for (int v : vs) {
        const auto p = scale::kmeans_partition(Xs, v, f.seed);
        const auto approx = scale::solve_blocks(K, ds.y, p, cfg);
        const auto r = scale::bound_report(exact, approx, K, ds.y, p, cfg, kappa);
        for (const auto& w : r.warnings) err << "warning: v=" << v << ": " << w << '\n';
        out << r.clusters << ',' << num(r.Q) << ',' << num(r.B1) << ',' << num(r.B2) << ',' << num(r.B) << ','
            << num(r.objective_gap) << ',' << num(r.objective_gap_bound) << ',' << num(r.alpha_gap) << ','
            << num(r.alpha_gap_bound) << ',' << num(r.F_gap) << ',' << num(r.F_gap_bound) << ','
            << num(r.F_gap_crude) << ',' << r.screened.size() << ',' << r.screened_loose << ','
            << r.true_nonsupport << ',' << r.screened_false_positives << '\n';
    }
    return 0;
}

int cmd_grid(const std::string& model_path, const std::string& spec, std::ostream& out) {
    std::vector<double> g;
    std::stringstream ss(spec);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        std::size_t pos = 0;
        double x = 0.0;
        try {
            x = std::stod(tok, &pos);
        } catch (const std::exception&) {
            pos = 0;
        }
        if (tok.empty() || pos != tok.size() || !std::isfinite(x))
            throw ConfigError("--grid: bad entry '" + tok + "'");
        g.push_back(x);
    }
    if (g.size() != 5) throw ConfigError("--grid expects x0,x1,y0,y1,res");
    const int res = static_cast<int>(g[4]);
    if (res < 2 || static_cast<double>(res) != g[4]) throw ConfigError("--grid resolution must be an integer >= 2");
    const auto m = io::load_model_file(model_path);
    if (model_dim(m) != 2) throw DataError("grid needs a model trained on two features");
    const auto xs = data::linspace(g[0], g[1], res);
    const auto ys = data::linspace(g[2], g[3], res);
    Matrix P(static_cast<Index>(res) * res, 2);
    for (int i = 0; i < res; ++i)
        for (int j = 0; j < res; ++j) P.row(static_cast<Index>(i) * res + j) << xs[static_cast<std::size_t>(j)], ys[static_cast<std::size_t>(i)];
    const Vector d = m.svm ? svm::predict(*m.svm, P).decision : svr::svr_predict(*m.svr, P);
    out << (m.svm ? "x,y,decision\n" : "x,y,value\n");
    for (Index k = 0; k < P.rows(); ++k) out << num(P(k, 0)) << ',' << num(P(k, 1)) << ',' << num(d[k]) << '\n';
    return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Data-adaptive nonparametric kernel SVM/SVR", "dank"};
    app.require_subcommand(1);

    TrainFlags train_f, eval_f, bounds_f;
    std::string train_model, predict_model, predict_data, eval_model, grid_model, grid_spec;
    std::string clusters_list = "2,5,10";
    double kappa = 1.0, fraction = 0.8;
    int predict_label_column = -1, repeats = 1;
    bool decision = false;

    auto* train = app.add_subcommand("train", "fit a model and print a training report");
    train_f.add_training(train);
    train->add_option("--model", train_model, "write the model here");

    auto* predict = app.add_subcommand("predict", "labels or values for new data");
    predict->add_option("--model", predict_model, "model file")->required();
    predict->add_option("--data", predict_data, "data to predict (labels are ignored)")->required();
    predict->add_option("--label-column", predict_label_column, "CSV label column");
    predict->add_flag("--decision", decision, "also print decision values (svm)");

    auto* eval = app.add_subcommand("eval", "accuracy or RMSE of a model, or mean/std over repeated splits");
    eval_f.add_training(eval);
    eval->add_option("--model", eval_model, "evaluate this model on --data");
    eval->add_option("--repeats", repeats, "random train/test splits when no model is given");
    eval->add_option("--train-fraction", fraction, "training share of each split");

    auto* bounds = app.add_subcommand("bounds", "decomposition bounds and screening per cluster count");
    bounds_f.t_max = 20000;
    bounds_f.tol = 1e-8;
    bounds_f.step = "gram";
    bounds_f.add_common(bounds);
    bounds->add_option("--clusters-list", clusters_list, "comma-separated cluster counts");
    bounds->add_option("--kappa", kappa, "screening slack");

    auto* grid = app.add_subcommand("grid", "decision values on a 2-D grid as CSV");
    grid->add_option("--model", grid_model, "model file")->required();
    grid->add_option("--grid", grid_spec, "x0,x1,y0,y1,res")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 1;
    }

    try {
        if (train->parsed()) return cmd_train(train_f, train_model, out, err);
        if (predict->parsed()) return cmd_predict(predict_model, predict_data, predict_label_column, decision, out, err);
        if (eval->parsed()) return cmd_eval(eval_f, eval_model, repeats, fraction, out, err);
        if (bounds->parsed()) return cmd_bounds(bounds_f, clusters_list, kappa, out, err);
        if (grid->parsed()) return cmd_grid(grid_model, grid_spec, out);
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    } catch (const DataError& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    } catch (const NumericalError& e) {
        err << "error: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 3;
    }
    return 1;
}

}  // namespace dank::cli
