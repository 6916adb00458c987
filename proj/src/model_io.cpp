#include "dank/model_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace dank::io {

std::string format_real(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17e", v);
    return buf;
}

namespace {

class Writer {
public:
    explicit Writer(std::ostream& out) : out_(out) {}

    void text(const std::string& key, const std::string& value) { out_ << key << ' ' << value << '\n'; }
    void integer(const std::string& key, long long value) { out_ << key << ' ' << value << '\n'; }
    void real(const std::string& key, double value) { out_ << key << ' ' << format_real(value) << '\n'; }

    void vector(const std::string& key, const Vector& v) {
        out_ << key << ' ' << v.size();
        for (Index i = 0; i < v.size(); ++i) out_ << ' ' << format_real(v[i]);
        out_ << '\n';
    }

    void matrix(const std::string& key, const Matrix& M) {
        out_ << key << ' ' << M.rows() << ' ' << M.cols() << '\n';
        for (Index i = 0; i < M.rows(); ++i) {
            for (Index j = 0; j < M.cols(); ++j) {
                if (j) out_ << ' ';
                out_ << format_real(M(i, j));
            }
            out_ << '\n';
        }
    }

private:
    std::ostream& out_;
};

class Reader {
public:
    explicit Reader(std::istream& in) : in_(in) {}

    std::string key() {
        std::string k;
        if (!(in_ >> k)) fail("unexpected end of model file");
        return k;
    }

    void expect(const std::string& k) {
        const std::string got = key();
        if (got != k) fail("expected '" + k + "', found '" + got + "'");
    }

    std::string word() {
        std::string w;
        if (!(in_ >> w)) fail("unexpected end of model file");
        return w;
    }

    double real() {
        const std::string w = word();
        char* end = nullptr;
        const double v = std::strtod(w.c_str(), &end);
        if (end != w.c_str() + w.size()) fail("malformed number '" + w + "'");
        return v;
    }

    long long integer() {
        const std::string w = word();
        try {
            std::size_t pos = 0;
            const long long v = std::stoll(w, &pos);
            if (pos != w.size()) throw std::invalid_argument(w);
            return v;
        } catch (const std::exception&) {
            fail("malformed integer '" + w + "'");
        }
    }

    Vector vector() {
        const long long n = integer();
        if (n < 0) fail("negative vector length");
        Vector v(n);
        for (long long i = 0; i < n; ++i) v[i] = real();
        return v;
    }

    Matrix matrix() {
        const long long r = integer(), c = integer();
        if (r < 0 || c < 0) fail("negative matrix shape");
        Matrix M(r, c);
        for (long long i = 0; i < r; ++i)
            for (long long j = 0; j < c; ++j) M(i, j) = real();
        return M;
    }

    [[noreturn]] static void fail(const std::string& msg) { throw DataError("model file: " + msg); }

private:
    std::istream& in_;
};

void write_config(Writer& w, const solver::SolverConfig& c) {
    w.real("C", c.C);
    w.real("tau", c.tau);
    w.real("eta", c.eta);
    w.integer("t_max", c.t_max);
    w.real("tol", c.tol);
    w.integer("projection_rounds", c.projection_rounds);
    w.text("variant", solver::to_string(c.variant));
    w.text("projection", c.projection == solver::ProjectionMethod::exact ? "exact" : "alternating");
    w.text("step", solver::to_string(c.step));
    w.integer("freeze_f", c.freeze_f ? 1 : 0);
    w.integer("hyperplane", c.hyperplane ? 1 : 0);
    w.real("lipschitz", c.lipschitz);
}

solver::SolverConfig read_config(Reader& r) {
    solver::SolverConfig c;
    r.expect("C");
    c.C = r.real();
    r.expect("tau");
    c.tau = r.real();
    r.expect("eta");
    c.eta = r.real();
    r.expect("t_max");
    c.t_max = static_cast<int>(r.integer());
    r.expect("tol");
    c.tol = r.real();
    r.expect("projection_rounds");
    c.projection_rounds = static_cast<int>(r.integer());
    r.expect("variant");
    c.variant = solver::parse_variant(r.word());
    r.expect("projection");
    const std::string proj = r.word();
    if (proj == "exact") c.projection = solver::ProjectionMethod::exact;
    else if (proj == "alternating") c.projection = solver::ProjectionMethod::alternating;
    else Reader::fail("unknown projection '" + proj + "'");
    r.expect("step");
    c.step = solver::parse_step_rule(r.word());
    r.expect("freeze_f");
    c.freeze_f = r.integer() != 0;
    r.expect("hyperplane");
    c.hyperplane = r.integer() != 0;
    r.expect("lipschitz");
    c.lipschitz = r.real();
    return c;
}

void write_F(Writer& w, const Matrix& F, const std::vector<int>& partition, int clusters) {
    if (partition.empty()) {
        w.matrix("F", F);
        return;
    }
    // Block-diagonal storage; entries across clusters are 1 by construction.
    w.integer("F_blocks", clusters);
    for (int c = 0; c < clusters; ++c) {
        std::vector<Index> idx;
        for (std::size_t i = 0; i < partition.size(); ++i)
            if (partition[i] == c) idx.push_back(static_cast<Index>(i));
        Matrix B(static_cast<Index>(idx.size()), static_cast<Index>(idx.size()));
        for (std::size_t a = 0; a < idx.size(); ++a)
            for (std::size_t b = 0; b < idx.size(); ++b) B(static_cast<Index>(a), static_cast<Index>(b)) = F(idx[a], idx[b]);
        w.matrix("block", B);
    }
}

Matrix read_F(Reader& r, Index n, const std::vector<int>& partition) {
    const std::string k = r.key();
    if (k == "F") {
        Matrix F = r.matrix();
        if (F.rows() != n || F.cols() != n) Reader::fail("F shape does not match the training set");
        return F;
    }
    if (k != "F_blocks") Reader::fail("expected F or F_blocks, found '" + k + "'");
    const long long clusters = r.integer();
    Matrix F = Matrix::Ones(n, n);
    for (long long c = 0; c < clusters; ++c) {
        r.expect("block");
        const Matrix B = r.matrix();
        std::vector<Index> idx;
        for (std::size_t i = 0; i < partition.size(); ++i)
            if (partition[i] == c) idx.push_back(static_cast<Index>(i));
        if (B.rows() != static_cast<Index>(idx.size()) || B.cols() != B.rows())
            Reader::fail("block shape does not match the partition");
        for (std::size_t a = 0; a < idx.size(); ++a)
            for (std::size_t b = 0; b < idx.size(); ++b) F(idx[a], idx[b]) = B(static_cast<Index>(a), static_cast<Index>(b));
    }
    return F;
}

void write_scaler(Writer& w, bool scaled, const data::Scaler& s) {
    w.integer("scaled", scaled ? 1 : 0);
    if (scaled) {
        w.vector("scaler_min", s.min);
        w.vector("scaler_max", s.max);
    }
}

void read_scaler(Reader& r, bool& scaled, data::Scaler& s) {
    r.expect("scaled");
    scaled = r.integer() != 0;
    if (scaled) {
        r.expect("scaler_min");
        s.min = r.vector();
        r.expect("scaler_max");
        s.max = r.vector();
    }
}

std::vector<int> read_partition(Reader& r) {
    r.expect("partition");
    const long long n = r.integer();
    std::vector<int> p(static_cast<std::size_t>(std::max(0LL, n)));
    for (auto& c : p) c = static_cast<int>(r.integer());
    return p;
}

void write_partition(Writer& w, const std::vector<int>& p, std::ostream& out) {
    (void)w;
    out << "partition " << p.size();
    for (int c : p) out << ' ' << c;
    out << '\n';
}

}  // namespace

void save_model(std::ostream& out, const ModelFile& m) {
    Writer w(out);
    w.integer("dank-model", kModelVersion);
    w.text("task", m.task);
    w.text("mode", m.mode);
    w.integer("clusters", m.clusters);
    w.integer("seed", static_cast<long long>(m.seed));
    if (m.task == "svm") {
        if (!m.svm) throw ConfigError("save_model: svm task without an svm model");
        const auto& s = *m.svm;
        w.real("sigma", s.sigma);
        write_config(w, s.config);
        w.integer("with_bias", s.with_bias ? 1 : 0);
        write_scaler(w, s.scaled, s.scaler);
        w.matrix("X", s.X_train);
        w.vector("y", s.y);
        w.vector("alpha", s.alpha);
        write_partition(w, s.partition, out);
        write_F(w, s.F, s.partition, m.clusters);
        w.real("bias", s.bias);
        w.integer("iterations", s.iterations);
        w.real("objective", s.objective);
    } else if (m.task == "svr") {
        if (!m.svr) throw ConfigError("save_model: svr task without an svr model");
        const auto& s = *m.svr;
        w.real("sigma", s.sigma);
        w.real("epsilon", s.epsilon);
        write_config(w, s.config);
        write_scaler(w, s.scaled, s.scaler);
        w.integer("targets_scaled", s.targets_scaled ? 1 : 0);
        w.real("target_min", s.target_min);
        w.real("target_max", s.target_max);
        w.matrix("X", s.X_train);
        w.vector("y", s.y);
        w.vector("alpha_hat", s.alpha_hat);
        w.vector("alpha_check", s.alpha_check);
        w.matrix("F", s.F);
        w.real("bias", s.bias);
        w.integer("iterations", s.iterations);
        w.real("objective", s.objective);
    } else {
        throw ConfigError("save_model: unknown task '" + m.task + "'");
    }
    w.text("end", "dank-model");
}

ModelFile load_model(std::istream& in) {
    Reader r(in);
    r.expect("dank-model");
    const long long version = r.integer();
    if (version != kModelVersion) {
        std::ostringstream os;
        os << "unsupported model version " << version << " (this build reads " << kModelVersion << ")";
        Reader::fail(os.str());
    }
    ModelFile m;
    r.expect("task");
    m.task = r.word();
    r.expect("mode");
    m.mode = r.word();
    r.expect("clusters");
    m.clusters = static_cast<int>(r.integer());
    r.expect("seed");
    m.seed = static_cast<std::uint64_t>(r.integer());
    if (m.task == "svm") {
        svm::SvmModel s;
        r.expect("sigma");
        s.sigma = r.real();
        s.config = read_config(r);
        r.expect("with_bias");
        s.with_bias = r.integer() != 0;
        read_scaler(r, s.scaled, s.scaler);
        r.expect("X");
        s.X_train = r.matrix();
        s.X_scaled = s.scaled ? data::apply_minmax(s.scaler, s.X_train) : s.X_train;
        r.expect("y");
        s.y = r.vector();
        r.expect("alpha");
        s.alpha = r.vector();
        s.partition = read_partition(r);
        const Index n = s.X_train.rows();
        if (s.y.size() != n || s.alpha.size() != n) Reader::fail("label or dual length does not match X");
        if (!s.partition.empty() && static_cast<Index>(s.partition.size()) != n)
            Reader::fail("partition length does not match X");
        s.F = read_F(r, n, s.partition);
        r.expect("bias");
        s.bias = r.real();
        r.expect("iterations");
        s.iterations = static_cast<int>(r.integer());
        r.expect("objective");
        s.objective = r.real();
        m.svm = std::move(s);
    } else if (m.task == "svr") {
        svr::SvrModel s;
        r.expect("sigma");
        s.sigma = r.real();
        r.expect("epsilon");
        s.epsilon = r.real();
        s.config = read_config(r);
        read_scaler(r, s.scaled, s.scaler);
        r.expect("targets_scaled");
        s.targets_scaled = r.integer() != 0;
        r.expect("target_min");
        s.target_min = r.real();
        r.expect("target_max");
        s.target_max = r.real();
        r.expect("X");
        s.X_train = r.matrix();
        s.X_scaled = s.scaled ? data::apply_minmax(s.scaler, s.X_train) : s.X_train;
        r.expect("y");
        s.y = r.vector();
        r.expect("alpha_hat");
        s.alpha_hat = r.vector();
        r.expect("alpha_check");
        s.alpha_check = r.vector();
        const Index n = s.X_train.rows();
        if (s.y.size() != n || s.alpha_hat.size() != n || s.alpha_check.size() != n)
            Reader::fail("target or dual length does not match X");
        r.expect("F");
        s.F = r.matrix();
        if (s.F.rows() != n || s.F.cols() != n) Reader::fail("F shape does not match the training set");
        r.expect("bias");
        s.bias = r.real();
        r.expect("iterations");
        s.iterations = static_cast<int>(r.integer());
        r.expect("objective");
        s.objective = r.real();
        m.svr = std::move(s);
    } else {
        Reader::fail("unknown task '" + m.task + "'");
    }
    r.expect("end");
    r.expect("dank-model");
    return m;
}

void save_model_file(const std::string& path, const ModelFile& m) {
    std::ofstream f(path);
    if (!f) throw DataError("cannot write model file '" + path + "'");
    save_model(f, m);
    if (!f) throw DataError("error while writing model file '" + path + "'");
}

ModelFile load_model_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw DataError("cannot open model file '" + path + "'");
    return load_model(f);
}

}  // namespace dank::io
