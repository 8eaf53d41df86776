#include "cmm/cache.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <system_error>

namespace cmm {

void atomic_write(const std::filesystem::path& path, const std::string& content) {
    std::error_code ec;
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) throw Error(ErrorCode::IoError, "cannot create directory " + path.parent_path().string() + ": " + ec.message());
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error(ErrorCode::IoError, "cannot open " + tmp.string() + " for writing");
        out << content;
        out.flush();
        if (!out) throw Error(ErrorCode::IoError, "write failed for " + tmp.string());
    }
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw Error(ErrorCode::IoError, "cannot rename " + tmp.string() + ": " + ec.message());
}

std::optional<std::string> read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return std::nullopt;
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

std::string bimoment_cache_key(const ModelSpec& model, int degree, int order) {
    const std::string text = "bimoments;v" + std::to_string(kCacheVersion) + ";" + model_fingerprint(model) +
                             ";d=" + std::to_string(degree) + ";order=" + std::to_string(order);
    return hex64(fnv1a64(text));
}

std::string system_cache_key(const std::string& bimoment_key, const FactorizeOptions& opts) {
    const std::string text = "system;v" + std::to_string(kCacheVersion) + ";" + bimoment_key + ";" +
                             hexfloat(opts.singular_tolerance) + ";" + hexfloat(opts.cancellation_threshold) + ";" +
                             hexfloat(opts.condition_threshold) + ";" + hexfloat(opts.drift_threshold);
    return hex64(fnv1a64(text));
}

namespace {

void put_vec(std::ostringstream& os, const char* name, std::span<const double> v) {
    os << name << ' ' << v.size();
    for (double x : v) os << ' ' << hexfloat(x);
    os << '\n';
}

void put_mat(std::ostringstream& os, const char* name, const Eigen::MatrixXd& m) {
    os << name << ' ' << m.rows() << ' ' << m.cols();
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) os << ' ' << hexfloat(m(i, j));
    os << '\n';
}

std::string wrap(const char* kind, const std::string& body) {
    return "cmm-cache " + std::to_string(kCacheVersion) + " " + kind + "\nchecksum " + hex64(fnv1a64(body)) + "\n" +
           body;
}

struct ParseFail {
    std::string why;
};

class Reader {
public:
    explicit Reader(const std::string& body) : in_(body) {}

    void expect(const char* name) {
        std::string tok;
        if (!(in_ >> tok) || tok != name) throw ParseFail{std::string("expected record '") + name + "'"};
    }
    std::string word() {
        std::string tok;
        if (!(in_ >> tok)) throw ParseFail{"truncated record"};
        return tok;
    }
    long integer() {
        const std::string t = word();
        char* end = nullptr;
        const long v = std::strtol(t.c_str(), &end, 10);
        if (end == t.c_str() || *end) throw ParseFail{"bad integer '" + t + "'"};
        return v;
    }
    double real() {
        const std::string t = word();
        char* end = nullptr;
        const double v = std::strtod(t.c_str(), &end);
        if (end == t.c_str() || *end) throw ParseFail{"bad number '" + t + "'"};
        return v;
    }
    std::vector<double> vec(const char* name) {
        expect(name);
        const long n = integer();
        if (n < 0 || n > 1000000) throw ParseFail{"bad length"};
        std::vector<double> v(static_cast<std::size_t>(n));
        for (auto& x : v) x = real();
        return v;
    }
    Eigen::MatrixXd mat(const char* name) {
        expect(name);
        const long r = integer(), c = integer();
        if (r < 0 || c < 0 || r * c > 1000000) throw ParseFail{"bad matrix shape"};
        Eigen::MatrixXd m(r, c);
        for (long i = 0; i < r; ++i)
            for (long j = 0; j < c; ++j) m(i, j) = real();
        return m;
    }
    void end() {
        std::string tok;
        if (in_ >> tok) throw ParseFail{"trailing data"};
    }

private:
    std::istringstream in_;
};

// Splits off and verifies the two header lines; returns the body.
std::string checked_body(const std::string& text, const char* kind) {
    const auto l1 = text.find('\n');
    if (l1 == std::string::npos) throw ParseFail{"missing header"};
    const auto l2 = text.find('\n', l1 + 1);
    if (l2 == std::string::npos) throw ParseFail{"missing checksum line"};
    const std::string head = text.substr(0, l1);
    const std::string expect_head = "cmm-cache " + std::to_string(kCacheVersion) + " " + kind;
    if (head != expect_head) throw ParseFail{"header mismatch '" + head + "'"};
    const std::string sum = text.substr(l1 + 1, l2 - l1 - 1);
    const std::string body = text.substr(l2 + 1);
    if (sum != "checksum " + hex64(fnv1a64(body))) throw ParseFail{"checksum mismatch"};
    return body;
}

}  // namespace

std::string serialize_bimoments(const BimomentMatrix& bm, const std::string& key) {
    std::ostringstream os;
    os << "key " << key << '\n';
    os << "fingerprint " << bm.fingerprint << '\n';
    os << "degree " << bm.degree << '\n';
    os << "order " << bm.order << '\n';
    put_vec(os, "left_alpha", bm.left_basis.alpha());
    put_vec(os, "left_beta", bm.left_basis.beta());
    put_vec(os, "right_alpha", bm.right_basis.alpha());
    put_vec(os, "right_beta", bm.right_basis.beta());
    put_mat(os, "entries", bm.entries);
    put_mat(os, "gram", bm.gram);
    return wrap("bimoments", os.str());
}

std::string serialize_system(const BiorthogonalSystem& sys, const std::string& key) {
    std::ostringstream os;
    os << "key " << key << '\n';
    os << "fingerprint " << sys.source_fingerprint() << '\n';
    put_vec(os, "left_alpha", sys.left_basis().alpha());
    put_vec(os, "left_beta", sys.left_basis().beta());
    put_vec(os, "right_alpha", sys.right_basis().alpha());
    put_vec(os, "right_beta", sys.right_basis().beta());
    put_mat(os, "p_basis", sys.p_basis_coeffs());
    put_mat(os, "q_basis", sys.q_basis_coeffs());
    put_vec(os, "norms", sys.norms());
    put_vec(os, "cancellation", sys.cancellation_ratios());
    os << "condition " << hexfloat(sys.condition()) << '\n';
    os << "warnings " << sys.warnings().size();
    for (const auto& w : sys.warnings()) os << ' ' << w.degree << ' ' << hexfloat(w.cancellation) << ' ' << hexfloat(w.condition) << ' ' << hexfloat(w.drift);
    os << '\n';
    return wrap("system", os.str());
}

std::optional<BimomentMatrix> parse_bimoments(const std::string& text, const std::string& key, std::string* reason) {
    try {
        Reader r(checked_body(text, "bimoments"));
        r.expect("key");
        if (r.word() != key) throw ParseFail{"key mismatch"};
        BimomentMatrix bm;
        r.expect("fingerprint");
        bm.fingerprint = r.word();
        r.expect("degree");
        bm.degree = static_cast<int>(r.integer());
        r.expect("order");
        bm.order = static_cast<int>(r.integer());
        auto la = r.vec("left_alpha"), lb = r.vec("left_beta");
        auto ra = r.vec("right_alpha"), rb = r.vec("right_beta");
        bm.left_basis = PolyBasis(std::move(la), std::move(lb));
        bm.right_basis = PolyBasis(std::move(ra), std::move(rb));
        bm.entries = r.mat("entries");
        bm.gram = r.mat("gram");
        r.end();
        const Eigen::Index n = bm.degree + 1;
        if (bm.entries.rows() != n || bm.entries.cols() != n || bm.gram.rows() != n || bm.gram.cols() != n)
            throw ParseFail{"shape mismatch"};
        return bm;
    } catch (const ParseFail& f) {
        if (reason) *reason = f.why;
    } catch (const std::exception& e) {
        if (reason) *reason = e.what();
    }
    return std::nullopt;
}

std::optional<BiorthogonalSystem> parse_system(const std::string& text, const std::string& key, std::string* reason) {
    try {
        Reader r(checked_body(text, "system"));
        r.expect("key");
        if (r.word() != key) throw ParseFail{"key mismatch"};
        r.expect("fingerprint");
        std::string fp = r.word();
        auto la = r.vec("left_alpha"), lb = r.vec("left_beta");
        auto ra = r.vec("right_alpha"), rb = r.vec("right_beta");
        Eigen::MatrixXd pb = r.mat("p_basis"), qb = r.mat("q_basis");
        std::vector<double> norms = r.vec("norms");
        std::vector<double> cancel = r.vec("cancellation");
        r.expect("condition");
        const double cond = r.real();
        r.expect("warnings");
        const long nw = r.integer();
        if (nw < 0 || nw > 100000) throw ParseFail{"bad warning count"};
        std::vector<ConditionWarning> warns;
        for (long i = 0; i < nw; ++i) {
            ConditionWarning w;
            w.degree = static_cast<int>(r.integer());
            w.cancellation = r.real();
            w.condition = r.real();
            w.drift = r.real();
            warns.push_back(w);
        }
        r.end();
        const Eigen::Index n = static_cast<Eigen::Index>(norms.size());
        if (n == 0 || pb.rows() != n || pb.cols() != n || qb.rows() != n || qb.cols() != n)
            throw ParseFail{"shape mismatch"};
        BiorthogonalSystem sys(PolyBasis(std::move(la), std::move(lb)), PolyBasis(std::move(ra), std::move(rb)),
                               std::move(pb), std::move(qb), std::move(norms), std::move(fp));
        sys.set_diagnostics(std::move(cancel), cond, std::move(warns));
        return sys;
    } catch (const ParseFail& f) {
        if (reason) *reason = f.why;
    } catch (const std::exception& e) {
        if (reason) *reason = e.what();
    }
    return std::nullopt;
}

Workspace Cache::load_or_build(const ModelSpec& model, const WorkspaceOptions& opts, CacheLog* log) const {
    CacheLog local;
    CacheLog& lg = log ? *log : local;
    const ModelSpec valid = validate_model(model);
    lg.bimoment_key = bimoment_cache_key(valid, opts.degree, opts.order);
    lg.system_key = system_cache_key(lg.bimoment_key, opts.factor);

    std::optional<BimomentMatrix> bm;
    const auto bpath = bimoment_path(lg.bimoment_key);
    if (auto text = read_text(bpath)) {
        std::string why;
        bm = parse_bimoments(*text, lg.bimoment_key, &why);
        if (bm && bm->fingerprint != model_fingerprint(valid)) {
            bm.reset();
            why = "fingerprint mismatch";
        }
        lg.lines.push_back(bm ? "cache hit: bimoments " + lg.bimoment_key
                              : "cache corrupt: bimoments " + lg.bimoment_key + " (" + why + "), recomputing");
    } else {
        lg.lines.push_back("cache miss: bimoments " + lg.bimoment_key);
    }
    lg.bimoment_hit = bm.has_value();
    if (!bm) {
        bm = bimoment_matrix(valid, opts.degree, build_side_rules(valid, opts.order));
        atomic_write(bpath, serialize_bimoments(*bm, lg.bimoment_key));
    }

    std::optional<BiorthogonalSystem> sys;
    const auto spath = system_path(lg.system_key);
    if (lg.bimoment_hit) {
        if (auto text = read_text(spath)) {
            std::string why;
            sys = parse_system(*text, lg.system_key, &why);
            lg.lines.push_back(sys ? "cache hit: system " + lg.system_key
                                   : "cache corrupt: system " + lg.system_key + " (" + why + "), recomputing");
        } else {
            lg.lines.push_back("cache miss: system " + lg.system_key);
        }
    }
    lg.system_hit = sys.has_value();
    if (!sys) {
        sys = factorize_resolved(valid, *bm, opts);
        atomic_write(spath, serialize_system(*sys, lg.system_key));
    }
    return Workspace::assemble(valid, opts, std::move(*bm), std::move(*sys));
}

}  // namespace cmm
