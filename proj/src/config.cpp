#include "cmm/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "cmm/cache.hpp"

namespace cmm {

using nlohmann::json;

namespace {

struct Names {
    CorrelatorKind kind;
    const char* name;
};

constexpr Names kNames[] = {
    {CorrelatorKind::PartitionFunction, "partition_function"},
    {CorrelatorKind::SchurAverage, "schur_average"},
    {CorrelatorKind::CharpolyAverage, "charpoly_average"},
    {CorrelatorKind::CharpolyInverseSmall, "charpoly_inverse_small"},
    {CorrelatorKind::CharpolyInverseLarge, "charpoly_inverse_large"},
    {CorrelatorKind::PairAverage, "pair_average"},
    {CorrelatorKind::PairInverseSmall, "pair_inverse_small"},
    {CorrelatorKind::PairInverseLarge, "pair_inverse_large"},
    {CorrelatorKind::MixedPair, "mixed_pair"},
    {CorrelatorKind::CdKernel, "cd_kernel"},
};

[[noreturn]] void bad(const std::string& where, const std::string& what) {
    throw Error(ErrorCode::ConfigError, where + ": " + what);
}

void only_keys(const json& j, const std::string& where, std::initializer_list<const char*> allowed) {
    if (!j.is_object()) bad(where, "expected an object");
    std::set<std::string> ok(allowed.begin(), allowed.end());
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!ok.count(it.key())) bad(where, "unknown key '" + it.key() + "'");
}

double get_number(const json& j, const std::string& where) {
    if (!j.is_number()) bad(where, "expected a number");
    const double v = j.get<double>();
    if (!std::isfinite(v)) bad(where, "must be finite");
    return v;
}

int get_int(const json& j, const std::string& where) {
    if (!j.is_number_integer()) bad(where, "expected an integer");
    return j.get<int>();
}

std::vector<double> get_numbers(const json& j, const std::string& where) {
    if (!j.is_array()) bad(where, "expected an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < j.size(); ++i) out.push_back(get_number(j[i], where + "[" + std::to_string(i) + "]"));
    return out;
}

// Coefficient array (ascending powers) or {"terms": [[power, coeff], ...]}.
PolynomialPotential get_potential(const json& j, const std::string& where) {
    if (j.is_array()) return PolynomialPotential(get_numbers(j, where));
    only_keys(j, where, {"terms"});
    if (!j.contains("terms") || !j["terms"].is_array()) bad(where, "expected 'terms' array");
    std::vector<std::pair<int, double>> terms;
    for (const auto& t : j["terms"]) {
        if (!t.is_array() || t.size() != 2) bad(where, "each term is [power, coefficient]");
        const int p = get_int(t[0], where + ".terms power");
        if (p < 0) bad(where, "negative power");
        terms.emplace_back(p, get_number(t[1], where + ".terms coefficient"));
    }
    return PolynomialPotential::from_terms(terms);
}

// "real", "positive", "negative", or [lower, upper] with null for an infinite end.
Interval get_domain(const json& j, const std::string& where) {
    if (j.is_string()) {
        const auto s = j.get<std::string>();
        if (s == "real") return Interval::real_line();
        if (s == "positive") return Interval::half_line(0.0);
        if (s == "negative") return Interval{-kInf, 0.0};
        bad(where, "unknown domain '" + s + "'");
    }
    if (!j.is_array() || j.size() != 2) bad(where, "expected \"real\", \"positive\", \"negative\" or [lower, upper]");
    Interval d;
    d.lower = j[0].is_null() ? -kInf : get_number(j[0], where + "[0]");
    d.upper = j[1].is_null() ? kInf : get_number(j[1], where + "[1]");
    return d;
}

CouplingKernel get_kernel(const json& j, const std::string& where) {
    if (!j.is_object() || !j.contains("type") || !j["type"].is_string()) bad(where, "expected an object with a 'type'");
    const auto type = j["type"].get<std::string>();
    if (type == "exp") {
        only_keys(j, where, {"type", "c"});
        if (!j.contains("c")) bad(where, "exp kernel needs 'c'");
        return ExpProduct{get_number(j["c"], where + ".c")};
    }
    if (type == "cauchy") {
        only_keys(j, where, {"type"});
        return CauchyShift{};
    }
    if (type == "chain") {
        only_keys(j, where, {"type", "interaction", "inner", "order"});
        ChainEffective k;
        if (j.contains("interaction")) {
            const auto s = j["interaction"].get<std::string>();
            if (s == "exp") k.interaction = Interaction::Exponential;
            else if (s == "cauchy") k.interaction = Interaction::Cauchy;
            else bad(where + ".interaction", "expected exp or cauchy");
        }
        if (j.contains("order")) k.order = get_int(j["order"], where + ".order");
        if (!j.contains("inner") || !j["inner"].is_array()) bad(where, "chain kernel needs an 'inner' array");
        for (std::size_t i = 0; i < j["inner"].size(); ++i) {
            const json& f = j["inner"][i];
            const std::string w = where + ".inner[" + std::to_string(i) + "]";
            only_keys(f, w, {"potential", "domain"});
            if (!f.contains("potential")) bad(w, "missing 'potential'");
            InnerFactor inner;
            inner.potential = get_potential(f["potential"], w + ".potential");
            inner.domain = f.contains("domain") ? get_domain(f["domain"], w + ".domain") : Interval::real_line();
            k.inner.push_back(inner);
        }
        return k;
    }
    if (type == "tabulated") {
        only_keys(j, where, {"type", "x", "y", "values"});
        Tabulated t;
        t.x = get_numbers(j.value("x", json::array()), where + ".x");
        t.y = get_numbers(j.value("y", json::array()), where + ".y");
        t.values = get_numbers(j.value("values", json::array()), where + ".values");
        return t;
    }
    bad(where, "unknown kernel type '" + type + "'");
}

ModelSpec get_model(const json& j) {
    only_keys(j, "model", {"v_left", "v_right", "domain_left", "domain_right", "kernel"});
    ModelSpec m = ModelSpec::gaussian(0.5);
    if (j.contains("v_left")) m.v_left = get_potential(j["v_left"], "model.v_left");
    if (j.contains("v_right")) m.v_right = get_potential(j["v_right"], "model.v_right");
    if (j.contains("domain_left")) m.domain_left = get_domain(j["domain_left"], "model.domain_left");
    if (j.contains("domain_right")) m.domain_right = get_domain(j["domain_right"], "model.domain_right");
    if (j.contains("kernel")) m.kernel = get_kernel(j["kernel"], "model.kernel");
    return validate_model(std::move(m));
}

cplx get_complex(const json& j, const std::string& where) {
    if (j.is_number()) return {get_number(j, where), 0.0};
    if (!j.is_array() || j.size() != 2) bad(where, "complex numbers are [re, im] or a real number");
    return {get_number(j[0], where + ".re"), get_number(j[1], where + ".im")};
}

std::vector<cplx> get_tuple(const json& j, const std::string& where) {
    if (!j.is_array()) bad(where, "expected a list of complex numbers");
    std::vector<cplx> out;
    for (std::size_t i = 0; i < j.size(); ++i) out.push_back(get_complex(j[i], where + "[" + std::to_string(i) + "]"));
    return out;
}

std::vector<double> axis(const json& j, const std::string& where) {
    const auto v = get_numbers(j, where);
    if (v.size() != 3) bad(where, "grid axis is [lower, upper, count]");
    const int count = static_cast<int>(v[2]);
    if (count < 1 || static_cast<double>(count) != v[2]) bad(where, "grid count must be a positive integer");
    std::vector<double> out;
    for (int i = 0; i < count; ++i) out.push_back(count == 1 ? v[0] : v[0] + (v[1] - v[0]) * i / (count - 1));
    return out;
}

Partition get_partition(const json& j, const std::string& where) {
    if (!j.is_array()) bad(where, "expected a list of parts");
    std::vector<int> parts;
    for (std::size_t i = 0; i < j.size(); ++i) parts.push_back(get_int(j[i], where + "[" + std::to_string(i) + "]"));
    try {
        return Partition(parts);
    } catch (const Error& e) {
        bad(where, e.what());
    }
}

bool two_sided(CorrelatorKind k) {
    switch (k) {
        case CorrelatorKind::PairAverage:
        case CorrelatorKind::PairInverseSmall:
        case CorrelatorKind::PairInverseLarge:
        case CorrelatorKind::MixedPair:
        case CorrelatorKind::CdKernel:
            return true;
        default:
            return false;
    }
}

bool pointless(CorrelatorKind k) { return k == CorrelatorKind::PartitionFunction || k == CorrelatorKind::SchurAverage; }

TaskConfig get_task(const json& j) {
    only_keys(j, "task", {"correlator", "N", "M", "side", "orientation", "lambda", "mu", "points", "z_grid", "w"});
    TaskConfig t;
    if (!j.contains("correlator") || !j["correlator"].is_string()) bad("task", "missing 'correlator'");
    t.correlator = parse_correlator(j["correlator"].get<std::string>());
    if (!j.contains("N")) bad("task", "missing 'N'");
    t.n = get_int(j["N"], "task.N");
    if (t.n < 0) bad("task.N", "must be non-negative");
    if (j.contains("side")) {
        const auto s = j["side"].get<std::string>();
        if (s != "L" && s != "R") bad("task.side", "expected L or R");
        t.side = s == "L" ? Side::Left : Side::Right;
    }
    if (j.contains("orientation")) {
        const auto s = j["orientation"].get<std::string>();
        if (s != "L" && s != "R") bad("task.orientation", "expected L (numerator on X_L) or R");
        t.orientation = s == "L" ? Orientation::LeftNumerator : Orientation::RightNumerator;
    }
    if (j.contains("lambda")) t.lambda = get_partition(j["lambda"], "task.lambda");
    if (j.contains("mu")) t.mu = get_partition(j["mu"], "task.mu");

    const bool sided2 = two_sided(t.correlator);
    if (j.contains("points")) {
        if (j.contains("z_grid")) bad("task", "give either 'points' or 'z_grid', not both");
        if (!j["points"].is_array()) bad("task.points", "expected an array");
        for (std::size_t i = 0; i < j["points"].size(); ++i) {
            const json& p = j["points"][i];
            const std::string w = "task.points[" + std::to_string(i) + "]";
            only_keys(p, w, {"z", "w"});
            EvalPoint e;
            if (!p.contains("z")) bad(w, "missing 'z'");
            e.z = get_tuple(p["z"], w + ".z");
            if (p.contains("w")) e.w = get_tuple(p["w"], w + ".w");
            t.points.push_back(std::move(e));
        }
    } else if (j.contains("z_grid")) {
        only_keys(j["z_grid"], "task.z_grid", {"re", "im"});
        const auto re = axis(j["z_grid"].value("re", json::array({0.0, 0.0, 1})), "task.z_grid.re");
        const auto im = axis(j["z_grid"].value("im", json::array({0.0, 0.0, 1})), "task.z_grid.im");
        std::vector<cplx> w;
        if (j.contains("w")) w = get_tuple(j["w"], "task.w");
        for (double x : re)
            for (double y : im) t.points.push_back(EvalPoint{{cplx(x, y)}, w});
    }
    if (pointless(t.correlator)) {
        if (!t.points.empty()) bad("task", to_string(t.correlator) + " takes no spectral points");
        t.m = 0;
    } else {
        if (t.points.empty()) bad("task", "no evaluation points ('points' or 'z_grid')");
        t.m = static_cast<int>(t.points.front().z.size());
        for (std::size_t i = 0; i < t.points.size(); ++i) {
            const EvalPoint& p = t.points[i];
            const std::string w = "task point " + std::to_string(i);
            if (static_cast<int>(p.z.size()) != t.m) bad(w, "every z tuple must have the same length M");
            if (sided2 && p.w.size() != p.z.size()) bad(w, "z and w tuples must have the same length");
            if (!sided2 && !p.w.empty()) bad(w, to_string(t.correlator) + " takes no w points");
        }
    }
    if (j.contains("M") && get_int(j["M"], "task.M") != t.m)
        bad("task.M", "M = " + std::to_string(get_int(j["M"], "task.M")) + " does not match the point tuples (" +
                          std::to_string(t.m) + ")");
    return t;
}

ComputeConfig get_compute(const json& j) {
    only_keys(j, "compute", {"degree", "order", "kmax", "tail_tolerance", "singular_tolerance", "threads", "exact", "cache_dir"});
    ComputeConfig c;
    if (j.contains("degree")) c.degree = get_int(j["degree"], "compute.degree");
    if (j.contains("order")) c.order = get_int(j["order"], "compute.order");
    if (j.contains("kmax")) c.kmax = get_int(j["kmax"], "compute.kmax");
    if (j.contains("tail_tolerance")) c.tail_tolerance = get_number(j["tail_tolerance"], "compute.tail_tolerance");
    if (j.contains("singular_tolerance")) c.singular_tolerance = get_number(j["singular_tolerance"], "compute.singular_tolerance");
    if (j.contains("threads")) c.threads = get_int(j["threads"], "compute.threads");
    if (j.contains("exact")) {
        if (!j["exact"].is_boolean()) bad("compute.exact", "expected true or false");
        c.exact = j["exact"].get<bool>();
    }
    if (j.contains("cache_dir")) {
        if (!j["cache_dir"].is_string()) bad("compute.cache_dir", "expected a path string");
        c.cache_dir = j["cache_dir"].get<std::string>();
    }
    if (c.degree < 0) bad("compute.degree", "must be non-negative");
    if (c.order < c.degree + 2) bad("compute.order", "must exceed the degree bound by at least 2");
    if (c.threads < 0) bad("compute.threads", "must be non-negative");
    if (!(c.tail_tolerance > 0)) bad("compute.tail_tolerance", "must be positive");
    return c;
}

OutputConfig get_output(const json& j) {
    only_keys(j, "output", {"format", "path"});
    OutputConfig o;
    if (j.contains("format")) {
        const auto f = j["format"].get<std::string>();
        if (f == "csv") o.format = OutputFormat::Csv;
        else if (f == "json") o.format = OutputFormat::Json;
        else bad("output.format", "expected csv or json");
    }
    if (j.contains("path")) o.path = j["path"].get<std::string>();
    return o;
}

}  // namespace

CorrelatorKind parse_correlator(const std::string& name) {
    for (const auto& n : kNames)
        if (name == n.name) return n.kind;
    std::string known;
    for (const auto& n : kNames) known += std::string(known.empty() ? "" : ", ") + n.name;
    throw Error(ErrorCode::ConfigError, "unknown correlator '" + name + "' (known: " + known + ")");
}

std::string to_string(CorrelatorKind kind) {
    for (const auto& n : kNames)
        if (n.kind == kind) return n.name;
    return "unknown";
}

const std::vector<std::string>& correlator_names() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> v;
        for (const auto& n : kNames) v.emplace_back(n.name);
        return v;
    }();
    return names;
}

WorkspaceOptions RunConfig::workspace_options() const {
    WorkspaceOptions o;
    o.degree = compute.degree;
    o.order = compute.order;
    o.kmax = compute.kmax;
    o.tail_tolerance = compute.tail_tolerance;
    o.factor.singular_tolerance = compute.singular_tolerance;
    return o;
}

void check_task(const TaskConfig& t, int degree) {
    const std::string name = to_string(t.correlator);
    auto fail = [&](const std::string& why) {
        throw Error(ErrorCode::PreconditionViolated, name + " with N = " + std::to_string(t.n) + ", M = " +
                                                         std::to_string(t.m) + ": " + why);
    };
    auto need_degree = [&](int required) {
        if (required > degree)
            fail("needs degree bound >= " + std::to_string(required) + " (compute.degree = " + std::to_string(degree) + ")");
    };
    switch (t.correlator) {
        case CorrelatorKind::PartitionFunction:
            need_degree(t.n - 1);
            break;
        case CorrelatorKind::SchurAverage:
            if (t.n < 1) fail("needs N >= 1");
            need_degree(std::max(t.lambda.part(1), t.mu.part(1)) + t.n - 1);
            break;
        case CorrelatorKind::CharpolyAverage:
        case CorrelatorKind::PairAverage:
            need_degree(t.n + t.m - 1);
            break;
        case CorrelatorKind::CharpolyInverseSmall:
        case CorrelatorKind::PairInverseSmall:
            if (t.m > t.n) fail("this branch needs M <= N; use the _large branch");
            need_degree(t.n);
            break;
        case CorrelatorKind::CharpolyInverseLarge:
        case CorrelatorKind::PairInverseLarge:
            if (t.n < 1) fail("needs N >= 1");
            if (t.m < t.n) fail("this branch needs M >= N; use the _small branch");
            need_degree(std::max(t.n, t.m - t.n - 1));
            break;
        case CorrelatorKind::MixedPair:
            if (t.m > t.n) fail("needs M <= N");
            need_degree(t.n + t.m - 1);
            break;
        case CorrelatorKind::CdKernel:
            if (t.m != 1) fail("takes single real points z = x_R, w = x_L");
            need_degree(t.n - 1);
            for (const auto& p : t.points)
                if (p.z[0].imag() != 0.0 || p.w[0].imag() != 0.0) fail("kernel arguments must be real");
            break;
    }
}

RunConfig parse_config(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw Error(ErrorCode::ConfigError, std::string("config is not valid JSON: ") + e.what());
    }
    only_keys(j, "config", {"model", "compute", "task", "output", "seed"});
    RunConfig c;
    try {
        if (j.contains("model")) c.model = get_model(j["model"]);
        if (j.contains("compute")) c.compute = get_compute(j["compute"]);
        if (j.contains("task")) c.task = get_task(j["task"]);
        if (j.contains("output")) c.output = get_output(j["output"]);
        if (j.contains("seed")) {
            if (!j["seed"].is_number_unsigned()) bad("seed", "expected a non-negative integer");
            c.seed = j["seed"].get<std::uint64_t>();
        }
    } catch (const json::exception& e) {
        throw Error(ErrorCode::ConfigError, std::string("config has a value of the wrong type: ") + e.what());
    }
    if (c.task) check_task(*c.task, c.compute.degree);
    c.hash = hex64(fnv1a64(j.dump()));
    return c;
}

RunConfig load_config(const std::filesystem::path& path) {
    const auto text = read_text(path);
    if (!text) throw Error(ErrorCode::IoError, "cannot read config file " + path.string());
    return parse_config(*text);
}

}  // namespace cmm
