#include "cmm/report.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

#include <json.hpp>

namespace cmm {

using nlohmann::ordered_json;

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

namespace {

std::string join(const std::vector<cplx>& zs, bool imag) {
    std::string out;
    for (std::size_t i = 0; i < zs.size(); ++i) {
        if (i) out += ';';
        out += format_double(imag ? zs[i].imag() : zs[i].real());
    }
    return out;
}

// Fields built from format_double never contain commas or quotes; ';' joins are safe too.
std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
    return q + "\"";
}

ordered_json number(double v) {
    if (std::isfinite(v)) return v;
    return format_double(v);
}

ordered_json tuple(const std::vector<cplx>& zs) {
    ordered_json a = ordered_json::array();
    for (cplx z : zs) a.push_back(ordered_json::array({number(z.real()), number(z.imag())}));
    return a;
}

ordered_json provenance_json(const Provenance& p) {
    return ordered_json{{"config_hash", p.config_hash},
                        {"model_fingerprint", p.model_fingerprint},
                        {"bimoment_cache_key", p.bimoment_key},
                        {"system_cache_key", p.system_key},
                        {"library_version", p.version}};
}

}  // namespace

std::string render_eval_csv(const std::vector<EvalRow>& rows, const Provenance& prov) {
    std::ostringstream os;
    os << "# cmm " << prov.version << "\n";
    os << "# config_hash " << prov.config_hash << "\n";
    os << "# model_fingerprint " << prov.model_fingerprint << "\n";
    os << "# bimoment_cache_key " << prov.bimoment_key << "\n";
    os << "# system_cache_key " << prov.system_key << "\n";
    os << "correlator,N,M,point_index,z_re,z_im,w_re,w_im,value_re,value_im,log_scale,tail,cond\n";
    for (const EvalRow& r : rows) {
        os << csv_field(r.correlator) << ',' << r.n << ',' << r.m << ',' << r.point_index << ',' << join(r.z, false) << ','
           << join(r.z, true) << ',' << join(r.w, false) << ',' << join(r.w, true) << ',' << format_double(r.value.real())
           << ',' << format_double(r.value.imag()) << ',' << format_double(r.log_scale) << ',' << format_double(r.tail)
           << ',' << format_double(r.cond) << '\n';
    }
    return os.str();
}

std::string render_eval_json(const std::vector<EvalRow>& rows, const Provenance& prov) {
    ordered_json out;
    out["provenance"] = provenance_json(prov);
    ordered_json arr = ordered_json::array();
    for (const EvalRow& r : rows) {
        arr.push_back(ordered_json{{"correlator", r.correlator},
                                   {"N", r.n},
                                   {"M", r.m},
                                   {"point_index", r.point_index},
                                   {"z", tuple(r.z)},
                                   {"w", tuple(r.w)},
                                   {"value_re", number(r.value.real())},
                                   {"value_im", number(r.value.imag())},
                                   {"log_scale", number(r.log_scale)},
                                   {"tail", number(r.tail)},
                                   {"cond", number(r.cond)}});
    }
    out["rows"] = std::move(arr);
    return out.dump(2) + "\n";
}

std::string render_verify_csv(const VerifyReport& rep) {
    std::ostringstream os;
    os << "# cmm " << kLibraryVersion << " verification, level " << to_string(rep.level) << ", tolerance scale "
       << format_double(rep.tolerance_scale) << "\n";
    os << "check_id,criterion,formula_re,formula_im,oracle_re,oracle_im,oracle_bound,error,bound,pass,note\n";
    for (const CheckRow& r : rep.rows) {
        os << csv_field(r.id) << ',' << r.criterion << ',' << format_double(r.formula.real()) << ','
           << format_double(r.formula.imag()) << ',' << format_double(r.oracle.real()) << ','
           << format_double(r.oracle.imag()) << ',' << format_double(r.oracle_bound) << ',' << format_double(r.error) << ','
           << format_double(r.tolerance) << ',' << (r.pass ? "pass" : "fail") << ',' << csv_field(r.note) << '\n';
    }
    return os.str();
}

std::string render_verify_json(const VerifyReport& rep) {
    ordered_json out;
    out["level"] = to_string(rep.level);
    out["tolerance_scale"] = rep.tolerance_scale;
    out["seconds"] = rep.seconds;
    out["pass"] = rep.all_pass();
    ordered_json crit = ordered_json::array();
    for (const auto& c : rep.criteria)
        crit.push_back(ordered_json{{"criterion", c.criterion}, {"title", c.title}, {"pass", c.pass}, {"checks", c.rows},
                                    {"failed", c.failed}});
    out["criteria"] = std::move(crit);
    ordered_json rows = ordered_json::array();
    for (const CheckRow& r : rep.rows)
        rows.push_back(ordered_json{{"check_id", r.id},
                                    {"criterion", r.criterion},
                                    {"description", r.description},
                                    {"formula", {number(r.formula.real()), number(r.formula.imag())}},
                                    {"oracle", {number(r.oracle.real()), number(r.oracle.imag())}},
                                    {"oracle_bound", number(r.oracle_bound)},
                                    {"error", number(r.error)},
                                    {"bound", number(r.tolerance)},
                                    {"pass", r.pass},
                                    {"note", r.note},
                                    {"seconds", r.seconds}});
    out["checks"] = std::move(rows);
    return out.dump(2) + "\n";
}

std::string render_verify_summary(const VerifyReport& rep) {
    std::ostringstream os;
    for (const auto& c : rep.criteria)
        os << "criterion " << (c.criterion < 10 ? " " : "") << c.criterion << ": " << (c.pass ? "PASS" : "FAIL") << "  "
           << c.title << " (" << c.rows - c.failed << "/" << c.rows << " checks)\n";
    int failed = 0;
    for (const CheckRow& r : rep.rows)
        if (!r.pass) {
            if (failed++ == 0) os << "failing checks:\n";
            os << "  " << r.id << ": error " << format_double(r.error) << " > bound " << format_double(r.tolerance);
            if (!r.note.empty()) os << " (" << r.note << ")";
            os << "\n";
        }
    os << (rep.all_pass() ? "all criteria pass" : "verification FAILED") << " in " << std::fixed;
    os.precision(1);
    os << rep.seconds << " s\n";
    return os.str();
}

}  // namespace cmm
