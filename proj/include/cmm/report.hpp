#pragma once

#include <string>
#include <vector>

#include "cmm/config.hpp"
#include "cmm/verify.hpp"

namespace cmm {

inline constexpr const char* kLibraryVersion = "0.1.0";

// One evaluated correlator. For M > 1 the z/w columns hold the tuple joined by ';'.
struct EvalRow {
    std::string correlator;
    int n = 0;
    int m = 0;
    int point_index = 0;
    std::vector<cplx> z, w;
    cplx value{0.0, 0.0};
    double log_scale = 0.0;
    double tail = 0.0;
    double cond = 0.0;
};

struct Provenance {
    std::string config_hash;
    std::string model_fingerprint;
    std::string bimoment_key;
    std::string system_key;
    std::string version = kLibraryVersion;
};

// CSV: '#' provenance lines, then the header
// correlator,N,M,point_index,z_re,z_im,w_re,w_im,value_re,value_im,log_scale,tail,cond
std::string render_eval_csv(const std::vector<EvalRow>& rows, const Provenance& prov);
// JSON: {"provenance": {...}, "rows": [ ...same records... ]}
std::string render_eval_json(const std::vector<EvalRow>& rows, const Provenance& prov);

// Verification report rows {check id, formula, oracle, bound, pass} plus the measured error.
std::string render_verify_csv(const VerifyReport& rep);
std::string render_verify_json(const VerifyReport& rep);
// One PASS/FAIL line per criterion and a failing-check summary.
std::string render_verify_summary(const VerifyReport& rep);

// Shortest round-trip decimal form of a double (deterministic across runs).
std::string format_double(double v);

}  // namespace cmm
