#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "cmm/model.hpp"

namespace cmm {

enum class VerifyLevel { Quick, Full };

VerifyLevel parse_verify_level(const std::string& s);
std::string to_string(VerifyLevel level);

// One row of the verification report. `error` is the measured discrepancy in the same
// normalization as `tolerance` (usually relative); pass iff error <= tolerance and any
// extra condition stated in `note` holds.
struct CheckRow {
    std::string id;
    int criterion = 0;
    std::string description;
    cplx formula{0.0, 0.0};
    cplx oracle{0.0, 0.0};
    double oracle_bound = 0.0;  // oracle's own error estimate, relative to |oracle| where meaningful
    double error = 0.0;
    double tolerance = 0.0;
    bool pass = false;
    std::string note;
    double seconds = 0.0;
};

struct CriterionSummary {
    int criterion = 0;
    std::string title;
    bool pass = false;
    int rows = 0;
    int failed = 0;
};

struct VerifyReport {
    VerifyLevel level = VerifyLevel::Quick;
    double tolerance_scale = 1.0;
    double seconds = 0.0;
    std::vector<CheckRow> rows;
    std::vector<CriterionSummary> criteria;

    bool all_pass() const;
};

struct VerifyOptions {
    VerifyLevel level = VerifyLevel::Quick;
    // Multiplies every tolerance. Reads CMM_VERIFY_TOL_SCALE when negative.
    double tolerance_scale = -1.0;
    std::uint64_t seed = 20240611;
    std::function<void(const CheckRow&)> on_row;
};

// CMM_VERIFY_TOL_SCALE, default 1; throws ConfigError on a malformed or negative value.
double tolerance_scale_from_env();

const std::string& criterion_title(int criterion);

// Runs acceptance criteria 1-15 on the reference model V = x^2/2, w = e^{xy/2}.
// Never throws for a failing check; failures become rows.
VerifyReport run_verification(const VerifyOptions& opts);

}  // namespace cmm
