#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "cmm/correlators.hpp"
#include "cmm/model.hpp"
#include "cmm/schur.hpp"
#include "cmm/workspace.hpp"

namespace cmm {

// Correlators reachable from a config file.
enum class CorrelatorKind {
    PartitionFunction,
    SchurAverage,
    CharpolyAverage,
    CharpolyInverseSmall,
    CharpolyInverseLarge,
    PairAverage,
    PairInverseSmall,
    PairInverseLarge,
    MixedPair,
    CdKernel,
};

CorrelatorKind parse_correlator(const std::string& name);
std::string to_string(CorrelatorKind kind);
const std::vector<std::string>& correlator_names();

// One evaluation: the Z tuple and (for two-sided correlators) the W tuple.
struct EvalPoint {
    std::vector<cplx> z;
    std::vector<cplx> w;
};

struct TaskConfig {
    CorrelatorKind correlator = CorrelatorKind::CharpolyAverage;
    int n = 1;
    int m = 1;
    Side side = Side::Left;
    Orientation orientation = Orientation::LeftNumerator;
    Partition lambda, mu;
    std::vector<EvalPoint> points;
};

struct ComputeConfig {
    int degree = 12;
    int order = 64;
    int kmax = -1;
    double tail_tolerance = 1e-3;
    double singular_tolerance = 1e-13;
    int threads = 0;     // 0: hardware concurrency
    bool exact = false;  // also run the exact-rational Gaussian pipeline and write its sidecar
    std::filesystem::path cache_dir = ".cmm-cache";
};

enum class OutputFormat { Csv, Json };

struct OutputConfig {
    OutputFormat format = OutputFormat::Csv;
    std::filesystem::path path;  // empty: stdout
};

struct RunConfig {
    ModelSpec model = ModelSpec::gaussian(0.5);
    ComputeConfig compute;
    std::optional<TaskConfig> task;
    OutputConfig output;
    std::uint64_t seed = 20240611;
    std::string hash;  // FNV-1a of the canonical JSON text, set by the parser

    WorkspaceOptions workspace_options() const;
};

// Parses and validates the JSON grammar documented in the README. Throws ConfigError for
// grammar problems, ValidationError for model invariants and PreconditionViolated for
// N/M combinations a correlator branch does not accept.
RunConfig parse_config(const std::string& json_text);
RunConfig load_config(const std::filesystem::path& path);

// Branch preconditions of each correlator on (N, M, degree bound); throws PreconditionViolated.
void check_task(const TaskConfig& task, int degree);

}  // namespace cmm
