#include "cmm/errors.hpp"

namespace cmm {

std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::InvalidPotential: return "InvalidPotential";
        case ErrorCode::DivergentCoupling: return "DivergentCoupling";
        case ErrorCode::DomainPoleOverlap: return "DomainPoleOverlap";
        case ErrorCode::InvalidKernel: return "InvalidKernel";
        case ErrorCode::UnsupportedDomain: return "UnsupportedDomain";
        case ErrorCode::NonFiniteIntegrand: return "NonFiniteIntegrand";
        case ErrorCode::DivergentChain: return "DivergentChain";
        case ErrorCode::SingularMinor: return "SingularMinor";
        case ErrorCode::DegreeOutOfRange: return "DegreeOutOfRange";
        case ErrorCode::RankOutOfRange: return "RankOutOfRange";
        case ErrorCode::PoleOnContour: return "PoleOnContour";
        case ErrorCode::TruncationNotConverged: return "TruncationNotConverged";
        case ErrorCode::PartitionOutsideBox: return "PartitionOutsideBox";
        case ErrorCode::CoincidingVariables: return "CoincidingVariables";
        case ErrorCode::CoincidingPoints: return "CoincidingPoints";
        case ErrorCode::InsufficientDegreeBound: return "InsufficientDegreeBound";
        case ErrorCode::SingularCauchyMatrix: return "SingularCauchyMatrix";
        case ErrorCode::UnsupportedForEnsemble: return "UnsupportedForEnsemble";
        case ErrorCode::InvalidFamily: return "InvalidFamily";
        case ErrorCode::GridTooLarge: return "GridTooLarge";
        case ErrorCode::NonFiniteObservable: return "NonFiniteObservable";
        case ErrorCode::DegenerateProposal: return "DegenerateProposal";
        case ErrorCode::PreconditionViolated: return "PreconditionViolated";
        case ErrorCode::ConfigError: return "ConfigError";
        case ErrorCode::IoError: return "IoError";
    }
    return "Unknown";
}

int exit_code_for(ErrorCode code) {
    switch (code) {
        case ErrorCode::IoError:
            return 4;
        case ErrorCode::NonFiniteIntegrand:
        case ErrorCode::DivergentChain:
        case ErrorCode::SingularMinor:
        case ErrorCode::PoleOnContour:
        case ErrorCode::TruncationNotConverged:
        case ErrorCode::SingularCauchyMatrix:
        case ErrorCode::NonFiniteObservable:
        case ErrorCode::DegenerateProposal:
            return 3;
        default:
            return 2;
    }
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

namespace {
std::string join_violations(const std::vector<Violation>& v) {
    std::string out = std::to_string(v.size()) + " violation(s)";
    for (const auto& x : v) out += "\n  - " + std::string(to_string(x.code)) + ": " + x.message;
    return out;
}
}  // namespace

ValidationError::ValidationError(std::vector<Violation> violations)
    : Error(violations.empty() ? ErrorCode::ConfigError : violations.front().code,
            join_violations(violations)),
      violations_(std::move(violations)) {}

SingularMinorError::SingularMinorError(int k, const std::string& message)
    : Error(ErrorCode::SingularMinor, "leading minor " + std::to_string(k) + ": " + message), k_(k) {}

InsufficientDegreeError::InsufficientDegreeError(int required, int available, const std::string& what)
    : Error(ErrorCode::InsufficientDegreeBound,
            what + " needs degree bound >= " + std::to_string(required) + ", system has " +
                std::to_string(available)),
      required_(required) {}

}  // namespace cmm
