#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace cmm {

enum class ErrorCode {
    InvalidPotential,
    DivergentCoupling,
    DomainPoleOverlap,
    InvalidKernel,
    UnsupportedDomain,
    NonFiniteIntegrand,
    DivergentChain,
    SingularMinor,
    DegreeOutOfRange,
    RankOutOfRange,
    PoleOnContour,
    TruncationNotConverged,
    PartitionOutsideBox,
    CoincidingVariables,
    CoincidingPoints,
    InsufficientDegreeBound,
    SingularCauchyMatrix,
    UnsupportedForEnsemble,
    InvalidFamily,
    GridTooLarge,
    NonFiniteObservable,
    DegenerateProposal,
    PreconditionViolated,
    ConfigError,
    IoError,
};

std::string_view to_string(ErrorCode code);

// Process exit status for a given error: 2 config/precondition, 3 numerical, 4 I/O.
int exit_code_for(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message);
    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

struct Violation {
    ErrorCode code;
    std::string message;
};

// Thrown by validate_model; carries every violated invariant, not just the first.
class ValidationError : public Error {
public:
    explicit ValidationError(std::vector<Violation> violations);
    const std::vector<Violation>& violations() const noexcept { return violations_; }

private:
    std::vector<Violation> violations_;
};

class SingularMinorError : public Error {
public:
    SingularMinorError(int k, const std::string& message);
    int minor() const noexcept { return k_; }

private:
    int k_;
};

class InsufficientDegreeError : public Error {
public:
    InsufficientDegreeError(int required, int available, const std::string& what);
    int required() const noexcept { return required_; }

private:
    int required_;
};

}  // namespace cmm
