#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace beliefnet {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Axis bookkeeping violations: mismatched axis sets, shared axes where
// disjoint ones are required, size conflicts on a shared axis.
class TensorShapeError : public Error {
public:
    using Error::Error;
};

// Raised when a quantity that must carry positive mass is identically zero.
// During inference this signals evidence that contradicts the network.
class ZeroMassError : public Error {
public:
    explicit ZeroMassError(const std::string& message, std::string node = {})
        : Error(message), node_(std::move(node)) {}

    // Id of the variable where the contradiction surfaced; empty if unknown.
    const std::string& node() const { return node_; }

private:
    std::string node_;
};

class ParseError : public Error {
public:
    using Error::Error;
};

class EvidenceError : public Error {
public:
    using Error::Error;
};

class CapExceededError : public Error {
public:
    using Error::Error;
};

enum class ViolationKind {
    DuplicateVariable,
    EmptyStates,
    DuplicateState,
    UnknownVariable,
    MissingNode,
    DuplicateNode,
    UnknownParent,
    DuplicateParent,
    BadCptShape,
    NonFiniteEntry,
    NegativeEntry,
    ColumnSumNotOne,
    DirectedCycle,
    NotSinglyConnected,
};

const char* to_string(ViolationKind kind);

struct Violation {
    std::string var;
    ViolationKind kind;
    std::string detail;
};

using ValidationReport = std::vector<Violation>;

std::string describe(const ValidationReport& report);

class ValidationError : public Error {
public:
    explicit ValidationError(ValidationReport report)
        : Error(describe(report)), report_(std::move(report)) {}

    const ValidationReport& report() const { return report_; }

private:
    ValidationReport report_;
};

} // namespace beliefnet
