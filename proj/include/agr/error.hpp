#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace agr {

/// One violated invariant found while validating a graph, catalog or update.
/// `code` is a stable machine-readable token, `subject` names the offending
/// vertex or edge (e.g. "L1->L3").
struct Violation {
    std::string code;
    std::string subject;
    std::string message;

    friend bool operator==(const Violation&, const Violation&) = default;
};

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input document (not JSON, wrong structure, wrong types).
class ParseError : public Error {
public:
    using Error::Error;
};

/// Value outside its mathematical domain (probability 0, metric > 1, ...).
class DomainError : public Error {
public:
    using Error::Error;
};

/// The document parsed but broke one or more model invariants.
class ValidationError : public Error {
public:
    explicit ValidationError(std::vector<Violation> violations)
        : Error(summarize(violations)), violations_(std::move(violations)) {}

    const std::vector<Violation>& violations() const noexcept { return violations_; }

private:
    static std::string summarize(const std::vector<Violation>& vs) {
        std::string out = std::to_string(vs.size()) + " violation(s)";
        for (const auto& v : vs) {
            out += "; " + v.code + " " + v.subject + ": " + v.message;
        }
        return out;
    }

    std::vector<Violation> violations_;
};

class UnknownVertexError : public Error {
public:
    using Error::Error;
};

/// An analysis was asked to start/end at a vertex of the wrong kind.
class WrongKindError : public Error {
public:
    using Error::Error;
};

class UnknownEdgeError : public Error {
public:
    using Error::Error;
};

class UnreachableError : public Error {
public:
    using Error::Error;
};

class PathNotInGraphError : public Error {
public:
    using Error::Error;
};

}  // namespace agr
