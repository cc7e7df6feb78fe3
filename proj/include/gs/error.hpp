#pragma once

#include <stdexcept>
#include <string>

namespace gs {

// Every failure surfaced by the engine carries one of these kinds so the
// CLI can emit a stable, documented diagnostic line per kind.
enum class ErrorKind {
    MalformedRecord,
    DanglingEdge,
    EmptyGraph,
    UnknownNode,
    EmptyText,
    DimensionMismatch,
    ZeroVector,
    MissingVector,
    MissingField,
    EmptyQueryText,
    NoAnswerBlock,
    UnresolvableClass,
    BackendFailure,
    AnswerExtractionFailed,
    TokenBudgetExceeded,
    ScriptExhausted,
    InsufficientEdges,
    UnknownCommand,
    ConfigInvalid,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

    ErrorKind kind() const { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void raise(ErrorKind kind, const std::string& message) {
    throw Error(kind, message);
}

} // namespace gs
