#include "gs/error.hpp"

namespace gs {

const char* to_string(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::MalformedRecord: return "MalformedRecord";
    case ErrorKind::DanglingEdge: return "DanglingEdge";
    case ErrorKind::EmptyGraph: return "EmptyGraph";
    case ErrorKind::UnknownNode: return "UnknownNode";
    case ErrorKind::EmptyText: return "EmptyText";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::ZeroVector: return "ZeroVector";
    case ErrorKind::MissingVector: return "MissingVector";
    case ErrorKind::MissingField: return "MissingField";
    case ErrorKind::EmptyQueryText: return "EmptyQueryText";
    case ErrorKind::NoAnswerBlock: return "NoAnswerBlock";
    case ErrorKind::UnresolvableClass: return "UnresolvableClass";
    case ErrorKind::BackendFailure: return "BackendFailure";
    case ErrorKind::AnswerExtractionFailed: return "AnswerExtractionFailed";
    case ErrorKind::TokenBudgetExceeded: return "TokenBudgetExceeded";
    case ErrorKind::ScriptExhausted: return "ScriptExhausted";
    case ErrorKind::InsufficientEdges: return "InsufficientEdges";
    case ErrorKind::UnknownCommand: return "UnknownCommand";
    case ErrorKind::ConfigInvalid: return "ConfigInvalid";
    }
    return "UnknownError";
}

} // namespace gs
