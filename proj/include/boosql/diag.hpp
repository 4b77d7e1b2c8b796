#pragma once

#include <stdexcept>
#include <string>

namespace boosql {

struct SourceLoc {
    int line = 0;
    int column = 0;
};

inline std::string loc_str(SourceLoc loc) {
    return std::to_string(loc.line) + ":" + std::to_string(loc.column);
}

/// Non-fatal finding produced by validation; severity "error" blocks the pipeline.
struct Diagnostic {
    enum class Severity { Error, Warning } severity = Severity::Error;
    std::string where;   // model location, e.g. "Hotel.reservations"
    std::string message;
};

struct ParseError : std::runtime_error {
    SourceLoc loc;
    ParseError(SourceLoc l, const std::string& msg)
        : std::runtime_error(loc_str(l) + ": " + msg), loc(l) {}
};

/// Name/type errors raised while elaborating Booster paths into object paths.
struct ResolveError : std::runtime_error {
    std::string class_name;
    std::string attribute;
    ResolveError(std::string msg, std::string cls = {}, std::string attr = {})
        : std::runtime_error(std::move(msg)),
          class_name(std::move(cls)),
          attribute(std::move(attr)) {}
};

struct CompileError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct EvalError : std::runtime_error {
    enum class Kind {
        UndefinedDeref,
        IndexOutOfRange,
        TypeMismatch,
        ParConflict,
        InfiniteRange,
        Other,
    };
    Kind kind;
    EvalError(Kind k, const std::string& msg) : std::runtime_error(msg), kind(k) {}
};

struct SqlError : std::runtime_error {
    enum class Kind {
        MissingTable,
        MissingColumn,
        MissingVariable,
        FuelExhausted,
        NotScalar,
        BadStatement,
        Signalled,
        Other,
    };
    Kind kind;
    SqlError(Kind k, const std::string& msg) : std::runtime_error(msg), kind(k) {}
};

} // namespace boosql
