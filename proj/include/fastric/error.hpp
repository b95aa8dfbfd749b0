// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace fastric {

enum class ErrorCode {
    // protocol files, run logs and scripts
    SyntaxError,
    DuplicateSection,
    UnknownSection,
    UnknownAction,
    UndeclaredState,
    MissingInitialState,
    MissingRolePlan,
    InvalidRolePlan,
    RoleOnFinalState,
    DuplicateKey,
    MissingKey,
    UnknownKey,
    BadValue,
    MixedRunIds,
    VerdictOnUserTurn,
    // fsm / compilation
    UnknownState,
    CompileError,
    // rendering
    AsymmetricStates,
    // scoring and stats
    MisalignedTrace,
    InconsistentScript,
    EmptyCondition,
    DuplicateCondition,
    MissingRawScores,
    // sessions
    TransportFailure,
    MissingCredential,
    MalformedResponse,
    Timeout,
    // misc
    Io,
    InvalidArgument,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

/// Error raised while reading one of the line-oriented text formats.
/// `line()` is 1-based; 0 means the error is not tied to a line.
class ParseError : public Error {
public:
    ParseError(ErrorCode code, std::size_t line, const std::string& message)
        : Error(code, line ? "line " + std::to_string(line) + ": " + message : message),
          line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

} // namespace fastric
