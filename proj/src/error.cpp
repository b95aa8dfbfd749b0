// SPDX-License-Identifier: Apache-2.0

#include "fastric/error.hpp"

namespace fastric {

std::string_view to_string(ErrorCode code)
{
    switch (code) {
    case ErrorCode::SyntaxError: return "SyntaxError";
    case ErrorCode::DuplicateSection: return "DuplicateSection";
    case ErrorCode::UnknownSection: return "UnknownSection";
    case ErrorCode::UnknownAction: return "UnknownAction";
    case ErrorCode::UndeclaredState: return "UndeclaredState";
    case ErrorCode::MissingInitialState: return "MissingInitialState";
    case ErrorCode::MissingRolePlan: return "MissingRolePlan";
    case ErrorCode::InvalidRolePlan: return "InvalidRolePlan";
    case ErrorCode::RoleOnFinalState: return "RoleOnFinalState";
    case ErrorCode::DuplicateKey: return "DuplicateKey";
    case ErrorCode::MissingKey: return "MissingKey";
    case ErrorCode::UnknownKey: return "UnknownKey";
    case ErrorCode::BadValue: return "BadValue";
    case ErrorCode::MixedRunIds: return "MixedRunIds";
    case ErrorCode::VerdictOnUserTurn: return "VerdictOnUserTurn";
    case ErrorCode::UnknownState: return "UnknownState";
    case ErrorCode::CompileError: return "CompileError";
    case ErrorCode::AsymmetricStates: return "AsymmetricStates";
    case ErrorCode::MisalignedTrace: return "MisalignedTrace";
    case ErrorCode::InconsistentScript: return "InconsistentScript";
    case ErrorCode::EmptyCondition: return "EmptyCondition";
    case ErrorCode::DuplicateCondition: return "DuplicateCondition";
    case ErrorCode::MissingRawScores: return "MissingRawScores";
    case ErrorCode::TransportFailure: return "TransportFailure";
    case ErrorCode::MissingCredential: return "MissingCredential";
    case ErrorCode::MalformedResponse: return "MalformedResponse";
    case ErrorCode::Timeout: return "Timeout";
    case ErrorCode::Io: return "Io";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    }
    return "Unknown";
}

} // namespace fastric
