// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "fastric/fsm.hpp"

namespace fastric {

inline constexpr std::string_view kDefaultVerdictFormat = "Correct! | Wrong, the answer is [X]";

struct AskDifficultyChoice {
    friend bool operator==(const AskDifficultyChoice&, const AskDifficultyChoice&) = default;
};

struct AskQuestion {
    std::string level; // difficulty tag, e.g. "easy"
    friend bool operator==(const AskQuestion&, const AskQuestion&) = default;
};

struct Wait {
    friend bool operator==(const Wait&, const Wait&) = default;
};

/// `verdict_format` is "<correct> | <wrong>" where <wrong> may contain the
/// placeholder [X] for the correct answer.
struct Evaluate {
    std::string verdict_format{kDefaultVerdictFormat};

    std::string correct_verdict() const;
    std::string wrong_verdict() const;

    friend bool operator==(const Evaluate&, const Evaluate&) = default;
};

struct PromptNavigation {
    TriggerSymbol stay;
    TriggerSymbol change;
    std::string stay_label;   // difficulty the stay token keeps, e.g. "easy"
    std::string change_label; // difficulty the switch token moves to, e.g. "hard"

    /// "MORE at the easy level, or CHANGE to the hard level?"
    std::string question() const;

    friend bool operator==(const PromptNavigation&, const PromptNavigation&) = default;
};

using RoleAction = std::variant<AskDifficultyChoice, AskQuestion, Wait, Evaluate, PromptNavigation>;

struct RolePlan {
    std::vector<RoleAction> actions;

    template <class T>
    const T* find() const
    {
        for (const auto& a : actions)
            if (auto* p = std::get_if<T>(&a))
                return p;
        return nullptr;
    }

    friend bool operator==(const RolePlan&, const RolePlan&) = default;
};

/// The plan used for the initial state when a protocol file leaves it out.
RolePlan implicit_initial_plan();

enum class ConstraintKind { NeverRevealAnswer, StickToWorkflow, RepromptOnInvalid };

struct ConstraintRule {
    ConstraintKind kind;
    std::string text;

    friend bool operator==(const ConstraintRule&, const ConstraintRule&) = default;
};

std::string_view keyword(ConstraintKind kind);

struct AgentPair {
    std::string executor = "I";
    std::string executor_description = "the executor";
    std::string user = "you";
    std::string user_description = "the user";

    friend bool operator==(const AgentPair&, const AgentPair&) = default;
};

struct TriggerDecl {
    TriggerSymbol token;
    StateId from;
    StateId to;

    friend bool operator==(const TriggerDecl&, const TriggerDecl&) = default;
};

/// Seven-element protocol description.
///
///   F  finals        terminal states (may be empty)
///   A  agents        executor and user names
///   S  states        ordered state declarations
///   T  triggers      labelled transitions
///   R  roles         per-state action plans
///   I  initial       start state
///   C  constraints   global rules
struct ProtocolSpec {
    std::string name;
    std::string subject = "math";
    std::set<StateId> finals;
    AgentPair agents;
    std::vector<State> states;
    std::vector<TriggerDecl> triggers;
    std::map<StateId, RolePlan> roles;
    StateId initial{0};
    std::vector<ConstraintRule> constraints;

    const State* find_state(StateId id) const;
    const std::string& label_of(StateId id) const;
    const RolePlan* role_for(StateId id) const;
    /// Declared states other than the initial state, in declaration order.
    std::vector<State> loop_states() const;
    /// Step number a state is rendered under (initial = 0, then declaration order).
    int step_number(StateId id) const;
    std::vector<TriggerDecl> triggers_from(StateId id) const;
    bool has_constraint(ConstraintKind kind) const;

    friend bool operator==(const ProtocolSpec&, const ProtocolSpec&) = default;
};

/// Sentence used for a constraint in rendered prompts.
std::string constraint_text(ConstraintKind kind, const ProtocolSpec& p);

/// Parses the sectioned protocol format. Throws ParseError.
ProtocolSpec parse_protocol(std::string_view source);
ProtocolSpec load_protocol(const std::string& path);

/// Inverse of parse_protocol.
std::string render_protocol_file(const ProtocolSpec& p);

/// Throws CompileError when the result would violate FSM invariants.
FsmSpec compile_protocol(const ProtocolSpec& p);

/// Kindergarten arithmetic tutor: INIT -> EASY/HARD with MORE/CHANGE loops.
const ProtocolSpec& canonical_tutor_protocol();
std::string_view canonical_tutor_source();

} // namespace fastric
