// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fastric/arithmetic.hpp"
#include "fastric/fsm.hpp"
#include "fastric/protocol.hpp"
#include "fastric/rational.hpp"
#include "fastric/render.hpp"

namespace fastric {

enum class Actor { User, Executor };

std::string_view to_string(Actor actor);

/// Odd turns belong to the executor, even turns to the user.
constexpr Actor actor_for_turn(int index)
{
    return index % 2 == 1 ? Actor::Executor : Actor::User;
}

/// One turn of a session. For executor turns `state` is the state whose
/// role the turn carries out, i.e. after consuming the preceding user
/// input; for user turns it is the state the input is received in.
struct Turn {
    int index = 0;
    Actor actor = Actor::Executor;
    std::string text;
    StateId state;

    friend bool operator==(const Turn&, const Turn&) = default;
};

struct Condition {
    std::string agent;
    FormalityLevel level = FormalityLevel::L1;

    friend bool operator==(const Condition&, const Condition&) = default;
};

struct ExecutionTrace {
    std::vector<Turn> turns;
    std::string protocol_name;
    std::string run_id;
    Condition condition;
    bool unparseable_question = false; // scripted user fell back to "0"

    friend bool operator==(const ExecutionTrace&, const ExecutionTrace&) = default;
};

enum class UserRule { Literal, CorrectAnswer, IncorrectAnswer };

struct ExpectedBehavior {
    enum class Kind { AskDifficultyChoice, AskQuestion, EvaluateAndPrompt, RePromptNavigation, ScriptedUserInput };

    Kind kind = Kind::ScriptedUserInput;
    std::string difficulty;            // AskQuestion
    UserRule rule = UserRule::Literal; // ScriptedUserInput
    std::string literal;               // ScriptedUserInput with Literal rule

    bool is_user() const { return kind == Kind::ScriptedUserInput; }

    static ExpectedBehavior ask_choice() { return {Kind::AskDifficultyChoice, {}, {}, {}}; }
    static ExpectedBehavior ask_question(std::string d) { return {Kind::AskQuestion, std::move(d), {}, {}}; }
    static ExpectedBehavior evaluate_and_prompt() { return {Kind::EvaluateAndPrompt, {}, {}, {}}; }
    static ExpectedBehavior reprompt() { return {Kind::RePromptNavigation, {}, {}, {}}; }
    static ExpectedBehavior user(std::string text) { return {Kind::ScriptedUserInput, {}, UserRule::Literal, std::move(text)}; }
    static ExpectedBehavior user(UserRule rule) { return {Kind::ScriptedUserInput, {}, rule, {}}; }

    friend bool operator==(const ExpectedBehavior&, const ExpectedBehavior&) = default;
};

struct ScriptStep {
    int index = 0;
    ExpectedBehavior expected;
    StateId state; // same convention as Turn::state

    Actor actor() const { return expected.is_user() ? Actor::User : Actor::Executor; }

    friend bool operator==(const ScriptStep&, const ScriptStep&) = default;
};

struct TestScript {
    std::vector<ScriptStep> steps;

    int total_turns() const { return static_cast<int>(steps.size()); }
    const ScriptStep& at(int index) const { return steps.at(static_cast<std::size_t>(index - 1)); }

    friend bool operator==(const TestScript&, const TestScript&) = default;
};

/// The standardized 21-turn tutor test sequence.
const TestScript& canonical_test_script();

/// Checks indices, actor parity and that every executor state annotation
/// follows from `step()` on the compiled protocol. Throws
/// Error(InconsistentScript).
void check_script(const TestScript& script, const ProtocolSpec& protocol);

enum class FailureKind {
    ConfirmationSeeking,
    AmbiguityMisread,
    CaseRejection,
    MissingEvaluation,
    MissingNavigationPrompt,
    PrematureAnswerReveal,
    WrongStateBehavior,
    FormatViolation,
};

std::string_view to_string(FailureKind kind);
std::optional<FailureKind> parse_failure_kind(std::string_view text);

struct TurnVerdict {
    bool pass = true;
    std::optional<FailureKind> failure;
    std::string note;

    static TurnVerdict ok() { return {}; }
    static TurnVerdict fail(FailureKind kind, std::string note = {}) { return {false, kind, std::move(note)}; }

    friend bool operator==(const TurnVerdict&, const TurnVerdict&) = default;
};

/// Everything the judge needs besides the turn itself.
struct JudgeContext {
    std::vector<std::string> choice_tokens{"EASY", "HARD"};
    std::string stay_token = "MORE";
    std::string change_token = "CHANGE";
    std::vector<std::string> verdict_words{"correct", "wrong"};
    std::string last_user_input;
    std::optional<ArithmeticQuestion> pending_question; // last question the executor asked
    bool strict_grading = false;
};

/// Builds the judge context for a turn executed in `state`.
JudgeContext make_judge_context(const ProtocolSpec& protocol, StateId state);

/// Rule-based, case-insensitive verdict for one turn. User turns always pass.
TurnVerdict classify_turn(const Turn& turn, const ExpectedBehavior& expected, const JudgeContext& ctx);

/// correct_turns / total_turns, counted up to the first violation.
struct ConformanceScore {
    int correct_turns = 0;
    int total_turns = 0;
    std::optional<int> first_violation;

    Rational value() const { return Rational(correct_turns, total_turns); }

    friend bool operator==(const ConformanceScore&, const ConformanceScore&) = default;
};

struct ScoreOptions {
    bool strict_grading = false;
};

struct ScoredTrace {
    ConformanceScore score;
    std::vector<TurnVerdict> verdicts; // one per judged turn, ends at the first failure
};

/// Judges turns in order and stops at the first failing one. When
/// `annotations` holds a verdict for a turn it is used verbatim. Throws
/// Error(MisalignedTrace) if the trace does not follow the script.
ScoredTrace score_trace(const ExecutionTrace& trace, const TestScript& script, const ProtocolSpec& protocol,
                        const ScoreOptions& options = {},
                        const std::vector<std::optional<TurnVerdict>>& annotations = {});

/// Normalised trigger token for raw input: trimmed and uppercased.
std::string canonical_token(std::string_view raw);

} // namespace fastric
