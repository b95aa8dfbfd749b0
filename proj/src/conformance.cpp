// SPDX-License-Identifier: Apache-2.0

#include "fastric/conformance.hpp"

#include <algorithm>
#include <cctype>
#include <regex>

#include "fastric/detail/text.hpp"

namespace fastric {

using detail::contains_word_ci;

std::string_view to_string(Actor actor)
{
    return actor == Actor::User ? "user" : "executor";
}

std::string_view to_string(FailureKind kind)
{
    switch (kind) {
    case FailureKind::ConfirmationSeeking: return "ConfirmationSeeking";
    case FailureKind::AmbiguityMisread: return "AmbiguityMisread";
    case FailureKind::CaseRejection: return "CaseRejection";
    case FailureKind::MissingEvaluation: return "MissingEvaluation";
    case FailureKind::MissingNavigationPrompt: return "MissingNavigationPrompt";
    case FailureKind::PrematureAnswerReveal: return "PrematureAnswerReveal";
    case FailureKind::WrongStateBehavior: return "WrongStateBehavior";
    case FailureKind::FormatViolation: return "FormatViolation";
    }
    return "";
}

std::optional<FailureKind> parse_failure_kind(std::string_view text)
{
    for (auto k : {FailureKind::ConfirmationSeeking, FailureKind::AmbiguityMisread, FailureKind::CaseRejection,
                   FailureKind::MissingEvaluation, FailureKind::MissingNavigationPrompt,
                   FailureKind::PrematureAnswerReveal, FailureKind::WrongStateBehavior, FailureKind::FormatViolation})
        if (to_string(k) == text)
            return k;
    return std::nullopt;
}

std::string canonical_token(std::string_view raw)
{
    return detail::to_upper(detail::trim(raw));
}

const TestScript& canonical_test_script()
{
    static const TestScript script = [] {
        using EB = ExpectedBehavior;
        const StateId init{0}, easy{1}, hard{2};
        TestScript s;
        auto add = [&](EB eb, StateId st) {
            s.steps.push_back({static_cast<int>(s.steps.size()) + 1, std::move(eb), st});
        };
        add(EB::ask_choice(), init);
        add(EB::user("EASY"), init);
        add(EB::ask_question("easy"), easy);
        add(EB::user("5"), easy);
        add(EB::evaluate_and_prompt(), easy);
        add(EB::user("more"), easy);
        add(EB::ask_question("easy"), easy);
        add(EB::user(UserRule::CorrectAnswer), easy);
        add(EB::evaluate_and_prompt(), easy);
        add(EB::user("change"), easy);
        add(EB::ask_question("hard"), hard);
        add(EB::user(UserRule::IncorrectAnswer), hard);
        add(EB::evaluate_and_prompt(), hard);
        add(EB::user("yes"), hard);
        add(EB::reprompt(), hard);
        add(EB::user("what"), hard);
        add(EB::reprompt(), hard);
        add(EB::user("change"), hard);
        add(EB::ask_question("easy"), easy);
        add(EB::user(UserRule::CorrectAnswer), easy);
        add(EB::evaluate_and_prompt(), easy);
        return s;
    }();
    return script;
}

namespace {

std::optional<StateId> try_step(const FsmSpec& fsm, StateId from, std::string_view raw)
{
    std::string tok = canonical_token(raw);
    if (!TriggerSymbol::is_canonical(tok))
        return std::nullopt;
    return step(fsm, from, TriggerSymbol{tok});
}

} // namespace

void check_script(const TestScript& script, const ProtocolSpec& protocol)
{
    auto bad = [](int index, const std::string& msg) {
        throw Error(ErrorCode::InconsistentScript, "script turn " + std::to_string(index) + ": " + msg);
    };
    FsmSpec fsm = compile_protocol(protocol);
    StateId current = fsm.initial();
    const ScriptStep* last_user = nullptr;
    for (std::size_t i = 0; i < script.steps.size(); ++i) {
        const auto& st = script.steps[i];
        if (st.index != static_cast<int>(i) + 1)
            bad(st.index, "indices must be contiguous from 1");
        if (st.actor() != actor_for_turn(st.index))
            bad(st.index, "odd turns belong to the executor, even turns to the user");
        if (!fsm.has_state(st.state))
            bad(st.index, "state " + std::to_string(st.state.value) + " is not declared");
        if (st.actor() == Actor::User) {
            if (st.state != current)
                bad(st.index, "user turn annotated with the wrong state");
            last_user = &st;
            continue;
        }
        using K = ExpectedBehavior::Kind;
        if (st.expected.kind == K::AskQuestion && last_user) {
            if (last_user->expected.rule != UserRule::Literal)
                bad(st.index, "a question after an answer placeholder cannot change state");
            auto next = try_step(fsm, current, last_user->expected.literal);
            if (!next)
                bad(st.index, "input '" + last_user->expected.literal + "' has no transition from state " +
                                  std::to_string(current.value));
            current = *next;
        } else if (st.expected.kind == K::RePromptNavigation && last_user &&
                   last_user->expected.rule == UserRule::Literal &&
                   try_step(fsm, current, last_user->expected.literal)) {
            bad(st.index, "re-prompt expected after a valid trigger '" + last_user->expected.literal + "'");
        }
        if (st.state != current)
            bad(st.index, "expected state " + std::to_string(current.value) + ", annotated " +
                              std::to_string(st.state.value));
    }
}

JudgeContext make_judge_context(const ProtocolSpec& protocol, StateId state)
{
    JudgeContext ctx;
    ctx.choice_tokens.clear();
    for (const auto& t : protocol.triggers_from(protocol.initial))
        ctx.choice_tokens.push_back(t.token.str());

    const PromptNavigation* nav = nullptr;
    const Evaluate* ev = nullptr;
    if (const RolePlan* plan = protocol.role_for(state)) {
        nav = plan->find<PromptNavigation>();
        ev = plan->find<Evaluate>();
    }
    for (const auto& s : protocol.loop_states()) {
        if (const RolePlan* plan = protocol.role_for(s.id)) {
            if (!nav)
                nav = plan->find<PromptNavigation>();
            if (!ev)
                ev = plan->find<Evaluate>();
        }
    }
    if (nav) {
        ctx.stay_token = nav->stay.str();
        ctx.change_token = nav->change.str();
    }
    if (ev) {
        auto first_word = [](const std::string& verdict) {
            std::string w;
            for (char c : verdict) {
                if (!std::isalpha(static_cast<unsigned char>(c)))
                    break;
                w += c;
            }
            return detail::to_lower(w);
        };
        auto c = first_word(ev->correct_verdict());
        auto w = first_word(ev->wrong_verdict());
        if (!c.empty() && !w.empty())
            ctx.verdict_words = {c, w};
    }
    return ctx;
}

namespace {

bool seeks_confirmation(std::string_view text)
{
    static const std::regex re(
        R"(\b(do you want|would you like|are you sure|do you wish|shall i|should i|please confirm|confirm that)\b)",
        std::regex::ECMAScript | std::regex::icase);
    return std::regex_search(text.begin(), text.end(), re);
}

bool has_verdict(std::string_view text, const JudgeContext& ctx)
{
    return std::any_of(ctx.verdict_words.begin(), ctx.verdict_words.end(),
                       [&](const std::string& w) { return contains_word_ci(text, w); });
}

bool has_navigation_prompt(std::string_view text, const JudgeContext& ctx)
{
    return contains_word_ci(text, ctx.stay_token) && contains_word_ci(text, ctx.change_token);
}

/// The input was a valid token in the wrong case, e.g. "more" for MORE.
bool case_variant_of_token(const JudgeContext& ctx)
{
    std::string raw(detail::trim(ctx.last_user_input));
    std::string canon = canonical_token(raw);
    if (raw == canon)
        return false;
    std::vector<std::string> valid = ctx.choice_tokens;
    valid.push_back(ctx.stay_token);
    valid.push_back(ctx.change_token);
    return std::find(valid.begin(), valid.end(), canon) != valid.end();
}

TurnVerdict judge_choice(std::string_view text, const JudgeContext& ctx)
{
    if (!find_arithmetic(text).empty())
        return TurnVerdict::fail(FailureKind::FormatViolation, "asked a question before the difficulty choice");
    for (const auto& tok : ctx.choice_tokens)
        if (!contains_word_ci(text, tok))
            return TurnVerdict::fail(FailureKind::FormatViolation, "choice prompt does not offer " + tok);
    return TurnVerdict::ok();
}

TurnVerdict judge_question(std::string_view text, const JudgeContext& ctx)
{
    auto questions = find_arithmetic(text);
    bool verdict = has_verdict(text, ctx);
    bool nav = has_navigation_prompt(text, ctx);
    for (const auto& q : questions)
        if (reveals_answer(text, q))
            return TurnVerdict::fail(FailureKind::PrematureAnswerReveal,
                                     "states the answer " + std::to_string(q.answer) + " with the question");
    if (questions.empty()) {
        if (seeks_confirmation(text))
            return TurnVerdict::fail(FailureKind::ConfirmationSeeking, "asked for confirmation instead of a question");
        if (nav && case_variant_of_token(ctx))
            return TurnVerdict::fail(FailureKind::CaseRejection,
                                     "rejected '" + std::string(detail::trim(ctx.last_user_input)) + "'");
        if (nav)
            return TurnVerdict::fail(FailureKind::WrongStateBehavior, "re-prompted instead of asking a question");
        return TurnVerdict::fail(FailureKind::FormatViolation, "no arithmetic question found");
    }
    if (questions.size() > 1)
        return TurnVerdict::fail(FailureKind::FormatViolation, "more than one question");
    if (verdict)
        return TurnVerdict::fail(FailureKind::FormatViolation, "verdict in a question turn");
    if (nav)
        return TurnVerdict::fail(FailureKind::FormatViolation, "navigation prompt in a question turn");
    return TurnVerdict::ok();
}

TurnVerdict judge_evaluation(std::string_view text, const JudgeContext& ctx)
{
    if (!has_verdict(text, ctx))
        return TurnVerdict::fail(FailureKind::MissingEvaluation, "no verdict");
    if (!has_navigation_prompt(text, ctx))
        return TurnVerdict::fail(FailureKind::MissingNavigationPrompt,
                                 "prompt must offer " + ctx.stay_token + " and " + ctx.change_token);
    if (!find_arithmetic(text).empty())
        return TurnVerdict::fail(FailureKind::FormatViolation, "new question before navigation");
    if (ctx.strict_grading && ctx.pending_question) {
        if (auto given = parse_answer(ctx.last_user_input)) {
            bool right = *given == ctx.pending_question->answer;
            bool says_correct = contains_word_ci(text, ctx.verdict_words.at(0));
            bool says_wrong = contains_word_ci(text, ctx.verdict_words.at(1));
            if (right && !says_correct)
                return TurnVerdict::fail(FailureKind::FormatViolation, "correct answer graded as wrong");
            if (!right && (!says_wrong || says_correct))
                return TurnVerdict::fail(FailureKind::FormatViolation, "wrong answer graded as correct");
            if (!right && !contains_word_ci(text, std::to_string(ctx.pending_question->answer)))
                return TurnVerdict::fail(FailureKind::FormatViolation, "correction does not state the answer");
        }
    }
    return TurnVerdict::ok();
}

TurnVerdict judge_reprompt(std::string_view text, const JudgeContext& ctx)
{
    if (!find_arithmetic(text).empty())
        return TurnVerdict::fail(FailureKind::AmbiguityMisread,
                                 "treated '" + std::string(detail::trim(ctx.last_user_input)) +
                                     "' as a command and asked a new question");
    if (has_verdict(text, ctx))
        return TurnVerdict::fail(FailureKind::FormatViolation, "verdict in a re-prompt");
    if (!has_navigation_prompt(text, ctx)) {
        if (seeks_confirmation(text))
            return TurnVerdict::fail(FailureKind::ConfirmationSeeking, "asked for confirmation instead of re-prompting");
        return TurnVerdict::fail(FailureKind::MissingNavigationPrompt,
                                 "re-prompt must restate " + ctx.stay_token + " and " + ctx.change_token);
    }
    return TurnVerdict::ok();
}

} // namespace

TurnVerdict classify_turn(const Turn& turn, const ExpectedBehavior& expected, const JudgeContext& ctx)
{
    using K = ExpectedBehavior::Kind;
    switch (expected.kind) {
    case K::ScriptedUserInput: return TurnVerdict::ok();
    case K::AskDifficultyChoice: return judge_choice(turn.text, ctx);
    case K::AskQuestion: return judge_question(turn.text, ctx);
    case K::EvaluateAndPrompt: return judge_evaluation(turn.text, ctx);
    case K::RePromptNavigation: return judge_reprompt(turn.text, ctx);
    }
    return TurnVerdict::ok();
}

ScoredTrace score_trace(const ExecutionTrace& trace, const TestScript& script, const ProtocolSpec& protocol,
                        const ScoreOptions& options, const std::vector<std::optional<TurnVerdict>>& annotations)
{
    if (trace.turns.size() > script.steps.size())
        throw Error(ErrorCode::MisalignedTrace, "trace has " + std::to_string(trace.turns.size()) +
                                                    " turns but the script only " +
                                                    std::to_string(script.steps.size()));
    for (std::size_t i = 0; i < trace.turns.size(); ++i) {
        const auto& t = trace.turns[i];
        const auto& s = script.steps[i];
        if (t.index != static_cast<int>(i) + 1 || t.index != s.index)
            throw Error(ErrorCode::MisalignedTrace, "turn " + std::to_string(i + 1) + " carries index " +
                                                        std::to_string(t.index));
        if (t.actor != s.actor())
            throw Error(ErrorCode::MisalignedTrace, "turn " + std::to_string(t.index) + " is a " +
                                                        std::string(to_string(t.actor)) + " turn, script expects " +
                                                        std::string(to_string(s.actor())));
    }
    check_script(script, protocol);

    ScoredTrace out;
    out.score.total_turns = script.total_turns();
    std::string last_user_input;
    std::optional<ArithmeticQuestion> pending;
    for (std::size_t i = 0; i < trace.turns.size(); ++i) {
        const Turn& turn = trace.turns[i];
        const ScriptStep& step = script.steps[i];
        TurnVerdict verdict;
        if (turn.actor == Actor::User) {
            last_user_input = turn.text;
        } else if (i < annotations.size() && annotations[i]) {
            verdict = *annotations[i];
        } else {
            JudgeContext ctx = make_judge_context(protocol, step.state);
            ctx.last_user_input = last_user_input;
            ctx.pending_question = pending;
            ctx.strict_grading = options.strict_grading;
            verdict = classify_turn(turn, step.expected, ctx);
            if (verdict.pass && turn.state != step.state)
                verdict = TurnVerdict::fail(FailureKind::WrongStateBehavior,
                                            "executed in state " + std::to_string(turn.state.value) + ", expected " +
                                                std::to_string(step.state.value));
        }
        if (turn.actor == Actor::Executor) {
            auto qs = find_arithmetic(turn.text);
            if (!qs.empty())
                pending = qs.back();
        }
        out.verdicts.push_back(verdict);
        if (!verdict.pass) {
            out.score.first_violation = turn.index;
            out.score.correct_turns = turn.index - 1;
            return out;
        }
    }
    out.score.correct_turns = static_cast<int>(trace.turns.size());
    return out;
}

} // namespace fastric
