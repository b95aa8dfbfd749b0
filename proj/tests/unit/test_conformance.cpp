// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <random>

#include "fastric/agents.hpp"
#include "fastric/conformance.hpp"
#include "fastric/detail/text.hpp"
#include "fastric/runlog.hpp"

using namespace fastric;

namespace {

const ProtocolSpec& P()
{
    return canonical_tutor_protocol();
}

const TestScript& S()
{
    return canonical_test_script();
}

ExecutionTrace oracle_trace(std::uint64_t seed = 1, FormalityLevel level = FormalityLevel::L4)
{
    return run_session(OracleTutor(), S(), P(), {level, seed, "t"});
}

JudgeContext ctx_for(StateId state, std::string last_input = {})
{
    JudgeContext ctx = make_judge_context(P(), state);
    ctx.last_user_input = std::move(last_input);
    return ctx;
}

Turn executor(int index, std::string text, std::uint32_t state)
{
    return Turn{index, Actor::Executor, std::move(text), StateId{state}};
}

} // namespace

TEST(Classify, ChoicePrompt)
{
    auto v = classify_turn(executor(1, "Choose EASY or HARD", 0), ExpectedBehavior::ask_choice(), ctx_for(StateId{0}));
    EXPECT_TRUE(v.pass);
    v = classify_turn(executor(1, "Pick easy or hard mode!", 0), ExpectedBehavior::ask_choice(), ctx_for(StateId{0}));
    EXPECT_TRUE(v.pass) << "matching is case-insensitive";
    v = classify_turn(executor(1, "Choose EASY.", 0), ExpectedBehavior::ask_choice(), ctx_for(StateId{0}));
    EXPECT_FALSE(v.pass);
    v = classify_turn(executor(1, "Choose EASY or HARD. What is 2 + 3?", 0), ExpectedBehavior::ask_choice(),
                      ctx_for(StateId{0}));
    EXPECT_FALSE(v.pass);
}

TEST(Classify, ConfirmationSeekingAtTurnEleven)
{
    auto v = classify_turn(executor(11, "Do you want to switch to HARD?", 2), ExpectedBehavior::ask_question("hard"),
                           ctx_for(StateId{2}, "change"));
    EXPECT_FALSE(v.pass);
    EXPECT_EQ(v.failure, FailureKind::ConfirmationSeeking);
}

TEST(Classify, EvaluationWithNavigation)
{
    auto v = classify_turn(executor(5, "Correct! MORE at the easy level, or CHANGE to the hard level?", 1),
                           ExpectedBehavior::evaluate_and_prompt(), ctx_for(StateId{1}, "5"));
    EXPECT_TRUE(v.pass);
    v = classify_turn(executor(5, "Correct!", 1), ExpectedBehavior::evaluate_and_prompt(), ctx_for(StateId{1}, "5"));
    EXPECT_EQ(v.failure, FailureKind::MissingNavigationPrompt);
    v = classify_turn(executor(5, "MORE or CHANGE?", 1), ExpectedBehavior::evaluate_and_prompt(),
                      ctx_for(StateId{1}, "5"));
    EXPECT_EQ(v.failure, FailureKind::MissingEvaluation);
}

TEST(Classify, QuestionRules)
{
    auto q = ExpectedBehavior::ask_question("easy");
    EXPECT_TRUE(classify_turn(executor(3, "What is 2 + 3?", 1), q, ctx_for(StateId{1}, "EASY")).pass);
    EXPECT_EQ(classify_turn(executor(3, "What is 2 + 3? It's 5.", 1), q, ctx_for(StateId{1})).failure,
              FailureKind::PrematureAnswerReveal);
    EXPECT_EQ(classify_turn(executor(3, "What is 2 + 3? What is 1 + 1?", 1), q, ctx_for(StateId{1})).failure,
              FailureKind::FormatViolation);
    EXPECT_EQ(classify_turn(executor(3, "Correct! What is 2 + 3?", 1), q, ctx_for(StateId{1})).failure,
              FailureKind::FormatViolation);
    EXPECT_EQ(classify_turn(executor(7, "Please reply MORE or CHANGE.", 1), q, ctx_for(StateId{1}, "more")).failure,
              FailureKind::CaseRejection);
    EXPECT_EQ(classify_turn(executor(7, "Please reply MORE or CHANGE.", 1), q, ctx_for(StateId{1}, "MORE")).failure,
              FailureKind::WrongStateBehavior);
    EXPECT_EQ(classify_turn(executor(3, "Let's count!", 1), q, ctx_for(StateId{1})).failure,
              FailureKind::FormatViolation);
}

TEST(Classify, RepromptRules)
{
    auto r = ExpectedBehavior::reprompt();
    EXPECT_TRUE(classify_turn(executor(15, "Please reply MORE or CHANGE.", 2), r, ctx_for(StateId{2}, "yes")).pass);
    EXPECT_EQ(classify_turn(executor(15, "What is 7 + 8?", 2), r, ctx_for(StateId{2}, "yes")).failure,
              FailureKind::AmbiguityMisread);
    EXPECT_EQ(classify_turn(executor(15, "Wrong. MORE or CHANGE?", 2), r, ctx_for(StateId{2}, "yes")).failure,
              FailureKind::FormatViolation);
    EXPECT_EQ(classify_turn(executor(15, "Sorry?", 2), r, ctx_for(StateId{2}, "yes")).failure,
              FailureKind::MissingNavigationPrompt);
}

TEST(Classify, UserTurnsAlwaysPass)
{
    Turn t{2, Actor::User, "anything at all", StateId{0}};
    EXPECT_TRUE(classify_turn(t, ExpectedBehavior::user("EASY"), ctx_for(StateId{0})).pass);
}

TEST(Classify, StrictGradingChecksDirection)
{
    auto ctx = ctx_for(StateId{2}, "9");
    ctx.pending_question = extract_arithmetic("What is 14 - 6?");
    const std::string says_correct = "Correct! MORE at the hard level, or CHANGE to the easy level?";
    const std::string says_wrong = "Wrong, the answer is 8. MORE at the hard level, or CHANGE to the easy level?";
    auto e = ExpectedBehavior::evaluate_and_prompt();
    EXPECT_TRUE(classify_turn(executor(13, says_correct, 2), e, ctx).pass) << "lenient by default";
    ctx.strict_grading = true;
    EXPECT_FALSE(classify_turn(executor(13, says_correct, 2), e, ctx).pass);
    EXPECT_TRUE(classify_turn(executor(13, says_wrong, 2), e, ctx).pass);
    EXPECT_FALSE(classify_turn(executor(13, "Wrong. MORE at the hard level, or CHANGE to the easy level?", 2), e, ctx)
                     .pass);
}

TEST(Script, CanonicalShape)
{
    EXPECT_EQ(S().total_turns(), 21);
    for (const auto& s : S().steps)
        EXPECT_EQ(s.actor(), actor_for_turn(s.index));
    EXPECT_NO_THROW(check_script(S(), P()));
}

TEST(Script, SampleFileMatchesCanonical)
{
    auto text = detail::read_file(std::string(FASTRIC_SOURCE_DIR) + "/samples/table2.script");
    EXPECT_EQ(parse_script(text), S());
    EXPECT_EQ(parse_script(render_script(S())), S());
}

TEST(Script, InconsistentStateAnnotation)
{
    TestScript bad = S();
    bad.steps[10].state = StateId{1}; // turn 11 follows "change" from EASY
    try {
        check_script(bad, P());
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::InconsistentScript);
    }
}

TEST(Score, OracleIsPerfect)
{
    auto scored = score_trace(oracle_trace(), S(), P());
    EXPECT_EQ(scored.score.correct_turns, 21);
    EXPECT_EQ(scored.score.value(), Rational(1));
    EXPECT_FALSE(scored.score.first_violation);
}

TEST(Score, ViolationAtTurnElevenIsTenOverTwentyOne)
{
    auto trace = oracle_trace();
    trace.turns[10].text = "Do you want to switch to HARD?";
    auto scored = score_trace(trace, S(), P());
    EXPECT_EQ(scored.score.first_violation, 11);
    EXPECT_EQ(scored.score.value(), Rational(10, 21));
    EXPECT_EQ(format_fixed2(scored.score.value()), "0.48");
}

TEST(Score, ViolationAtTurnOneIsZero)
{
    auto trace = oracle_trace();
    trace.turns[0].text = "Hello!";
    auto scored = score_trace(trace, S(), P());
    EXPECT_EQ(scored.score.correct_turns, 0);
    EXPECT_EQ(scored.score.value(), Rational(0));
    EXPECT_EQ(scored.score.first_violation, 1);
}

TEST(Score, WrongStateFailsEvenWithMatchingText)
{
    auto trace = oracle_trace();
    trace.turns[10].state = StateId{1};
    auto scored = score_trace(trace, S(), P());
    EXPECT_EQ(scored.score.first_violation, 11);
    EXPECT_EQ(scored.verdicts.back().failure, FailureKind::WrongStateBehavior);
}

TEST(Score, MisalignedTraces)
{
    auto trace = oracle_trace();
    trace.turns[3].index = 5;
    EXPECT_THROW(score_trace(trace, S(), P()), Error);
    trace = oracle_trace();
    trace.turns[2].actor = Actor::User;
    try {
        score_trace(trace, S(), P());
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::MisalignedTrace);
    }
    trace = oracle_trace();
    trace.turns.push_back(Turn{22, Actor::User, "extra", StateId{1}});
    EXPECT_THROW(score_trace(trace, S(), P()), Error);
}

TEST(Score, ArithmeticIsExact)
{
    for (int k = 1; k <= 21; ++k) {
        auto trace = oracle_trace();
        trace.turns.resize(static_cast<std::size_t>(k));
        auto s = score_trace(trace, S(), P()).score;
        EXPECT_EQ(s.value() * s.total_turns, Rational(s.correct_turns));
    }
}

// A perfect trace's prefixes score length/21 with no violation.
TEST(Score, PrefixMonotonicity)
{
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        auto full = oracle_trace(seed);
        for (std::size_t k = 0; k <= full.turns.size(); ++k) {
            ExecutionTrace prefix = full;
            prefix.turns.resize(k);
            auto s = score_trace(prefix, S(), P()).score;
            EXPECT_EQ(s.correct_turns, static_cast<int>(k));
            EXPECT_FALSE(s.first_violation);
        }
    }
}

// Editing turns after the first violation never changes the score.
TEST(Score, StopAtFirstViolation)
{
    std::mt19937_64 rng(99);
    const std::vector<std::string> junk{"", "What is 1 + 1?", "Correct!", "MORE or CHANGE?", "Choose EASY or HARD",
                                        "What is 2 + 2? It is 4."};
    for (int iter = 0; iter < 200; ++iter) {
        auto trace = oracle_trace(rng());
        std::size_t v = 2 * (rng() % 11); // an executor turn, 0-based
        trace.turns[v].text = "No idea.";
        auto base = score_trace(trace, S(), P()).score;
        ASSERT_EQ(base.first_violation, static_cast<int>(v) + 1);
        for (std::size_t i = v + 1; i < trace.turns.size(); ++i)
            if (rng() % 2)
                trace.turns[i].text = junk[rng() % junk.size()];
        EXPECT_EQ(score_trace(trace, S(), P()).score, base);
    }
}

// Injecting a question's own answer into an oracle question turn always
// fails it as a premature reveal.
TEST(Score, AnswerRevealInjection)
{
    const std::vector<std::string> templates{" The answer is {}.", " ({})", " Hint: {}!", " It's {}, by the way."};
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        auto base = oracle_trace(seed);
        for (std::size_t i = 0; i < S().steps.size(); ++i) {
            if (S().steps[i].expected.kind != ExpectedBehavior::Kind::AskQuestion)
                continue;
            for (const auto& tmpl : templates) {
                auto trace = base;
                auto q = extract_arithmetic(trace.turns[i].text);
                ASSERT_TRUE(q);
                std::string add = tmpl;
                add.replace(add.find("{}"), 2, std::to_string(q->answer));
                trace.turns[i].text += add;
                auto scored = score_trace(trace, S(), P());
                EXPECT_EQ(scored.score.first_violation, static_cast<int>(i) + 1);
                EXPECT_EQ(scored.verdicts.back().failure, FailureKind::PrematureAnswerReveal);
            }
        }
    }
}

TEST(Score, AnnotationsOverrideJudge)
{
    auto trace = oracle_trace();
    std::vector<std::optional<TurnVerdict>> notes(21);
    notes[6] = TurnVerdict::fail(FailureKind::CaseRejection);
    auto scored = score_trace(trace, S(), P(), {}, notes);
    EXPECT_EQ(scored.score.value(), Rational(6, 21));

    trace.turns[0].text = "garbage";
    notes.assign(21, TurnVerdict::ok());
    EXPECT_EQ(score_trace(trace, S(), P(), {}, notes).score.value(), Rational(1));
}

TEST(Score, FailureKindNames)
{
    for (auto k : {FailureKind::ConfirmationSeeking, FailureKind::AmbiguityMisread, FailureKind::CaseRejection,
                   FailureKind::MissingEvaluation, FailureKind::MissingNavigationPrompt,
                   FailureKind::PrematureAnswerReveal, FailureKind::WrongStateBehavior, FailureKind::FormatViolation})
        EXPECT_EQ(parse_failure_kind(to_string(k)), k);
    EXPECT_FALSE(parse_failure_kind("Nope"));
}
