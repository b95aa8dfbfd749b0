// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <random>

#include "fastric/detail/text.hpp"
#include "fastric/protocol.hpp"

using namespace fastric;

namespace {

std::string sample(const std::string& name)
{
    return detail::read_file(std::string(FASTRIC_SOURCE_DIR) + "/samples/" + name);
}

ErrorCode parse_error(std::string_view src, std::size_t* line = nullptr)
{
    try {
        parse_protocol(src);
    } catch (const ParseError& e) {
        if (line)
            *line = e.line();
        return e.code();
    }
    ADD_FAILURE() << "no error for:\n" << src;
    return ErrorCode::Io;
}

const char* kMinimal = R"([protocol]
name = tiny
[states]
0 = ONLY
[initial]
0
[triggers]
T: 0 -> 0
)";

} // namespace

TEST(Protocol, SampleFileMatchesEmbeddedSource)
{
    EXPECT_EQ(sample("kindergarten.fastric"), canonical_tutor_source());
}

TEST(Protocol, TutorHasExpectedShape)
{
    const auto& p = parse_protocol(sample("kindergarten.fastric"));
    EXPECT_EQ(p.states.size(), 3u);
    EXPECT_EQ(p.triggers.size(), 6u);
    EXPECT_EQ(p.constraints.size(), 3u);
    EXPECT_TRUE(p.finals.empty());
    EXPECT_EQ(p.initial, StateId{0});
    EXPECT_EQ(p, canonical_tutor_protocol());
}

TEST(Protocol, StateOnePlanIsTheLoop)
{
    const auto& p = canonical_tutor_protocol();
    const RolePlan* plan = p.role_for(StateId{1});
    ASSERT_NE(plan, nullptr);
    ASSERT_EQ(plan->actions.size(), 4u);
    EXPECT_EQ(std::get<AskQuestion>(plan->actions[0]).level, "easy");
    EXPECT_TRUE(std::holds_alternative<Wait>(plan->actions[1]));
    EXPECT_EQ(std::get<Evaluate>(plan->actions[2]).verdict_format, kDefaultVerdictFormat);
    const auto& nav = std::get<PromptNavigation>(plan->actions[3]);
    EXPECT_EQ(nav.stay.str(), "MORE");
    EXPECT_EQ(nav.change.str(), "CHANGE");
    EXPECT_EQ(nav.stay_label, "easy");
    EXPECT_EQ(nav.change_label, "hard");
}

TEST(Protocol, InitialPlanIsImplicit)
{
    const auto& p = canonical_tutor_protocol();
    ASSERT_NE(p.role_for(StateId{0}), nullptr);
    EXPECT_EQ(*p.role_for(StateId{0}), implicit_initial_plan());
}

TEST(Protocol, ConstraintsIncludeNeverRevealAnswer)
{
    EXPECT_TRUE(canonical_tutor_protocol().has_constraint(ConstraintKind::NeverRevealAnswer));
}

TEST(Protocol, CompileTutor)
{
    auto fsm = compile_protocol(canonical_tutor_protocol());
    EXPECT_EQ(fsm.states().size(), 3u);
    EXPECT_EQ(fsm.initial(), StateId{0});
    EXPECT_TRUE(fsm.finals().empty());
    EXPECT_EQ(fsm.transitions().size(), 6u);
    std::set<std::string> sigma;
    for (const auto& t : fsm.alphabet())
        sigma.insert(t.str());
    EXPECT_EQ(sigma, (std::set<std::string>{"CHANGE", "EASY", "HARD", "MORE"}));
    EXPECT_TRUE(validate_fsm(fsm).ok());
}

TEST(Protocol, CompileSingleStateSelfLoop)
{
    auto p = parse_protocol(kMinimal);
    auto fsm = compile_protocol(p);
    EXPECT_EQ(fsm.states().size(), 1u);
    EXPECT_EQ(step(fsm, StateId{0}, TriggerSymbol("T")), StateId{0});
}

TEST(Protocol, CompileRejectsNondeterminism)
{
    const char* src = R"([protocol]
name = nd
[states]
0 = A
1 = B
[initial]
0
[triggers]
GO: 0 -> 1
GO: 0 -> 0
[roles.1]
ask_question level=x
)";
    auto p = parse_protocol(src);
    EXPECT_THROW(compile_protocol(p), CompileError);
}

TEST(Protocol, MissingInitialSection)
{
    EXPECT_EQ(parse_error("[protocol]\nname = x\n[states]\n0 = A\n"), ErrorCode::MissingInitialState);
}

TEST(Protocol, UndeclaredStateInTrigger)
{
    std::string src = std::string(canonical_tutor_source());
    src.replace(src.find("MORE: 1 -> 1"), 12, "MORE: 1 -> 9");
    std::size_t line = 0;
    try {
        parse_protocol(src);
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_EQ(e.code(), ErrorCode::UndeclaredState);
        EXPECT_NE(std::string(e.what()).find("UndeclaredState(9)"), std::string::npos);
        line = e.line();
    }
    EXPECT_EQ(detail::split_lines(src)[line - 1], "MORE: 1 -> 9");
}

TEST(Protocol, SyntaxErrorsCarryLineNumbers)
{
    std::size_t line = 0;
    EXPECT_EQ(parse_error("[protocol]\nname = x\n[states]\n0 = A\n[triggers]\nGO 0 1\n", &line), ErrorCode::SyntaxError);
    EXPECT_EQ(line, 6u);
    EXPECT_EQ(parse_error("name = x\n", &line), ErrorCode::SyntaxError);
    EXPECT_EQ(line, 1u);
    EXPECT_EQ(parse_error("[protocol\nname = x\n"), ErrorCode::SyntaxError);
}

TEST(Protocol, SectionErrors)
{
    EXPECT_EQ(parse_error("[protocol]\nname = x\n[protocol]\n"), ErrorCode::DuplicateSection);
    EXPECT_EQ(parse_error("[protocol]\nname = x\n[extras]\n"), ErrorCode::UnknownSection);
    EXPECT_EQ(parse_error("[protocol]\nname = x\nname = y\n"), ErrorCode::DuplicateKey);
}

TEST(Protocol, UnknownActionKeyword)
{
    std::string src = std::string(canonical_tutor_source());
    src.replace(src.find("wait\n"), 4, "dance");
    EXPECT_EQ(parse_error(src), ErrorCode::UnknownAction);
}

TEST(Protocol, UnknownConstraintKeyword)
{
    std::string src = std::string(canonical_tutor_source()) + "be_nice\n";
    EXPECT_EQ(parse_error(src), ErrorCode::UnknownAction);
}

TEST(Protocol, MissingRolePlan)
{
    std::string src = std::string(canonical_tutor_source());
    auto at = src.find("[roles.2]");
    auto end = src.find("[constraints]");
    src.erase(at, end - at);
    EXPECT_EQ(parse_error(src), ErrorCode::MissingRolePlan);
}

TEST(Protocol, NavigationTokenWithoutTransition)
{
    std::string src = std::string(canonical_tutor_source());
    auto at = src.find("stay=MORE", src.find("[roles.2]"));
    src.replace(at, 9, "stay=HARD");
    EXPECT_EQ(parse_error(src), ErrorCode::InvalidRolePlan);
}

TEST(Protocol, RolesOnFinalStatesAreRejected)
{
    const char* src = R"([protocol]
name = f
[states]
0 = A
1 = DONE
[initial]
0
[finals]
1
[triggers]
GO: 0 -> 1
[roles.1]
wait
)";
    EXPECT_EQ(parse_error(src), ErrorCode::RoleOnFinalState);
}

TEST(Protocol, LowercaseTriggerTokenRejected)
{
    std::string src = std::string(canonical_tutor_source());
    src.replace(src.find("EASY: 0"), 4, "easy");
    EXPECT_EQ(parse_error(src), ErrorCode::BadValue);
}

TEST(Protocol, MissingRequiredAttribute)
{
    std::string src = std::string(canonical_tutor_source());
    src.replace(src.find("ask_question level=easy"), 23, "ask_question");
    EXPECT_EQ(parse_error(src), ErrorCode::MissingKey);
}

TEST(Protocol, RoundTripCanonical)
{
    const auto& p = canonical_tutor_protocol();
    EXPECT_EQ(parse_protocol(render_protocol_file(p)), p);
}

TEST(Protocol, RoundTripCustomAttributes)
{
    std::string src = std::string(canonical_tutor_source());
    src.replace(src.find("evaluate\n"), 8, R"(evaluate format="Yes! | No, it is [X] # really")");
    src.replace(src.find("stay=MORE switch=CHANGE"), 23,
                "stay=MORE switch=CHANGE stay_label=\"easy peasy\" switch_label=tough");
    auto p = parse_protocol(src);
    EXPECT_EQ(std::get<Evaluate>(p.role_for(StateId{1})->actions[2]).verdict_format, "Yes! | No, it is [X] # really");
    EXPECT_EQ(parse_protocol(render_protocol_file(p)), p);
}

// Round-trip over randomly generated ring protocols.
TEST(Protocol, RoundTripGenerated)
{
    std::mt19937_64 rng(17);
    for (int iter = 0; iter < 50; ++iter) {
        int n = 2 + static_cast<int>(rng() % 5);
        std::string src = "[protocol]\nname = gen" + std::to_string(iter) + "\n[states]\n0 = START\n";
        for (int i = 1; i <= n; ++i)
            src += std::to_string(i) + " = LEVEL" + std::to_string(i) + "\n";
        src += "[initial]\n0\n[finals]\n[triggers]\n";
        for (int i = 1; i <= n; ++i) {
            src += "PICK" + std::to_string(i) + ": 0 -> " + std::to_string(i) + "\n";
            src += "STAY: " + std::to_string(i) + " -> " + std::to_string(i) + "\n";
            src += "NEXT: " + std::to_string(i) + " -> " + std::to_string(i % n + 1) + "\n";
        }
        for (int i = 1; i <= n; ++i) {
            src += "[roles." + std::to_string(i) + "]\nask_question level=l" + std::to_string(i) + "\nwait\n";
            if (rng() % 2)
                src += "evaluate\n";
            src += "prompt_navigation stay=STAY switch=NEXT\n";
        }
        if (rng() % 2)
            src += "[constraints]\nstick_to_workflow\n";
        auto p = parse_protocol(src);
        EXPECT_EQ(parse_protocol(render_protocol_file(p)), p) << src;
        EXPECT_TRUE(validate_fsm(compile_protocol(p)).ok());
    }
}

TEST(Protocol, ParsingIsDeterministic)
{
    EXPECT_EQ(parse_protocol(canonical_tutor_source()), parse_protocol(canonical_tutor_source()));
}
