// SPDX-License-Identifier: Apache-2.0

#include "fastric/agents.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "fastric/arithmetic.hpp"
#include "fastric/detail/text.hpp"
#include "fastric/endpoint.hpp"

namespace fastric {

std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

double unit_interval(std::uint64_t x)
{
    return static_cast<double>(x >> 11) * 0x1.0p-53;
}

namespace {

enum class Phase { Start, AwaitChoice, AwaitAnswer, AwaitNavigation };

const Turn* last_of(const std::vector<Turn>& history, Actor actor)
{
    for (auto it = history.rbegin(); it != history.rend(); ++it)
        if (it->actor == actor)
            return &*it;
    return nullptr;
}

Phase phase_of(const ProtocolSpec& protocol, const std::vector<Turn>& history, StateId state)
{
    const Turn* tutor = last_of(history, Actor::Executor);
    if (!tutor)
        return Phase::Start;
    if (state == protocol.initial)
        return Phase::AwaitChoice;
    if (!find_arithmetic(tutor->text).empty())
        return Phase::AwaitAnswer;
    return Phase::AwaitNavigation;
}

std::string last_input(const std::vector<Turn>& history)
{
    const Turn* user = last_of(history, Actor::User);
    return user ? user->text : std::string();
}

std::optional<TriggerDecl> trigger_for(const ProtocolSpec& protocol, StateId state, std::string_view raw)
{
    std::string token = canonical_token(raw);
    for (const auto& t : protocol.triggers_from(state))
        if (t.token.str() == token)
            return t;
    return std::nullopt;
}

std::string join_options(const std::vector<std::string>& tokens)
{
    std::string out;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (i > 0)
            out += i + 1 == tokens.size() ? " or " : ", ";
        out += tokens[i];
    }
    return out;
}

std::vector<std::string> tokens_from(const ProtocolSpec& protocol, StateId state)
{
    std::vector<std::string> out;
    for (const auto& t : protocol.triggers_from(state))
        if (std::find(out.begin(), out.end(), t.token.str()) == out.end())
            out.push_back(t.token.str());
    return out;
}

std::string choice_prompt(const ProtocolSpec& protocol)
{
    return "Choose " + join_options(tokens_from(protocol, protocol.initial)) + ".";
}

const PromptNavigation* navigation_of(const ProtocolSpec& protocol, StateId state)
{
    const RolePlan* plan = protocol.role_for(state);
    return plan ? plan->find<PromptNavigation>() : nullptr;
}

std::string navigation_question(const ProtocolSpec& protocol, StateId state)
{
    if (const PromptNavigation* nav = navigation_of(protocol, state))
        return nav->question();
    return join_options(tokens_from(protocol, state)) + "?";
}

std::string reprompt_text(const ProtocolSpec& protocol, StateId state)
{
    std::vector<std::string> options;
    if (const PromptNavigation* nav = navigation_of(protocol, state))
        options = {nav->stay.str(), nav->change.str()};
    else
        options = tokens_from(protocol, state);
    return "Please reply " + join_options(options) + ". " + navigation_question(protocol, state);
}

std::string difficulty_of(const ProtocolSpec& protocol, StateId state)
{
    const RolePlan* plan = protocol.role_for(state);
    const AskQuestion* ask = plan ? plan->find<AskQuestion>() : nullptr;
    return ask ? ask->level : std::string();
}

TutorReply ask_question(const ProtocolSpec& protocol, const std::vector<Turn>& history, StateId state,
                        std::uint64_t seed)
{
    std::string difficulty = difficulty_of(protocol, state);
    if (difficulty.empty())
        return {reprompt_text(protocol, state), state};
    int asked = 0;
    for (const auto& t : history)
        if (t.actor == Actor::Executor && !find_arithmetic(t.text).empty() &&
            difficulty_of(protocol, t.state) == difficulty)
            ++asked;
    return {oracle_question(difficulty, asked, seed), state};
}

TutorReply evaluate(const ProtocolSpec& protocol, const std::vector<Turn>& history, StateId state)
{
    const Turn* tutor = last_of(history, Actor::Executor);
    auto questions = find_arithmetic(tutor->text);
    const ArithmeticQuestion& q = questions.back();
    const RolePlan* plan = protocol.role_for(state);
    Evaluate fallback;
    const Evaluate* ev = plan ? plan->find<Evaluate>() : nullptr;
    if (!ev)
        ev = &fallback;

    auto given = parse_answer(last_input(history));
    std::string verdict;
    if (given && *given == q.answer) {
        verdict = ev->correct_verdict();
    } else {
        verdict = ev->wrong_verdict();
        auto slot = verdict.find("[X]");
        if (slot != std::string::npos)
            verdict.replace(slot, 3, std::to_string(q.answer));
        if (!verdict.empty() && !std::ispunct(static_cast<unsigned char>(verdict.back())))
            verdict += '.';
    }
    return {verdict + " " + navigation_question(protocol, state), state};
}

const std::array<std::string_view, 7> kAffirmatives{"yes", "y", "ok", "okay", "sure", "yeah", "yep"};

bool affirmative(std::string_view raw)
{
    std::string s = detail::to_lower(detail::trim(raw));
    while (!s.empty() && std::ispunct(static_cast<unsigned char>(s.back())))
        s.pop_back();
    return std::find(kAffirmatives.begin(), kAffirmatives.end(), s) != kAffirmatives.end();
}

constexpr std::string_view kConfirmationLead = "Do you want to switch to ";

} // namespace

const std::vector<std::string>& question_bank(std::string_view difficulty)
{
    static const std::vector<std::string> easy{
        "What is 2 + 3?", "What is 4 + 4?", "What is 1 + 6?", "What is 9 - 4?",
        "What is 3 + 5?", "What is 7 - 2?", "What is 6 + 3?", "What is 8 - 5?",
    };
    static const std::vector<std::string> hard{
        "What is 14 - 6?", "What is 7 + 8?",  "What is 12 + 9?", "What is 15 - 7?",
        "What is 6 + 9?",  "What is 18 - 9?", "What is 11 + 8?", "What is 13 - 5?",
    };
    return detail::to_lower(difficulty) == "easy" ? easy : hard;
}

const std::string& oracle_question(std::string_view difficulty, int nth, std::uint64_t seed)
{
    const auto& bank = question_bank(difficulty);
    const auto n = static_cast<std::uint64_t>(bank.size());
    const auto i = static_cast<std::uint64_t>(std::max(nth, 0));
    if (&bank == &question_bank("easy")) {
        if (i == 0)
            return bank[0];
        std::uint64_t r = splitmix64(seed) % (n - 1);
        return bank[1 + (i - 1 + r) % (n - 1)];
    }
    std::uint64_t r = splitmix64(seed ^ 0x68617264ULL) % n;
    return bank[(i + r) % n];
}

TutorReply oracle_tutor_step(const ProtocolSpec& protocol, const std::vector<Turn>& history, StateId state,
                             std::uint64_t seed)
{
    if (!protocol.find_state(state))
        throw Error(ErrorCode::UnknownState, "state " + std::to_string(state.value) + " is not declared");
    std::string input = last_input(history);
    switch (phase_of(protocol, history, state)) {
    case Phase::Start:
        return {choice_prompt(protocol), state};
    case Phase::AwaitChoice:
        if (auto t = trigger_for(protocol, state, input))
            return ask_question(protocol, history, t->to, seed);
        return {"Please choose " + join_options(tokens_from(protocol, state)) + ".", state};
    case Phase::AwaitAnswer:
        return evaluate(protocol, history, state);
    case Phase::AwaitNavigation:
        if (auto t = trigger_for(protocol, state, input))
            return ask_question(protocol, history, t->to, seed);
        return {reprompt_text(protocol, state), state};
    }
    return {reprompt_text(protocol, state), state};
}

TutorReply OracleTutor::step(const TutorInput& in) const
{
    return oracle_tutor_step(in.protocol, in.history, in.state, in.seed);
}

// Faults ------------------------------------------------------------------

std::string_view to_string(FaultKind kind)
{
    switch (kind) {
    case FaultKind::ConfirmationSeeker: return "confirmation_seeker";
    case FaultKind::AmbiguityMisreader: return "ambiguity_misreader";
    case FaultKind::CaseBrittle: return "case_brittle";
    case FaultKind::RandomDeviator: return "random_deviator";
    }
    return "?";
}

std::optional<FaultKind> parse_fault_kind(std::string_view text)
{
    for (auto k : {FaultKind::ConfirmationSeeker, FaultKind::AmbiguityMisreader, FaultKind::CaseBrittle,
                   FaultKind::RandomDeviator})
        if (text == to_string(k))
            return k;
    return std::nullopt;
}

std::string FaultProfile::id() const
{
    if (kind != FaultKind::RandomDeviator)
        return std::string(to_string(kind));
    char buf[64];
    std::snprintf(buf, sizeof buf, "%g", p);
    std::string out = "random_deviator(" + std::string(buf);
    if (seed != 0)
        out += "," + std::to_string(seed);
    return out + ")";
}

FaultProfile parse_fault_profile(std::string_view text)
{
    FaultProfile out;
    std::string s(detail::trim(text));
    auto open = s.find('(');
    auto kind = parse_fault_kind(s.substr(0, open));
    if (!kind)
        throw Error(ErrorCode::InvalidArgument, "unknown fault kind '" + s + "'");
    out.kind = *kind;
    if (open == std::string::npos) {
        if (out.kind == FaultKind::RandomDeviator)
            throw Error(ErrorCode::InvalidArgument, "random_deviator needs a probability, e.g. random_deviator(0.5)");
        return out;
    }
    if (out.kind != FaultKind::RandomDeviator || s.back() != ')')
        throw Error(ErrorCode::InvalidArgument, "bad fault profile '" + s + "'");
    std::string args = s.substr(open + 1, s.size() - open - 2);
    std::string p_text = args.substr(0, args.find(','));
    try {
        std::size_t used = 0;
        out.p = std::stod(p_text, &used);
        if (used != p_text.size())
            throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
        throw Error(ErrorCode::InvalidArgument, "bad probability '" + p_text + "'");
    }
    if (!(out.p >= 0.0 && out.p <= 1.0))
        throw Error(ErrorCode::InvalidArgument, "probability must be in [0, 1]");
    if (auto comma = args.find(','); comma != std::string::npos) {
        auto seed = detail::parse_int(detail::trim(args.substr(comma + 1)));
        if (!seed || *seed < 0)
            throw Error(ErrorCode::InvalidArgument, "bad fault seed in '" + s + "'");
        out.seed = static_cast<std::uint64_t>(*seed);
    }
    return out;
}

namespace {

int count_user_tokens(const std::vector<Turn>& history, const std::string& token)
{
    return static_cast<int>(std::count_if(history.begin(), history.end(), [&](const Turn& t) {
        return t.actor == Actor::User && canonical_token(t.text) == token;
    }));
}

const std::array<std::string_view, 4> kMalformed{
    "I'm not sure what to do next.",
    "Let's take a short break.",
    "Hmm, let me think about that for a moment.",
    "Math is fun!",
};

} // namespace

TutorReply fault_tutor_step(const FaultProfile& profile, const ProtocolSpec& protocol,
                            const std::vector<Turn>& history, StateId state, std::uint64_t seed)
{
    Phase phase = phase_of(protocol, history, state);
    std::string input = last_input(history);
    const PromptNavigation* nav = navigation_of(protocol, state);

    switch (profile.kind) {
    case FaultKind::ConfirmationSeeker: {
        const Turn* tutor = last_of(history, Actor::Executor);
        if (tutor && tutor->text.rfind(kConfirmationLead, 0) == 0 && affirmative(input) && nav)
            if (auto t = trigger_for(protocol, state, nav->change.str()))
                return ask_question(protocol, history, t->to, seed);
        if (phase == Phase::AwaitNavigation && nav && canonical_token(input) == nav->change.str() &&
            count_user_tokens(history, nav->change.str()) == 1) {
            if (auto t = trigger_for(protocol, state, input))
                return {std::string(kConfirmationLead) + protocol.label_of(t->to) + "?", state};
        }
        break;
    }
    case FaultKind::AmbiguityMisreader:
        if (phase == Phase::AwaitNavigation && nav && affirmative(input))
            if (auto t = trigger_for(protocol, state, nav->stay.str()))
                return ask_question(protocol, history, t->to, seed);
        break;
    case FaultKind::CaseBrittle: {
        std::string raw(detail::trim(input));
        bool case_variant = raw != canonical_token(raw) && trigger_for(protocol, state, raw).has_value();
        if (case_variant && phase == Phase::AwaitNavigation)
            return {"\"" + raw + "\" is not a valid command. " + reprompt_text(protocol, state), state};
        if (case_variant && phase == Phase::AwaitChoice)
            return {"\"" + raw + "\" is not a valid command. Please choose " +
                        join_options(tokens_from(protocol, state)) + ".",
                    state};
        break;
    }
    case FaultKind::RandomDeviator: {
        auto index = static_cast<std::uint64_t>(history.size() + 1);
        std::uint64_t stream = splitmix64(splitmix64(seed ^ 0x5EED0F0DULL) ^ profile.seed);
        std::uint64_t draw = splitmix64(stream + index);
        if (unit_interval(draw) < profile.p)
            return {std::string(kMalformed[splitmix64(draw) % kMalformed.size()]), state};
        break;
    }
    }
    return oracle_tutor_step(protocol, history, state, seed);
}

FaultTutor::FaultTutor(FaultProfile profile) : profile_(std::move(profile))
{
    if (!(profile_.p >= 0.0 && profile_.p <= 1.0))
        throw Error(ErrorCode::InvalidArgument, "probability must be in [0, 1]");
}

TutorReply FaultTutor::step(const TutorInput& in) const
{
    return fault_tutor_step(profile_, in.protocol, in.history, in.state, in.seed);
}

// Scripted user -----------------------------------------------------------

UserReply scripted_user_step(const TestScript& script, const std::vector<Turn>& history, std::string_view fallback)
{
    int index = static_cast<int>(history.size()) + 1;
    if (index > script.total_turns() || actor_for_turn(index) != Actor::User)
        throw Error(ErrorCode::InvalidArgument, "turn " + std::to_string(index) + " is not a scripted user turn");
    const ExpectedBehavior& e = script.at(index).expected;
    if (e.rule == UserRule::Literal)
        return {e.literal, false};
    std::vector<ArithmeticQuestion> qs;
    if (!history.empty() && history.back().actor == Actor::Executor)
        qs = find_arithmetic(history.back().text);
    if (qs.empty())
        return {std::string(fallback), true};
    long long answer = qs.back().answer + (e.rule == UserRule::IncorrectAnswer ? 1 : 0);
    return {std::to_string(answer), false};
}

// Sessions ----------------------------------------------------------------

SessionError::SessionError(ErrorCode code, std::string message, ExecutionTrace partial)
    : Error(code, std::move(message)), partial_(std::move(partial))
{
}

ExecutionTrace run_session(const TutorAgent& tutor, const TestScript& script, const ProtocolSpec& protocol,
                           const SessionOptions& options)
{
    ExecutionTrace trace;
    trace.protocol_name = protocol.name;
    trace.run_id = options.run_id;
    trace.condition = Condition{tutor.id(), options.level};
    RenderedPrompt prompt = render_prompt(protocol, options.level);
    StateId state = protocol.initial;

    for (int index = 1; index <= script.total_turns(); ++index) {
        if (actor_for_turn(index) == Actor::User) {
            UserReply reply = scripted_user_step(script, trace.turns);
            trace.unparseable_question = trace.unparseable_question || reply.unparseable_question;
            trace.turns.push_back(Turn{index, Actor::User, std::move(reply.text), state});
            continue;
        }
        TutorReply reply;
        try {
            reply = tutor.step(TutorInput{protocol, prompt, trace.turns, state, options.seed});
        } catch (const SessionError& e) {
            throw SessionError(e.code(), e.what(), trace);
        } catch (const Error& e) {
            throw SessionError(e.code(), e.what(), trace);
        }
        if (!protocol.find_state(reply.next_state))
            throw SessionError(ErrorCode::UnknownState,
                               "agent moved to undeclared state " + std::to_string(reply.next_state.value), trace);
        state = reply.next_state;
        trace.turns.push_back(Turn{index, Actor::Executor, std::move(reply.text), state});
    }
    return trace;
}

std::shared_ptr<const TutorAgent> make_agent(std::string_view spec)
{
    std::string s(detail::trim(spec));
    if (s == "oracle")
        return std::make_shared<OracleTutor>();
    if (s.rfind("fault:", 0) == 0)
        return std::make_shared<FaultTutor>(parse_fault_profile(s.substr(6)));
    if (s.rfind("endpoint:", 0) == 0)
        return std::make_shared<EndpointTutor>(load_endpoint_config(s.substr(9)));
    throw Error(ErrorCode::InvalidArgument, "unknown agent '" + s + "' (expected oracle, fault:<kind> or endpoint:<config>)");
}

} // namespace fastric
