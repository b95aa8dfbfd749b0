// SPDX-License-Identifier: Apache-2.0

#include "fastric/protocol.hpp"

#include <algorithm>
#include <regex>
#include <sstream>

#include "fastric/detail/text.hpp"

namespace fastric {

using detail::trim;

namespace {

constexpr std::string_view kTutorSource = R"(# Kindergarten arithmetic tutor.
# The student picks a difficulty, then loops: question, answer, verdict,
# navigation (MORE keeps the level, CHANGE switches it).

[protocol]
name = kindergarten_tutor
subject = math

[agents]
executor = I
executor_description = the AI tutor of kindergarten math
user = you
user_description = the kindergarten student

[states]
0 = INIT
1 = EASY
2 = HARD

[initial]
0

# no terminal state: tutoring continues indefinitely
[finals]

[triggers]
EASY: 0 -> 1
HARD: 0 -> 2
MORE: 1 -> 1
CHANGE: 1 -> 2
MORE: 2 -> 2
CHANGE: 2 -> 1

[roles.1]
ask_question level=easy
wait
evaluate
prompt_navigation stay=MORE switch=CHANGE

[roles.2]
ask_question level=hard
wait
evaluate
prompt_navigation stay=MORE switch=CHANGE

[constraints]
never_reveal_answer
stick_to_workflow
reprompt_on_invalid
)";

std::pair<std::string, std::string> split_verdicts(std::string_view format)
{
    auto bar = format.find('|');
    if (bar == std::string_view::npos)
        return {std::string(trim(format)), std::string(trim(format))};
    return {std::string(trim(format.substr(0, bar))), std::string(trim(format.substr(bar + 1)))};
}

} // namespace

std::string Evaluate::correct_verdict() const
{
    return split_verdicts(verdict_format).first;
}

std::string Evaluate::wrong_verdict() const
{
    return split_verdicts(verdict_format).second;
}

std::string PromptNavigation::question() const
{
    return stay.str() + " at the " + stay_label + " level, or " + change.str() + " to the " + change_label +
           " level?";
}

RolePlan implicit_initial_plan()
{
    return RolePlan{{AskDifficultyChoice{}, Wait{}}};
}

std::string_view keyword(ConstraintKind kind)
{
    switch (kind) {
    case ConstraintKind::NeverRevealAnswer: return "never_reveal_answer";
    case ConstraintKind::StickToWorkflow: return "stick_to_workflow";
    case ConstraintKind::RepromptOnInvalid: return "reprompt_on_invalid";
    }
    return "";
}

const State* ProtocolSpec::find_state(StateId id) const
{
    auto it = std::find_if(states.begin(), states.end(), [&](const State& s) { return s.id == id; });
    return it == states.end() ? nullptr : &*it;
}

const std::string& ProtocolSpec::label_of(StateId id) const
{
    const State* s = find_state(id);
    if (!s)
        throw Error(ErrorCode::UnknownState, "state " + std::to_string(id.value) + " is not declared");
    return s->label;
}

const RolePlan* ProtocolSpec::role_for(StateId id) const
{
    auto it = roles.find(id);
    return it == roles.end() ? nullptr : &it->second;
}

std::vector<State> ProtocolSpec::loop_states() const
{
    std::vector<State> out;
    for (const auto& s : states)
        if (s.id != initial)
            out.push_back(s);
    return out;
}

int ProtocolSpec::step_number(StateId id) const
{
    if (id == initial)
        return 0;
    int k = 1;
    for (const auto& s : states) {
        if (s.id == initial)
            continue;
        if (s.id == id)
            return k;
        ++k;
    }
    throw Error(ErrorCode::UnknownState, "state " + std::to_string(id.value) + " is not declared");
}

std::vector<TriggerDecl> ProtocolSpec::triggers_from(StateId id) const
{
    std::vector<TriggerDecl> out;
    for (const auto& t : triggers)
        if (t.from == id)
            out.push_back(t);
    return out;
}

bool ProtocolSpec::has_constraint(ConstraintKind kind) const
{
    return std::any_of(constraints.begin(), constraints.end(),
                       [&](const ConstraintRule& c) { return c.kind == kind; });
}

namespace {

/// Navigation tokens used anywhere in the protocol, in first-use order.
std::vector<std::string> navigation_tokens(const ProtocolSpec& p)
{
    std::vector<std::string> out;
    auto add = [&](const std::string& t) {
        if (std::find(out.begin(), out.end(), t) == out.end())
            out.push_back(t);
    };
    for (const auto& s : p.loop_states()) {
        if (const RolePlan* plan = p.role_for(s.id)) {
            if (auto* nav = plan->find<PromptNavigation>()) {
                add(nav->stay.str());
                add(nav->change.str());
            }
        }
    }
    return out;
}

std::string quoted_alternatives(const std::vector<std::string>& tokens)
{
    std::string out;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (i > 0)
            out += (i + 1 == tokens.size()) ? " or " : ", ";
        out += "\"" + tokens[i] + "\"";
    }
    return out;
}

} // namespace

std::string constraint_text(ConstraintKind kind, const ProtocolSpec& p)
{
    switch (kind) {
    case ConstraintKind::NeverRevealAnswer:
        return p.agents.executor + " must never answer a " + p.subject + " problem for " + p.agents.user +
               " unless " + p.agents.executor + " am correcting a wrong answer.";
    case ConstraintKind::StickToWorkflow:
        return p.agents.executor + " must stick to this workflow exactly. " + p.agents.executor +
               " do not add extra steps or commentary unless specified.";
    case ConstraintKind::RepromptOnInvalid:
        return "If " + p.agents.user + " provide an invalid command (not " +
               quoted_alternatives(navigation_tokens(p)) + "), " + p.agents.executor + " must re-prompt " +
               p.agents.user + " with the valid options.";
    }
    return {};
}

namespace {

struct StateRef {
    std::uint32_t id;
    std::size_t line;
};

struct RawNav {
    std::string stay;
    std::string change;
    std::optional<std::string> stay_label;
    std::optional<std::string> change_label;
    std::size_t line = 0;
};

class ProtocolParser {
public:
    explicit ProtocolParser(std::string_view source) : lines_(detail::split_lines(source)) {}

    ProtocolSpec parse()
    {
        std::string section;
        for (std::size_t n = 0; n < lines_.size(); ++n) {
            line_no_ = n + 1;
            std::string_view line = trim(detail::strip_comment(lines_[n]));
            if (line.empty())
                continue;
            if (line.front() == '[') {
                section = open_section(line);
                continue;
            }
            if (section.empty())
                fail(ErrorCode::SyntaxError, "content outside of any section");
            dispatch(section, line);
        }
        return finish();
    }

private:
    [[noreturn]] void fail(ErrorCode code, const std::string& msg, std::size_t line = SIZE_MAX) const
    {
        throw ParseError(code, line == SIZE_MAX ? line_no_ : line, msg);
    }

    std::string open_section(std::string_view line)
    {
        static const std::regex header(R"(\[([A-Za-z_]+(\.[0-9]+)?)\])");
        std::match_results<std::string_view::const_iterator> m;
        if (!std::regex_match(line.begin(), line.end(), m, header))
            fail(ErrorCode::SyntaxError, "malformed section header '" + std::string(line) + "'");
        std::string name = m[1].str();
        static const std::set<std::string> known{"protocol", "agents", "states", "initial",
                                                 "finals", "triggers", "constraints"};
        if (!known.contains(name) && name.rfind("roles.", 0) != 0)
            fail(ErrorCode::UnknownSection, "unknown section [" + name + "]");
        if (!seen_sections_.insert(name).second)
            fail(ErrorCode::DuplicateSection, "section [" + name + "] appears more than once");
        if (name.rfind("roles.", 0) == 0) {
            auto id = detail::parse_int(name.substr(6));
            if (!id || *id < 0)
                fail(ErrorCode::SyntaxError, "bad state id in [" + name + "]");
            current_role_ = static_cast<std::uint32_t>(*id);
            role_refs_.push_back({current_role_, line_no_});
            raw_roles_[current_role_];
        }
        return name;
    }

    std::pair<std::string, std::string> key_value(std::string_view line) const
    {
        auto eq = line.find('=');
        if (eq == std::string_view::npos)
            fail(ErrorCode::SyntaxError, "expected 'key = value'");
        std::string key(trim(line.substr(0, eq)));
        std::string value(trim(line.substr(eq + 1)));
        if (key.empty())
            fail(ErrorCode::SyntaxError, "empty key");
        return {key, value};
    }

    void set_unique(std::map<std::string, std::string>& into, std::string_view section, std::string_view line)
    {
        auto [key, value] = key_value(line);
        if (!into.emplace(key, value).second)
            fail(ErrorCode::DuplicateKey, "duplicate key '" + key + "' in [" + std::string(section) + "]");
    }

    std::uint32_t state_id(std::string_view text) const
    {
        auto v = detail::parse_int(text);
        if (!v || *v < 0 || *v > 0xFFFFFFFFLL)
            fail(ErrorCode::SyntaxError, "expected a state id, got '" + std::string(text) + "'");
        return static_cast<std::uint32_t>(*v);
    }

    void dispatch(const std::string& section, std::string_view line)
    {
        if (section == "protocol") {
            set_unique(protocol_kv_, section, line);
        } else if (section == "agents") {
            set_unique(agent_kv_, section, line);
        } else if (section == "states") {
            auto [key, value] = key_value(line);
            std::uint32_t id = state_id(key);
            if (value.empty())
                fail(ErrorCode::BadValue, "state " + key + " has an empty label");
            for (const auto& s : spec_.states)
                if (s.id.value == id)
                    fail(ErrorCode::DuplicateKey, "state " + key + " declared twice");
            spec_.states.push_back({StateId{id}, value});
        } else if (section == "initial") {
            if (initial_)
                fail(ErrorCode::SyntaxError, "[initial] takes exactly one state");
            initial_ = StateRef{state_id(line), line_no_};
        } else if (section == "finals") {
            finals_.push_back({state_id(line), line_no_});
        } else if (section == "triggers") {
            parse_trigger(line);
        } else if (section == "constraints") {
            parse_constraint(line);
        } else {
            parse_action(line);
        }
    }

    void parse_trigger(std::string_view line)
    {
        static const std::regex re(R"(([^\s:]+)\s*:\s*([0-9]+)\s*->\s*([0-9]+))");
        std::match_results<std::string_view::const_iterator> m;
        if (!std::regex_match(line.begin(), line.end(), m, re))
            fail(ErrorCode::SyntaxError, "expected '<TOKEN>: <from> -> <to>'");
        std::string token = m[1].str();
        if (!TriggerSymbol::is_canonical(token))
            fail(ErrorCode::BadValue, "trigger token '" + token + "' must be uppercase");
        StateRef from{state_id(m[2].str()), line_no_};
        StateRef to{state_id(m[3].str()), line_no_};
        trigger_refs_.push_back(from);
        trigger_refs_.push_back(to);
        spec_.triggers.push_back({TriggerSymbol{token}, StateId{from.id}, StateId{to.id}});
    }

    void parse_constraint(std::string_view line)
    {
        static const std::map<std::string_view, ConstraintKind> kinds{
            {"never_reveal_answer", ConstraintKind::NeverRevealAnswer},
            {"stick_to_workflow", ConstraintKind::StickToWorkflow},
            {"reprompt_on_invalid", ConstraintKind::RepromptOnInvalid},
        };
        auto it = kinds.find(line);
        if (it == kinds.end())
            fail(ErrorCode::UnknownAction, "unknown constraint '" + std::string(line) + "'");
        spec_.constraints.push_back({it->second, {}});
    }

    void parse_action(std::string_view line)
    {
        auto space = line.find_first_of(" \t");
        std::string word(line.substr(0, space));
        auto attrs = detail::parse_kv(space == std::string_view::npos ? std::string_view{} : line.substr(space),
                                      false, line_no_);
        std::map<std::string, std::string> kv;
        for (auto& a : attrs)
            if (!kv.emplace(a.key, a.value).second)
                fail(ErrorCode::DuplicateKey, "duplicate attribute '" + a.key + "'");
        auto take = [&](const std::string& key, bool required) -> std::optional<std::string> {
            auto it = kv.find(key);
            if (it == kv.end()) {
                if (required)
                    fail(ErrorCode::MissingKey, word + " requires " + key + "=");
                return std::nullopt;
            }
            std::string v = it->second;
            kv.erase(it);
            return v;
        };

        auto& plan = raw_roles_[current_role_];
        if (word == "ask_choice") {
            plan.actions.emplace_back(AskDifficultyChoice{});
        } else if (word == "ask_question") {
            std::string level = *take("level", true);
            if (level.empty())
                fail(ErrorCode::BadValue, "empty level");
            plan.actions.emplace_back(AskQuestion{level});
        } else if (word == "wait") {
            plan.actions.emplace_back(Wait{});
        } else if (word == "evaluate") {
            Evaluate ev;
            if (auto f = take("format", false))
                ev.verdict_format = *f;
            plan.actions.emplace_back(ev);
        } else if (word == "prompt_navigation") {
            RawNav nav;
            nav.stay = *take("stay", true);
            nav.change = *take("switch", true);
            nav.stay_label = take("stay_label", false);
            nav.change_label = take("switch_label", false);
            nav.line = line_no_;
            for (const auto* t : {&nav.stay, &nav.change})
                if (!TriggerSymbol::is_canonical(*t))
                    fail(ErrorCode::BadValue, "navigation token '" + *t + "' must be uppercase");
            // placeholder; resolved in finish()
            plan.actions.emplace_back(PromptNavigation{TriggerSymbol{nav.stay}, TriggerSymbol{nav.change}, {}, {}});
            navs_[current_role_] = nav;
        } else {
            fail(ErrorCode::UnknownAction, "unknown action '" + word + "'");
        }
        if (!kv.empty())
            fail(ErrorCode::UnknownKey, "unknown attribute '" + kv.begin()->first + "' for " + word);
    }

    void check_declared(const StateRef& ref) const
    {
        if (!spec_.find_state(StateId{ref.id}))
            fail(ErrorCode::UndeclaredState, "UndeclaredState(" + std::to_string(ref.id) + ")", ref.line);
    }

    ProtocolSpec finish()
    {
        line_no_ = 0;
        if (!protocol_kv_.contains("name"))
            fail(ErrorCode::MissingKey, "[protocol] requires name");
        for (const auto& [k, v] : protocol_kv_) {
            if (k == "name")
                spec_.name = v;
            else if (k == "subject")
                spec_.subject = v;
            else
                fail(ErrorCode::UnknownKey, "unknown key '" + k + "' in [protocol]");
        }
        for (const auto& [k, v] : agent_kv_) {
            if (k == "executor")
                spec_.agents.executor = v;
            else if (k == "executor_description")
                spec_.agents.executor_description = v;
            else if (k == "user")
                spec_.agents.user = v;
            else if (k == "user_description")
                spec_.agents.user_description = v;
            else
                fail(ErrorCode::UnknownKey, "unknown key '" + k + "' in [agents]");
        }
        if (spec_.states.empty())
            fail(ErrorCode::SyntaxError, "no states declared");
        if (!initial_)
            fail(ErrorCode::MissingInitialState, "MissingInitialState: no [initial] state given");

        check_declared(*initial_);
        spec_.initial = StateId{initial_->id};
        for (const auto& f : finals_) {
            check_declared(f);
            spec_.finals.insert(StateId{f.id});
        }
        for (const auto& r : trigger_refs_)
            check_declared(r);
        for (const auto& r : role_refs_)
            check_declared(r);

        for (auto& [id, plan] : raw_roles_) {
            StateId sid{id};
            if (spec_.finals.contains(sid))
                fail(ErrorCode::RoleOnFinalState, "final state " + std::to_string(id) + " cannot have a role plan");
            if (auto it = navs_.find(id); it != navs_.end())
                resolve_navigation(sid, plan, it->second);
            spec_.roles[sid] = plan;
        }
        if (!spec_.roles.contains(spec_.initial) && !spec_.finals.contains(spec_.initial))
            spec_.roles[spec_.initial] = implicit_initial_plan();
        for (const auto& s : spec_.states)
            if (!spec_.finals.contains(s.id) && !spec_.roles.contains(s.id))
                fail(ErrorCode::MissingRolePlan, "state " + std::to_string(s.id.value) + " (" + s.label +
                                                     ") has no [roles." + std::to_string(s.id.value) + "]");

        for (auto& c : spec_.constraints)
            c.text = constraint_text(c.kind, spec_);

        check_role_plans();
        return spec_;
    }

    void resolve_navigation(StateId sid, RolePlan& plan, const RawNav& nav)
    {
        auto target = [&](const std::string& token) -> StateId {
            for (const auto& t : spec_.triggers)
                if (t.from == sid && t.token.str() == token)
                    return t.to;
            fail(ErrorCode::InvalidRolePlan,
                 "navigation token " + token + " has no transition from state " + std::to_string(sid.value),
                 nav.line);
        };
        for (auto& a : plan.actions) {
            if (auto* pn = std::get_if<PromptNavigation>(&a)) {
                pn->stay_label = nav.stay_label.value_or(detail::to_lower(spec_.label_of(target(nav.stay))));
                pn->change_label = nav.change_label.value_or(detail::to_lower(spec_.label_of(target(nav.change))));
            }
        }
    }

    void check_role_plans() const
    {
        for (const auto& [id, plan] : spec_.roles) {
            int questions = 0;
            bool seen_nav = false;
            for (const auto& a : plan.actions) {
                if (std::holds_alternative<AskQuestion>(a))
                    ++questions;
                if (std::holds_alternative<Evaluate>(a)) {
                    if (seen_nav)
                        fail(ErrorCode::InvalidRolePlan,
                             "state " + std::to_string(id.value) + ": evaluate must precede prompt_navigation", 0);
                }
                if (std::holds_alternative<PromptNavigation>(a))
                    seen_nav = true;
            }
            if (questions > 1)
                fail(ErrorCode::InvalidRolePlan,
                     "state " + std::to_string(id.value) + ": at most one ask_question per plan", 0);
        }
    }

    std::vector<std::string> lines_;
    std::size_t line_no_ = 0;
    std::set<std::string> seen_sections_;
    std::map<std::string, std::string> protocol_kv_;
    std::map<std::string, std::string> agent_kv_;
    std::optional<StateRef> initial_;
    std::vector<StateRef> finals_;
    std::vector<StateRef> trigger_refs_;
    std::vector<StateRef> role_refs_;
    std::uint32_t current_role_ = 0;
    std::map<std::uint32_t, RolePlan> raw_roles_;
    std::map<std::uint32_t, RawNav> navs_;
    ProtocolSpec spec_;
};

} // namespace

ProtocolSpec parse_protocol(std::string_view source)
{
    return ProtocolParser(source).parse();
}

ProtocolSpec load_protocol(const std::string& path)
{
    return parse_protocol(detail::read_file(path));
}

namespace {

std::string attr_value(const std::string& v)
{
    if (v.empty() || v.find_first_of(" \t\"#\\") != std::string::npos)
        return detail::quote(v);
    return v;
}

} // namespace

std::string render_protocol_file(const ProtocolSpec& p)
{
    std::ostringstream os;
    os << "[protocol]\nname = " << p.name << "\nsubject = " << p.subject << "\n\n";
    os << "[agents]\nexecutor = " << p.agents.executor << "\nexecutor_description = " << p.agents.executor_description
       << "\nuser = " << p.agents.user << "\nuser_description = " << p.agents.user_description << "\n\n";
    os << "[states]\n";
    for (const auto& s : p.states)
        os << s.id.value << " = " << s.label << '\n';
    os << "\n[initial]\n" << p.initial.value << "\n\n[finals]\n";
    for (StateId f : p.finals)
        os << f.value << '\n';
    os << "\n[triggers]\n";
    for (const auto& t : p.triggers)
        os << t.token.str() << ": " << t.from.value << " -> " << t.to.value << '\n';

    auto target_label = [&](StateId from, const TriggerSymbol& tok) -> std::string {
        for (const auto& t : p.triggers)
            if (t.from == from && t.token == tok)
                if (const State* s = p.find_state(t.to))
                    return detail::to_lower(s->label);
        return {};
    };

    for (const auto& [id, plan] : p.roles) {
        if (id == p.initial && plan == implicit_initial_plan())
            continue;
        os << "\n[roles." << id.value << "]\n";
        for (const auto& a : plan.actions) {
            std::visit(
                [&](const auto& act) {
                    using T = std::decay_t<decltype(act)>;
                    if constexpr (std::is_same_v<T, AskDifficultyChoice>) {
                        os << "ask_choice\n";
                    } else if constexpr (std::is_same_v<T, AskQuestion>) {
                        os << "ask_question level=" << attr_value(act.level) << '\n';
                    } else if constexpr (std::is_same_v<T, Wait>) {
                        os << "wait\n";
                    } else if constexpr (std::is_same_v<T, Evaluate>) {
                        os << "evaluate";
                        if (act.verdict_format != kDefaultVerdictFormat)
                            os << " format=" << detail::quote(act.verdict_format);
                        os << '\n';
                    } else {
                        os << "prompt_navigation stay=" << act.stay.str() << " switch=" << act.change.str();
                        if (act.stay_label != target_label(id, act.stay))
                            os << " stay_label=" << attr_value(act.stay_label);
                        if (act.change_label != target_label(id, act.change))
                            os << " switch_label=" << attr_value(act.change_label);
                        os << '\n';
                    }
                },
                a);
        }
    }
    os << "\n[constraints]\n";
    for (const auto& c : p.constraints)
        os << keyword(c.kind) << '\n';
    return os.str();
}

FsmSpec compile_protocol(const ProtocolSpec& p)
{
    std::set<TriggerSymbol> alphabet;
    std::vector<Transition> transitions;
    for (const auto& t : p.triggers) {
        alphabet.insert(t.token);
        transitions.push_back({t.from, t.token, t.to});
    }
    FsmSpec spec(p.states, std::move(alphabet), std::move(transitions), p.initial, p.finals);
    auto report = validate_fsm(spec);
    if (!report.ok())
        throw CompileError(std::move(report));
    return spec;
}

std::string_view canonical_tutor_source()
{
    return kTutorSource;
}

const ProtocolSpec& canonical_tutor_protocol()
{
    static const ProtocolSpec spec = parse_protocol(kTutorSource);
    return spec;
}

} // namespace fastric
