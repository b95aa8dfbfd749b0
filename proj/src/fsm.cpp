// SPDX-License-Identifier: Apache-2.0

#include "fastric/fsm.hpp"

#include <algorithm>
#include <cctype>
#include <deque>
#include <sstream>

namespace fastric {

TriggerSymbol::TriggerSymbol(std::string token) : token_(std::move(token))
{
    if (!is_canonical(token_))
        throw Error(ErrorCode::InvalidArgument, "trigger '" + token_ + "' is not canonical");
}

bool TriggerSymbol::is_canonical(std::string_view token)
{
    if (token.empty())
        return false;
    return std::all_of(token.begin(), token.end(), [](unsigned char c) {
        return std::isgraph(c) && !std::islower(c);
    });
}

FsmSpec::FsmSpec(std::vector<State> states, std::set<TriggerSymbol> alphabet,
                 std::vector<Transition> transitions, StateId initial, std::set<StateId> finals)
    : states_(std::move(states)), alphabet_(std::move(alphabet)),
      transitions_(std::move(transitions)), initial_(initial), finals_(std::move(finals))
{
    for (const auto& t : transitions_)
        delta_.try_emplace({t.from, t.trigger}, t.to);
}

bool FsmSpec::has_state(StateId id) const
{
    return find_state(id) != nullptr;
}

const State* FsmSpec::find_state(StateId id) const
{
    auto it = std::find_if(states_.begin(), states_.end(), [&](const State& s) { return s.id == id; });
    return it == states_.end() ? nullptr : &*it;
}

std::optional<StateId> FsmSpec::find_state(std::string_view label) const
{
    for (const auto& s : states_)
        if (s.label == label)
            return s.id;
    return std::nullopt;
}

std::optional<StateId> FsmSpec::lookup(StateId from, const TriggerSymbol& trigger) const
{
    auto it = delta_.find({from, trigger});
    if (it == delta_.end())
        return std::nullopt;
    return it->second;
}

std::vector<Transition> FsmSpec::outgoing(StateId from) const
{
    std::vector<Transition> out;
    for (const auto& t : transitions_)
        if (t.from == from)
            out.push_back(t);
    return out;
}

bool ValidationReport::has_error(std::string_view code) const
{
    return std::any_of(errors.begin(), errors.end(), [&](const Diagnostic& d) { return d.code == code; });
}

bool ValidationReport::has_warning(std::string_view code) const
{
    return std::any_of(warnings.begin(), warnings.end(), [&](const Diagnostic& d) { return d.code == code; });
}

std::string ValidationReport::to_string() const
{
    std::ostringstream os;
    for (const auto& e : errors)
        os << "error " << e.code << ": " << e.message << '\n';
    for (const auto& w : warnings)
        os << "warning " << w.code << ": " << w.message << '\n';
    return os.str();
}

CompileError::CompileError(ValidationReport report)
    : Error(ErrorCode::CompileError, "invalid state machine:\n" + report.to_string()),
      report_(std::move(report))
{
}

namespace {

std::string state_name(StateId id)
{
    return std::to_string(id.value);
}

} // namespace

std::set<StateId> reachable_states(const FsmSpec& spec)
{
    std::set<StateId> seen;
    if (!spec.has_state(spec.initial()))
        return seen;
    std::deque<StateId> queue{spec.initial()};
    seen.insert(spec.initial());
    while (!queue.empty()) {
        StateId q = queue.front();
        queue.pop_front();
        for (const auto& t : spec.transitions()) {
            if (t.from == q && spec.has_state(t.to) && seen.insert(t.to).second)
                queue.push_back(t.to);
        }
    }
    return seen;
}

ValidationReport validate_fsm(const FsmSpec& spec)
{
    ValidationReport report;
    auto error = [&](std::string code, std::string msg) {
        report.errors.push_back({std::move(code), std::move(msg)});
    };

    std::set<StateId> ids;
    for (const auto& s : spec.states()) {
        if (!ids.insert(s.id).second)
            error("DuplicateStateId", "state id " + state_name(s.id) + " declared more than once");
        if (s.label.empty())
            error("EmptyLabel", "state " + state_name(s.id) + " has an empty label");
    }

    if (!ids.contains(spec.initial()))
        error("InitialNotInStates", "initial state " + state_name(spec.initial()) + " is not declared");
    for (StateId f : spec.finals())
        if (!ids.contains(f))
            error("FinalNotInStates", "final state " + state_name(f) + " is not declared");

    std::map<std::pair<StateId, TriggerSymbol>, StateId> seen;
    for (const auto& t : spec.transitions()) {
        std::string where = "(" + state_name(t.from) + ", " + t.trigger.str() + ") -> " + state_name(t.to);
        if (!ids.contains(t.from))
            error("UnknownState", "transition " + where + ": source state not declared");
        if (!ids.contains(t.to))
            error("UnknownState", "transition " + where + ": target state not declared");
        if (!spec.alphabet().contains(t.trigger))
            error("UnknownTrigger", "transition " + where + ": trigger not in alphabet");
        auto [it, inserted] = seen.try_emplace({t.from, t.trigger}, t.to);
        if (!inserted && it->second != t.to)
            error("NondeterministicTransition",
                  "(" + state_name(t.from) + ", " + t.trigger.str() + ") maps to both " +
                      state_name(it->second) + " and " + state_name(t.to));
    }

    auto reachable = reachable_states(spec);
    for (const auto& s : spec.states()) {
        if (!reachable.contains(s.id))
            report.warnings.push_back({"UnreachableState", "state " + state_name(s.id) + " (" + s.label +
                                                               ") is unreachable from the initial state"});
        bool has_out = std::any_of(spec.transitions().begin(), spec.transitions().end(),
                                   [&](const Transition& t) { return t.from == s.id; });
        if (!has_out && !spec.finals().contains(s.id))
            report.warnings.push_back({"DeadEndState", "state " + state_name(s.id) + " (" + s.label +
                                                           ") has no outgoing transitions and is not final"});
    }
    return report;
}

std::optional<StateId> step(const FsmSpec& spec, StateId current, const TriggerSymbol& trigger)
{
    if (!spec.has_state(current))
        throw Error(ErrorCode::UnknownState, "state " + state_name(current) + " is not part of the machine");
    return spec.lookup(current, trigger);
}

FsmBuilder& FsmBuilder::state(std::uint32_t id, std::string label)
{
    states_.push_back({StateId{id}, std::move(label)});
    return *this;
}

FsmBuilder& FsmBuilder::transition(std::uint32_t from, std::string_view trigger, std::uint32_t to)
{
    TriggerSymbol sym{std::string(trigger)};
    alphabet_.insert(sym);
    transitions_.push_back({StateId{from}, std::move(sym), StateId{to}});
    return *this;
}

FsmBuilder& FsmBuilder::initial(std::uint32_t id)
{
    initial_ = StateId{id};
    return *this;
}

FsmBuilder& FsmBuilder::final_state(std::uint32_t id)
{
    finals_.insert(StateId{id});
    return *this;
}

FsmSpec FsmBuilder::build() const
{
    FsmSpec spec = build_unchecked();
    auto report = validate_fsm(spec);
    if (!report.ok())
        throw CompileError(std::move(report));
    return spec;
}

FsmSpec FsmBuilder::build_unchecked() const
{
    return FsmSpec(states_, alphabet_, transitions_, initial_, finals_);
}

} // namespace fastric
