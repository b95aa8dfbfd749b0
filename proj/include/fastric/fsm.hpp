// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "fastric/error.hpp"

namespace fastric {

/// Numeric state identifier, unique within one machine.
struct StateId {
    std::uint32_t value = 0;

    constexpr StateId() = default;
    constexpr explicit StateId(std::uint32_t v) : value(v) {}

    friend constexpr auto operator<=>(StateId, StateId) = default;
};

struct State {
    StateId id;
    std::string label;

    friend bool operator==(const State&, const State&) = default;
};

/// Canonical input token (uppercase, no surrounding whitespace). Construction
/// from a non-canonical string throws; normalising raw user text is the
/// caller's job.
class TriggerSymbol {
public:
    explicit TriggerSymbol(std::string token);

    const std::string& str() const noexcept { return token_; }

    static bool is_canonical(std::string_view token);

    friend auto operator<=>(const TriggerSymbol&, const TriggerSymbol&) = default;
    friend bool operator==(const TriggerSymbol&, const TriggerSymbol&) = default;

private:
    std::string token_;
};

struct Transition {
    StateId from;
    TriggerSymbol trigger;
    StateId to;

    friend bool operator==(const Transition&, const Transition&) = default;
};

/// Deterministic finite-state machine (Q, Σ, δ, q0, F). Immutable once built.
///
/// Transitions are kept in entry order so that validation can report
/// conflicting entries; lookups go through a key map where the first entry
/// for a (state, trigger) key wins.
class FsmSpec {
public:
    FsmSpec(std::vector<State> states, std::set<TriggerSymbol> alphabet,
            std::vector<Transition> transitions, StateId initial, std::set<StateId> finals);

    const std::vector<State>& states() const noexcept { return states_; }
    const std::set<TriggerSymbol>& alphabet() const noexcept { return alphabet_; }
    const std::vector<Transition>& transitions() const noexcept { return transitions_; }
    StateId initial() const noexcept { return initial_; }
    const std::set<StateId>& finals() const noexcept { return finals_; }

    bool has_state(StateId id) const;
    const State* find_state(StateId id) const;
    std::optional<StateId> find_state(std::string_view label) const;

    /// δ(q, t), or nullopt where undefined. Does not check membership of q.
    std::optional<StateId> lookup(StateId from, const TriggerSymbol& trigger) const;

    /// Transitions leaving `from`, in entry order.
    std::vector<Transition> outgoing(StateId from) const;

private:
    std::vector<State> states_;
    std::set<TriggerSymbol> alphabet_;
    std::vector<Transition> transitions_;
    StateId initial_;
    std::set<StateId> finals_;
    std::map<std::pair<StateId, TriggerSymbol>, StateId> delta_;
};

struct Diagnostic {
    std::string code;
    std::string message;
};

struct ValidationReport {
    std::vector<Diagnostic> errors;
    std::vector<Diagnostic> warnings;

    bool ok() const noexcept { return errors.empty(); }
    bool has_error(std::string_view code) const;
    bool has_warning(std::string_view code) const;
    std::string to_string() const;
};

/// Thrown when a machine, or a protocol compiled to one, fails validation.
class CompileError : public Error {
public:
    explicit CompileError(ValidationReport report);

    const ValidationReport& report() const noexcept { return report_; }

private:
    ValidationReport report_;
};

/// Hard errors: DuplicateStateId, EmptyLabel, UnknownState, UnknownTrigger,
/// NondeterministicTransition, InitialNotInStates, FinalNotInStates.
/// Warnings: UnreachableState, DeadEndState.
ValidationReport validate_fsm(const FsmSpec& spec);

/// Pure transition step. Returns nullopt when δ is undefined for the pair.
/// Throws Error(UnknownState) when `current` is not a state of `spec`.
std::optional<StateId> step(const FsmSpec& spec, StateId current, const TriggerSymbol& trigger);

/// States reachable from the initial state (breadth-first).
std::set<StateId> reachable_states(const FsmSpec& spec);

class FsmBuilder {
public:
    FsmBuilder& state(std::uint32_t id, std::string label);
    FsmBuilder& transition(std::uint32_t from, std::string_view trigger, std::uint32_t to);
    FsmBuilder& initial(std::uint32_t id);
    FsmBuilder& final_state(std::uint32_t id);

    /// Validates and throws CompileError on hard errors.
    FsmSpec build() const;
    /// Returns the machine as entered, without validation.
    FsmSpec build_unchecked() const;

private:
    std::vector<State> states_;
    std::set<TriggerSymbol> alphabet_;
    std::vector<Transition> transitions_;
    StateId initial_{0};
    std::set<StateId> finals_;
};

} // namespace fastric
