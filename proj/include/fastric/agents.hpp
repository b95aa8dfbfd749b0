// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fastric/conformance.hpp"
#include "fastric/error.hpp"
#include "fastric/protocol.hpp"
#include "fastric/render.hpp"

namespace fastric {

/// SplitMix64 finaliser, used for all seed derivation.
std::uint64_t splitmix64(std::uint64_t x);

/// Uniform double in [0, 1) from the top 53 bits of `x`.
double unit_interval(std::uint64_t x);

struct TutorReply {
    std::string text;
    StateId next_state;

    friend bool operator==(const TutorReply&, const TutorReply&) = default;
};

/// Everything a tutor sees when producing one turn. `history` holds the
/// turns so far; the next turn index is history.size() + 1.
struct TutorInput {
    const ProtocolSpec& protocol;
    const RenderedPrompt& prompt;
    const std::vector<Turn>& history;
    StateId state;
    std::uint64_t seed;
};

class TutorAgent {
public:
    virtual ~TutorAgent() = default;

    virtual std::string id() const = 0;

    /// False when the agent must not be driven by two sessions at once; the
    /// experiment runner then executes its runs one after another.
    virtual bool concurrency_safe() const { return true; }

    /// Produces the next tutor turn. Implementations keep no state between
    /// calls; everything comes from `in`.
    virtual TutorReply step(const TutorInput& in) const = 0;
};

// Oracle -------------------------------------------------------------------

/// Fixed question bank for a difficulty tag ("easy", "hard"); other tags
/// use the hard bank.
const std::vector<std::string>& question_bank(std::string_view difficulty);

/// The `nth` (0-based) question the oracle asks at `difficulty` under
/// `seed`. The first easy question is always "What is 2 + 3?".
const std::string& oracle_question(std::string_view difficulty, int nth, std::uint64_t seed);

/// Follows the role plan of `state` exactly.
TutorReply oracle_tutor_step(const ProtocolSpec& protocol, const std::vector<Turn>& history, StateId state,
                             std::uint64_t seed);

class OracleTutor final : public TutorAgent {
public:
    std::string id() const override { return "oracle"; }
    TutorReply step(const TutorInput& in) const override;
};

// Faults ------------------------------------------------------------------

enum class FaultKind { ConfirmationSeeker, AmbiguityMisreader, CaseBrittle, RandomDeviator };

std::string_view to_string(FaultKind kind);
std::optional<FaultKind> parse_fault_kind(std::string_view text);

struct FaultProfile {
    FaultKind kind = FaultKind::ConfirmationSeeker;
    double p = 0.0;          // RandomDeviator only
    std::uint64_t seed = 0;  // mixed into the session seed

    /// "confirmation_seeker", "random_deviator(0.25)", ...
    std::string id() const;
};

/// Parses "confirmation_seeker", "ambiguity_misreader", "case_brittle" or
/// "random_deviator(<p>)" / "random_deviator(<p>,<seed>)".
FaultProfile parse_fault_profile(std::string_view text);

TutorReply fault_tutor_step(const FaultProfile& profile, const ProtocolSpec& protocol,
                            const std::vector<Turn>& history, StateId state, std::uint64_t seed);

class FaultTutor final : public TutorAgent {
public:
    explicit FaultTutor(FaultProfile profile);

    std::string id() const override { return "fault:" + profile_.id(); }
    TutorReply step(const TutorInput& in) const override;
    const FaultProfile& profile() const { return profile_; }

private:
    FaultProfile profile_;
};

// Scripted user -----------------------------------------------------------

struct UserReply {
    std::string text;
    bool unparseable_question = false;
};

/// Input for the next (even) turn. Answer placeholders are computed from
/// the question in the preceding tutor turn; the incorrect answer is the
/// correct one plus one. When no question can be extracted the reply is
/// `fallback` and `unparseable_question` is set.
UserReply scripted_user_step(const TestScript& script, const std::vector<Turn>& history,
                             std::string_view fallback = "0");

// Sessions ----------------------------------------------------------------

/// A session that could not finish. The turns completed so far are kept.
class SessionError : public Error {
public:
    SessionError(ErrorCode code, std::string message, ExecutionTrace partial = {});

    const ExecutionTrace& partial() const { return partial_; }

private:
    ExecutionTrace partial_;
};

struct SessionOptions {
    FormalityLevel level = FormalityLevel::L4;
    std::uint64_t seed = 0;
    std::string run_id = "run";
};

/// Alternates tutor and scripted-user turns for the length of the script.
/// Agent failures surface as SessionError carrying the partial trace.
ExecutionTrace run_session(const TutorAgent& tutor, const TestScript& script, const ProtocolSpec& protocol,
                           const SessionOptions& options);

// Agent registry ---------------------------------------------------------

/// Builds an agent from its command-line form: "oracle", "fault:<profile>"
/// or "endpoint:<config.json>".
std::shared_ptr<const TutorAgent> make_agent(std::string_view spec);

} // namespace fastric
