// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "fastric/agents.hpp"
#include "fastric/conformance.hpp"
#include "fastric/rational.hpp"

namespace fastric {

struct ExperimentCondition {
    std::shared_ptr<const TutorAgent> agent;
    std::string agent_id;                 // defaults to agent->id()
    FormalityLevel level = FormalityLevel::L4;
    int runs = 20;
    std::uint64_t seed = 0;
};

/// Condition seed from a master seed, agent id and level (FNV-1a mixed
/// through SplitMix64).
std::uint64_t derive_condition_seed(std::uint64_t master, std::string_view agent_id, FormalityLevel level);

/// Seed of run `index` (0-based) within a condition.
std::uint64_t derive_run_seed(std::uint64_t condition_seed, int index);

/// Exact descriptive statistics of one condition's completed runs.
struct ConditionSummary {
    std::string agent;
    FormalityLevel level = FormalityLevel::L1;
    std::vector<ConformanceScore> scores; // completed runs, in run order; may be empty for loaded cells
    int aborted = 0;

    Rational mean;
    Rational variance;                    // sample variance, n - 1 denominator; 0 for n = 1
    std::array<Rational, 5> five_number;  // min, q1, median, q3, max (type-7 quantiles)

    double sd() const;
    std::string mean_text() const;        // two decimals, half-up
    std::string sd_text() const;
    std::string cell() const;             // "0.90 (0.16)"
};

/// Throws Error(EmptyCondition) for an empty list.
ConditionSummary summarize(const std::vector<ConformanceScore>& scores);
ConditionSummary summarize(const std::vector<Rational>& values);

/// Type-7 (linear interpolation) quantile of sorted values, exact.
Rational quantile(const std::vector<Rational>& sorted, Rational p);

enum class RunStatus { Completed, Aborted };

struct RunRecord {
    int index = 0;                        // 0-based within the condition
    std::uint64_t seed = 0;
    std::string run_id;                   // "run_000"
    RunStatus status = RunStatus::Completed;
    std::string abort_reason;
    ExecutionTrace trace;                 // partial when aborted
    std::optional<ScoredTrace> scored;    // completed runs only
};

struct ConditionResult {
    ExperimentCondition condition;
    std::vector<RunRecord> runs;
    std::optional<ConditionSummary> summary; // absent when no run completed
    std::string error;                       // set when summary is absent
};

struct ExperimentOptions {
    unsigned threads = 0;                 // 0: hardware concurrency
    ScoreOptions scoring;
};

/// Runs every condition. Sessions may execute concurrently (agents that
/// are not concurrency-safe run sequentially); results come back in
/// condition order and run order regardless.
std::vector<ConditionResult> run_experiment(const std::vector<ExperimentCondition>& conditions,
                                            const ProtocolSpec& protocol, const TestScript& script,
                                            const ExperimentOptions& options = {});

} // namespace fastric
