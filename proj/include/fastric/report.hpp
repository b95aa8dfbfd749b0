// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "fastric/experiment.hpp"

namespace fastric {

inline constexpr std::string_view kMissingCell = "—"; // em dash

/// Agents by formality level, one "mean (SD)" cell each.
struct ReportTable {
    std::vector<std::string> agents;                          // row order: first appearance
    std::vector<FormalityLevel> levels{kAllLevels.begin(), kAllLevels.end()};
    std::map<std::pair<std::string, FormalityLevel>, ConditionSummary> cells;
    std::vector<std::string> footnotes;

    std::string cell_text(const std::string& agent, FormalityLevel level) const;
    std::string to_text() const;
    std::string to_csv() const;
};

/// Throws Error(DuplicateCondition) when two summaries share agent and level.
ReportTable report_table(const std::vector<ConditionSummary>& summaries);

/// Parses a cell such as "0.39 (0.26)" into (mean, sd).
std::pair<double, double> parse_cell(std::string_view cell);

/// Level with the highest mean; ties go to the lowest level. Throws
/// Error(InvalidArgument) for an empty row.
FormalityLevel select_optimal_formality(const std::map<FormalityLevel, Rational>& means);
FormalityLevel select_optimal_formality(const std::map<FormalityLevel, ConditionSummary>& row);

/// CSV with columns agent,level,n,min,q1,median,q3,max,mean (six decimals).
/// Throws Error(MissingRawScores) for a summary without raw scores.
std::string export_distributions(const std::vector<ConditionSummary>& summaries);

/// Reads "agent,level,k1 k2 ..." rows (scores out of `denominator`) into
/// summaries with raw scores. '#' lines are comments.
std::vector<ConditionSummary> parse_score_grid(std::string_view csv, int denominator = 21);

// Run archive ---------------------------------------------------------------
//
//   DIR/protocol.fastric
//   DIR/script.script
//   DIR/summary.json
//   DIR/<agent>_<level>/manifest.json
//   DIR/<agent>_<level>/run_NNN.log

/// Directory-safe form of an agent id.
std::string sanitize_agent_id(std::string_view agent_id);

void write_archive(const std::string& dir, const ProtocolSpec& protocol, const TestScript& script,
                   const std::vector<ConditionResult>& results, std::uint64_t master_seed);

struct ArchivedRun {
    int index = 0;
    std::uint64_t seed = 0;
    std::string file;                  // relative to the condition directory
    RunStatus status = RunStatus::Completed;
    std::string abort_reason;
    bool unparseable_question = false;
    std::optional<Rational> score;
};

struct ArchivedCondition {
    std::string agent;
    FormalityLevel level = FormalityLevel::L1;
    std::uint64_t seed = 0;
    std::string directory;             // relative to the archive root
    std::vector<ArchivedRun> runs;
};

struct RunArchive {
    std::string root;
    std::uint64_t master_seed = 0;
    ProtocolSpec protocol;
    TestScript script;
    std::vector<ArchivedCondition> conditions;
};

RunArchive load_archive(const std::string& dir);

/// Re-scores every completed log of the archive with its own protocol and
/// script and summarizes per condition. Conditions whose runs all aborted
/// are skipped; a note for each goes to `skipped` when given.
std::vector<ConditionSummary> rescore_archive(const RunArchive& archive, const ScoreOptions& options = {},
                                              std::vector<std::string>* skipped = nullptr);

/// Summaries as written to summary.json.
std::vector<ConditionSummary> read_archive_summary(const std::string& dir);

} // namespace fastric
