// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fastric/conformance.hpp"

namespace fastric {

// Run-log records, one per line, fields in this order and separated by one
// space:
//
//   run=<id> turn=<n> actor=<user|executor> state=<int> text="<escaped>"
//       [verdict=<pass|fail> [failure=<FailureKind>]]
//
// `text` escapes quote, backslash and newline with a backslash. Blank lines
// and lines starting with '#' are ignored.

struct AnnotatedTrace {
    ExecutionTrace trace;
    std::vector<std::optional<TurnVerdict>> verdicts; // parallel to trace.turns
};

std::string format_run_record(const std::string& run_id, const Turn& turn,
                              const std::optional<TurnVerdict>& verdict = std::nullopt);

/// Serialises a trace; verdicts are written for turns that have one.
std::string write_run_log(const ExecutionTrace& trace,
                          const std::vector<std::optional<TurnVerdict>>& verdicts = {});

/// Parses a whole log. Throws ParseError with the offending line number.
AnnotatedTrace parse_run_log(std::string_view document);

/// Parses a log and returns the trace with its per-turn verdicts (nullopt
/// where the log carries none).
AnnotatedTrace ingest_annotated_trace(std::string_view document);

AnnotatedTrace load_run_log(const std::string& path);

// Test scripts use the same key=value syntax:
//
//   turn=1 actor=executor state=0 expect=ask_choice
//   turn=2 actor=user state=0 input="EASY"
//   turn=3 actor=executor state=1 expect=ask_question level=easy
//   turn=8 actor=user state=1 input=@correct
//
// expect is one of ask_choice, ask_question, evaluate_prompt,
// reprompt_navigation; input is a quoted literal, @correct or @incorrect.

TestScript parse_script(std::string_view document);
std::string render_script(const TestScript& script);
TestScript load_script(const std::string& path);

} // namespace fastric
