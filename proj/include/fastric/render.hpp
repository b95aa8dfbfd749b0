// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

#include "fastric/protocol.hpp"

namespace fastric {

/// How much of the machine a prompt spells out. L1 merges all loop states
/// into one condensed step; L4 separates states, adds waits, emphasized
/// imperatives and a rules section.
enum class FormalityLevel { L1 = 1, L2 = 2, L3 = 3, L4 = 4 };

inline constexpr std::array<FormalityLevel, 4> kAllLevels{FormalityLevel::L1, FormalityLevel::L2,
                                                          FormalityLevel::L3, FormalityLevel::L4};

std::string_view to_string(FormalityLevel level);
std::optional<FormalityLevel> parse_level(std::string_view text);

inline constexpr std::string_view kInstructionBegin = "===== INSTRUCTION BEGINS =====";
inline constexpr std::string_view kInstructionEnd = "===== INSTRUCTION ENDS =====";

struct RenderedPrompt {
    std::string text;
    FormalityLevel level;
    std::size_t token_estimate = 0; // whitespace-delimited words
};

/// Throws Error(AsymmetricStates) for L1/L2 when loop states do not share
/// one plan shape.
RenderedPrompt render_prompt(const ProtocolSpec& p, FormalityLevel level);

/// True when every loop state's plan is identical up to difficulty tags
/// and navigation labels.
bool has_symmetric_states(const ProtocolSpec& p);

std::size_t word_count(std::string_view text);

struct FeatureVector {
    int separated_blocks = 0;       // "## Step k: LABEL ..." headers
    int numbered_substeps = 0;      // "n. ..." lines
    int waits = 0;                  // wait statements
    int emphasized_imperatives = 0; // uppercase MUST / ONLY
    bool critical_rules = false;    // "## Critical Rules" present

    friend bool operator==(const FeatureVector&, const FeatureVector&) = default;
};

FeatureVector formality_features(const RenderedPrompt& r);

} // namespace fastric
