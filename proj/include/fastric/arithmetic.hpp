// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <optional>
#include <string_view>
#include <vector>

namespace fastric {

enum class ArithOp { Add, Subtract, Multiply, Divide };

struct ArithmeticQuestion {
    long long lhs = 0;
    long long rhs = 0;
    ArithOp op = ArithOp::Add;
    long long answer = 0;
    std::size_t begin = 0; // byte span of the matched expression in the source text
    std::size_t end = 0;

    friend bool operator==(const ArithmeticQuestion&, const ArithmeticQuestion&) = default;
};

/// Recognises "What is <int> <op> <int>?" (also "What's"), with op one of
/// + - − × x * ÷ /. Division must be exact. Word problems are not parsed.
std::optional<ArithmeticQuestion> extract_arithmetic(std::string_view text);

/// Every recognised question in `text`, in order of appearance.
std::vector<ArithmeticQuestion> find_arithmetic(std::string_view text);

/// True when `text` states the answer to `q` outside of every recognised
/// question, `q` included.
bool reveals_answer(std::string_view text, const ArithmeticQuestion& q);

/// Leading integer in a student reply such as "8" or " 8!". Nullopt for
/// anything else.
std::optional<long long> parse_answer(std::string_view reply);

} // namespace fastric
