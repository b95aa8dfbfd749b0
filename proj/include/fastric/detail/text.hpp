// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace fastric::detail {

std::string_view trim(std::string_view s);
std::string to_upper(std::string_view s);
std::string to_lower(std::string_view s);

/// Drops a `#` comment that is not inside double quotes.
std::string_view strip_comment(std::string_view line);

std::vector<std::string> split_lines(std::string_view text);

/// Case-insensitive whole-word search; word characters are [A-Za-z0-9_].
bool contains_word_ci(std::string_view text, std::string_view word);
bool contains_ci(std::string_view text, std::string_view needle);

std::optional<long long> parse_int(std::string_view s);

struct KvPair {
    std::string key;
    std::string value;
    bool quoted = false;
};

/// Parses `key=value` tokens; quoted values use backslash escapes for
/// quote, backslash and newline. In strict mode tokens must be separated by
/// exactly one space with no leading or trailing whitespace. Throws
/// ParseError(SyntaxError) tagged with `line`.
std::vector<KvPair> parse_kv(std::string_view s, bool strict, std::size_t line);

/// Double-quotes `s`, escaping quote, backslash and newline.
std::string quote(std::string_view s);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view content);

} // namespace fastric::detail
