// SPDX-License-Identifier: Apache-2.0

#include "fastric/detail/text.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

#include "fastric/error.hpp"

namespace fastric::detail {

namespace {

bool is_word_char(unsigned char c)
{
    return std::isalnum(c) || c == '_';
}

} // namespace

std::string_view trim(std::string_view s)
{
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos)
        return {};
    auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::string to_upper(std::string_view s)
{
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::toupper(c); });
    return out;
}

std::string to_lower(std::string_view s)
{
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
    return out;
}

std::string_view strip_comment(std::string_view line)
{
    bool in_quotes = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (in_quotes && c == '\\') {
            ++i;
        } else if (c == '"') {
            in_quotes = !in_quotes;
        } else if (c == '#' && !in_quotes) {
            return line.substr(0, i);
        }
    }
    return line;
}

std::vector<std::string> split_lines(std::string_view text)
{
    std::vector<std::string> lines;
    std::size_t start = 0;
    while (start <= text.size()) {
        auto nl = text.find('\n', start);
        if (nl == std::string_view::npos) {
            if (start < text.size())
                lines.emplace_back(text.substr(start));
            break;
        }
        std::string_view line = text.substr(start, nl - start);
        if (!line.empty() && line.back() == '\r')
            line.remove_suffix(1);
        lines.emplace_back(line);
        start = nl + 1;
    }
    return lines;
}

bool contains_ci(std::string_view text, std::string_view needle)
{
    if (needle.empty())
        return true;
    auto it = std::search(text.begin(), text.end(), needle.begin(), needle.end(), [](char a, char b) {
        return std::tolower(static_cast<unsigned char>(a)) == std::tolower(static_cast<unsigned char>(b));
    });
    return it != text.end();
}

bool contains_word_ci(std::string_view text, std::string_view word)
{
    if (word.empty())
        return false;
    std::string hay = to_lower(text);
    std::string w = to_lower(word);
    std::size_t pos = 0;
    while ((pos = hay.find(w, pos)) != std::string::npos) {
        bool left = pos == 0 || !is_word_char(static_cast<unsigned char>(hay[pos - 1]));
        std::size_t end = pos + w.size();
        bool right = end >= hay.size() || !is_word_char(static_cast<unsigned char>(hay[end]));
        if (left && right)
            return true;
        ++pos;
    }
    return false;
}

std::optional<long long> parse_int(std::string_view s)
{
    s = trim(s);
    if (s.empty())
        return std::nullopt;
    long long v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size())
        return std::nullopt;
    return v;
}

std::vector<KvPair> parse_kv(std::string_view s, bool strict, std::size_t line)
{
    auto fail = [&](const std::string& msg) { throw ParseError(ErrorCode::SyntaxError, line, msg); };

    std::vector<KvPair> out;
    std::size_t i = 0;
    if (!strict)
        s = trim(s);
    while (i < s.size()) {
        if (!out.empty()) {
            if (s[i] != ' ')
                fail("expected a space between fields");
            ++i;
            if (strict && (i >= s.size() || s[i] == ' '))
                fail("fields must be separated by exactly one space");
            while (!strict && i < s.size() && (s[i] == ' ' || s[i] == '\t'))
                ++i;
        }
        auto eq = s.find('=', i);
        if (eq == std::string_view::npos)
            fail("expected key=value near '" + std::string(s.substr(i)) + "'");
        KvPair kv;
        kv.key = std::string(s.substr(i, eq - i));
        if (kv.key.empty() || !std::all_of(kv.key.begin(), kv.key.end(), [](unsigned char c) {
                return std::isalnum(c) || c == '_' || c == '-';
            }))
            fail("bad key '" + kv.key + "'");
        i = eq + 1;
        if (i < s.size() && s[i] == '"') {
            kv.quoted = true;
            ++i;
            bool closed = false;
            while (i < s.size()) {
                char c = s[i++];
                if (c == '"') {
                    closed = true;
                    break;
                }
                if (c == '\\') {
                    if (i >= s.size())
                        fail("dangling escape");
                    char e = s[i++];
                    switch (e) {
                    case '"': kv.value += '"'; break;
                    case '\\': kv.value += '\\'; break;
                    case 'n': kv.value += '\n'; break;
                    default: fail(std::string("unknown escape \\") + e);
                    }
                } else if (c == '\n') {
                    fail("raw newline in quoted value");
                } else {
                    kv.value += c;
                }
            }
            if (!closed)
                fail("unterminated quoted value for '" + kv.key + "'");
            if (i < s.size() && s[i] != ' ')
                fail("junk after quoted value for '" + kv.key + "'");
        } else {
            auto end = s.find(' ', i);
            if (end == std::string_view::npos)
                end = s.size();
            kv.value = std::string(s.substr(i, end - i));
            if (!strict) {
                auto tab = kv.value.find('\t');
                if (tab != std::string::npos) {
                    end = i + tab;
                    kv.value.resize(tab);
                }
            }
            if (kv.value.find('"') != std::string::npos)
                fail("stray quote in value for '" + kv.key + "'");
            i = end;
        }
        out.push_back(std::move(kv));
    }
    if (strict && !s.empty() && s.back() == ' ')
        fail("trailing space");
    return out;
}

std::string quote(std::string_view s)
{
    std::string out = "\"";
    for (char c : s) {
        switch (c) {
        case '"': out += "\\\""; break;
        case '\\': out += "\\\\"; break;
        case '\n': out += "\\n"; break;
        default: out += c;
        }
    }
    out += '"';
    return out;
}

std::string read_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(ErrorCode::Io, "cannot open " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void write_file(const std::string& path, std::string_view content)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw Error(ErrorCode::Io, "cannot write " + path);
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out)
        throw Error(ErrorCode::Io, "write failed for " + path);
}

} // namespace fastric::detail
