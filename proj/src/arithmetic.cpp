// SPDX-License-Identifier: Apache-2.0

#include "fastric/arithmetic.hpp"

#include <algorithm>
#include <cctype>
#include <regex>
#include <string>

#include "fastric/detail/text.hpp"

namespace fastric {

namespace {

const std::regex& question_regex()
{
    // minus sign U+2212, times U+00D7, division U+00F7 as UTF-8 byte sequences
    static const std::regex re(
        "what(?:\\s+is|'s)\\s+(-?[0-9]+)\\s*(\\+|-|\xE2\x88\x92|\xC3\x97|x|\\*|\xC3\xB7|/)\\s*(-?[0-9]+)",
        std::regex::ECMAScript | std::regex::icase);
    return re;
}

std::optional<ArithmeticQuestion> evaluate(long long lhs, std::string_view op, long long rhs)
{
    ArithmeticQuestion q;
    q.lhs = lhs;
    q.rhs = rhs;
    if (op == "+") {
        q.op = ArithOp::Add;
        q.answer = lhs + rhs;
    } else if (op == "-" || op == "\xE2\x88\x92") {
        q.op = ArithOp::Subtract;
        q.answer = lhs - rhs;
    } else if (op == "\xC3\x97" || op == "x" || op == "X" || op == "*") {
        q.op = ArithOp::Multiply;
        q.answer = lhs * rhs;
    } else {
        q.op = ArithOp::Divide;
        if (rhs == 0 || lhs % rhs != 0)
            return std::nullopt;
        q.answer = lhs / rhs;
    }
    return q;
}

} // namespace

std::vector<ArithmeticQuestion> find_arithmetic(std::string_view text)
{
    std::vector<ArithmeticQuestion> out;
    using It = std::string_view::const_iterator;
    for (std::regex_iterator<It> it(text.begin(), text.end(), question_regex()), end; it != end; ++it) {
        const auto& m = *it;
        auto lhs = detail::parse_int(m[1].str());
        auto rhs = detail::parse_int(m[3].str());
        if (!lhs || !rhs)
            continue;
        if (auto q = evaluate(*lhs, m[2].str(), *rhs)) {
            q->begin = static_cast<std::size_t>(m.position(0));
            q->end = q->begin + static_cast<std::size_t>(m.length(0));
            out.push_back(*q);
        }
    }
    return out;
}

std::optional<ArithmeticQuestion> extract_arithmetic(std::string_view text)
{
    auto all = find_arithmetic(text);
    if (all.empty())
        return std::nullopt;
    return all.front();
}

bool reveals_answer(std::string_view text, const ArithmeticQuestion& q)
{
    // operands of any recognised question are not statements
    std::string rest(text);
    for (const auto& other : find_arithmetic(text))
        std::fill(rest.begin() + static_cast<std::ptrdiff_t>(other.begin),
                  rest.begin() + static_cast<std::ptrdiff_t>(other.end), ' ');
    if (q.end <= rest.size())
        std::fill(rest.begin() + static_cast<std::ptrdiff_t>(q.begin), rest.begin() + static_cast<std::ptrdiff_t>(q.end), ' ');
    for (std::size_t i = 0; i < rest.size();) {
        if (!std::isdigit(static_cast<unsigned char>(rest[i]))) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j < rest.size() && std::isdigit(static_cast<unsigned char>(rest[j])))
            ++j;
        bool attached = (i > 0 && std::isalpha(static_cast<unsigned char>(rest[i - 1]))) ||
                        (j < rest.size() && std::isalpha(static_cast<unsigned char>(rest[j])));
        if (!attached) {
            long long v = *detail::parse_int(std::string_view(rest).substr(i, j - i));
            bool negative = i > 0 && rest[i - 1] == '-' &&
                            (i < 2 || !std::isalnum(static_cast<unsigned char>(rest[i - 2])));
            if ((negative ? -v : v) == q.answer)
                return true;
        }
        i = j;
    }
    return false;
}

std::optional<long long> parse_answer(std::string_view reply)
{
    std::string_view s = detail::trim(reply);
    std::size_t n = 0;
    if (n < s.size() && s[n] == '-')
        ++n;
    std::size_t digits = n;
    while (n < s.size() && std::isdigit(static_cast<unsigned char>(s[n])))
        ++n;
    if (n == digits)
        return std::nullopt;
    for (std::size_t i = n; i < s.size(); ++i)
        if (std::isalnum(static_cast<unsigned char>(s[i])))
            return std::nullopt;
    return detail::parse_int(s.substr(0, n));
}

} // namespace fastric
