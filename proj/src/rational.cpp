// SPDX-License-Identifier: Apache-2.0

#include "fastric/rational.hpp"

#include <cmath>
#include <cstdio>

#include "fastric/detail/text.hpp"
#include "fastric/error.hpp"

namespace fastric {

namespace {

long long floor_div(long long a, long long b)
{
    long long q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0)))
        --q;
    return q;
}

std::string hundredths(long long m)
{
    bool neg = m < 0;
    long long a = neg ? -m : m;
    char buf[48];
    std::snprintf(buf, sizeof buf, "%s%lld.%02lld", neg ? "-" : "", a / 100, a % 100);
    return buf;
}

} // namespace

std::string to_fraction_string(const Rational& r)
{
    return std::to_string(r.numerator()) + "/" + std::to_string(r.denominator());
}

Rational parse_fraction(const std::string& text)
{
    auto slash = text.find('/');
    auto num = detail::parse_int(text.substr(0, slash));
    auto den = slash == std::string::npos ? std::optional<long long>(1) : detail::parse_int(text.substr(slash + 1));
    if (!num || !den || *den == 0)
        throw Error(ErrorCode::BadValue, "bad fraction '" + text + "'");
    return Rational(*num, *den);
}

long long round_half_up_hundredths(const Rational& x)
{
    Rational scaled = x * 100 + Rational(1, 2);
    return floor_div(scaled.numerator(), scaled.denominator());
}

long long round_half_up_sqrt_hundredths(const Rational& v)
{
    if (v < 0)
        throw Error(ErrorCode::InvalidArgument, "negative variance");
    // largest m >= 0 with ((2m - 1) / 200)^2 <= v
    long long m = static_cast<long long>(std::floor(std::sqrt(boost::rational_cast<double>(v)) * 100 + 0.5));
    m = std::max(0LL, m - 2);
    auto fits = [&](long long k) {
        if (k == 0)
            return true;
        Rational edge(2 * k - 1, 200);
        return edge * edge <= v;
    };
    while (fits(m + 1))
        ++m;
    while (m > 0 && !fits(m))
        --m;
    return m;
}

std::string format_fixed2(const Rational& r)
{
    return hundredths(round_half_up_hundredths(r));
}

std::string format_sqrt_fixed2(const Rational& v)
{
    return hundredths(round_half_up_sqrt_hundredths(v));
}

std::string format_fixed(const Rational& r, int digits)
{
    if (digits < 0 || digits > 9)
        throw Error(ErrorCode::InvalidArgument, "digits must be in 0..9");
    long long scale = 1;
    for (int i = 0; i < digits; ++i)
        scale *= 10;
    Rational scaled = r * scale + Rational(1, 2);
    long long m = floor_div(scaled.numerator(), scaled.denominator());
    bool neg = m < 0;
    long long a = neg ? -m : m;
    std::string out = (neg ? "-" : "") + std::to_string(a / scale);
    if (digits > 0) {
        std::string frac = std::to_string(a % scale);
        out += "." + std::string(static_cast<std::size_t>(digits) - frac.size(), '0') + frac;
    }
    return out;
}

double to_double(const Rational& r)
{
    return boost::rational_cast<double>(r);
}

} // namespace fastric
