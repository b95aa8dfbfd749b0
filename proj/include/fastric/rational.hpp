// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>

#include <boost/rational.hpp>

namespace fastric {

using Rational = boost::rational<long long>;

/// "k/n" in lowest terms ("1" style integers are printed as "1/1").
std::string to_fraction_string(const Rational& r);
Rational parse_fraction(const std::string& text);

/// Half-up rounding to two decimals, exact: 10/21 -> "0.48".
std::string format_fixed2(const Rational& r);

/// Half-up rounding of sqrt(v) to two decimals, decided in exact
/// arithmetic (no floating-point ties).
std::string format_sqrt_fixed2(const Rational& v);

/// floor(100*x + 1/2), exact.
long long round_half_up_hundredths(const Rational& x);
/// floor(100*sqrt(v) + 1/2), exact; v >= 0.
long long round_half_up_sqrt_hundredths(const Rational& v);

/// Half-up rounding to `digits` decimals (0..9), exact.
std::string format_fixed(const Rational& r, int digits);

double to_double(const Rational& r);

} // namespace fastric
