#pragma once

#include <string>
#include <string_view>

#include <boost/multiprecision/cpp_int.hpp>

namespace rangewalk {

using Rational = boost::multiprecision::cpp_rational;

/// Parses "p/q", an integer, or a decimal literal such as "0.125" or "7e-3".
Rational parse_rational(std::string_view text);

/// The exact value of the shortest decimal string that round-trips to `x`.
/// 0.7 maps to 7/10, not to the binary value nearest 0.7.
Rational rational_from_double(double x);

double to_double(const Rational& r);

std::string to_string(const Rational& r);

}  // namespace rangewalk
