#include "rangewalk/rational.hpp"

#include <array>
#include <charconv>
#include <cmath>

#include "rangewalk/error.hpp"

namespace rangewalk {

namespace {

using boost::multiprecision::cpp_int;

cpp_int pow10(unsigned k) {
  cpp_int r = 1;
  for (unsigned i = 0; i < k; ++i) r *= 10;
  return r;
}

Rational parse_decimal(std::string_view s) {
  if (s.empty()) throw ValidationError("empty number");
  bool negative = false;
  std::size_t pos = 0;
  if (s[pos] == '+' || s[pos] == '-') {
    negative = s[pos] == '-';
    ++pos;
  }
  cpp_int mantissa = 0;
  long exponent = 0;
  bool any_digit = false;
  bool seen_point = false;
  for (; pos < s.size(); ++pos) {
    const char c = s[pos];
    if (c >= '0' && c <= '9') {
      mantissa = mantissa * 10 + (c - '0');
      if (seen_point) --exponent;
      any_digit = true;
    } else if (c == '.' && !seen_point) {
      seen_point = true;
    } else {
      break;
    }
  }
  if (!any_digit) throw ValidationError("malformed number '" + std::string(s) + "'");
  if (pos < s.size()) {
    if (s[pos] != 'e' && s[pos] != 'E') {
      throw ValidationError("malformed number '" + std::string(s) + "'");
    }
    ++pos;
    long e = 0;
    const char* first = s.data() + pos;
    const char* last = s.data() + s.size();
    if (first != last && *first == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, last, e);
    if (ec != std::errc() || ptr != last) {
      throw ValidationError("malformed exponent in '" + std::string(s) + "'");
    }
    exponent += e;
  }
  Rational value(mantissa);
  if (exponent > 0) value *= Rational(pow10(static_cast<unsigned>(exponent)));
  if (exponent < 0) value /= Rational(pow10(static_cast<unsigned>(-exponent)));
  return negative ? Rational(-value) : value;
}

}  // namespace

Rational parse_rational(std::string_view text) {
  const auto slash = text.find('/');
  if (slash == std::string_view::npos) return parse_decimal(text);
  const Rational num = parse_decimal(text.substr(0, slash));
  const Rational den = parse_decimal(text.substr(slash + 1));
  if (den == 0) throw ValidationError("zero denominator in '" + std::string(text) + "'");
  return num / den;
}

Rational rational_from_double(double x) {
  if (!std::isfinite(x)) throw ValidationError("non-finite probability");
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), x);
  if (ec != std::errc()) throw ValidationError("cannot format number");
  return parse_decimal(std::string_view(buf.data(), static_cast<std::size_t>(ptr - buf.data())));
}

double to_double(const Rational& r) { return r.convert_to<double>(); }

std::string to_string(const Rational& r) { return r.str(); }

}  // namespace rangewalk
