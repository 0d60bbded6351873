#include "semistatic/rational.hpp"

#include <cctype>

namespace semistatic {

namespace {

bool is_integer_literal(std::string_view s, bool allow_sign) {
  if (allow_sign && !s.empty() && s.front() == '-') s.remove_prefix(1);
  if (s.empty()) return false;
  for (char c : s) {
    if (!std::isdigit(static_cast<unsigned char>(c))) return false;
  }
  return true;
}

}  // namespace

Rational parse_rational(std::string_view text) {
  const auto slash = text.find('/');
  std::string_view num = text.substr(0, slash);
  if (!is_integer_literal(num, true)) {
    throw ParseError("invalid rational literal: \"" + std::string(text) + "\"");
  }
  if (slash == std::string_view::npos) {
    return Rational(Integer(std::string(num)));
  }
  std::string_view den = text.substr(slash + 1);
  if (!is_integer_literal(den, false)) {
    throw ParseError("invalid rational literal: \"" + std::string(text) + "\"");
  }
  Integer d{std::string(den)};
  if (d == 0) {
    throw ParseError("zero denominator in rational literal: \"" + std::string(text) + "\"");
  }
  // The two-argument constructor canonicalizes; the string constructor does not.
  return Rational(Integer(std::string(num)), d);
}

std::string format_rational(const Rational& value) {
  if (denominator(value) == 1) return numerator(value).str();
  return numerator(value).str() + "/" + denominator(value).str();
}

double to_double(const Rational& value) { return value.convert_to<double>(); }

}  // namespace semistatic
