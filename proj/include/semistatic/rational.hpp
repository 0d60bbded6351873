#ifndef SEMISTATIC_RATIONAL_HPP
#define SEMISTATIC_RATIONAL_HPP

#include <stdexcept>
#include <string>
#include <string_view>

#include <boost/multiprecision/gmp.hpp>
#include <boost/multiprecision/eigen.hpp>
#include <Eigen/Dense>

namespace semistatic {

// All market quantities are exact rationals.  Floating point appears only in
// optional decimal renderings of final reports.
using Rational = boost::multiprecision::mpq_rational;
using Integer = boost::multiprecision::mpz_int;

using RVector = Eigen::Matrix<Rational, Eigen::Dynamic, 1>;
using RMatrix = Eigen::Matrix<Rational, Eigen::Dynamic, Eigen::Dynamic>;

class ParseError : public std::runtime_error {
 public:
  explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

class StructuralError : public std::runtime_error {
 public:
  explicit StructuralError(const std::string& what) : std::runtime_error(what) {}
};

class MarketError : public std::runtime_error {
 public:
  explicit MarketError(const std::string& what) : std::runtime_error(what) {}
};

class GuardExceeded : public std::runtime_error {
 public:
  explicit GuardExceeded(const std::string& what) : std::runtime_error(what) {}
};

// Accepts "p" or "p/q" with optional leading '-' on p; q must be a positive
// integer literal.  The result is canonical (lowest terms, positive
// denominator).  Anything else, including a zero denominator, throws
// ParseError.
Rational parse_rational(std::string_view text);

// Canonical rendering: "p" when the denominator is one, else "p/q" in lowest
// terms.  parse_rational(format_rational(x)) == x.
std::string format_rational(const Rational& value);

double to_double(const Rational& value);

}  // namespace semistatic

#endif
