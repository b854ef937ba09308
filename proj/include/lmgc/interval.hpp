#pragma once

#include <span>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "lmgc/pmf.hpp"

namespace lmgc {

using Rational = boost::multiprecision::cpp_rational;

/// Half-open interval [low, high) of [0, 1) held as exact rationals.
///
/// This is the textbook form of arithmetic coding; the production path uses
/// the integer RangeEncoder instead.
struct Interval {
    Rational low{0};
    Rational high{1};

    Rational width() const { return high - low; }
    Rational midpoint() const { return (low + high) / 2; }
    bool contains(const Rational& x) const { return low <= x && x < high; }

    friend bool operator==(const Interval&, const Interval&) = default;
};

/// [low + width*cum(s), low + width*cum(s+1)) with cum the prefix sums of `probs`.
Interval subdivide(const Interval& interval, std::span<const Rational> probs, Token symbol);
Interval subdivide(const Interval& interval, const QuantizedPmf& pmf, Token symbol);

/// Successive intervals while coding `message` from [0, 1).
std::vector<Interval> narrow(std::span<const Rational> probs, std::span<const Token> message);

/// First `bits` binary digits after the point, e.g. 0.4608 with 8 bits -> "01110101".
std::string binary_fraction(const Rational& x, unsigned bits);

/// Value of a binary fraction string ("01110101" -> 117/256).
Rational from_binary_fraction(const std::string& digits);

/// Recovers `count` symbols from a point inside the final interval.
std::vector<Token> decode_point(const Rational& x, std::span<const Rational> probs, std::size_t count);

} // namespace lmgc
