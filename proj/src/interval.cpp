#include "lmgc/interval.hpp"

#include "lmgc/errors.hpp"

namespace lmgc {

Interval subdivide(const Interval& interval, std::span<const Rational> probs, Token symbol) {
    if (symbol >= probs.size())
        throw ContractViolation("symbol outside the distribution");
    Rational cum = 0;
    for (Token i = 0; i < symbol; ++i)
        cum += probs[i];
    const Rational w = interval.width();
    return {interval.low + w * cum, interval.low + w * (cum + probs[symbol])};
}

Interval subdivide(const Interval& interval, const QuantizedPmf& pmf, Token symbol) {
    if (symbol >= pmf.size())
        throw ContractViolation("symbol outside the distribution");
    const Rational total(pmf.total());
    const Rational lo(pmf.cumulative(symbol));
    const Rational hi = lo + pmf.freqs[symbol];
    const Rational w = interval.width();
    return {interval.low + w * lo / total, interval.low + w * hi / total};
}

std::vector<Interval> narrow(std::span<const Rational> probs, std::span<const Token> message) {
    std::vector<Interval> steps;
    Interval current;
    for (Token s : message) {
        current = subdivide(current, probs, s);
        steps.push_back(current);
    }
    return steps;
}

std::string binary_fraction(const Rational& x, unsigned bits) {
    if (x < 0 || x >= 1)
        throw ContractViolation("binary_fraction expects a value in [0, 1)");
    std::string digits;
    Rational r = x;
    for (unsigned i = 0; i < bits; ++i) {
        r *= 2;
        if (r >= 1) {
            digits.push_back('1');
            r -= 1;
        } else {
            digits.push_back('0');
        }
    }
    return digits;
}

Rational from_binary_fraction(const std::string& digits) {
    Rational value = 0;
    Rational weight(1, 2);
    for (char c : digits) {
        if (c == '1')
            value += weight;
        else if (c != '0')
            throw ContractViolation("binary digits must be 0 or 1");
        weight /= 2;
    }
    return value;
}

std::vector<Token> decode_point(const Rational& x, std::span<const Rational> probs, std::size_t count) {
    std::vector<Token> out;
    Interval current;
    for (std::size_t n = 0; n < count; ++n) {
        bool found = false;
        for (Token s = 0; s < probs.size(); ++s) {
            Interval next = subdivide(current, probs, s);
            if (next.contains(x)) {
                out.push_back(s);
                current = next;
                found = true;
                break;
            }
        }
        if (!found)
            throw CorruptStream("point lies outside every sub-interval");
    }
    return out;
}

} // namespace lmgc
