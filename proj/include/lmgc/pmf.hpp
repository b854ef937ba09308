#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "lmgc/serializer.hpp"

namespace lmgc {

/// Largest precision the range coder accepts.
inline constexpr unsigned kMaxPrecisionBits = 24;

/// Integer frequencies over a vocabulary that sum to exactly 2^precision_bits,
/// every entry at least 1.
struct QuantizedPmf {
    std::vector<std::uint32_t> freqs;
    std::uint8_t precision_bits = 16;

    std::uint64_t total() const noexcept { return std::uint64_t{1} << precision_bits; }
    std::size_t size() const noexcept { return freqs.size(); }

    /// Sum of freqs[0..symbol).
    std::uint64_t cumulative(Token symbol) const;

    /// Throws ContractViolation when an invariant is broken.
    void validate() const;

    friend bool operator==(const QuantizedPmf&, const QuantizedPmf&) = default;
};

/// Smallest precision that gives every symbol of `vocab_size` room: ceil(log2(vocab)) + 1.
unsigned min_precision_bits(std::size_t vocab_size);

/// Floor-then-largest-remainder quantization of a real distribution.
///
/// Each symbol receives floor(p * 2^bits); the leftover units go to the
/// largest remainders, ties to the lower symbol id. Symbols left at zero are
/// then raised to 1, taking one unit at a time from the current largest
/// frequency (lowest id among equals). Probabilities are normalised by their
/// sum first.
QuantizedPmf quantize_pmf(std::span<const double> probs, unsigned precision_bits);

/// Same rule for nonnegative integer weights, computed exactly in integers.
QuantizedPmf quantize_weights(std::span<const std::uint64_t> weights, unsigned precision_bits);
void quantize_weights(std::span<const std::uint64_t> weights, unsigned precision_bits, QuantizedPmf& out);

} // namespace lmgc
