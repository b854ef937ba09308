#pragma once

// Integer range coder: 64-bit low, 32-bit range, byte renormalization.
//
// Symbol intervals are computed as floor(range * cum / 2^bits), so the full
// range is used and the top symbol absorbs no rounding slack. Carries are
// propagated with the cache + pending-0xFF counter scheme: a byte is held
// back while it could still be incremented by a carry, together with a count
// of 0xFF bytes behind it.
//
// The very first byte the classic scheme emits is always zero and is not
// stored. finish() picks the value in the final interval with the fewest
// significant bits, and trailing zero bits are dropped; the decoder treats
// every byte past the end as zero.

#include <cstdint>
#include <span>
#include <vector>

namespace lmgc {

class RangeEncoder {
public:
    void encode(std::uint32_t cum, std::uint32_t freq, unsigned precision_bits);

    /// Flushes and returns the payload; bit_length() is valid afterwards.
    std::vector<std::uint8_t> finish();
    std::uint64_t bit_length() const noexcept { return bit_length_; }

private:
    void shift_low();
    void emit(std::uint8_t byte);

    std::uint64_t low_ = 0;
    std::uint32_t range_ = 0xFFFFFFFFu;
    std::uint8_t cache_ = 0;
    std::uint64_t cache_size_ = 1;
    bool skip_first_ = true;
    std::uint64_t bit_length_ = 0;
    std::vector<std::uint8_t> out_;
};

class RangeDecoder {
public:
    explicit RangeDecoder(std::span<const std::uint8_t> payload);

    /// Scaled position inside [0, 2^precision_bits); select the symbol whose
    /// cumulative range contains it, then call update(). Throws CorruptStream
    /// when the code lies outside the interval.
    std::uint32_t target(unsigned precision_bits) const;
    void update(std::uint32_t cum, std::uint32_t freq, unsigned precision_bits);

    /// Bytes consumed so far, including implicit zero padding.
    std::size_t position() const noexcept { return pos_; }

private:
    std::uint8_t next_byte();

    std::span<const std::uint8_t> in_;
    std::size_t pos_ = 0;
    std::uint32_t code_ = 0;
    std::uint32_t range_ = 0xFFFFFFFFu;
};

} // namespace lmgc
