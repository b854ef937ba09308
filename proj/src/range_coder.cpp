#include "lmgc/range_coder.hpp"

#include <cassert>

#include "lmgc/errors.hpp"
#include "lmgc/pmf.hpp"

namespace lmgc {

namespace {
constexpr std::uint32_t kTop = 1u << 24;
}

void RangeEncoder::encode(std::uint32_t cum, std::uint32_t freq, unsigned precision_bits) {
    if (precision_bits == 0 || precision_bits > kMaxPrecisionBits || freq == 0 ||
        std::uint64_t{cum} + freq > (std::uint64_t{1} << precision_bits))
        throw ContractViolation("range coder: symbol interval outside [0, 2^precision)");
    const std::uint64_t r = range_;
    const std::uint64_t start = (r * cum) >> precision_bits;
    const std::uint64_t end = (r * (std::uint64_t{cum} + freq)) >> precision_bits;
    low_ += start;
    range_ = static_cast<std::uint32_t>(end - start);
    while (range_ < kTop) {
        range_ <<= 8;
        shift_low();
    }
}

void RangeEncoder::emit(std::uint8_t byte) {
    if (skip_first_) {
        // The interval never exceeds 1.0, so nothing can carry into this byte.
        assert(byte == 0);
        skip_first_ = false;
        return;
    }
    out_.push_back(byte);
}

void RangeEncoder::shift_low() {
    if (static_cast<std::uint32_t>(low_) < 0xFF000000u || (low_ >> 32) != 0) {
        const auto carry = static_cast<std::uint8_t>(low_ >> 32);
        std::uint8_t pending = cache_;
        do {
            emit(static_cast<std::uint8_t>(pending + carry));
            pending = 0xFF;
        } while (--cache_size_ != 0);
        cache_ = static_cast<std::uint8_t>(static_cast<std::uint32_t>(low_) >> 24);
    }
    ++cache_size_;
    low_ = (low_ & 0x00FFFFFFu) << 8;
}

std::vector<std::uint8_t> RangeEncoder::finish() {
    // Shortest value v in [low, low + range): round low up to a multiple of
    // 2^(32 - b) for the smallest b that still fits. range >= 2^24 bounds b by 8.
    const std::uint64_t high = low_ + range_;
    for (unsigned b = 0; b <= 32; ++b) {
        const std::uint64_t step = std::uint64_t{1} << (32 - b);
        const std::uint64_t v = (low_ + step - 1) & ~(step - 1);
        if (v < high) {
            low_ = v;
            break;
        }
    }
    shift_low();
    shift_low();

    while (!out_.empty() && out_.back() == 0)
        out_.pop_back();
    bit_length_ = 8 * out_.size();
    if (!out_.empty()) {
        std::uint8_t last = out_.back();
        while ((last & 1u) == 0) {
            last >>= 1;
            --bit_length_;
        }
    }
    return std::move(out_);
}

RangeDecoder::RangeDecoder(std::span<const std::uint8_t> payload) : in_(payload) {
    for (int i = 0; i < 4; ++i)
        code_ = (code_ << 8) | next_byte();
}

std::uint8_t RangeDecoder::next_byte() {
    const std::uint8_t b = pos_ < in_.size() ? in_[pos_] : 0;
    ++pos_;
    return b;
}

std::uint32_t RangeDecoder::target(unsigned precision_bits) const {
    // Largest c with floor(range * c / 2^bits) <= code.
    const std::uint64_t t = (((std::uint64_t{code_} + 1) << precision_bits) - 1) / range_;
    if (t >= (std::uint64_t{1} << precision_bits))
        throw CorruptStream("range decoder state outside the coding interval");
    return static_cast<std::uint32_t>(t);
}

void RangeDecoder::update(std::uint32_t cum, std::uint32_t freq, unsigned precision_bits) {
    const std::uint64_t r = range_;
    const std::uint64_t start = (r * cum) >> precision_bits;
    const std::uint64_t end = (r * (std::uint64_t{cum} + freq)) >> precision_bits;
    code_ -= static_cast<std::uint32_t>(start);
    range_ = static_cast<std::uint32_t>(end - start);
    while (range_ < kTop) {
        code_ = (code_ << 8) | next_byte();
        range_ <<= 8;
    }
}

} // namespace lmgc
