#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace lmgc {

/// Fixed-size header of a compressed file. All integers little-endian:
///
///   magic "LMGC" | u16 version | u8 scheme tag | u8 model id |
///   u64 model fingerprint | u32 window size | u8 precision bits |
///   u64 token count | u64 original byte length | u64 digest
///
/// followed by one record per window: u32 bit length, ceil(bits/8) bytes.
struct BitstreamHeader {
    static constexpr std::uint16_t kVersion = 1;
    static constexpr std::size_t kSize = 45;

    std::uint16_t version = kVersion;
    std::uint8_t scheme_tag = 0;
    std::uint8_t model_id = 0;
    std::uint64_t model_fingerprint = 0;
    std::uint32_t window_size = 0;
    std::uint8_t precision_bits = 0;
    std::uint64_t token_count = 0;
    std::uint64_t original_byte_len = 0;
    std::uint64_t digest = 0;

    std::uint64_t window_count() const noexcept {
        return window_size == 0 ? 0 : (token_count + window_size - 1) / window_size;
    }

    friend bool operator==(const BitstreamHeader&, const BitstreamHeader&) = default;
};

struct WindowPayload {
    std::uint32_t bit_length = 0;
    std::vector<std::uint8_t> bytes;

    friend bool operator==(const WindowPayload&, const WindowPayload&) = default;
};

struct Bitstream {
    BitstreamHeader header;
    std::vector<WindowPayload> windows;

    std::uint64_t payload_bits() const;
    std::vector<std::uint8_t> to_bytes() const;

    /// Throws FormatError for a bad header and CorruptStream (naming the window)
    /// for truncated or trailing data.
    static Bitstream from_bytes(std::span<const std::uint8_t> data);
    static BitstreamHeader read_header(std::span<const std::uint8_t> data);
};

} // namespace lmgc
