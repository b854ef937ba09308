#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lmgc/errors.hpp"

namespace lmgc {

/// Run-length encoding over a symbol dictionary. Each run becomes a tuple of an
/// 8-bit count (1..255) and the symbol, bit-packed MSB-first:
/// bits = 9, hex = 12, iso = 16 bits per tuple. Bits and nibbles are read
/// most-significant first within each byte.
enum class RleDictionary { bits, hex, iso };

unsigned rle_symbol_bits(RleDictionary d) noexcept;
std::string_view to_string(RleDictionary d) noexcept;

std::vector<std::uint8_t> rle_encode(std::span<const std::uint8_t> data, RleDictionary d);
std::vector<std::uint8_t> rle_decode(std::span<const std::uint8_t> data, RleDictionary d);

/// Thrown for codecs that are known but not built into this binary.
class CodecUnavailable : public Error {
public:
    using Error::Error;
};

class Codec {
public:
    virtual ~Codec() = default;
    virtual std::string name() const = 0;
    virtual std::vector<std::uint8_t> compress(std::span<const std::uint8_t> data) const = 0;
    virtual std::vector<std::uint8_t> decompress(std::span<const std::uint8_t> data) const = 0;
};

/// "deflate", "lzma", "rle-bits", "rle-hex", "rle-iso" and "raw" (identity).
/// Throws CodecUnavailable for png/flac/fpzip and ConfigError for unknown ids.
std::unique_ptr<Codec> make_codec(std::string_view id);
std::vector<std::string> available_codecs();

enum class ChunkMode { unchunked, chunked };

/// A baseline codec applied to the whole input, or independently to fixed-size
/// chunks each framed as u32-LE length + payload.
struct CodecAdapter {
    std::string codec_id;
    ChunkMode mode = ChunkMode::unchunked;
    std::size_t chunk_size = 512;

    /// "<codec>" or "<codec>:chunked" / "<codec>:unchunked".
    static CodecAdapter parse(std::string_view text);
    std::string to_string() const;

    std::vector<std::uint8_t> compress(std::span<const std::uint8_t> data) const;
    std::vector<std::uint8_t> decompress(std::span<const std::uint8_t> data) const;
};

} // namespace lmgc
