#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace lmgc {

using Token = std::uint32_t;

enum class Alphabet : std::uint8_t {
    iso_byte = 0,   // one symbol per byte, ISO-8859-1 code points
    hex_nibble = 1, // two lowercase hex digits per byte, high nibble first
};

enum class Separator : std::uint8_t {
    none = 0,
    space = 1,
    comma = 2,
    comma_space = 3,
    semicolon = 4,
};

/// Recipe turning raw bytes into a text-like symbol stream.
///
/// Symbol ids are dense: for hex schemes ids 0..15 are the digits
/// "0123456789abcdef" and the separator characters follow in the order they
/// appear in the separator text (", " gives ',' = 16, ' ' = 17). For ISO the
/// id is the byte value. `vocabulary()` maps ids back to characters.
struct Scheme {
    Alphabet alphabet = Alphabet::hex_nibble;
    Separator separator = Separator::space;
    std::uint8_t bytes_per_group = 4; // 0 means no grouping

    static Scheme iso() { return {Alphabet::iso_byte, Separator::none, 0}; }
    static Scheme hex(Separator sep = Separator::none, std::uint8_t bpg = 0) {
        return {Alphabet::hex_nibble, sep, bpg};
    }
    static Scheme default_scheme() { return hex(Separator::space, 4); }

    /// Accepts "iso", "hex", "hex:<sep>" and "hex:<sep>:<bpg>" where sep is one of
    /// none, space, comma, comma_space, semicolon and bpg one of 1,2,3,4,8,none.
    static Scheme parse(std::string_view text);
    std::string to_string() const;

    /// Packed header tag: alphabet in bits 7-6, separator in bits 5-3, bpg code in bits 2-0.
    std::uint8_t tag() const;
    static Scheme from_tag(std::uint8_t tag);

    /// Throws ConfigError when the invariants do not hold.
    void validate() const;

    std::string_view separator_text() const;
    std::uint32_t vocab_size() const;
    std::string vocabulary() const;

    friend bool operator==(const Scheme&, const Scheme&) = default;
};

/// Tag value for token sequences that did not come from the serializer.
inline constexpr std::uint8_t kRawTokensTag = 0xC0;

struct SymbolStream {
    std::vector<Token> symbols;
    Scheme scheme;
    std::size_t source_byte_len = 0;
};

SymbolStream serialize(std::span<const std::uint8_t> bytes, const Scheme& scheme);

std::vector<std::uint8_t> deserialize(std::span<const Token> symbols, const Scheme& scheme);
inline std::vector<std::uint8_t> deserialize(const SymbolStream& stream) {
    return deserialize(stream.symbols, stream.scheme);
}

/// Exact number of symbols serialize() emits for byte_len input bytes.
std::size_t symbol_count(const Scheme& scheme, std::size_t byte_len);

/// Character rendering of a symbol stream (ISO symbols become Latin-1 chars).
std::string to_text(std::span<const Token> symbols, const Scheme& scheme);
std::vector<Token> from_text(std::string_view text, const Scheme& scheme);

} // namespace lmgc
