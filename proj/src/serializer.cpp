#include "lmgc/serializer.hpp"

#include <array>

#include "lmgc/errors.hpp"

namespace lmgc {

namespace {

constexpr std::string_view kHexDigits = "0123456789abcdef";

constexpr std::array<std::uint8_t, 6> kBpgByCode = {0, 1, 2, 3, 4, 8};

std::uint8_t bpg_code(std::uint8_t bpg) {
    for (std::uint8_t c = 0; c < kBpgByCode.size(); ++c)
        if (kBpgByCode[c] == bpg)
            return c;
    throw ConfigError("bytes_per_group must be one of 1,2,3,4,8 or none, got " + std::to_string(bpg));
}

std::string_view separator_name(Separator s) {
    switch (s) {
    case Separator::none: return "none";
    case Separator::space: return "space";
    case Separator::comma: return "comma";
    case Separator::comma_space: return "comma_space";
    case Separator::semicolon: return "semicolon";
    }
    return "?";
}

// Maps a character to its dense symbol id, or -1.
int symbol_of(char c, const Scheme& scheme, std::string_view vocab) {
    if (scheme.alphabet == Alphabet::iso_byte)
        return static_cast<unsigned char>(c);
    auto pos = vocab.find(c);
    return pos == std::string_view::npos ? -1 : static_cast<int>(pos);
}

} // namespace

Scheme Scheme::parse(std::string_view text) {
    std::vector<std::string_view> parts;
    std::size_t start = 0;
    while (true) {
        auto colon = text.find(':', start);
        parts.push_back(text.substr(start, colon - start));
        if (colon == std::string_view::npos)
            break;
        start = colon + 1;
    }

    if (parts[0] == "iso") {
        if (parts.size() != 1)
            throw ConfigError("iso scheme takes no separator or grouping: '" + std::string(text) + "'");
        return iso();
    }
    if (parts[0] != "hex" || parts.size() > 3)
        throw ConfigError("unknown scheme '" + std::string(text) + "'");

    Scheme s = hex();
    if (parts.size() >= 2) {
        bool found = false;
        for (auto sep : {Separator::none, Separator::space, Separator::comma, Separator::comma_space,
                         Separator::semicolon}) {
            if (parts[1] == separator_name(sep)) {
                s.separator = sep;
                found = true;
            }
        }
        if (!found)
            throw ConfigError("unknown separator '" + std::string(parts[1]) + "'");
    }
    if (parts.size() == 3) {
        if (parts[2] == "none") {
            s.bytes_per_group = 0;
        } else {
            int v = 0;
            for (char c : parts[2]) {
                if (c < '0' || c > '9')
                    throw ConfigError("bad bytes_per_group '" + std::string(parts[2]) + "'");
                v = v * 10 + (c - '0');
                if (v > 255)
                    throw ConfigError("bad bytes_per_group '" + std::string(parts[2]) + "'");
            }
            s.bytes_per_group = static_cast<std::uint8_t>(v);
        }
    } else if (s.separator != Separator::none) {
        s.bytes_per_group = 4;
    }
    s.validate();
    return s;
}

std::string Scheme::to_string() const {
    if (alphabet == Alphabet::iso_byte)
        return "iso";
    if (separator == Separator::none)
        return "hex:none";
    return "hex:" + std::string(separator_name(separator)) + ":" + std::to_string(bytes_per_group);
}

void Scheme::validate() const {
    bpg_code(bytes_per_group);
    if (static_cast<unsigned>(separator) > static_cast<unsigned>(Separator::semicolon))
        throw ConfigError("unknown separator code");
    if (alphabet == Alphabet::iso_byte) {
        if (separator != Separator::none || bytes_per_group != 0)
            throw ConfigError("iso scheme must have no separator and no grouping");
        return;
    }
    if (alphabet != Alphabet::hex_nibble)
        throw ConfigError("unknown alphabet");
    if (separator != Separator::none && bytes_per_group == 0)
        throw ConfigError("a separator requires bytes_per_group");
    if (separator == Separator::none && bytes_per_group != 0)
        throw ConfigError("bytes_per_group without a separator has no effect; use hex:none");
}

std::uint8_t Scheme::tag() const {
    validate();
    return static_cast<std::uint8_t>((static_cast<unsigned>(alphabet) << 6) |
                                     (static_cast<unsigned>(separator) << 3) | bpg_code(bytes_per_group));
}

Scheme Scheme::from_tag(std::uint8_t tag) {
    const unsigned bpg = tag & 0x7u;
    if (bpg >= kBpgByCode.size())
        throw FormatError("scheme tag has invalid grouping code");
    Scheme s{static_cast<Alphabet>(tag >> 6), static_cast<Separator>((tag >> 3) & 0x7u), kBpgByCode[bpg]};
    try {
        s.validate();
    } catch (const ConfigError& e) {
        throw FormatError(std::string("invalid scheme tag: ") + e.what());
    }
    return s;
}

std::string_view Scheme::separator_text() const {
    switch (separator) {
    case Separator::none: return "";
    case Separator::space: return " ";
    case Separator::comma: return ",";
    case Separator::comma_space: return ", ";
    case Separator::semicolon: return ";";
    }
    return "";
}

std::string Scheme::vocabulary() const {
    if (alphabet == Alphabet::iso_byte) {
        std::string v(256, '\0');
        for (int i = 0; i < 256; ++i)
            v[static_cast<std::size_t>(i)] = static_cast<char>(i);
        return v;
    }
    std::string v(kHexDigits);
    for (char c : separator_text())
        if (v.find(c) == std::string::npos)
            v.push_back(c);
    return v;
}

std::uint32_t Scheme::vocab_size() const {
    return static_cast<std::uint32_t>(vocabulary().size());
}

std::size_t symbol_count(const Scheme& scheme, std::size_t byte_len) {
    if (scheme.alphabet == Alphabet::iso_byte)
        return byte_len;
    if (byte_len == 0)
        return 0;
    const std::size_t sep_len = scheme.separator_text().size();
    if (sep_len == 0)
        return 2 * byte_len;
    const std::size_t groups = (byte_len + scheme.bytes_per_group - 1) / scheme.bytes_per_group;
    return 2 * byte_len + sep_len * (groups - 1);
}

SymbolStream serialize(std::span<const std::uint8_t> bytes, const Scheme& scheme) {
    scheme.validate();
    SymbolStream out;
    out.scheme = scheme;
    out.source_byte_len = bytes.size();
    out.symbols.reserve(symbol_count(scheme, bytes.size()));

    if (scheme.alphabet == Alphabet::iso_byte) {
        out.symbols.assign(bytes.begin(), bytes.end());
        return out;
    }

    const std::string vocab = scheme.vocabulary();
    std::vector<Token> sep_ids;
    for (char c : scheme.separator_text())
        sep_ids.push_back(static_cast<Token>(vocab.find(c)));

    std::size_t in_group = 0;
    for (std::size_t i = 0; i < bytes.size(); ++i) {
        if (!sep_ids.empty() && in_group == scheme.bytes_per_group) {
            out.symbols.insert(out.symbols.end(), sep_ids.begin(), sep_ids.end());
            in_group = 0;
        }
        out.symbols.push_back(bytes[i] >> 4);
        out.symbols.push_back(bytes[i] & 0xF);
        ++in_group;
    }
    return out;
}

std::vector<std::uint8_t> deserialize(std::span<const Token> symbols, const Scheme& scheme) {
    scheme.validate();
    std::vector<std::uint8_t> out;

    if (scheme.alphabet == Alphabet::iso_byte) {
        out.reserve(symbols.size());
        for (std::size_t i = 0; i < symbols.size(); ++i) {
            if (symbols[i] > 0xFF)
                throw MalformedStream("unknown symbol id " + std::to_string(symbols[i]), i);
            out.push_back(static_cast<std::uint8_t>(symbols[i]));
        }
        return out;
    }

    const std::string vocab = scheme.vocabulary();
    std::vector<Token> sep_ids;
    for (char c : scheme.separator_text())
        sep_ids.push_back(static_cast<Token>(vocab.find(c)));

    out.reserve(symbols.size() / 2);
    std::size_t i = 0;
    std::size_t in_group = 0;
    while (i < symbols.size()) {
        if (!sep_ids.empty() && in_group == scheme.bytes_per_group) {
            for (Token expected : sep_ids) {
                if (i >= symbols.size())
                    throw MalformedStream("stream ends inside a separator", i);
                if (symbols[i] != expected)
                    throw MalformedStream("expected separator after " + std::to_string(scheme.bytes_per_group) +
                                              "-byte group at byte offset " + std::to_string(out.size()),
                                          i);
                ++i;
            }
            if (i == symbols.size())
                throw MalformedStream("trailing separator", i);
            in_group = 0;
        }
        if (i + 1 >= symbols.size())
            throw MalformedStream("odd number of hex digits", i);
        const Token hi = symbols[i];
        const Token lo = symbols[i + 1];
        for (std::size_t k = 0; k < 2; ++k) {
            const Token s = symbols[i + k];
            if (s >= vocab.size())
                throw MalformedStream("unknown symbol id " + std::to_string(s), i + k);
            if (s >= 16)
                throw MalformedStream("separator inside a group at byte offset " + std::to_string(out.size()),
                                      i + k);
        }
        out.push_back(static_cast<std::uint8_t>((hi << 4) | lo));
        i += 2;
        ++in_group;
    }
    return out;
}

std::string to_text(std::span<const Token> symbols, const Scheme& scheme) {
    const std::string vocab = scheme.vocabulary();
    std::string text;
    text.reserve(symbols.size());
    for (std::size_t i = 0; i < symbols.size(); ++i) {
        if (symbols[i] >= vocab.size())
            throw MalformedStream("unknown symbol id " + std::to_string(symbols[i]), i);
        text.push_back(vocab[symbols[i]]);
    }
    return text;
}

std::vector<Token> from_text(std::string_view text, const Scheme& scheme) {
    const std::string vocab = scheme.vocabulary();
    std::vector<Token> symbols;
    symbols.reserve(text.size());
    for (std::size_t i = 0; i < text.size(); ++i) {
        const int id = symbol_of(text[i], scheme, vocab);
        if (id < 0)
            throw MalformedStream(std::string("character '") + text[i] + "' is not in the scheme vocabulary", i);
        symbols.push_back(static_cast<Token>(id));
    }
    return symbols;
}

} // namespace lmgc
