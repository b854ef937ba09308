#include "lmgc/codec.hpp"

#include "lmgc/bridge.hpp"
#include "lmgc/coder.hpp"
#include "lmgc/errors.hpp"

namespace lmgc {

std::uint64_t byte_digest(std::span<const std::uint8_t> data) {
    return fnv1a64(data);
}

namespace {

std::string latin1_to_utf8(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (char ch : s) {
        const auto c = static_cast<unsigned char>(ch);
        if (c < 0x80) {
            out.push_back(static_cast<char>(c));
        } else {
            out.push_back(static_cast<char>(0xC0 | (c >> 6)));
            out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
        }
    }
    return out;
}

std::string utf8_to_latin1(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        const auto c = static_cast<unsigned char>(s[i]);
        if (c < 0x80) {
            out.push_back(static_cast<char>(c));
        } else if ((c == 0xC2 || c == 0xC3) && i + 1 < s.size()) {
            out.push_back(static_cast<char>(((c & 0x03) << 6) | (static_cast<unsigned char>(s[i + 1]) & 0x3F)));
            ++i;
        } else {
            throw CorruptStream("bridge text contains a character outside ISO-8859-1");
        }
    }
    return out;
}

std::shared_ptr<bridge::Connection> open_bridge(const std::shared_ptr<bridge::Connection>& given,
                                                const std::string& endpoint) {
    if (given)
        return given;
    return bridge::Connection::open(bridge::resolve_endpoint(endpoint));
}

} // namespace

Bitstream compress_to_bitstream(std::span<const std::uint8_t> data, const CompressOptions& options) {
    const SymbolStream symbols = serialize(data, options.scheme);
    EncodeOptions enc{options.scheme.tag(), options.threads};

    Bitstream bs;
    if (options.model.kind == ModelKind::bridge) {
        auto conn = open_bridge(options.bridge, options.model.bridge_endpoint);
        std::string text = to_text(symbols.symbols, options.scheme);
        if (options.scheme.alphabet == Alphabet::iso_byte)
            text = latin1_to_utf8(text);
        const std::vector<Token> tokens = conn->tokenize(text);
        // A tokenizer that does not invert would make the stream undecodable.
        if (conn->detokenize(tokens) != text)
            throw ModelUnavailable("bridge tokenizer does not round-trip the serialized text");
        bs = encode(tokens, bridge::make_factory(conn), options.window_size, enc);
    } else {
        bs = encode(symbols.symbols, make_builtin_factory(options.model, options.scheme.vocab_size()),
                    options.window_size, enc);
    }
    bs.header.original_byte_len = data.size();
    bs.header.digest = byte_digest(data);
    return bs;
}

std::vector<std::uint8_t> compress(std::span<const std::uint8_t> data, const CompressOptions& options) {
    return compress_to_bitstream(data, options).to_bytes();
}

std::vector<std::uint8_t> decompress(const Bitstream& stream, const DecompressOptions& options) {
    const auto& h = stream.header;
    if (h.scheme_tag == kRawTokensTag)
        throw FormatError("stream holds raw tokens, not serialized bytes; use decode()");
    const Scheme scheme = Scheme::from_tag(h.scheme_tag);
    if (h.model_id > static_cast<std::uint8_t>(ModelKind::bridge))
        throw FormatError("unknown model id " + std::to_string(h.model_id));
    const auto kind = static_cast<ModelKind>(h.model_id);

    std::vector<Token> symbols;
    try {
        if (kind == ModelKind::bridge) {
            auto conn = open_bridge(options.bridge, options.bridge_endpoint);
            const auto tokens = decode(stream, bridge::make_factory(conn), options.threads);
            std::string text = conn->detokenize(tokens);
            if (scheme.alphabet == Alphabet::iso_byte)
                text = utf8_to_latin1(text);
            symbols = from_text(text, scheme);
        } else {
            ModelSpec spec = ModelSpec::from_kind(kind);
            spec.precision_bits = h.precision_bits;
            if (kind == ModelKind::static_pmf)
                spec.static_pmf = options.static_pmf;
            symbols = decode(stream, make_builtin_factory(spec, scheme.vocab_size()), options.threads);
        }
    } catch (const ContractViolation& e) {
        throw CorruptStream(std::string("decoded token rejected by the model: ") + e.what());
    }

    std::vector<std::uint8_t> bytes;
    try {
        bytes = deserialize(symbols, scheme);
    } catch (const MalformedStream& e) {
        throw CorruptStream(std::string("decoded symbols are not a valid serialization: ") + e.what());
    }
    if (bytes.size() != h.original_byte_len)
        throw CorruptStream("decoded " + std::to_string(bytes.size()) + " bytes, header declares " +
                            std::to_string(h.original_byte_len));
    if (byte_digest(bytes) != h.digest)
        throw CorruptStream("digest mismatch: decoded bytes differ from the original");
    return bytes;
}

std::vector<std::uint8_t> decompress(std::span<const std::uint8_t> stream, const DecompressOptions& options) {
    return decompress(Bitstream::from_bytes(stream), options);
}

} // namespace lmgc
