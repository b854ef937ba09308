#include "lmgc/baselines.hpp"

#include <zlib.h>

#ifdef LMGC_HAVE_LZMA
#include <lzma.h>
#endif

namespace lmgc {

unsigned rle_symbol_bits(RleDictionary d) noexcept {
    switch (d) {
    case RleDictionary::bits: return 1;
    case RleDictionary::hex: return 4;
    case RleDictionary::iso: return 8;
    }
    return 8;
}

std::string_view to_string(RleDictionary d) noexcept {
    switch (d) {
    case RleDictionary::bits: return "bits";
    case RleDictionary::hex: return "hex";
    case RleDictionary::iso: return "iso";
    }
    return "?";
}

namespace {

class BitWriter {
public:
    void put(std::uint32_t value, unsigned nbits) {
        for (unsigned i = nbits; i-- > 0;) {
            acc_ = static_cast<std::uint8_t>((acc_ << 1) | ((value >> i) & 1u));
            if (++fill_ == 8) {
                out_.push_back(acc_);
                acc_ = 0;
                fill_ = 0;
            }
        }
    }
    std::vector<std::uint8_t> finish() {
        if (fill_ > 0)
            out_.push_back(static_cast<std::uint8_t>(acc_ << (8 - fill_)));
        fill_ = 0;
        acc_ = 0;
        return std::move(out_);
    }

private:
    std::vector<std::uint8_t> out_;
    std::uint8_t acc_ = 0;
    unsigned fill_ = 0;
};

class BitReader {
public:
    explicit BitReader(std::span<const std::uint8_t> data) : data_(data) {}
    std::uint64_t remaining() const { return data_.size() * 8ull - pos_; }
    std::uint32_t get(unsigned nbits) {
        std::uint32_t v = 0;
        for (unsigned i = 0; i < nbits; ++i, ++pos_)
            v = (v << 1) | ((data_[pos_ >> 3] >> (7 - (pos_ & 7))) & 1u);
        return v;
    }

private:
    std::span<const std::uint8_t> data_;
    std::uint64_t pos_ = 0;
};

} // namespace

std::vector<std::uint8_t> rle_encode(std::span<const std::uint8_t> data, RleDictionary d) {
    const unsigned sb = rle_symbol_bits(d);
    const unsigned per_byte = 8 / sb;
    const std::uint32_t mask = (1u << sb) - 1;
    BitWriter w;
    std::uint32_t current = 0;
    std::uint32_t run = 0;
    for (std::uint8_t byte : data) {
        for (unsigned k = per_byte; k-- > 0;) {
            const std::uint32_t sym = (byte >> (k * sb)) & mask;
            if (run > 0 && (sym != current || run == 255)) {
                w.put(run, 8);
                w.put(current, sb);
                run = 0;
            }
            current = sym;
            ++run;
        }
    }
    if (run > 0) {
        w.put(run, 8);
        w.put(current, sb);
    }
    return w.finish();
}

std::vector<std::uint8_t> rle_decode(std::span<const std::uint8_t> data, RleDictionary d) {
    const unsigned sb = rle_symbol_bits(d);
    const unsigned per_byte = 8 / sb;
    BitReader r(data);
    std::vector<std::uint8_t> out;
    std::uint32_t acc = 0;
    unsigned fill = 0;
    while (r.remaining() >= 8 + sb) {
        const std::uint32_t count = r.get(8);
        const std::uint32_t sym = r.get(sb);
        if (count == 0)
            throw FormatError("RLE tuple with zero count");
        for (std::uint32_t i = 0; i < count; ++i) {
            acc = (acc << sb) | sym;
            if (++fill == per_byte) {
                out.push_back(static_cast<std::uint8_t>(acc));
                acc = 0;
                fill = 0;
            }
        }
    }
    if (fill != 0)
        throw FormatError("RLE stream does not decode to whole bytes");
    return out;
}

// ---------------------------------------------------------------------------

namespace {

class RawCodec final : public Codec {
public:
    std::string name() const override { return "raw"; }
    std::vector<std::uint8_t> compress(std::span<const std::uint8_t> data) const override {
        return {data.begin(), data.end()};
    }
    std::vector<std::uint8_t> decompress(std::span<const std::uint8_t> data) const override {
        return {data.begin(), data.end()};
    }
};

class RleCodec final : public Codec {
public:
    explicit RleCodec(RleDictionary d) : d_(d) {}
    std::string name() const override { return "rle-" + std::string(to_string(d_)); }
    std::vector<std::uint8_t> compress(std::span<const std::uint8_t> data) const override {
        return rle_encode(data, d_);
    }
    std::vector<std::uint8_t> decompress(std::span<const std::uint8_t> data) const override {
        return rle_decode(data, d_);
    }

private:
    RleDictionary d_;
};

class DeflateCodec final : public Codec {
public:
    std::string name() const override { return "deflate"; }

    std::vector<std::uint8_t> compress(std::span<const std::uint8_t> data) const override {
        uLongf len = compressBound(static_cast<uLong>(data.size()));
        std::vector<std::uint8_t> out(len);
        if (compress2(out.data(), &len, data.data(), static_cast<uLong>(data.size()), Z_BEST_COMPRESSION) != Z_OK)
            throw Error("zlib compress2 failed");
        out.resize(len);
        return out;
    }

    std::vector<std::uint8_t> decompress(std::span<const std::uint8_t> data) const override {
        z_stream zs{};
        if (inflateInit(&zs) != Z_OK)
            throw Error("zlib inflateInit failed");
        zs.next_in = const_cast<Bytef*>(data.data());
        zs.avail_in = static_cast<uInt>(data.size());
        std::vector<std::uint8_t> out;
        std::uint8_t buf[1 << 15];
        int rc = Z_OK;
        while (rc != Z_STREAM_END) {
            zs.next_out = buf;
            zs.avail_out = sizeof buf;
            rc = inflate(&zs, Z_NO_FLUSH);
            if (rc != Z_OK && rc != Z_STREAM_END) {
                inflateEnd(&zs);
                throw CorruptStream("deflate stream is corrupt");
            }
            out.insert(out.end(), buf, buf + (sizeof buf - zs.avail_out));
            if (rc == Z_OK && zs.avail_in == 0 && zs.avail_out != 0) {
                inflateEnd(&zs);
                throw CorruptStream("deflate stream is truncated");
            }
        }
        inflateEnd(&zs);
        return out;
    }
};

#ifdef LMGC_HAVE_LZMA
class LzmaCodec final : public Codec {
public:
    std::string name() const override { return "lzma"; }

    std::vector<std::uint8_t> compress(std::span<const std::uint8_t> data) const override {
        std::vector<std::uint8_t> out(lzma_stream_buffer_bound(data.size()));
        std::size_t pos = 0;
        if (lzma_easy_buffer_encode(9, LZMA_CHECK_NONE, nullptr, data.data(), data.size(), out.data(), &pos,
                                    out.size()) != LZMA_OK)
            throw Error("lzma encode failed");
        out.resize(pos);
        return out;
    }

    std::vector<std::uint8_t> decompress(std::span<const std::uint8_t> data) const override {
        lzma_stream strm = LZMA_STREAM_INIT;
        if (lzma_stream_decoder(&strm, UINT64_MAX, 0) != LZMA_OK)
            throw Error("lzma decoder init failed");
        strm.next_in = data.data();
        strm.avail_in = data.size();
        std::vector<std::uint8_t> out;
        std::uint8_t buf[1 << 15];
        lzma_ret rc = LZMA_OK;
        while (rc != LZMA_STREAM_END) {
            strm.next_out = buf;
            strm.avail_out = sizeof buf;
            rc = lzma_code(&strm, LZMA_FINISH);
            if (rc != LZMA_OK && rc != LZMA_STREAM_END) {
                lzma_end(&strm);
                throw CorruptStream("lzma stream is corrupt");
            }
            out.insert(out.end(), buf, buf + (sizeof buf - strm.avail_out));
        }
        lzma_end(&strm);
        return out;
    }
};
#endif

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i)
        out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

} // namespace

std::unique_ptr<Codec> make_codec(std::string_view id) {
    if (id == "raw")
        return std::make_unique<RawCodec>();
    if (id == "deflate")
        return std::make_unique<DeflateCodec>();
    if (id == "rle-bits")
        return std::make_unique<RleCodec>(RleDictionary::bits);
    if (id == "rle-hex")
        return std::make_unique<RleCodec>(RleDictionary::hex);
    if (id == "rle-iso")
        return std::make_unique<RleCodec>(RleDictionary::iso);
    if (id == "lzma") {
#ifdef LMGC_HAVE_LZMA
        return std::make_unique<LzmaCodec>();
#else
        throw CodecUnavailable("lzma: built without liblzma");
#endif
    }
    if (id == "png" || id == "flac" || id == "fpzip")
        throw CodecUnavailable(std::string(id) + ": no backing library in this build");
    throw ConfigError("unknown baseline codec '" + std::string(id) + "'");
}

std::vector<std::string> available_codecs() {
    std::vector<std::string> ids = {"raw", "deflate", "rle-bits", "rle-hex", "rle-iso"};
#ifdef LMGC_HAVE_LZMA
    ids.push_back("lzma");
#endif
    return ids;
}

CodecAdapter CodecAdapter::parse(std::string_view text) {
    CodecAdapter a;
    const auto colon = text.find(':');
    a.codec_id = std::string(text.substr(0, colon));
    if (colon != std::string_view::npos) {
        const auto mode = text.substr(colon + 1);
        if (mode == "chunked")
            a.mode = ChunkMode::chunked;
        else if (mode != "unchunked")
            throw ConfigError("baseline mode must be 'chunked' or 'unchunked', got '" + std::string(mode) + "'");
    }
    if (a.codec_id.empty())
        throw ConfigError("empty baseline codec id");
    return a;
}

std::string CodecAdapter::to_string() const {
    return codec_id + (mode == ChunkMode::chunked ? ":chunked" : ":unchunked");
}

std::vector<std::uint8_t> CodecAdapter::compress(std::span<const std::uint8_t> data) const {
    const auto codec = make_codec(codec_id);
    if (mode == ChunkMode::unchunked)
        return codec->compress(data);
    if (chunk_size == 0)
        throw ConfigError("chunk size must be positive");
    std::vector<std::uint8_t> out;
    for (std::size_t off = 0; off < data.size(); off += chunk_size) {
        const auto part = codec->compress(data.subspan(off, std::min(chunk_size, data.size() - off)));
        put_u32(out, static_cast<std::uint32_t>(part.size()));
        out.insert(out.end(), part.begin(), part.end());
    }
    return out;
}

std::vector<std::uint8_t> CodecAdapter::decompress(std::span<const std::uint8_t> data) const {
    const auto codec = make_codec(codec_id);
    if (mode == ChunkMode::unchunked)
        return codec->decompress(data);
    std::vector<std::uint8_t> out;
    std::size_t pos = 0;
    while (pos < data.size()) {
        if (data.size() - pos < 4)
            throw CorruptStream("chunk frame header truncated");
        std::uint32_t len = 0;
        for (int i = 0; i < 4; ++i)
            len |= static_cast<std::uint32_t>(data[pos + i]) << (8 * i);
        pos += 4;
        if (data.size() - pos < len)
            throw CorruptStream("chunk payload truncated");
        const auto part = codec->decompress(data.subspan(pos, len));
        out.insert(out.end(), part.begin(), part.end());
        pos += len;
    }
    return out;
}

} // namespace lmgc
