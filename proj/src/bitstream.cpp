#include "lmgc/bitstream.hpp"

#include <cstring>

#include "lmgc/errors.hpp"

namespace lmgc {

namespace {

constexpr char kMagic[4] = {'L', 'M', 'G', 'C'};

template <typename T>
void put(std::vector<std::uint8_t>& out, T value) {
    for (std::size_t i = 0; i < sizeof(T); ++i)
        out.push_back(static_cast<std::uint8_t>(static_cast<std::uint64_t>(value) >> (8 * i)));
}

class Reader {
public:
    explicit Reader(std::span<const std::uint8_t> data) : data_(data) {}

    template <typename T>
    T get() {
        T v = 0;
        for (std::size_t i = 0; i < sizeof(T); ++i)
            v |= static_cast<T>(static_cast<T>(data_[pos_ + i]) << (8 * i));
        pos_ += sizeof(T);
        return v;
    }
    bool has(std::size_t n) const { return data_.size() - pos_ >= n; }
    std::span<const std::uint8_t> take(std::size_t n) {
        auto s = data_.subspan(pos_, n);
        pos_ += n;
        return s;
    }
    std::size_t remaining() const { return data_.size() - pos_; }

private:
    std::span<const std::uint8_t> data_;
    std::size_t pos_ = 0;
};

} // namespace

std::uint64_t Bitstream::payload_bits() const {
    std::uint64_t bits = 0;
    for (const auto& w : windows)
        bits += w.bit_length;
    return bits;
}

std::vector<std::uint8_t> Bitstream::to_bytes() const {
    std::vector<std::uint8_t> out;
    out.insert(out.end(), std::begin(kMagic), std::end(kMagic));
    put(out, header.version);
    put(out, header.scheme_tag);
    put(out, header.model_id);
    put(out, header.model_fingerprint);
    put(out, header.window_size);
    put(out, header.precision_bits);
    put(out, header.token_count);
    put(out, header.original_byte_len);
    put(out, header.digest);
    for (const auto& w : windows) {
        put(out, w.bit_length);
        out.insert(out.end(), w.bytes.begin(), w.bytes.end());
    }
    return out;
}

BitstreamHeader Bitstream::read_header(std::span<const std::uint8_t> data) {
    if (data.size() < BitstreamHeader::kSize)
        throw FormatError("stream shorter than the " + std::to_string(BitstreamHeader::kSize) + "-byte header");
    if (std::memcmp(data.data(), kMagic, 4) != 0)
        throw FormatError("bad magic, not an LMGC stream");
    Reader r(data.subspan(4));
    BitstreamHeader h;
    h.version = r.get<std::uint16_t>();
    if (h.version != BitstreamHeader::kVersion)
        throw FormatError("unsupported stream version " + std::to_string(h.version));
    h.scheme_tag = r.get<std::uint8_t>();
    h.model_id = r.get<std::uint8_t>();
    h.model_fingerprint = r.get<std::uint64_t>();
    h.window_size = r.get<std::uint32_t>();
    h.precision_bits = r.get<std::uint8_t>();
    h.token_count = r.get<std::uint64_t>();
    h.original_byte_len = r.get<std::uint64_t>();
    h.digest = r.get<std::uint64_t>();
    if (h.window_size == 0)
        throw FormatError("window size of zero");
    return h;
}

Bitstream Bitstream::from_bytes(std::span<const std::uint8_t> data) {
    Bitstream bs;
    bs.header = read_header(data);
    Reader r(data.subspan(BitstreamHeader::kSize));
    const std::uint64_t count = bs.header.window_count();
    for (std::uint64_t i = 0; i < count; ++i) {
        if (!r.has(4))
            throw CorruptStream("window " + std::to_string(i) + " of " + std::to_string(count) +
                                " truncated: missing length prefix");
        WindowPayload w;
        w.bit_length = r.get<std::uint32_t>();
        const std::size_t nbytes = (static_cast<std::size_t>(w.bit_length) + 7) / 8;
        if (!r.has(nbytes))
            throw CorruptStream("window " + std::to_string(i) + " of " + std::to_string(count) + " truncated: " +
                                std::to_string(r.remaining()) + " of " + std::to_string(nbytes) + " bytes present");
        auto bytes = r.take(nbytes);
        w.bytes.assign(bytes.begin(), bytes.end());
        bs.windows.push_back(std::move(w));
    }
    if (r.remaining() != 0)
        throw CorruptStream(std::to_string(r.remaining()) + " unexpected bytes after the last window");
    return bs;
}

} // namespace lmgc
