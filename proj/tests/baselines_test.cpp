#include <gtest/gtest.h>

#include "lmgc/baselines.hpp"
#include "lmgc/tensor_io.hpp"
#include "support/oracles.hpp"

using namespace lmgc;

namespace {

std::vector<std::uint8_t> gradients(std::size_t n, std::uint64_t seed) {
    GeneratorSpec spec;
    spec.layer_sizes = {n};
    spec.scale_per_layer = {1e-3};
    return synth_gradients(spec, seed).bytes;
}

} // namespace

TEST(Rle, IsoTuples) {
    const std::vector<std::uint8_t> aaab = {'A', 'A', 'A', 'B'};
    EXPECT_EQ(rle_encode(aaab, RleDictionary::iso), (std::vector<std::uint8_t>{3, 'A', 1, 'B'}));
    EXPECT_EQ(rle_decode(rle_encode(aaab, RleDictionary::iso), RleDictionary::iso), aaab);
}

TEST(Rle, LongRunsSplitAt255) {
    const std::vector<std::uint8_t> run(300, 7);
    EXPECT_EQ(rle_encode(run, RleDictionary::iso), (std::vector<std::uint8_t>{255, 7, 45, 7}));
}

TEST(Rle, BitsPackingMsbFirst) {
    const std::vector<std::uint8_t> zeros(4, 0);
    // One tuple (32, 0) = 9 bits: 00100000 0, padded to two bytes.
    EXPECT_EQ(rle_encode(zeros, RleDictionary::bits), (std::vector<std::uint8_t>{0x20, 0x00}));
    EXPECT_EQ(rle_decode(std::vector<std::uint8_t>{0x20, 0x00}, RleDictionary::bits), zeros);
}

TEST(Rle, HexNibbles) {
    const std::vector<std::uint8_t> data = {0x11, 0x12};
    // runs: 1 x3, 2 x1 -> (3,1)(1,2) as 12-bit tuples: 0x031 0x012
    EXPECT_EQ(rle_encode(data, RleDictionary::hex), (std::vector<std::uint8_t>{0x03, 0x10, 0x12}));
}

TEST(Rle, RoundTripAllDictionaries) {
    for (auto d : {RleDictionary::bits, RleDictionary::hex, RleDictionary::iso}) {
        for (std::size_t n : {0, 1, 5, 1000}) {
            const auto data = testkit::random_bytes(n, n + 1);
            EXPECT_EQ(rle_decode(rle_encode(data, d), d), data);
        }
        const auto g = gradients(5000, 2);
        EXPECT_EQ(rle_decode(rle_encode(g, d), d), g);
    }
}

TEST(Rle, RejectsZeroCount) {
    EXPECT_THROW(rle_decode(std::vector<std::uint8_t>{0, 'x'}, RleDictionary::iso), FormatError);
}

TEST(Rle, ExpandsGradients) {
    const auto g = gradients(50000, 3);
    const auto bits = rle_encode(g, RleDictionary::bits).size();
    const auto hex = rle_encode(g, RleDictionary::hex).size();
    const auto iso = rle_encode(g, RleDictionary::iso).size();
    EXPECT_GT(bits, hex);
    EXPECT_GT(hex, iso);
    EXPECT_GT(iso, g.size());
}

TEST(Codecs, RoundTripEveryAvailableCodec) {
    const auto g = gradients(20000, 4);
    for (const auto& id : available_codecs()) {
        for (auto mode : {ChunkMode::unchunked, ChunkMode::chunked}) {
            CodecAdapter a{id, mode, 512};
            EXPECT_EQ(a.decompress(a.compress(g)), g) << a.to_string();
            EXPECT_TRUE(a.decompress(a.compress(std::vector<std::uint8_t>{})).empty()) << a.to_string();
        }
    }
}

TEST(Codecs, ChunkFraming) {
    const auto g = gradients(300, 5);  // 1200 bytes -> 3 chunks
    CodecAdapter raw{"raw", ChunkMode::chunked, 512};
    const auto framed = raw.compress(g);
    EXPECT_EQ(framed.size(), g.size() + 3 * 4);
    EXPECT_EQ(framed[0], 0x00);
    EXPECT_EQ(framed[1], 0x02);  // 512 little-endian
    auto truncated = framed;
    truncated.pop_back();
    EXPECT_THROW(raw.decompress(truncated), CorruptStream);
}

TEST(Codecs, ChunkingCostsRatio) {
    const auto g = gradients(100000, 6);
    CodecAdapter whole{"deflate", ChunkMode::unchunked, 512};
    CodecAdapter chunked{"deflate", ChunkMode::chunked, 512};
    EXPECT_GE(chunked.compress(g).size(), whole.compress(g).size());
}

TEST(Codecs, UnavailableAndUnknown) {
    EXPECT_THROW(make_codec("flac"), CodecUnavailable);
    EXPECT_THROW(make_codec("png"), CodecUnavailable);
    EXPECT_THROW(make_codec("zstd-ultra"), ConfigError);
    EXPECT_THROW(CodecAdapter::parse("deflate:sideways"), ConfigError);
    EXPECT_EQ(CodecAdapter::parse("deflate:chunked").mode, ChunkMode::chunked);
    EXPECT_EQ(CodecAdapter::parse("lzma").mode, ChunkMode::unchunked);
}

TEST(Codecs, DeflateDetectsDamage) {
    const auto g = gradients(1000, 7);
    auto packed = make_codec("deflate")->compress(g);
    packed.resize(packed.size() / 2);
    EXPECT_THROW(make_codec("deflate")->decompress(packed), CorruptStream);
}
