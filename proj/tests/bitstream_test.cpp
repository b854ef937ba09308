#include <gtest/gtest.h>

#include "lmgc/bitstream.hpp"
#include "lmgc/errors.hpp"

using namespace lmgc;

namespace {

Bitstream sample() {
    Bitstream bs;
    bs.header.scheme_tag = 0x4C;
    bs.header.model_id = 3;
    bs.header.model_fingerprint = 0x0123456789abcdefull;
    bs.header.window_size = 4;
    bs.header.precision_bits = 16;
    bs.header.token_count = 10;
    bs.header.original_byte_len = 5;
    bs.header.digest = 42;
    bs.windows = {{13, {1, 2}}, {0, {}}, {17, {3, 4, 5}}};
    return bs;
}

} // namespace

TEST(BitstreamTest, LayoutAndRoundTrip) {
    const auto bs = sample();
    const auto bytes = bs.to_bytes();
    ASSERT_EQ(bytes.size(), BitstreamHeader::kSize + 3 * 4 + 5);
    EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + 4), "LMGC");
    EXPECT_EQ(bytes[4], 1);   // version, little-endian
    EXPECT_EQ(bytes[5], 0);
    EXPECT_EQ(bytes[6], 0x4C);
    EXPECT_EQ(bytes[7], 3);
    EXPECT_EQ(bytes[8], 0xef);
    EXPECT_EQ(bytes[BitstreamHeader::kSize], 13);  // first window bit length
    const auto back = Bitstream::from_bytes(bytes);
    EXPECT_EQ(back.header, bs.header);
    EXPECT_EQ(back.windows, bs.windows);
    EXPECT_EQ(back.payload_bits(), 30u);
    EXPECT_EQ(bs.header.window_count(), 3u);
}

TEST(BitstreamTest, HeaderErrors) {
    auto bytes = sample().to_bytes();
    EXPECT_THROW(Bitstream::from_bytes(std::span(bytes).first(20)), FormatError);
    auto bad_magic = bytes;
    bad_magic[0] = 'X';
    EXPECT_THROW(Bitstream::from_bytes(bad_magic), FormatError);
    auto bad_version = bytes;
    bad_version[4] = 9;
    EXPECT_THROW(Bitstream::from_bytes(bad_version), FormatError);
}

TEST(BitstreamTest, TruncationNamesWindow) {
    const auto bytes = sample().to_bytes();
    try {
        Bitstream::from_bytes(std::span(bytes).first(bytes.size() - 1));
        FAIL() << "expected CorruptStream";
    } catch (const CorruptStream& e) {
        EXPECT_NE(std::string(e.what()).find("window 2"), std::string::npos) << e.what();
    }
    auto extra = bytes;
    extra.push_back(0);
    EXPECT_THROW(Bitstream::from_bytes(extra), CorruptStream);
}
