#include <gtest/gtest.h>

#include <bit>
#include <cmath>
#include <limits>
#include <random>

#include "lmgc/errors.hpp"
#include "lmgc/lossy.hpp"

using namespace lmgc;

namespace {

std::vector<float> normal_values(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<float> d(0.0f, 1.0f);
    std::vector<float> out(n);
    for (auto& v : out)
        v = d(rng);
    return out;
}

} // namespace

TEST(Quantize, SmallExample) {
    const float v[] = {0, 1, 2, 3};
    const auto q = quantize_linear(v, 2);
    EXPECT_EQ(q.indices, (std::vector<std::uint32_t>{0, 1, 2, 3}));
    EXPECT_EQ(dequantize_linear(q), (std::vector<double>{0, 1, 2, 3}));
}

TEST(Quantize, EndpointsAreExact) {
    const auto v = normal_values(1000, 1);
    for (unsigned n : {1u, 3u, 8u, 16u}) {
        const auto q = quantize_linear(v, n);
        const auto d = dequantize_linear(q);
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (q.indices[i] == 0)
                EXPECT_EQ(d[i], static_cast<double>(q.vmin));
            if (q.indices[i] == q.levels())
                EXPECT_EQ(d[i], static_cast<double>(q.vmax));
        }
    }
}

TEST(Quantize, ErrorBound) {
    const auto v = normal_values(100000, 2);
    for (unsigned n : {1u, 2u, 8u, 16u}) {
        const auto q = quantize_linear(v, n);
        const auto d = dequantize_linear(q);
        const double bound = (double(q.vmax) - q.vmin) / (2.0 * q.levels());
        for (std::size_t i = 0; i < v.size(); ++i)
            ASSERT_LE(std::abs(d[i] - v[i]), bound * (1 + 1e-12)) << "n=" << n << " i=" << i;
    }
}

TEST(Quantize, TiesRoundToEven) {
    const float v[] = {0.0f, 0.5f, 1.5f, 2.5f, 4.0f};
    const auto q = quantize_linear(v, 3);  // levels 7, scale 7/4
    // 0.5*7/4 = 0.875 -> 1, 1.5*7/4 = 2.625 -> 3, 2.5*7/4 = 4.375 -> 4
    EXPECT_EQ(q.indices, (std::vector<std::uint32_t>{0, 1, 3, 4, 7}));
    // One bit over [0, 4]: 2 maps to exactly 0.5 and rounds to the even index 0.
    const float h[] = {0.0f, 2.0f, 4.0f};
    const float t[] = {0.0f, 1.0f, 3.0f, 4.0f};
    EXPECT_EQ(quantize_linear(h, 1).indices, (std::vector<std::uint32_t>{0, 0, 1}));
    EXPECT_EQ(quantize_linear(t, 1).indices, (std::vector<std::uint32_t>{0, 0, 1, 1}));
}

TEST(Quantize, ConstantAndRejections) {
    const float c[] = {2.5f, 2.5f, 2.5f};
    const auto q = quantize_linear(c, 8);
    EXPECT_EQ(q.indices, (std::vector<std::uint32_t>{0, 0, 0}));
    EXPECT_EQ(dequantize_linear(q), (std::vector<double>{2.5, 2.5, 2.5}));
    EXPECT_THROW(quantize_linear(std::span<const float>(), 8), ContractViolation);
    const float nan[] = {1.0f, std::numeric_limits<float>::quiet_NaN()};
    EXPECT_THROW(quantize_linear(nan, 8), ContractViolation);
    EXPECT_THROW(quantize_linear(c, 0), ContractViolation);
    EXPECT_THROW(quantize_linear(c, 17), ContractViolation);
}

TEST(Quantize, SignIsOneBit) {
    const float v[] = {-1.0f, 0.2f, 1.0f, -0.3f};
    EXPECT_EQ(sign_quantize(v).indices, (std::vector<std::uint32_t>{0, 1, 1, 0}));
}

TEST(Quantize, PerLayer) {
    const float v[] = {0, 1, 100, 200, 300};
    const std::size_t layers[] = {2, 3};
    const auto q = quantize_linear_per_layer(v, layers, 1);
    ASSERT_EQ(q.size(), 2u);
    EXPECT_EQ(q[1].vmin, 100.0f);
    EXPECT_EQ(q[1].indices, (std::vector<std::uint32_t>{0, 0, 1}));
    const std::size_t wrong[] = {2, 2};
    EXPECT_THROW(quantize_linear_per_layer(v, wrong, 1), ContractViolation);
}

TEST(Sparsify, KeepsLargestWithLowIndexTies) {
    const float v[] = {0.1f, -5.0f, 3.0f, 5.0f, 0.0f};
    const auto s = sparsify_topk(v, 0.4);
    EXPECT_EQ(s.kept_indices, (std::vector<std::uint32_t>{1, 3}));
    EXPECT_EQ(s.kept_values, (std::vector<float>{-5.0f, 5.0f}));
    const float tie[] = {1.0f, -1.0f, 1.0f, 1.0f};
    EXPECT_EQ(sparsify_topk(tie, 0.5).kept_indices, (std::vector<std::uint32_t>{0, 1}));
}

TEST(Sparsify, CountAndDensify) {
    const auto v = normal_values(1000, 3);
    for (double p : {0.001, 0.07, 0.1, 0.29, 0.5, 1.0}) {
        const auto s = sparsify_topk(v, p);
        EXPECT_EQ(s.kept_indices.size(), kept_count(p, v.size()));
        EXPECT_TRUE(std::is_sorted(s.kept_indices.begin(), s.kept_indices.end()));
        const auto d = densify(s);
        float min_kept = INFINITY;
        for (auto i : s.kept_indices) {
            EXPECT_EQ(std::bit_cast<std::uint32_t>(d[i]), std::bit_cast<std::uint32_t>(v[i]));
            min_kept = std::min(min_kept, std::abs(v[i]));
        }
        std::size_t dropped_above = 0;
        for (std::size_t i = 0; i < v.size(); ++i)
            if (d[i] == 0.0f && std::abs(v[i]) > min_kept)
                ++dropped_above;
        EXPECT_EQ(dropped_above, 0u);
    }
    EXPECT_EQ(kept_count(0.07, 100), 7u);
    EXPECT_EQ(kept_count(0.1, 1000), 100u);
    EXPECT_EQ(kept_count(0.1, 1001), 101u);
}

TEST(Sparsify, Rejections) {
    const float v[] = {1.0f, 2.0f};
    EXPECT_THROW(sparsify_topk(v, 0.0), ConfigError);
    EXPECT_THROW(sparsify_topk(v, 1.5), ConfigError);
    EXPECT_THROW(sparsify_topk(v, std::nan("")), ConfigError);
}

TEST(Pack, QuantizedRoundTripAndSize) {
    const auto v = normal_values(1001, 4);
    for (unsigned n : {1u, 3u, 8u, 13u, 16u}) {
        const auto q = quantize_linear(v, n);
        const auto bytes = pack(q);
        EXPECT_EQ(bytes.size(), kQuantizedHeaderSize + (n * 1001 + 7) / 8);
        EXPECT_EQ(unpack_quantized(bytes), q);
    }
}

TEST(Pack, QuantizedBitOrderIsLsbFirst) {
    QuantizedTensor q{{1, 2, 3}, 2, 0.0f, 3.0f};
    const auto bytes = pack(q);
    ASSERT_EQ(bytes.size(), kQuantizedHeaderSize + 1);
    EXPECT_EQ(bytes[kQuantizedHeaderSize], 0b00111001);
    EXPECT_EQ(bytes[2], 2);  // pad bits
}

TEST(Pack, SparseRoundTripBitExact) {
    auto v = normal_values(500, 5);
    v[10] = -0.0f;
    v[11] = 1e30f;
    const auto s = sparsify_topk(v, 0.1);
    const auto bytes = pack(s);
    EXPECT_EQ(bytes.size(), kSparseHeaderSize + 8 * s.kept_indices.size());
    EXPECT_EQ(unpack_sparse(bytes), s);
}

TEST(Pack, LayeredRoundTrip) {
    const auto v = normal_values(30, 6);
    const std::size_t layers[] = {10, 15, 5};
    const auto q = quantize_linear_per_layer(v, layers, 5);
    EXPECT_EQ(unpack_layers(pack(std::span<const QuantizedTensor>(q))), q);
}

TEST(Pack, MalformedRecords) {
    EXPECT_THROW(unpack_quantized(std::vector<std::uint8_t>(5)), FormatError);
    auto s = pack(sparsify_topk(normal_values(10, 7), 0.5));
    s.pop_back();
    EXPECT_THROW(unpack_sparse(s), FormatError);
    auto q = pack(quantize_linear(normal_values(10, 8), 3));
    q[2] = 9;
    EXPECT_THROW(unpack_quantized(q), FormatError);
}

TEST(Pack, SizeMonotoneInBitsAndProportion) {
    const auto v = normal_values(4096, 9);
    std::size_t prev = 0;
    for (unsigned n = 1; n <= 16; ++n) {
        const auto size = pack(quantize_linear(v, n)).size();
        EXPECT_GT(size, prev);
        prev = size;
    }
    prev = 0;
    for (double p : {0.01, 0.05, 0.1, 0.5, 1.0}) {
        const auto size = pack(sparsify_topk(v, p)).size();
        EXPECT_GT(size, prev);
        prev = size;
    }
}
