#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "lmgc/bench.hpp"
#include "lmgc/bitstream.hpp"
#include "lmgc/codec.hpp"
#include "lmgc/errors.hpp"
#include "support/oracles.hpp"

using namespace lmgc;
using nlohmann::json;

namespace {

json generator_corpus(std::size_t entries, std::size_t elements) {
    json list = json::array();
    for (std::size_t i = 0; i < entries; ++i)
        list.push_back({{"name", "g" + std::to_string(i)},
                        {"generator", {{"layer_sizes", {elements}}, {"scale_per_layer", {1e-3}}}},
                        {"seed", i + 1}});
    return {{"format_version", 1}, {"entries", list}};
}

ExperimentConfig small_config() {
    return ExperimentConfig::from_json({{"corpus", generator_corpus(1, 2000)},
                                        {"schemes", {"hex:space:4"}},
                                        {"models", {"order0"}},
                                        {"window_sizes", {2048}}});
}

} // namespace

TEST(Rate, Examples) {
    EXPECT_EQ(compression_rate(1000, 500), 50.0);
    EXPECT_EQ(compression_rate(777, 777), 100.0);
    EXPECT_NEAR(compression_rate(28ull << 20, static_cast<std::uint64_t>(9.02 * (1 << 20))), 32.21, 0.01);
    EXPECT_THROW(compression_rate(0, 5), ContractViolation);
}

TEST(Entropy, UniformBytes) {
    const auto bytes = testkit::random_bytes(1000000, 1);
    EXPECT_NEAR(entropy_estimate(bytes, 0), 8.0, 0.02);
}

TEST(Entropy, ConstantAndDeterministicContexts) {
    const std::vector<std::uint8_t> constant(1000, 9);
    for (unsigned k = 0; k <= 2; ++k)
        EXPECT_EQ(entropy_estimate(constant, k), 0.0);
    std::vector<std::uint8_t> alternating(1000);
    for (std::size_t i = 0; i < alternating.size(); ++i)
        alternating[i] = static_cast<std::uint8_t>(i % 2);
    EXPECT_NEAR(entropy_estimate(alternating, 0), 1.0, 1e-12);
    EXPECT_EQ(entropy_estimate(alternating, 1), 0.0);
    EXPECT_THROW(entropy_estimate(constant, 3), ContractViolation);
}

TEST(Entropy, BernoulliBits) {
    std::mt19937_64 rng(2);
    std::vector<std::uint8_t> packed(125000);
    for (auto& b : packed)
        for (int i = 0; i < 8; ++i)
            b = static_cast<std::uint8_t>((b << 1) | ((rng() >> 11) * 0x1.0p-53 < 0.2));
    std::vector<std::uint32_t> bits;
    for (auto b : packed)
        for (int i = 7; i >= 0; --i)
            bits.push_back((b >> i) & 1u);
    EXPECT_NEAR(entropy_estimate_symbols(bits, 0), testkit::binary_entropy(0.2), 0.01);
}

TEST(LossySpecTest, ParseAndPrint) {
    for (const char* s : {"none", "quant:8", "quant:4:layer", "sparsify:0.1"})
        EXPECT_EQ(LossySpec::parse(s).to_string(), s);
    EXPECT_EQ(LossySpec::parse("sign").to_string(), "quant:1");
    for (const char* bad : {"quant", "quant:0", "quant:17", "quant:8:x", "sparsify:0", "sparsify:2", "zip"})
        EXPECT_THROW(LossySpec::parse(bad), ConfigError) << bad;
}

TEST(Config, Validation) {
    const auto corpus = generator_corpus(1, 10);
    EXPECT_THROW(ExperimentConfig::from_json({{"corpus", corpus}, {"schemes", json::array()}}), ConfigError);
    EXPECT_THROW(ExperimentConfig::from_json({{"corpus", corpus}, {"repeats", 0}}), ConfigError);
    EXPECT_THROW(ExperimentConfig::from_json({{"corpus", corpus}, {"colour", "blue"}}), ConfigError);
    EXPECT_THROW(ExperimentConfig::from_json({{"schemes", {"iso"}}}), ConfigError);
    EXPECT_THROW(ExperimentConfig::from_json({{"corpus", corpus}, {"window_sizes", {0}}}), ConfigError);
    const auto c = small_config();
    const auto again = ExperimentConfig::from_json(c.to_json());
    EXPECT_EQ(again.to_json(), c.to_json());
}

TEST(Experiment, SingleRowSanity) {
    const auto rows = run_experiment(small_config());
    ASSERT_EQ(rows.size(), 1u);
    const auto& r = rows[0];
    EXPECT_TRUE(r.ok()) << r.status;
    EXPECT_GT(r.rate_percent, 0.0);
    EXPECT_LE(r.rate_percent, 200.0);
    EXPECT_EQ(r.rate_percent, compression_rate(r.original_size, r.compressed_size));
    EXPECT_EQ(r.original_size, 8000u);
    EXPECT_EQ(r.symbol_count, symbol_count(Scheme::default_scheme(), 8000));
}

TEST(Experiment, CrossProductOrderAndRecompute) {
    auto c = ExperimentConfig::from_json({{"corpus", generator_corpus(4, 1500)},
                                          {"sample", 2},
                                          {"schemes", {"iso", "hex:space:4"}},
                                          {"models", {"static", "order1"}},
                                          {"window_sizes", {256, 1024}},
                                          {"lossy", {"none", "quant:8"}},
                                          {"baselines", {"deflate", "deflate:chunked", "flac"}},
                                          {"repeats", 3},
                                          {"seed", 5}});
    const auto rows = run_experiment(c);
    ASSERT_EQ(rows.size(), 2u * (2 * 2 * 2 + 3));
    EXPECT_EQ(rows[0].scheme, "iso");
    EXPECT_EQ(rows[0].model, "static");
    EXPECT_EQ(rows[0].window, 256u);
    EXPECT_EQ(rows[8].codec, "deflate:unchunked");
    EXPECT_EQ(rows[10].status.rfind("skipped:codec-unavailable", 0), 0u) << rows[10].status;
    EXPECT_EQ(rows[11].lossy, "quant:8");
    for (const auto& r : rows) {
        if (!r.ok())
            continue;
        EXPECT_EQ(r.repeats, 3u);
        EXPECT_EQ(r.rate_percent, compression_rate(r.original_size, r.compressed_size));
        EXPECT_GE(r.std_dev, 0.0);
    }
    // Sub-samples differ across repeats, so some rows must show spread.
    EXPECT_GT(rows[2].std_dev, 0.0);

    c.threads = 4;
    const auto parallel = run_experiment(c);
    ASSERT_EQ(parallel.size(), rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        EXPECT_EQ(parallel[i].compressed_size, rows[i].compressed_size) << i;
        EXPECT_EQ(parallel[i].status, rows[i].status) << i;
    }
}

TEST(Experiment, BridgeRowsSkipWithoutServer) {
    ::unsetenv("LMGC_BRIDGE");
    auto c = small_config();
    c.models = {ModelSpec::parse("bridge")};
    const auto rows = run_experiment(c);
    ASSERT_EQ(rows.size(), 1u);
    EXPECT_EQ(rows[0].status.rfind("skipped:bridge-unavailable", 0), 0u) << rows[0].status;
}

TEST(Experiment, BridgeRowsRunAgainstExecServer) {
    auto c = small_config();
    c.models = {ModelSpec::parse("bridge")};
    c.bridge_endpoint = std::string("exec:") + LMGC_FAKE_BRIDGE_PATH;
    const auto rows = run_experiment(c);
    ASSERT_EQ(rows.size(), 1u);
    EXPECT_TRUE(rows[0].ok()) << rows[0].status;
    EXPECT_EQ(rows[0].model_fingerprint, "000000005eed0001");
}

TEST(Experiment, OrderZeroRowNearEmpiricalEntropy) {
    auto c = ExperimentConfig::from_json({{"corpus", generator_corpus(1, 1 << 18)},
                                          {"schemes", {"iso"}},
                                          {"models", {"order0"}},
                                          {"window_sizes", {1 << 16}}});
    const auto rows = run_experiment(c);
    ASSERT_TRUE(rows[0].ok());
    const auto blob = c.corpus.materialize(c.corpus.entries[0]);
    const double h0 = entropy_estimate(blob.bytes, 0);
    const double n = static_cast<double>(blob.bytes.size());
    const double windows = std::ceil(n / (1 << 16));
    const double overhead_bits = 8.0 * (BitstreamHeader::kSize + windows * 5);
    EXPECT_LE(8.0 * rows[0].compressed_size, n * h0 * 1.01 + overhead_bits);
}

TEST(Experiment, LossyRowsAreSmallerThanLossyAlone) {
    const json layered = {{"format_version", 1},
                          {"entries",
                           {{{"name", "layered"},
                             {"generator",
                              {{"layer_sizes", {8192, 8192, 8192, 8192}},
                               {"scale_per_layer", {1e-2, 1e-3, 3e-4, 1e-4}}}},
                             {"seed", 3}}}}};
    auto c = ExperimentConfig::from_json({{"corpus", layered},
                                          {"schemes", {"hex:space:4"}},
                                          {"models", {"order2"}},
                                          {"window_sizes", {4096}},
                                          {"lossy", {"quant:8", "sparsify:0.1"}},
                                          {"baselines", {"raw"}}});
    const auto rows = run_experiment(c);
    ASSERT_EQ(rows.size(), 4u);
    EXPECT_LT(rows[0].compressed_size, rows[1].compressed_size);
    EXPECT_LT(rows[2].compressed_size, rows[3].compressed_size);
}

TEST(Report, CsvAndJson) {
    const auto c = small_config();
    const auto rows = run_experiment(c);
    std::ostringstream csv;
    write_csv(csv, rows);
    const auto text = csv.str();
    EXPECT_EQ(text.rfind("method,scheme,model,window,lossy,codec,repeats,original_size,compressed_size,rate_percent", 0),
              0u);
    EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 2);
    const auto j = report_json(c, rows);
    EXPECT_EQ(j.at("rows").size(), 1u);
    EXPECT_TRUE(j.at("environment").contains("compiler"));
    EXPECT_EQ(j.at("config").at("models")[0], "order0");
}
