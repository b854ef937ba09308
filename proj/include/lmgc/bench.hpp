#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "lmgc/baselines.hpp"
#include "lmgc/models.hpp"
#include "lmgc/serializer.hpp"
#include "lmgc/tensor_io.hpp"

namespace lmgc {

/// 100 * compressed / original. Throws ContractViolation when original is 0.
double compression_rate(std::uint64_t original_size, std::uint64_t compressed_size);

/// Plug-in conditional entropy H(X_i | X_{i-order..i-1}) over positions that
/// have a full context, in bits per symbol. order is 0..2.
double entropy_estimate(std::span<const std::uint8_t> data, unsigned order);
double entropy_estimate_symbols(std::span<const std::uint32_t> symbols, unsigned order);

/// A lossy stage applied before lossless coding.
struct LossySpec {
    enum class Kind { none, quant, sparsify };
    Kind kind = Kind::none;
    unsigned bits = 8;
    double proportion = 1.0;
    bool per_layer = false;

    /// "none", "quant:<n>", "quant:<n>:layer", "sign" (= quant:1), "sparsify:<p>".
    static LossySpec parse(std::string_view text);
    std::string to_string() const;

    /// The packed lossy representation that lossless coding sees; raw blob
    /// bytes for Kind::none. layer_sizes is only used when per_layer is set.
    std::vector<std::uint8_t> apply(const GradientBlob& blob, std::span<const std::size_t> layer_sizes) const;
};

struct ExperimentConfig {
    CorpusManifest corpus;
    /// Entries drawn per repeat; 0 uses the whole corpus.
    std::size_t sample = 0;
    std::vector<Scheme> schemes = {Scheme::default_scheme()};
    std::vector<ModelSpec> models = {ModelSpec{}};
    std::vector<std::uint32_t> window_sizes = {2048};
    std::vector<LossySpec> lossy = {LossySpec{}};
    std::vector<CodecAdapter> baselines;
    unsigned repeats = 1;
    std::uint64_t seed = 0;
    /// Grid points run concurrently; 0 picks the hardware concurrency.
    unsigned threads = 1;
    /// Used by bridge models that name no endpoint of their own.
    std::string bridge_endpoint;

    void validate() const;

    /// `corpus` may be an inline manifest object or a path relative to base_dir.
    static ExperimentConfig from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
    nlohmann::json to_json() const;
};

struct ReportRow {
    std::string method; // "lmgc" or "baseline"
    std::string scheme;
    std::string model;
    std::uint32_t window = 0;
    std::string lossy;
    std::string codec;
    unsigned repeats = 0;
    std::uint64_t original_size = 0;
    std::uint64_t compressed_size = 0;
    double rate_percent = 0.0;
    double std_dev = 0.0;
    double wall_time_s = 0.0;
    /// Serialized symbol count (a tokenizer-free proxy for token usage).
    std::uint64_t symbol_count = 0;
    std::string model_fingerprint;
    /// "ok", "skipped:<reason>" or "failed:<reason>".
    std::string status = "ok";

    bool ok() const { return status == "ok"; }
};

/// Runs the full cross-product. Sizes and rates sum over repeats, so
/// rate_percent == compression_rate(original_size, compressed_size); std_dev is
/// the sample standard deviation of the per-repeat rates. Every ok row has
/// passed a decode-and-compare check of its lossless stage.
std::vector<ReportRow> run_experiment(const ExperimentConfig& config);

void write_csv(std::ostream& out, const std::vector<ReportRow>& rows);
nlohmann::json report_json(const ExperimentConfig& config, const std::vector<ReportRow>& rows);
nlohmann::json environment_fingerprint();

} // namespace lmgc
