#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

namespace lmgc {

/// Flat little-endian binary32 buffer. The unit of compression.
struct GradientBlob {
    std::vector<std::uint8_t> bytes;
    std::string source;

    std::size_t element_count() const noexcept { return bytes.size() / 4; }

    /// Decodes element i. Bit patterns are copied, so NaN payloads survive.
    float element(std::size_t i) const;
    std::vector<float> to_floats() const;

    static GradientBlob from_floats(std::span<const float> values, std::string source = {});
};

enum class Distribution { gaussian, laplace };

struct GeneratorSpec {
    std::vector<std::size_t> layer_sizes;
    std::vector<double> scale_per_layer;
    Distribution distribution = Distribution::gaussian;
    double sparsity_fraction = 0.0;

    std::size_t element_count() const;
    void validate() const;

    static GeneratorSpec from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;
};

GradientBlob load_blob(const std::filesystem::path& path);
void write_blob(const std::filesystem::path& path, const GradientBlob& blob);

/// Deterministic synthetic gradients.
///
/// Randomness comes from std::mt19937_64 seeded with `seed`; its output
/// sequence is fixed by the C++ standard. Normal deviates use the polar-free
/// Box-Muller transform on 53-bit uniforms, Laplace deviates use the inverse
/// CDF, and sparsity zeroes exactly round(fraction * layer_size) entries per
/// layer chosen by a partial Fisher-Yates shuffle. None of the std::*_distribution
/// classes are used, so blobs only depend on the generator and the libm
/// implementation of log/sin/cos.
GradientBlob synth_gradients(const GeneratorSpec& spec, std::uint64_t seed);

struct CorpusEntry {
    std::string name;
    std::optional<std::filesystem::path> path;
    std::optional<GeneratorSpec> generator;
    std::uint64_t seed = 0;
    std::size_t element_count = 0;
};

struct CorpusManifest {
    static constexpr int kFormatVersion = 1;

    int format_version = kFormatVersion;
    std::vector<CorpusEntry> entries;

    /// Paths in the JSON are resolved against `base_dir`.
    static CorpusManifest from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
    static CorpusManifest load(const std::filesystem::path& path);
    nlohmann::json to_json() const;

    GradientBlob materialize(const CorpusEntry& entry) const;

    /// Seed-controlled uniform sub-sample of `count` entries, returned in
    /// manifest order. count == 0 or count >= size selects everything.
    std::vector<std::size_t> subsample(std::size_t count, std::uint64_t seed) const;
};

} // namespace lmgc
