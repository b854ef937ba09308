#include "lmgc/tensor_io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>
#include <random>
#include <set>

#include "lmgc/errors.hpp"

namespace lmgc {

static_assert(std::endian::native == std::endian::little, "on-disk float data is little-endian");

float GradientBlob::element(std::size_t i) const {
    std::uint32_t bits = 0;
    std::memcpy(&bits, bytes.data() + 4 * i, 4);
    return std::bit_cast<float>(bits);
}

std::vector<float> GradientBlob::to_floats() const {
    std::vector<float> out(element_count());
    std::memcpy(out.data(), bytes.data(), out.size() * 4);
    return out;
}

GradientBlob GradientBlob::from_floats(std::span<const float> values, std::string source) {
    GradientBlob blob;
    blob.bytes.resize(values.size() * 4);
    std::memcpy(blob.bytes.data(), values.data(), blob.bytes.size());
    blob.source = std::move(source);
    return blob;
}

GradientBlob load_blob(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open " + path.string());
    GradientBlob blob;
    blob.bytes.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
    if (in.bad())
        throw IoError("read failed: " + path.string());
    if (auto residue = blob.bytes.size() % 4; residue != 0)
        throw FormatError(path.string() + ": size " + std::to_string(blob.bytes.size()) +
                          " is not a multiple of 4 (residue " + std::to_string(residue) + ")");
    blob.source = path.string();
    return blob;
}

void write_blob(const std::filesystem::path& path, const GradientBlob& blob) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw IoError("cannot create " + path.string());
    out.write(reinterpret_cast<const char*>(blob.bytes.data()), static_cast<std::streamsize>(blob.bytes.size()));
    if (!out)
        throw IoError("write failed: " + path.string());
}

// ---------------------------------------------------------------------------
// Generator

std::size_t GeneratorSpec::element_count() const {
    std::size_t n = 0;
    for (auto s : layer_sizes)
        n += s;
    return n;
}

void GeneratorSpec::validate() const {
    if (layer_sizes.empty())
        throw ConfigError("generator spec: layer_sizes is empty");
    if (scale_per_layer.size() != layer_sizes.size() && scale_per_layer.size() != 1)
        throw ConfigError("generator spec: scale_per_layer must have one entry or one per layer");
    for (double s : scale_per_layer)
        if (!(s > 0.0) || !std::isfinite(s))
            throw ConfigError("generator spec: scales must be positive and finite");
    if (!(sparsity_fraction >= 0.0 && sparsity_fraction <= 1.0))
        throw ConfigError("generator spec: sparsity_fraction must lie in [0, 1]");
}

GeneratorSpec GeneratorSpec::from_json(const nlohmann::json& j) {
    GeneratorSpec spec;
    try {
        spec.layer_sizes = j.at("layer_sizes").get<std::vector<std::size_t>>();
        if (j.contains("scale_per_layer"))
            spec.scale_per_layer = j.at("scale_per_layer").get<std::vector<double>>();
        else
            spec.scale_per_layer = {1.0};
        auto dist = j.value("distribution", std::string("gaussian"));
        if (dist == "gaussian")
            spec.distribution = Distribution::gaussian;
        else if (dist == "laplace")
            spec.distribution = Distribution::laplace;
        else
            throw ConfigError("generator spec: unknown distribution '" + dist + "'");
        spec.sparsity_fraction = j.value("sparsity_fraction", 0.0);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("generator spec: ") + e.what());
    }
    spec.validate();
    return spec;
}

nlohmann::json GeneratorSpec::to_json() const {
    return {
        {"layer_sizes", layer_sizes},
        {"scale_per_layer", scale_per_layer},
        {"distribution", distribution == Distribution::gaussian ? "gaussian" : "laplace"},
        {"sparsity_fraction", sparsity_fraction},
    };
}

namespace {

// Uniform in (0, 1), never exactly 0 so log() is safe.
double open_uniform(std::mt19937_64& rng) {
    return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

// Unbiased integer in [0, bound) by rejection.
std::uint64_t bounded(std::mt19937_64& rng, std::uint64_t bound) {
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t x;
    do {
        x = rng();
    } while (x >= limit);
    return x % bound;
}

} // namespace

GradientBlob synth_gradients(const GeneratorSpec& spec, std::uint64_t seed) {
    spec.validate();
    std::mt19937_64 rng(seed);
    std::vector<float> values;
    values.reserve(spec.element_count());

    for (std::size_t layer = 0; layer < spec.layer_sizes.size(); ++layer) {
        const std::size_t size = spec.layer_sizes[layer];
        const double scale = spec.scale_per_layer.size() == 1 ? spec.scale_per_layer[0]
                                                               : spec.scale_per_layer[layer];
        const std::size_t begin = values.size();

        if (spec.distribution == Distribution::gaussian) {
            for (std::size_t i = 0; i < size; i += 2) {
                const double r = std::sqrt(-2.0 * std::log(open_uniform(rng)));
                const double theta = 2.0 * std::numbers::pi * open_uniform(rng);
                values.push_back(static_cast<float>(scale * r * std::cos(theta)));
                if (i + 1 < size)
                    values.push_back(static_cast<float>(scale * r * std::sin(theta)));
            }
        } else {
            // Laplace(0, b) with b chosen so the standard deviation equals `scale`.
            const double b = scale / std::numbers::sqrt2;
            for (std::size_t i = 0; i < size; ++i) {
                const double u = open_uniform(rng) - 0.5;
                const double v = -b * std::copysign(1.0, u) * std::log(1.0 - 2.0 * std::abs(u));
                values.push_back(static_cast<float>(v));
            }
        }

        const auto zeroed = static_cast<std::size_t>(std::llround(spec.sparsity_fraction * static_cast<double>(size)));
        if (zeroed > 0) {
            std::vector<std::size_t> order(size);
            for (std::size_t i = 0; i < size; ++i)
                order[i] = i;
            for (std::size_t i = 0; i < zeroed; ++i) {
                const std::size_t j = i + static_cast<std::size_t>(bounded(rng, size - i));
                std::swap(order[i], order[j]);
                values[begin + order[i]] = 0.0f;
            }
        }
    }

    auto blob = GradientBlob::from_floats(values);
    blob.source = "synth:" + spec.to_json().dump() + ":seed=" + std::to_string(seed);
    return blob;
}

// ---------------------------------------------------------------------------
// Corpus manifest

CorpusManifest CorpusManifest::from_json(const nlohmann::json& j, const std::filesystem::path& base_dir) {
    CorpusManifest m;
    try {
        m.format_version = j.at("format_version").get<int>();
        if (m.format_version != kFormatVersion)
            throw FormatError("manifest: unsupported format_version " + std::to_string(m.format_version));
        std::set<std::string> names;
        for (const auto& e : j.at("entries")) {
            CorpusEntry entry;
            entry.name = e.at("name").get<std::string>();
            if (!names.insert(entry.name).second)
                throw FormatError("manifest: duplicate entry name '" + entry.name + "'");
            if (e.contains("path")) {
                std::filesystem::path p = e.at("path").get<std::string>();
                if (p.is_relative() && !base_dir.empty())
                    p = base_dir / p;
                if (!std::filesystem::exists(p))
                    throw IoError("manifest: entry '" + entry.name + "' path does not exist: " + p.string());
                entry.path = p;
                entry.element_count = std::filesystem::file_size(p) / 4;
            } else if (e.contains("generator")) {
                entry.generator = GeneratorSpec::from_json(e.at("generator"));
                entry.seed = e.value("seed", std::uint64_t{0});
                entry.element_count = entry.generator->element_count();
            } else {
                throw FormatError("manifest: entry '" + entry.name + "' needs 'path' or 'generator'");
            }
            if (e.contains("element_count") && e.at("element_count").get<std::size_t>() != entry.element_count)
                throw FormatError("manifest: entry '" + entry.name + "' element_count does not match its data");
            m.entries.push_back(std::move(entry));
        }
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("manifest: ") + e.what());
    }
    return m;
}

CorpusManifest CorpusManifest::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open manifest " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError("manifest " + path.string() + ": " + e.what());
    }
    return from_json(j, path.parent_path());
}

nlohmann::json CorpusManifest::to_json() const {
    nlohmann::json entries_json = nlohmann::json::array();
    for (const auto& e : entries) {
        nlohmann::json je = {{"name", e.name}, {"element_count", e.element_count}};
        if (e.path)
            je["path"] = e.path->string();
        if (e.generator) {
            je["generator"] = e.generator->to_json();
            je["seed"] = e.seed;
        }
        entries_json.push_back(std::move(je));
    }
    return {{"format_version", format_version}, {"entries", std::move(entries_json)}};
}

GradientBlob CorpusManifest::materialize(const CorpusEntry& entry) const {
    if (entry.path)
        return load_blob(*entry.path);
    return synth_gradients(*entry.generator, entry.seed);
}

std::vector<std::size_t> CorpusManifest::subsample(std::size_t count, std::uint64_t seed) const {
    std::vector<std::size_t> idx(entries.size());
    for (std::size_t i = 0; i < idx.size(); ++i)
        idx[i] = i;
    if (count == 0 || count >= idx.size())
        return idx;
    std::mt19937_64 rng(seed);
    for (std::size_t i = 0; i < count; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(bounded(rng, idx.size() - i));
        std::swap(idx[i], idx[j]);
    }
    idx.resize(count);
    std::sort(idx.begin(), idx.end());
    return idx;
}

} // namespace lmgc
