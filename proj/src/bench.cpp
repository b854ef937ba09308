#include "lmgc/bench.hpp"

#include <sys/utsname.h>

#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>
#include <unordered_map>

#include "lmgc/bridge.hpp"
#include "lmgc/codec.hpp"
#include "lmgc/errors.hpp"
#include "lmgc/lossy.hpp"

namespace lmgc {

using nlohmann::json;

double compression_rate(std::uint64_t original_size, std::uint64_t compressed_size) {
    if (original_size == 0)
        throw ContractViolation("compression_rate: original size is zero");
    return 100.0 * static_cast<double>(compressed_size) / static_cast<double>(original_size);
}

double entropy_estimate_symbols(std::span<const std::uint32_t> symbols, unsigned order) {
    if (order > 2)
        throw ContractViolation("entropy_estimate: order must be 0..2");
    if (symbols.size() <= order)
        return 0.0;
    constexpr unsigned kFieldBits = 21;
    std::unordered_map<std::uint64_t, std::uint64_t> joint;
    std::unordered_map<std::uint64_t, std::uint64_t> context;
    for (std::size_t i = order; i < symbols.size(); ++i) {
        std::uint64_t ctx = 0;
        for (unsigned k = 1; k <= order; ++k)
            ctx = (ctx << kFieldBits) | symbols[i - k];
        if (symbols[i] >> kFieldBits)
            throw ContractViolation("entropy_estimate: symbol id exceeds 2^21");
        ++joint[(ctx << kFieldBits) | symbols[i]];
        ++context[ctx];
    }
    const double n = static_cast<double>(symbols.size() - order);
    double h = 0.0;
    for (const auto& [key, count] : joint) {
        const double c = static_cast<double>(count);
        h -= c * std::log2(c / static_cast<double>(context.at(key >> kFieldBits)));
    }
    return h / n;
}

double entropy_estimate(std::span<const std::uint8_t> data, unsigned order) {
    std::vector<std::uint32_t> symbols(data.begin(), data.end());
    return entropy_estimate_symbols(symbols, order);
}

// ---------------------------------------------------------------------------

LossySpec LossySpec::parse(std::string_view text) {
    LossySpec s;
    auto fail = [&] { return ConfigError("bad lossy spec '" + std::string(text) + "'"); };
    if (text == "none")
        return s;
    if (text == "sign") {
        s.kind = Kind::quant;
        s.bits = 1;
        return s;
    }
    std::vector<std::string> parts;
    std::stringstream ss{std::string(text)};
    for (std::string p; std::getline(ss, p, ':');)
        parts.push_back(p);
    try {
        if (parts.size() >= 2 && parts.size() <= 3 && parts[0] == "quant") {
            s.kind = Kind::quant;
            std::size_t used = 0;
            const int bits = std::stoi(parts[1], &used);
            if (used != parts[1].size() || bits < 1 || bits > 16)
                throw fail();
            s.bits = static_cast<unsigned>(bits);
            if (parts.size() == 3) {
                if (parts[2] != "layer")
                    throw fail();
                s.per_layer = true;
            }
            return s;
        }
        if (parts.size() == 2 && parts[0] == "sparsify") {
            s.kind = Kind::sparsify;
            std::size_t used = 0;
            s.proportion = std::stod(parts[1], &used);
            if (used != parts[1].size() || !(s.proportion > 0.0 && s.proportion <= 1.0))
                throw fail();
            return s;
        }
    } catch (const std::logic_error&) {
        throw fail();
    }
    throw fail();
}

std::string LossySpec::to_string() const {
    switch (kind) {
    case Kind::none: return "none";
    case Kind::quant: return "quant:" + std::to_string(bits) + (per_layer ? ":layer" : "");
    case Kind::sparsify: {
        char buf[32];
        const auto res = std::to_chars(buf, buf + sizeof buf, proportion);
        return "sparsify:" + std::string(buf, res.ptr);
    }
    }
    return "?";
}

std::vector<std::uint8_t> LossySpec::apply(const GradientBlob& blob, std::span<const std::size_t> layer_sizes) const {
    if (kind == Kind::none)
        return blob.bytes;
    const auto values = blob.to_floats();
    if (kind == Kind::sparsify)
        return pack(sparsify_topk(values, proportion));
    if (per_layer) {
        const std::size_t whole[] = {values.size()};
        const auto layers = quantize_linear_per_layer(
            values, layer_sizes.empty() ? std::span<const std::size_t>(whole) : layer_sizes, bits);
        return pack(std::span<const QuantizedTensor>(layers));
    }
    return pack(quantize_linear(values, bits));
}

// ---------------------------------------------------------------------------

void ExperimentConfig::validate() const {
    if (corpus.entries.empty())
        throw ConfigError("experiment corpus is empty");
    if (schemes.empty() || models.empty() || window_sizes.empty() || lossy.empty())
        throw ConfigError("schemes, models, window_sizes and lossy must be nonempty");
    if (repeats < 1)
        throw ConfigError("repeats must be at least 1");
    for (const auto& s : schemes)
        s.validate();
    for (auto w : window_sizes)
        if (w == 0)
            throw ConfigError("window sizes must be positive");
    for (const auto& b : baselines)
        if (b.chunk_size == 0)
            throw ConfigError("baseline chunk size must be positive");
}

namespace {

template <typename T, typename F>
std::vector<T> parse_list(const json& j, const char* key, F parse) {
    if (!j.is_array())
        throw ConfigError(std::string("'") + key + "' must be an array");
    std::vector<T> out;
    for (const auto& item : j)
        out.push_back(parse(item));
    return out;
}

} // namespace

ExperimentConfig ExperimentConfig::from_json(const json& j, const std::filesystem::path& base_dir) {
    if (!j.is_object())
        throw ConfigError("experiment config must be a JSON object");
    static const std::set<std::string> known = {"corpus",    "sample", "schemes", "models",  "window_sizes",
                                                "lossy",     "baselines", "repeats", "seed", "threads",
                                                "bridge_endpoint", "chunk_size"};
    for (const auto& [key, _] : j.items())
        if (!known.count(key))
            throw ConfigError("unknown experiment config key '" + key + "'");

    ExperimentConfig c;
    try {
        if (!j.contains("corpus"))
            throw ConfigError("experiment config needs a 'corpus'");
        const auto& corpus = j.at("corpus");
        if (corpus.is_string()) {
            std::filesystem::path p = corpus.get<std::string>();
            c.corpus = CorpusManifest::load(p.is_absolute() ? p : base_dir / p);
        } else {
            c.corpus = CorpusManifest::from_json(corpus, base_dir);
        }
        if (j.contains("sample"))
            c.sample = j.at("sample").get<std::size_t>();
        if (j.contains("schemes"))
            c.schemes = parse_list<Scheme>(j.at("schemes"), "schemes",
                                           [](const json& x) { return Scheme::parse(x.get<std::string>()); });
        if (j.contains("models"))
            c.models = parse_list<ModelSpec>(j.at("models"), "models",
                                             [](const json& x) { return ModelSpec::parse(x.get<std::string>()); });
        if (j.contains("window_sizes"))
            c.window_sizes = parse_list<std::uint32_t>(j.at("window_sizes"), "window_sizes",
                                                       [](const json& x) { return x.get<std::uint32_t>(); });
        if (j.contains("lossy"))
            c.lossy = parse_list<LossySpec>(j.at("lossy"), "lossy",
                                            [](const json& x) { return LossySpec::parse(x.get<std::string>()); });
        if (j.contains("baselines"))
            c.baselines = parse_list<CodecAdapter>(j.at("baselines"), "baselines", [](const json& x) {
                return CodecAdapter::parse(x.get<std::string>());
            });
        if (j.contains("chunk_size"))
            for (auto& b : c.baselines)
                b.chunk_size = j.at("chunk_size").get<std::size_t>();
        if (j.contains("repeats"))
            c.repeats = j.at("repeats").get<unsigned>();
        if (j.contains("seed"))
            c.seed = j.at("seed").get<std::uint64_t>();
        if (j.contains("threads"))
            c.threads = j.at("threads").get<unsigned>();
        if (j.contains("bridge_endpoint"))
            c.bridge_endpoint = j.at("bridge_endpoint").get<std::string>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("experiment config: ") + e.what());
    }
    c.validate();
    return c;
}

json ExperimentConfig::to_json() const {
    json j;
    j["corpus"] = corpus.to_json();
    j["sample"] = sample;
    for (const auto& s : schemes)
        j["schemes"].push_back(s.to_string());
    for (const auto& m : models)
        j["models"].push_back(m.to_string());
    j["window_sizes"] = window_sizes;
    for (const auto& l : lossy)
        j["lossy"].push_back(l.to_string());
    j["baselines"] = json::array();
    for (const auto& b : baselines)
        j["baselines"].push_back(b.to_string());
    if (!baselines.empty())
        j["chunk_size"] = baselines.front().chunk_size;
    j["repeats"] = repeats;
    j["seed"] = seed;
    j["threads"] = threads;
    j["bridge_endpoint"] = bridge_endpoint;
    return j;
}

// ---------------------------------------------------------------------------

namespace {

struct GridPoint {
    const LossySpec* lossy = nullptr;
    const Scheme* scheme = nullptr;
    const ModelSpec* model = nullptr;
    std::uint32_t window = 0;
    const CodecAdapter* baseline = nullptr;
};

struct Corpus {
    std::vector<GradientBlob> blobs;
    std::vector<std::vector<std::size_t>> layer_sizes;
    std::vector<std::vector<std::size_t>> draws; // per repeat
};

std::string hex64(std::uint64_t v) {
    std::ostringstream os;
    os << std::hex;
    os.width(16);
    os.fill('0');
    os << v;
    return os.str();
}

class Stopwatch {
public:
    Stopwatch() : start_(std::chrono::steady_clock::now()) {}
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_;
};

ReportRow run_point(const ExperimentConfig& config, const Corpus& corpus, const GridPoint& p) {
    ReportRow row;
    row.lossy = p.lossy->to_string();
    row.repeats = config.repeats;
    if (p.baseline) {
        row.method = "baseline";
        row.codec = p.baseline->to_string();
    } else {
        row.method = "lmgc";
        row.scheme = p.scheme->to_string();
        row.model = p.model->to_string();
        row.window = p.window;
    }

    CompressOptions copts;
    DecompressOptions dopts;
    if (!p.baseline) {
        copts.scheme = *p.scheme;
        copts.model = *p.model;
        copts.window_size = p.window;
        dopts.static_pmf = p.model->static_pmf;
        if (p.model->kind == ModelKind::bridge) {
            try {
                const std::string ep =
                    p.model->bridge_endpoint.empty() ? config.bridge_endpoint : p.model->bridge_endpoint;
                copts.bridge = bridge::Connection::open(bridge::resolve_endpoint(ep));
                dopts.bridge = copts.bridge;
            } catch (const ModelUnavailable& e) {
                row.status = std::string("skipped:bridge-unavailable: ") + e.what();
                return row;
            }
        }
    }

    std::vector<double> rates;
    double coder_seconds = 0.0;
    try {
        for (unsigned r = 0; r < config.repeats; ++r) {
            std::uint64_t orig = 0;
            std::uint64_t comp = 0;
            for (auto idx : corpus.draws[r]) {
                const GradientBlob& blob = corpus.blobs[idx];
                const auto input = p.lossy->apply(blob, corpus.layer_sizes[idx]);
                std::vector<std::uint8_t> packed;
                std::vector<std::uint8_t> restored;
                Stopwatch sw;
                if (p.baseline) {
                    packed = p.baseline->compress(input);
                    coder_seconds += sw.seconds();
                    restored = p.baseline->decompress(packed);
                } else {
                    const Bitstream bs = compress_to_bitstream(input, copts);
                    coder_seconds += sw.seconds();
                    packed = bs.to_bytes();
                    row.model_fingerprint = hex64(bs.header.model_fingerprint);
                    restored = decompress(packed, dopts);
                    row.symbol_count += symbol_count(*p.scheme, input.size());
                }
                if (restored != input)
                    throw VerificationError("decode-and-compare mismatch on " + blob.source);
                orig += blob.bytes.size();
                comp += packed.size();
            }
            row.original_size += orig;
            row.compressed_size += comp;
            rates.push_back(compression_rate(orig, comp));
        }
    } catch (const CodecUnavailable& e) {
        row.status = std::string("skipped:codec-unavailable: ") + e.what();
        return row;
    } catch (const ModelUnavailable& e) {
        row.status = std::string("skipped:bridge-unavailable: ") + e.what();
        return row;
    } catch (const VerificationError& e) {
        row.status = std::string("failed:verification: ") + e.what();
        return row;
    } catch (const CorruptStream& e) {
        row.status = std::string("failed:verification: ") + e.what();
        return row;
    } catch (const Error& e) {
        row.status = std::string("failed:") + e.what();
        return row;
    }

    row.rate_percent = compression_rate(row.original_size, row.compressed_size);
    if (rates.size() > 1) {
        const double mean = std::accumulate(rates.begin(), rates.end(), 0.0) / static_cast<double>(rates.size());
        double ss = 0.0;
        for (double x : rates)
            ss += (x - mean) * (x - mean);
        row.std_dev = std::sqrt(ss / static_cast<double>(rates.size() - 1));
    }
    row.wall_time_s = coder_seconds / config.repeats;
    return row;
}

} // namespace

std::vector<ReportRow> run_experiment(const ExperimentConfig& config) {
    config.validate();

    Corpus corpus;
    std::set<std::size_t> needed;
    for (unsigned r = 0; r < config.repeats; ++r) {
        corpus.draws.push_back(config.corpus.subsample(config.sample, config.seed + r));
        needed.insert(corpus.draws.back().begin(), corpus.draws.back().end());
    }
    corpus.blobs.resize(config.corpus.entries.size());
    corpus.layer_sizes.resize(config.corpus.entries.size());
    for (auto idx : needed) {
        const auto& entry = config.corpus.entries[idx];
        corpus.blobs[idx] = config.corpus.materialize(entry);
        if (entry.generator)
            corpus.layer_sizes[idx] = entry.generator->layer_sizes;
    }

    std::vector<GridPoint> points;
    for (const auto& l : config.lossy) {
        for (const auto& s : config.schemes)
            for (const auto& m : config.models)
                for (auto w : config.window_sizes)
                    points.push_back({&l, &s, &m, w, nullptr});
        for (const auto& b : config.baselines)
            points.push_back({&l, nullptr, nullptr, 0, &b});
    }

    std::vector<ReportRow> rows(points.size());
    unsigned workers = config.threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : config.threads;
    workers = std::min<unsigned>(workers, static_cast<unsigned>(points.size()));
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i = next++; i < points.size(); i = next++)
            rows[i] = run_point(config, corpus, points[i]);
    };
    if (workers <= 1) {
        work();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned t = 0; t < workers; ++t)
            pool.emplace_back(work);
    }
    return rows;
}

// ---------------------------------------------------------------------------

namespace {

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos)
        return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"')
            out += '"';
        out += c;
    }
    return out + "\"";
}

std::string fmt_double(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

} // namespace

void write_csv(std::ostream& out, const std::vector<ReportRow>& rows) {
    out << "method,scheme,model,window,lossy,codec,repeats,original_size,compressed_size,rate_percent,std_dev,"
           "wall_time_s,symbol_count,model_fingerprint,status\n";
    for (const auto& r : rows) {
        out << csv_field(r.method) << ',' << csv_field(r.scheme) << ',' << csv_field(r.model) << ','
            << (r.window ? std::to_string(r.window) : "") << ',' << csv_field(r.lossy) << ',' << csv_field(r.codec)
            << ',' << r.repeats << ',' << r.original_size << ',' << r.compressed_size << ','
            << fmt_double(r.rate_percent) << ',' << fmt_double(r.std_dev) << ',' << fmt_double(r.wall_time_s) << ','
            << r.symbol_count << ',' << r.model_fingerprint << ',' << csv_field(r.status) << '\n';
    }
}

json environment_fingerprint() {
    json env;
#if defined(__clang__)
    env["compiler"] = "clang " __clang_version__;
#elif defined(__GNUC__)
    env["compiler"] = "gcc " __VERSION__;
#endif
    env["cplusplus"] = __cplusplus;
    env["hardware_concurrency"] = std::thread::hardware_concurrency();
    utsname u{};
    if (uname(&u) == 0) {
        env["os"] = std::string(u.sysname) + " " + u.release;
        env["machine"] = u.machine;
    }
    env["codecs"] = available_codecs();
    return env;
}

json report_json(const ExperimentConfig& config, const std::vector<ReportRow>& rows) {
    json j;
    j["config"] = config.to_json();
    j["environment"] = environment_fingerprint();
    j["notes"] = "repeats vary only the corpus sub-sample seed (seed + repeat index); "
                 "symbol_count is the serialized symbol count, not an LLM token count";
    j["rows"] = json::array();
    for (const auto& r : rows) {
        j["rows"].push_back({{"method", r.method},
                             {"scheme", r.scheme},
                             {"model", r.model},
                             {"window", r.window},
                             {"lossy", r.lossy},
                             {"codec", r.codec},
                             {"repeats", r.repeats},
                             {"original_size", r.original_size},
                             {"compressed_size", r.compressed_size},
                             {"rate_percent", r.rate_percent},
                             {"std_dev", r.std_dev},
                             {"wall_time_s", r.wall_time_s},
                             {"symbol_count", r.symbol_count},
                             {"model_fingerprint", r.model_fingerprint},
                             {"status", r.status}});
    }
    return j;
}

} // namespace lmgc
