// lmgc: compress gradient blobs with serialization + arithmetic coding, and
// run benchmark grids.
//
// Every subcommand accepts --config <file.json>. Values in the file override
// built-in defaults and flags given on the command line override the file.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "lmgc/bench.hpp"
#include "lmgc/bitstream.hpp"
#include "lmgc/bridge.hpp"
#include "lmgc/codec.hpp"
#include "lmgc/errors.hpp"
#include "lmgc/serializer.hpp"
#include "lmgc/tensor_io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

enum Exit { kOk = 0, kFailure = 1, kVerification = 2, kConfig = 3, kBridge = 4 };

json read_json_file(const fs::path& path) {
    std::ifstream in(path);
    if (!in)
        throw lmgc::IoError("cannot open " + path.string());
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw lmgc::ConfigError(path.string() + ": " + e.what());
    }
}

std::vector<std::uint8_t> read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw lmgc::IoError("cannot open " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Writes through a temporary so a failed run never leaves a partial output.
void write_file(const fs::path& path, std::span<const std::uint8_t> data) {
    fs::path tmp = path;
    tmp += ".partial";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out)
            throw lmgc::IoError("cannot write " + path.string());
        out.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size()));
        if (!out)
            throw lmgc::IoError("short write to " + path.string());
    }
    fs::rename(tmp, path);
}

/// Config-file values with command-line flags layered on top.
class Settings {
public:
    void load(const std::string& config_path) {
        if (config_path.empty())
            return;
        values_ = read_json_file(config_path);
        if (!values_.is_object())
            throw lmgc::ConfigError(config_path + ": top level must be an object");
        base_dir_ = fs::absolute(config_path).parent_path();
    }

    template <typename T>
    void flag(const CLI::Option* opt, const std::string& key, const T& value) {
        if (opt->count() > 0)
            values_[key] = value;
    }

    template <typename T>
    T get(const std::string& key, const T& fallback) const {
        if (!values_.contains(key))
            return fallback;
        try {
            return values_.at(key).get<T>();
        } catch (const json::exception& e) {
            throw lmgc::ConfigError("config key '" + key + "': " + e.what());
        }
    }

    std::string require(const std::string& key) const {
        auto v = get<std::string>(key, "");
        if (v.empty())
            throw lmgc::ConfigError("missing required setting '" + key + "'");
        return v;
    }

    json& values() { return values_; }
    const fs::path& base_dir() const { return base_dir_; }

private:
    json values_ = json::object();
    fs::path base_dir_ = fs::current_path();
};

struct CompressArgs {
    std::string config, in, out, scheme, model, bridge;
    std::uint32_t window = 0;
    unsigned threads = 1;
    unsigned precision = 16;
    bool no_verify = false;
};

int run_compress(const CompressArgs& a, const CLI::App& cmd) {
    Settings s;
    s.load(a.config);
    s.flag(cmd.get_option("--in"), "in", a.in);
    s.flag(cmd.get_option("--out"), "out", a.out);
    s.flag(cmd.get_option("--scheme"), "scheme", a.scheme);
    s.flag(cmd.get_option("--model"), "model", a.model);
    s.flag(cmd.get_option("--window"), "window", a.window);
    s.flag(cmd.get_option("--threads"), "threads", a.threads);
    s.flag(cmd.get_option("--precision"), "precision", a.precision);
    s.flag(cmd.get_option("--bridge"), "bridge_endpoint", a.bridge);
    s.flag(cmd.get_option("--no-verify"), "verify", !a.no_verify);

    lmgc::CompressOptions opts;
    opts.scheme = lmgc::Scheme::parse(s.get<std::string>("scheme", opts.scheme.to_string()));
    opts.model = lmgc::ModelSpec::parse(s.get<std::string>("model", opts.model.to_string()));
    opts.model.precision_bits = s.get<unsigned>("precision", opts.model.precision_bits);
    if (opts.model.kind == lmgc::ModelKind::bridge && opts.model.bridge_endpoint.empty())
        opts.model.bridge_endpoint = s.get<std::string>("bridge_endpoint", "");
    opts.window_size = s.get<std::uint32_t>("window", opts.window_size);
    opts.threads = s.get<unsigned>("threads", opts.threads);
    if (opts.window_size == 0)
        throw lmgc::ConfigError("--window must be positive");

    const auto blob = lmgc::load_blob(s.require("in"));
    if (opts.model.kind == lmgc::ModelKind::bridge)
        opts.bridge = lmgc::bridge::Connection::open(lmgc::bridge::resolve_endpoint(opts.model.bridge_endpoint));
    const auto packed = lmgc::compress(blob.bytes, opts);

    if (s.get<bool>("verify", true)) {
        lmgc::DecompressOptions d;
        d.bridge = opts.bridge;
        d.threads = opts.threads;
        if (lmgc::decompress(packed, d) != blob.bytes)
            throw lmgc::VerificationError("round trip differs from input");
    }
    write_file(s.require("out"), packed);
    std::cout << blob.bytes.size() << " -> " << packed.size() << " bytes ("
              << lmgc::compression_rate(std::max<std::size_t>(blob.bytes.size(), 1), packed.size()) << "%)\n";
    return kOk;
}

struct DecompressArgs {
    std::string config, in, out, bridge;
    unsigned threads = 1;
};

int run_decompress(const DecompressArgs& a, const CLI::App& cmd) {
    Settings s;
    s.load(a.config);
    s.flag(cmd.get_option("--in"), "in", a.in);
    s.flag(cmd.get_option("--out"), "out", a.out);
    s.flag(cmd.get_option("--bridge"), "bridge_endpoint", a.bridge);
    s.flag(cmd.get_option("--threads"), "threads", a.threads);

    lmgc::DecompressOptions d;
    d.bridge_endpoint = s.get<std::string>("bridge_endpoint", "");
    d.threads = s.get<unsigned>("threads", 1u);
    const auto bytes = lmgc::decompress(read_file(s.require("in")), d);
    write_file(s.require("out"), bytes);
    return kOk;
}

struct BenchArgs {
    std::string config, out, json_out, corpus, bridge;
    std::vector<std::string> schemes, models, lossy, baselines;
    std::vector<std::uint32_t> windows;
    std::size_t sample = 0, chunk_size = 512;
    unsigned repeats = 1, threads = 1;
    std::uint64_t seed = 0;
};

int run_bench(const BenchArgs& a, const CLI::App& cmd) {
    Settings s;
    s.load(a.config);
    if (cmd.get_option("--corpus")->count() > 0)
        s.values()["corpus"] = fs::absolute(a.corpus).string();
    s.flag(cmd.get_option("--schemes"), "schemes", a.schemes);
    s.flag(cmd.get_option("--models"), "models", a.models);
    s.flag(cmd.get_option("--windows"), "window_sizes", a.windows);
    s.flag(cmd.get_option("--lossy"), "lossy", a.lossy);
    s.flag(cmd.get_option("--baselines"), "baselines", a.baselines);
    s.flag(cmd.get_option("--chunk-size"), "chunk_size", a.chunk_size);
    s.flag(cmd.get_option("--sample"), "sample", a.sample);
    s.flag(cmd.get_option("--repeats"), "repeats", a.repeats);
    s.flag(cmd.get_option("--seed"), "seed", a.seed);
    s.flag(cmd.get_option("--threads"), "threads", a.threads);
    s.flag(cmd.get_option("--bridge"), "bridge_endpoint", a.bridge);

    json grid = s.values();
    const std::string out = a.out.empty() ? s.get<std::string>("out", "") : a.out;
    std::string json_out = a.json_out.empty() ? s.get<std::string>("json", "") : a.json_out;
    grid.erase("out");
    grid.erase("json");
    const auto config = lmgc::ExperimentConfig::from_json(grid, s.base_dir());

    const auto rows = lmgc::run_experiment(config);

    if (out.empty() || out == "-") {
        lmgc::write_csv(std::cout, rows);
    } else {
        std::ofstream csv(out);
        if (!csv)
            throw lmgc::IoError("cannot write " + out);
        lmgc::write_csv(csv, rows);
        if (json_out.empty())
            json_out = out + ".json";
    }
    if (!json_out.empty()) {
        std::ofstream js(json_out);
        if (!js)
            throw lmgc::IoError("cannot write " + json_out);
        js << lmgc::report_json(config, rows).dump(2) << '\n';
    }

    int code = kOk;
    for (const auto& r : rows) {
        if (r.status.rfind("failed:verification", 0) == 0)
            code = kVerification;
        else if (r.status.rfind("failed:", 0) == 0 && code == kOk)
            code = kFailure;
        if (!r.ok())
            std::cerr << r.method << ' ' << (r.method == "lmgc" ? r.scheme + ' ' + r.model : r.codec) << ": "
                      << r.status << '\n';
    }
    return code;
}

struct SynthArgs {
    std::string config, spec, out;
    std::uint64_t seed = 0;
};

int run_synth(const SynthArgs& a, const CLI::App& cmd) {
    Settings s;
    s.load(a.config);
    s.flag(cmd.get_option("--spec"), "spec", a.spec);
    s.flag(cmd.get_option("--seed"), "seed", a.seed);
    s.flag(cmd.get_option("--out"), "out", a.out);

    json spec_json;
    const json& raw = s.values().contains("spec") ? s.values().at("spec") : json();
    if (raw.is_object())
        spec_json = raw;
    else
        spec_json = read_json_file(s.require("spec"));
    const auto spec = lmgc::GeneratorSpec::from_json(spec_json);
    const auto blob = lmgc::synth_gradients(spec, s.get<std::uint64_t>("seed", 0));
    lmgc::write_blob(s.require("out"), blob);
    std::cout << blob.element_count() << " elements -> " << s.require("out") << '\n';
    return kOk;
}

struct InspectArgs {
    std::string config, in;
};

int run_inspect(const InspectArgs& a, const CLI::App& cmd) {
    Settings s;
    s.load(a.config);
    s.flag(cmd.get_option("--in"), "in", a.in);
    const auto data = read_file(s.require("in"));

    json report;
    if (data.size() >= 4 && std::equal(data.begin(), data.begin() + 4, "LMGC")) {
        const auto bs = lmgc::Bitstream::from_bytes(data);
        const auto& h = bs.header;
        report["kind"] = "lmgc-bitstream";
        report["version"] = h.version;
        report["scheme"] = h.scheme_tag == lmgc::kRawTokensTag ? "raw-tokens" : lmgc::Scheme::from_tag(h.scheme_tag).to_string();
        report["model"] = h.model_id <= static_cast<std::uint8_t>(lmgc::ModelKind::bridge)
                              ? std::string(lmgc::to_string(static_cast<lmgc::ModelKind>(h.model_id)))
                              : "unknown";
        report["model_fingerprint"] = h.model_fingerprint;
        report["window_size"] = h.window_size;
        report["precision_bits"] = h.precision_bits;
        report["token_count"] = h.token_count;
        report["original_byte_len"] = h.original_byte_len;
        report["windows"] = bs.windows.size();
        report["payload_bits"] = bs.payload_bits();
        report["stream_bytes"] = data.size();
        if (h.original_byte_len > 0)
            report["rate_percent"] = lmgc::compression_rate(h.original_byte_len, data.size());
    } else {
        report["kind"] = "blob";
        report["bytes"] = data.size();
        report["elements"] = data.size() / 4;
        for (unsigned k = 0; k <= 2; ++k)
            report["entropy_bits_per_byte"]["order" + std::to_string(k)] = lmgc::entropy_estimate(data, k);
        const auto iso = lmgc::symbol_count(lmgc::Scheme::iso(), data.size());
        for (const char* name : {"iso", "hex", "hex:space:1", "hex:space:4", "hex:comma_space:4"}) {
            const auto scheme = lmgc::Scheme::parse(name);
            const auto n = lmgc::symbol_count(scheme, data.size());
            report["symbol_count"][name] = n;
            if (iso > 0)
                report["symbol_count_ratio_vs_iso"][name] = static_cast<double>(n) / static_cast<double>(iso);
        }
    }
    std::cout << report.dump(2) << '\n';
    return kOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Lossless gradient compression with serialization and arithmetic coding"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "lmgc 0.1.0");

    CompressArgs ca;
    auto* compress = app.add_subcommand("compress", "Compress a float32 blob");
    compress->add_option("--config", ca.config, "JSON file with default settings");
    compress->add_option("--in", ca.in, "Input .f32 blob");
    compress->add_option("--out", ca.out, "Output bitstream");
    compress->add_option("--scheme", ca.scheme, "iso | hex[:sep[:bpg]] (default hex:space:4)");
    compress->add_option("--model", ca.model, "static | order0..order3 | bridge[:endpoint] (default order2)");
    compress->add_option("--window", ca.window, "Context window in tokens (default 2048)");
    compress->add_option("--precision", ca.precision, "PMF precision bits for built-in models (default 16)");
    compress->add_option("--threads", ca.threads, "Window-level threads");
    compress->add_option("--bridge", ca.bridge, "Bridge endpoint (default $" + std::string(lmgc::bridge::kEndpointEnv) + ")");
    compress->add_flag("--no-verify", ca.no_verify, "Skip the decode-and-compare check");

    DecompressArgs da;
    auto* decompress = app.add_subcommand("decompress", "Restore a blob from a bitstream");
    decompress->add_option("--config", da.config, "JSON file with default settings");
    decompress->add_option("--in", da.in, "Input bitstream");
    decompress->add_option("--out", da.out, "Output blob");
    decompress->add_option("--bridge", da.bridge, "Bridge endpoint for bridge-coded streams");
    decompress->add_option("--threads", da.threads, "Window-level threads");

    BenchArgs ba;
    auto* bench = app.add_subcommand("bench", "Run an experiment grid and write CSV + JSON reports");
    bench->add_option("--config", ba.config, "Experiment grid JSON");
    bench->add_option("--out", ba.out, "CSV report path ('-' for stdout)");
    bench->add_option("--json", ba.json_out, "JSON sidecar path (default <out>.json)");
    bench->add_option("--corpus", ba.corpus, "Corpus manifest");
    bench->add_option("--schemes", ba.schemes, "Serialization schemes");
    bench->add_option("--models", ba.models, "Model specs");
    bench->add_option("--windows", ba.windows, "Window sizes");
    bench->add_option("--lossy", ba.lossy, "none | quant:<n>[:layer] | sign | sparsify:<p>");
    bench->add_option("--baselines", ba.baselines, "<codec>[:chunked|:unchunked]");
    bench->add_option("--chunk-size", ba.chunk_size, "Chunk size for chunked baselines");
    bench->add_option("--sample", ba.sample, "Corpus entries drawn per repeat (0 = all)");
    bench->add_option("--repeats", ba.repeats, "Repeats (each draws a new sub-sample)");
    bench->add_option("--seed", ba.seed, "Base sub-sample seed");
    bench->add_option("--threads", ba.threads, "Grid points run concurrently (0 = all cores)");
    bench->add_option("--bridge", ba.bridge, "Bridge endpoint for bridge models");

    SynthArgs sa;
    auto* synth = app.add_subcommand("synth", "Generate a synthetic gradient blob");
    synth->add_option("--config", sa.config, "JSON file with default settings");
    synth->add_option("--spec", sa.spec, "Generator spec JSON");
    synth->add_option("--seed", sa.seed, "RNG seed");
    synth->add_option("--out", sa.out, "Output blob");

    InspectArgs ia;
    auto* inspect = app.add_subcommand("inspect", "Describe a bitstream or blob");
    inspect->add_option("--config", ia.config, "JSON file with default settings");
    inspect->add_option("--in", ia.in, "Bitstream or blob");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kConfig;
    }

    try {
        if (*compress)
            return run_compress(ca, *compress);
        if (*decompress)
            return run_decompress(da, *decompress);
        if (*bench)
            return run_bench(ba, *bench);
        if (*synth)
            return run_synth(sa, *synth);
        if (*inspect)
            return run_inspect(ia, *inspect);
    } catch (const lmgc::ModelUnavailable& e) {
        std::cerr << "bridge unavailable: " << e.what() << '\n';
        return kBridge;
    } catch (const lmgc::VerificationError& e) {
        std::cerr << "verification failed: " << e.what() << '\n';
        return kVerification;
    } catch (const lmgc::CorruptStream& e) {
        std::cerr << "verification failed: " << e.what() << '\n';
        return kVerification;
    } catch (const lmgc::FingerprintMismatch& e) {
        std::cerr << "verification failed: " << e.what() << '\n';
        return kVerification;
    } catch (const lmgc::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfig;
    } catch (const lmgc::FormatError& e) {
        std::cerr << "format error: " << e.what() << '\n';
        return kConfig;
    } catch (const lmgc::IoError& e) {
        std::cerr << "i/o error: " << e.what() << '\n';
        return kConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kFailure;
    }
    return kFailure;
}
