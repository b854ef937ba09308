// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "lmgc/baselines.hpp"
#include "lmgc/bench.hpp"
#include "lmgc/coder.hpp"
#include "lmgc/codec.hpp"
#include "lmgc/interval.hpp"
#include "lmgc/lossy.hpp"
#include "lmgc/serializer.hpp"
#include "lmgc/tensor_io.hpp"
#include "support/oracles.hpp"

using namespace lmgc;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* format, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, format, args...);
    return buf;
}

// Synthetic gradients: Gaussian layers whose scales span two decades, the
// shape of a small network's per-layer gradient magnitudes.
GeneratorSpec gradient_spec(std::size_t elements) {
    GeneratorSpec spec;
    const std::size_t layers = 8;
    for (std::size_t i = 0; i < layers; ++i) {
        spec.layer_sizes.push_back(elements / layers + (i < elements % layers ? 1 : 0));
        spec.scale_per_layer.push_back(1e-2 * std::pow(10.0, -2.0 * static_cast<double>(i) / (layers - 1)));
    }
    return spec;
}

std::vector<std::uint8_t> gradient_bytes(std::size_t bytes, std::uint64_t seed) {
    return synth_gradients(gradient_spec(bytes / 4), seed).bytes;
}

std::size_t lmgc_size(std::span<const std::uint8_t> data, const char* scheme, const char* model,
                      std::uint32_t window) {
    CompressOptions o;
    o.scheme = Scheme::parse(scheme);
    o.model = ModelSpec::parse(model);
    o.window_size = window;
    const auto packed = compress(data, o);
    if (decompress(packed) != std::vector<std::uint8_t>(data.begin(), data.end()))
        throw VerificationError(std::string("round trip failed for ") + scheme + " " + model);
    return packed.size();
}

double rate(std::size_t original, std::size_t compressed) {
    return compression_rate(original, compressed);
}

// ---------------------------------------------------------------------------

Outcome losslessness() {
    const auto start = std::chrono::steady_clock::now();
    std::vector<Scheme> schemes = {Scheme::iso(), Scheme::hex()};
    for (auto sep : {Separator::space, Separator::comma, Separator::comma_space, Separator::semicolon})
        for (std::uint8_t bpg : {1, 2, 3, 4, 8})
            schemes.push_back(Scheme::hex(sep, bpg));
    const char* models[] = {"static", "order0", "order1", "order2"};
    const std::uint32_t windows[] = {256, 2048};

    std::mt19937_64 rng(20240501);
    int failures = 0;
    for (int i = 0; i < 200; ++i) {
        const std::size_t elements = 1 + rng() % 6000;
        std::vector<std::uint8_t> blob;
        switch (i % 4) {
        case 0: blob = testkit::random_bytes(elements * 4, rng()); break;
        case 1: blob = testkit::nan_laden_floats(elements, rng()); break;
        case 2: blob.assign(elements * 4, 0); break;
        default: blob = gradient_bytes(elements * 4, rng()); break;
        }
        CompressOptions o;
        o.scheme = schemes[rng() % schemes.size()];
        o.model = ModelSpec::parse(models[rng() % 4]);
        o.window_size = windows[rng() % 2];
        try {
            if (decompress(compress(blob, o)) != blob)
                ++failures;
        } catch (const std::exception&) {
            ++failures;
        }
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return {failures == 0 && secs < 300.0, fmt("200 configs, %d failures, %.1f s (limit 300 s)", failures, secs)};
}

Outcome worked_example() {
    const Rational probs[] = {Rational(4) / 5, Rational(1) / 5};
    const Token message[] = {0, 0, 0, 1};
    const auto steps = narrow(probs, message);
    const Interval expected[] = {{0, Rational(8, 10)},
                                 {0, Rational(64, 100)},
                                 {0, Rational(512, 1000)},
                                 {Rational(4096, 10000), Rational(512, 1000)}};
    bool ok = steps.size() == 4;
    for (std::size_t i = 0; ok && i < 4; ++i)
        ok = steps[i] == expected[i];
    const Rational mid = steps.back().midpoint();
    const std::string bits = binary_fraction(mid, 8);
    ok = ok && mid == Rational(4608, 10000) && bits == "01110101";
    return {ok, "intervals [0,0.8) [0,0.64) [0,0.512) [0.4096,0.512), midpoint 0.4608 -> 0." + bits};
}

Outcome near_optimality() {
    const std::size_t n = 100000;
    const double h = testkit::binary_entropy(0.2);
    const double limit = 1.01 * n * 0.7219 + 64;
    const ModelFactory factory = [](std::uint32_t w) {
        return std::make_unique<StaticModel>(quantize_pmf(std::vector<double>{0.8, 0.2}, 16), w);
    };

    // Exact 80/20 frequencies, shuffled.
    const auto exact = testkit::exact_bernoulli(n, 0.2, 1);
    const auto a = encode(exact, factory, static_cast<std::uint32_t>(n));
    // An i.i.d. draw from the source.
    std::mt19937_64 rng(2);
    std::vector<Token> iid(n);
    for (auto& t : iid)
        t = (rng() >> 11) * 0x1.0p-53 < 0.2 ? 1 : 0;
    const auto b = encode(iid, factory, static_cast<std::uint32_t>(n));

    const bool ok = a.payload_bits() <= limit && b.payload_bits() <= limit && decode(a, factory) == exact &&
                    decode(b, factory) == iid && std::abs(h - 0.7219) < 1e-4;
    return {ok, fmt("payload %llu (exact freq) / %llu (iid) bits, limit %.0f", (unsigned long long)a.payload_bits(),
                    (unsigned long long)b.payload_bits(), limit)};
}

Outcome count_law() {
    std::vector<Scheme> schemes = {Scheme::iso(), Scheme::hex()};
    for (auto sep : {Separator::space, Separator::comma, Separator::comma_space, Separator::semicolon})
        for (std::uint8_t bpg : {1, 2, 3, 4, 8})
            schemes.push_back(Scheme::hex(sep, bpg));
    std::mt19937_64 rng(3);
    int mismatches = 0;
    for (int i = 0; i < 10000; ++i) {
        const auto& s = schemes[rng() % schemes.size()];
        const auto bytes = testkit::random_bytes(rng() % 200, rng());
        const auto predicted = symbol_count(s, bytes.size());
        if (predicted != serialize(bytes, s).symbols.size() || predicted != testkit::oracle_symbol_count(s, bytes))
            ++mismatches;
    }
    const auto seventeen = symbol_count(Scheme::default_scheme(), 8);
    return {mismatches == 0 && seventeen == 17,
            fmt("10000 pairs, %d mismatches; (hex, space, 4, 8 bytes) = %zu", mismatches, seventeen)};
}

Outcome rate_metric() {
    const bool exact = compression_rate(1000, 500) == 50.0;
    nlohmann::json corpus = {{"format_version", 1},
                             {"entries",
                              {{{"name", "a"}, {"generator", gradient_spec(3000).to_json()}, {"seed", 1}},
                               {{"name", "b"}, {"generator", gradient_spec(5000).to_json()}, {"seed", 2}}}}};
    const auto config = ExperimentConfig::from_json({{"corpus", corpus},
                                                     {"schemes", {"iso", "hex:space:4"}},
                                                     {"models", {"order0", "order2"}},
                                                     {"window_sizes", {1024}},
                                                     {"baselines", {"deflate", "lzma:chunked"}},
                                                     {"repeats", 2}});
    const auto rows = run_experiment(config);
    int recomputed = 0;
    for (const auto& r : rows)
        recomputed += r.ok() && r.rate_percent == compression_rate(r.original_size, r.compressed_size);
    return {exact && recomputed == static_cast<int>(rows.size()),
            fmt("compression_rate(1000, 500) = %.17g; %d/%zu report rows recompute", compression_rate(1000, 500),
                recomputed, rows.size())};
}

Outcome quantization() {
    const float small[] = {0, 1, 2, 3};
    const auto q = quantize_linear(small, 2);
    bool ok = q.indices == std::vector<std::uint32_t>{0, 1, 2, 3};

    std::mt19937_64 rng(4);
    std::vector<float> values(100000);
    for (auto& v : values)
        v = static_cast<float>(((rng() >> 11) * 0x1.0p-53 - 0.5) * 0.02);
    std::string detail = "[0,1,2,3] -> " + std::string(ok ? "[0,1,2,3]" : "wrong");
    for (unsigned n : {1u, 8u, 16u}) {
        const auto qn = quantize_linear(values, n);
        const auto d = dequantize_linear(qn);
        const double bound = (double(qn.vmax) - qn.vmin) / (2.0 * qn.levels());
        double worst = 0;
        for (std::size_t i = 0; i < values.size(); ++i)
            worst = std::max(worst, std::abs(d[i] - values[i]));
        ok = ok && worst <= bound;
        detail += fmt("; n=%u max err/bound %.6f", n, worst / bound);
    }
    return {ok, detail};
}

Outcome rle_ordering() {
    const auto blob = gradient_bytes(1 << 20, 5);
    const double bits = rate(blob.size(), rle_encode(blob, RleDictionary::bits).size());
    const double hex = rate(blob.size(), rle_encode(blob, RleDictionary::hex).size());
    const double iso = rate(blob.size(), rle_encode(blob, RleDictionary::iso).size());
    for (auto d : {RleDictionary::bits, RleDictionary::hex, RleDictionary::iso})
        if (rle_decode(rle_encode(blob, d), d) != blob)
            return {false, "RLE round trip failed"};
    return {bits > hex && hex > iso && iso > 100.0,
            fmt("1 MiB: BITS %.1f%% > HEX %.1f%% > ISO %.1f%% > 100%%", bits, hex, iso)};
}

Outcome context_window() {
    const auto blob = gradient_bytes(1 << 20, 6);
    const double r256 = rate(blob.size(), lmgc_size(blob, "hex:space:4", "order2", 256));
    const double r4096 = rate(blob.size(), lmgc_size(blob, "hex:space:4", "order2", 4096));
    return {r4096 <= r256, fmt("1 MiB order-2: window 4096 %.3f%% <= window 256 %.3f%%", r4096, r256)};
}

Outcome byte_grouping() {
    const auto blob = gradient_bytes(4 << 20, 7);
    const double g1 = rate(blob.size(), lmgc_size(blob, "hex:space:1", "order2", 2048));
    const double g2 = rate(blob.size(), lmgc_size(blob, "hex:space:2", "order2", 2048));
    const double g3 = rate(blob.size(), lmgc_size(blob, "hex:space:3", "order2", 2048));
    const double g4 = rate(blob.size(), lmgc_size(blob, "hex:space:4", "order2", 2048));
    const double none = rate(blob.size(), lmgc_size(blob, "hex", "order2", 2048));
    const double mean = (g1 + g2 + g4) / 3;
    return {mean <= g3 && mean <= none,
            fmt("4 MiB order-2: mean{1,2,4} %.3f%% (%.3f/%.3f/%.3f) vs bpg3 %.3f%%, none %.3f%%", mean, g1, g2, g4,
                g3, none)};
}

Outcome chunking_penalty() {
    const auto blob = gradient_bytes(1 << 20, 8);
    CodecAdapter whole{"deflate", ChunkMode::unchunked, 512};
    CodecAdapter chunked{"deflate", ChunkMode::chunked, 512};
    const auto a = whole.compress(blob);
    const auto b = chunked.compress(blob);
    const bool ok = b.size() >= a.size() && whole.decompress(a) == blob && chunked.decompress(b) == blob;
    return {ok, fmt("deflate chunked(512) %.2f%% >= unchunked %.2f%%", rate(blob.size(), b.size()),
                    rate(blob.size(), a.size()))};
}

Outcome compatibility() {
    const auto blob = synth_gradients(gradient_spec(1 << 18), 9);
    const auto values = blob.to_floats();

    const auto q = quantize_linear(values, 8);
    const auto q_packed = pack(q);
    const auto q_coded = lmgc_size(q_packed, "hex:space:4", "order2", 2048);

    const auto s = sparsify_topk(values, 0.1);
    const auto s_packed = pack(s);
    const auto s_coded = lmgc_size(s_packed, "hex:space:4", "order2", 2048);

    const bool exact = unpack_quantized(q_packed) == q && unpack_sparse(s_packed) == s;
    return {q_coded < q_packed.size() && s_coded < s_packed.size() && exact,
            fmt("quant(8) %zu -> %zu bytes; sparsify(0.1) %zu -> %zu bytes; unpack exact: %s", q_packed.size(),
                q_coded, s_packed.size(), s_coded, exact ? "yes" : "no")};
}

} // namespace

int main() {
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
        {"losslessness", losslessness},
        {"worked-example", worked_example},
        {"coder-near-optimality", near_optimality},
        {"serializer-count-law", count_law},
        {"compression-rate-metric", rate_metric},
        {"linear-quantization", quantization},
        {"rle-ordering", rle_ordering},
        {"context-window-shape", context_window},
        {"byte-grouping-shape", byte_grouping},
        {"chunking-penalty", chunking_penalty},
        {"compatibility-pipeline", compatibility},
    };
    int failed = 0;
    for (const auto& [name, check] : criteria) {
        Outcome o;
        try {
            o = check();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failed += !o.pass;
        std::printf("%s %s: %s\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
