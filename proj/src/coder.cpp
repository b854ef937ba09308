#include "lmgc/coder.hpp"

#include <algorithm>
#include <exception>
#include <thread>

#include "lmgc/errors.hpp"
#include "lmgc/range_coder.hpp"

namespace lmgc {

std::uint64_t token_digest(std::span<const Token> tokens) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (Token t : tokens) {
        const std::uint8_t le[4] = {static_cast<std::uint8_t>(t), static_cast<std::uint8_t>(t >> 8),
                                    static_cast<std::uint8_t>(t >> 16), static_cast<std::uint8_t>(t >> 24)};
        h = fnv1a64(le, h);
    }
    return h;
}

WindowPayload encode_window(ProbabilityModel& model, std::span<const Token> window) {
    model.reset();
    const unsigned bits = model.precision_bits();
    RangeEncoder enc;

    auto code = [&](const QuantizedPmf& pmf, Token t) {
        if (t >= pmf.size())
            throw ContractViolation("token " + std::to_string(t) + " outside model vocabulary");
        enc.encode(static_cast<std::uint32_t>(pmf.cumulative(t)), pmf.freqs[t], bits);
    };

    if (auto scored = model.score_window(window)) {
        if (scored->size() != window.size())
            throw ModelUnavailable("model scored " + std::to_string(scored->size()) + " positions, expected " +
                                   std::to_string(window.size()));
        for (std::size_t k = 0; k < window.size(); ++k) {
            code((*scored)[k], window[k]);
            model.advance(window[k]);
        }
    } else {
        for (Token t : window) {
            code(model.pmf_next(), t);
            model.advance(t);
        }
    }

    WindowPayload w;
    w.bytes = enc.finish();
    w.bit_length = static_cast<std::uint32_t>(enc.bit_length());
    return w;
}

std::vector<Token> decode_window(ProbabilityModel& model, const WindowPayload& payload, std::size_t count) {
    model.reset();
    const unsigned bits = model.precision_bits();
    RangeDecoder dec(payload.bytes);
    std::vector<Token> out;
    out.reserve(count);
    for (std::size_t k = 0; k < count; ++k) {
        const QuantizedPmf& pmf = model.pmf_next();
        const std::uint32_t target = dec.target(bits);
        std::uint32_t cum = 0;
        Token s = 0;
        while (cum + pmf.freqs[s] <= target) {
            cum += pmf.freqs[s];
            ++s;
        }
        dec.update(cum, pmf.freqs[s], bits);
        model.advance(s);
        out.push_back(s);
    }
    return out;
}

namespace {

// Runs fn(first, last) over contiguous window ranges on up to `threads` workers.
template <typename Fn>
void for_window_ranges(std::size_t windows, unsigned threads, Fn fn) {
    threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(windows)));
    if (threads <= 1) {
        fn(std::size_t{0}, windows);
        return;
    }
    std::vector<std::exception_ptr> errors(threads);
    {
        std::vector<std::jthread> pool;
        const std::size_t per = (windows + threads - 1) / threads;
        for (unsigned t = 0; t < threads; ++t) {
            const std::size_t first = t * per;
            const std::size_t last = std::min(windows, first + per);
            if (first >= last)
                break;
            pool.emplace_back([&, t, first, last] {
                try {
                    fn(first, last);
                } catch (...) {
                    errors[t] = std::current_exception();
                }
            });
        }
    }
    for (auto& e : errors)
        if (e)
            std::rethrow_exception(e);
}

} // namespace

Bitstream encode(std::span<const Token> tokens, const ModelFactory& factory, std::uint32_t window_size,
                 const EncodeOptions& options) {
    auto model = factory(window_size);
    Bitstream bs;
    bs.header.scheme_tag = options.scheme_tag;
    bs.header.model_id = static_cast<std::uint8_t>(model->kind());
    bs.header.model_fingerprint = model->fingerprint();
    bs.header.window_size = window_size;
    bs.header.precision_bits = model->precision_bits();
    bs.header.token_count = tokens.size();
    bs.header.original_byte_len = 0;
    bs.header.digest = token_digest(tokens);

    const std::size_t count = bs.header.window_count();
    bs.windows.resize(count);
    auto window_at = [&](std::size_t i) {
        const std::size_t begin = i * window_size;
        return tokens.subspan(begin, std::min<std::size_t>(window_size, tokens.size() - begin));
    };

    const unsigned threads = model->windows_independent() ? options.threads : 1;
    for_window_ranges(count, threads, [&](std::size_t first, std::size_t last) {
        std::unique_ptr<ProbabilityModel> local;
        ProbabilityModel* m = model.get();
        if (first != 0) {
            local = factory(window_size);
            m = local.get();
        }
        for (std::size_t i = first; i < last; ++i)
            bs.windows[i] = encode_window(*m, window_at(i));
    });
    return bs;
}

std::vector<Token> decode(const Bitstream& bitstream, const ModelFactory& factory, unsigned threads) {
    const auto& h = bitstream.header;
    auto model = factory(h.window_size);
    if (model->fingerprint() != h.model_fingerprint || static_cast<std::uint8_t>(model->kind()) != h.model_id)
        throw FingerprintMismatch("stream was encoded with model id " + std::to_string(h.model_id) +
                                  " fingerprint " + std::to_string(h.model_fingerprint) +
                                  ", decoder model has id " + std::to_string(static_cast<int>(model->kind())) +
                                  " fingerprint " + std::to_string(model->fingerprint()));
    if (model->precision_bits() != h.precision_bits)
        throw FingerprintMismatch("precision mismatch");
    const std::uint64_t count = h.window_count();
    if (bitstream.windows.size() != count)
        throw CorruptStream("expected " + std::to_string(count) + " windows, found " +
                            std::to_string(bitstream.windows.size()));

    std::vector<std::vector<Token>> parts(count);
    const unsigned workers = model->windows_independent() ? threads : 1;
    for_window_ranges(count, workers, [&](std::size_t first, std::size_t last) {
        std::unique_ptr<ProbabilityModel> local;
        ProbabilityModel* m = model.get();
        if (first != 0) {
            local = factory(h.window_size);
            m = local.get();
        }
        for (std::size_t i = first; i < last; ++i) {
            const std::size_t n =
                static_cast<std::size_t>(std::min<std::uint64_t>(h.window_size, h.token_count - i * h.window_size));
            try {
                parts[i] = decode_window(*m, bitstream.windows[i], n);
            } catch (const CorruptStream& e) {
                throw CorruptStream("window " + std::to_string(i) + ": " + e.what());
            }
        }
    });

    std::vector<Token> tokens;
    tokens.reserve(static_cast<std::size_t>(h.token_count));
    for (auto& p : parts)
        tokens.insert(tokens.end(), p.begin(), p.end());

    if (h.scheme_tag == kRawTokensTag && token_digest(tokens) != h.digest)
        throw CorruptStream("digest mismatch: decoded tokens differ from the encoded ones");
    return tokens;
}

} // namespace lmgc
