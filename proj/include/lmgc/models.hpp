#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "lmgc/pmf.hpp"

namespace lmgc {

/// Model id byte stored in the bitstream header.
enum class ModelKind : std::uint8_t {
    static_pmf = 0,
    order0 = 1,
    order1 = 2,
    order2 = 3,
    order3 = 4,
    bridge = 5,
};

std::string_view to_string(ModelKind kind);

/// Autoregressive next-token distribution p(t_k | BOS, t_<k).
///
/// The context starts empty (BOS only; BOS is never coded). pmf_next() is a
/// pure function of the model parameters and the context, so an encoder and
/// a decoder that advance with the same tokens see identical PMFs. A model
/// holds at most window_size tokens of context; once full it refuses to
/// predict until reset().
class ProbabilityModel {
public:
    explicit ProbabilityModel(std::uint32_t window_size);
    virtual ~ProbabilityModel() = default;

    ProbabilityModel(const ProbabilityModel&) = delete;
    ProbabilityModel& operator=(const ProbabilityModel&) = delete;

    virtual ModelKind kind() const = 0;
    virtual std::uint32_t vocab_size() const = 0;
    virtual std::uint8_t precision_bits() const = 0;
    virtual std::uint64_t fingerprint() const = 0;

    /// True when a window's PMFs do not depend on earlier windows, so windows
    /// may be coded on separate model instances.
    virtual bool windows_independent() const { return true; }

    /// Teacher-forced PMFs for every position of a fresh window, or nullopt
    /// when the model has no batched path. Entry k equals what pmf_next()
    /// returns after reset() and advancing with window[0..k).
    virtual std::optional<std::vector<QuantizedPmf>> score_window(std::span<const Token> window);

    std::uint32_t window_size() const noexcept { return window_size_; }
    std::span<const Token> context() const noexcept { return context_; }

    /// Throws WindowFull once window_size tokens have been observed.
    const QuantizedPmf& pmf_next();
    void advance(Token token);
    /// Clears the context back to BOS. Learned statistics are kept.
    void reset();

protected:
    virtual const QuantizedPmf& predict(std::span<const Token> context) = 0;
    virtual void learn(std::span<const Token> context, Token token);

private:
    std::uint32_t window_size_;
    std::vector<Token> context_;
};

/// Fixed distribution, independent of context.
class StaticModel final : public ProbabilityModel {
public:
    StaticModel(QuantizedPmf pmf, std::uint32_t window_size);
    static std::unique_ptr<StaticModel> uniform(std::uint32_t vocab_size, unsigned precision_bits,
                                                std::uint32_t window_size);

    ModelKind kind() const override { return ModelKind::static_pmf; }
    std::uint32_t vocab_size() const override { return static_cast<std::uint32_t>(pmf_.size()); }
    std::uint8_t precision_bits() const override { return pmf_.precision_bits; }
    std::uint64_t fingerprint() const override { return fingerprint_; }

protected:
    const QuantizedPmf& predict(std::span<const Token>) override { return pmf_; }

private:
    QuantizedPmf pmf_;
    std::uint64_t fingerprint_;
};

/// Order-k symbol context model with Laplace (add-one) smoothing.
///
/// The context is the last min(k, n) tokens of the current window, so the
/// first k positions after BOS use their own shorter contexts. Counts are
/// learned on every advance() and survive reset(); a new instance starts
/// from zero, which makes counts per-blob when one instance codes one blob.
class AdaptiveContextModel final : public ProbabilityModel {
public:
    static constexpr unsigned kMaxOrder = 3;
    static constexpr std::uint32_t kMaxVocab = 1u << 20;

    AdaptiveContextModel(unsigned order, std::uint32_t vocab_size, unsigned precision_bits,
                         std::uint32_t window_size);

    ModelKind kind() const override { return static_cast<ModelKind>(1 + order_); }
    std::uint32_t vocab_size() const override { return vocab_; }
    std::uint8_t precision_bits() const override { return precision_; }
    std::uint64_t fingerprint() const override;
    bool windows_independent() const override { return false; }

    unsigned order() const noexcept { return order_; }
    std::size_t context_count() const noexcept { return slots_.size(); }

protected:
    const QuantizedPmf& predict(std::span<const Token> context) override;
    void learn(std::span<const Token> context, Token token) override;

private:
    std::uint64_t key_of(std::span<const Token> context) const;
    std::uint32_t* counts_for(std::uint64_t key, bool create);

    unsigned order_;
    std::uint32_t vocab_;
    std::uint8_t precision_;
    std::unordered_map<std::uint64_t, std::uint32_t> slots_;
    std::vector<std::uint32_t> counts_;
    std::vector<std::uint64_t> weights_;
    QuantizedPmf pmf_;
    QuantizedPmf uniform_;
};

/// Declarative model choice: "static", "order0".."order3", "bridge" or "bridge:<endpoint>".
struct ModelSpec {
    ModelKind kind = ModelKind::order2;
    std::optional<QuantizedPmf> static_pmf; // uniform when empty
    std::string bridge_endpoint;            // empty means LMGC_BRIDGE
    unsigned precision_bits = 16;           // built-in models only; the bridge server chooses its own

    static ModelSpec parse(std::string_view text);
    static ModelSpec from_kind(ModelKind kind);
    std::string to_string() const;
};

/// Builds a fresh model for a given window size.
using ModelFactory = std::function<std::unique_ptr<ProbabilityModel>(std::uint32_t window_size)>;

/// Factory for the built-in models over a serializer vocabulary. Bridge
/// specs are served by make_bridge_factory() in bridge.hpp.
ModelFactory make_builtin_factory(const ModelSpec& spec, std::uint32_t vocab_size);

/// 64-bit FNV-1a, used for fingerprints and the payload digest.
std::uint64_t fnv1a64(std::span<const std::uint8_t> data, std::uint64_t seed = 0xcbf29ce484222325ull);

} // namespace lmgc
