#include "lmgc/models.hpp"

#include <cstring>

#include "lmgc/errors.hpp"

namespace lmgc {

std::uint64_t fnv1a64(std::span<const std::uint8_t> data, std::uint64_t seed) {
    std::uint64_t h = seed;
    for (auto b : data) {
        h ^= b;
        h *= 0x100000001b3ull;
    }
    return h;
}

namespace {

// Appends little-endian integers for fingerprinting.
class Hasher {
public:
    template <typename T>
    Hasher& add(T value) {
        std::uint8_t buf[sizeof(T)];
        for (std::size_t i = 0; i < sizeof(T); ++i)
            buf[i] = static_cast<std::uint8_t>(static_cast<std::uint64_t>(value) >> (8 * i));
        h_ = fnv1a64(buf, h_);
        return *this;
    }
    Hasher& add(std::string_view s) {
        h_ = fnv1a64({reinterpret_cast<const std::uint8_t*>(s.data()), s.size()}, h_);
        return *this;
    }
    std::uint64_t value() const { return h_; }

private:
    std::uint64_t h_ = 0xcbf29ce484222325ull;
};

constexpr std::uint32_t kQuantRuleVersion = 1;

} // namespace

std::string_view to_string(ModelKind kind) {
    switch (kind) {
    case ModelKind::static_pmf: return "static";
    case ModelKind::order0: return "order0";
    case ModelKind::order1: return "order1";
    case ModelKind::order2: return "order2";
    case ModelKind::order3: return "order3";
    case ModelKind::bridge: return "bridge";
    }
    return "unknown";
}

// ---------------------------------------------------------------------------

ProbabilityModel::ProbabilityModel(std::uint32_t window_size) : window_size_(window_size) {
    if (window_size == 0)
        throw ConfigError("window_size must be positive");
    context_.reserve(window_size);
}

std::optional<std::vector<QuantizedPmf>> ProbabilityModel::score_window(std::span<const Token>) {
    return std::nullopt;
}

const QuantizedPmf& ProbabilityModel::pmf_next() {
    if (context_.size() >= window_size_)
        throw WindowFull("context holds " + std::to_string(window_size_) + " tokens; reset() before predicting");
    return predict(context_);
}

void ProbabilityModel::advance(Token token) {
    if (token >= vocab_size())
        throw ContractViolation("token " + std::to_string(token) + " outside vocabulary of " +
                                std::to_string(vocab_size()));
    if (context_.size() >= window_size_)
        throw WindowFull("context holds " + std::to_string(window_size_) + " tokens; reset() before advancing");
    learn(context_, token);
    context_.push_back(token);
}

void ProbabilityModel::reset() {
    context_.clear();
}

void ProbabilityModel::learn(std::span<const Token>, Token) {}

// ---------------------------------------------------------------------------

StaticModel::StaticModel(QuantizedPmf pmf, std::uint32_t window_size)
    : ProbabilityModel(window_size), pmf_(std::move(pmf)) {
    pmf_.validate();
    Hasher h;
    h.add(std::string_view("static")).add(pmf_.precision_bits).add(static_cast<std::uint32_t>(pmf_.size()));
    for (auto f : pmf_.freqs)
        h.add(f);
    fingerprint_ = h.value();
}

std::unique_ptr<StaticModel> StaticModel::uniform(std::uint32_t vocab_size, unsigned precision_bits,
                                                  std::uint32_t window_size) {
    std::vector<std::uint64_t> ones(vocab_size, 1);
    return std::make_unique<StaticModel>(quantize_weights(ones, precision_bits), window_size);
}

// ---------------------------------------------------------------------------

AdaptiveContextModel::AdaptiveContextModel(unsigned order, std::uint32_t vocab_size, unsigned precision_bits,
                                           std::uint32_t window_size)
    : ProbabilityModel(window_size), order_(order), vocab_(vocab_size),
      precision_(static_cast<std::uint8_t>(precision_bits)) {
    if (order > kMaxOrder)
        throw ConfigError("adaptive model order must be 0.." + std::to_string(kMaxOrder));
    if (vocab_size == 0 || vocab_size > kMaxVocab)
        throw ConfigError("adaptive model vocabulary must be 1.." + std::to_string(kMaxVocab));
    if (precision_bits < min_precision_bits(vocab_size) || precision_bits > kMaxPrecisionBits)
        throw ConfigError("precision of " + std::to_string(precision_bits) + " bits cannot hold a vocabulary of " +
                          std::to_string(vocab_size));
    weights_.assign(vocab_, 1);
    uniform_ = quantize_weights(weights_, precision_bits);
}

std::uint64_t AdaptiveContextModel::fingerprint() const {
    return Hasher()
        .add(std::string_view("adaptive-laplace"))
        .add(order_)
        .add(vocab_)
        .add(precision_)
        .add(kQuantRuleVersion)
        .value();
}

std::uint64_t AdaptiveContextModel::key_of(std::span<const Token> context) const {
    const std::size_t n = std::min<std::size_t>(order_, context.size());
    std::uint64_t key = n;
    for (std::size_t i = context.size() - n; i < context.size(); ++i)
        key = (key << 20) | context[i];
    return key;
}

std::uint32_t* AdaptiveContextModel::counts_for(std::uint64_t key, bool create) {
    auto it = slots_.find(key);
    if (it == slots_.end()) {
        if (!create)
            return nullptr;
        it = slots_.emplace(key, static_cast<std::uint32_t>(slots_.size())).first;
        counts_.resize(counts_.size() + vocab_, 0);
    }
    return counts_.data() + static_cast<std::size_t>(it->second) * vocab_;
}

const QuantizedPmf& AdaptiveContextModel::predict(std::span<const Token> context) {
    const std::uint32_t* counts = counts_for(key_of(context), false);
    if (counts == nullptr)
        return uniform_;
    for (std::uint32_t s = 0; s < vocab_; ++s)
        weights_[s] = std::uint64_t{counts[s]} + 1;
    quantize_weights(weights_, precision_, pmf_);
    return pmf_;
}

void AdaptiveContextModel::learn(std::span<const Token> context, Token token) {
    ++counts_for(key_of(context), true)[token];
}

// ---------------------------------------------------------------------------

ModelSpec ModelSpec::from_kind(ModelKind kind) {
    ModelSpec s;
    s.kind = kind;
    return s;
}

ModelSpec ModelSpec::parse(std::string_view text) {
    if (text == "static" || text == "uniform")
        return from_kind(ModelKind::static_pmf);
    if (text.size() == 6 && text.substr(0, 5) == "order" && text[5] >= '0' && text[5] <= '3')
        return from_kind(static_cast<ModelKind>(1 + (text[5] - '0')));
    if (text == "bridge")
        return from_kind(ModelKind::bridge);
    if (text.substr(0, 7) == "bridge:") {
        auto s = from_kind(ModelKind::bridge);
        s.bridge_endpoint = std::string(text.substr(7));
        return s;
    }
    throw ConfigError("unknown model '" + std::string(text) + "' (expected static, order0..order3 or bridge)");
}

std::string ModelSpec::to_string() const {
    if (kind == ModelKind::bridge && !bridge_endpoint.empty())
        return "bridge:" + bridge_endpoint;
    return std::string(lmgc::to_string(kind));
}

ModelFactory make_builtin_factory(const ModelSpec& spec, std::uint32_t vocab_size) {
    switch (spec.kind) {
    case ModelKind::static_pmf: {
        QuantizedPmf pmf;
        if (spec.static_pmf) {
            pmf = *spec.static_pmf;
            if (pmf.size() != vocab_size)
                throw ConfigError("static pmf has " + std::to_string(pmf.size()) + " entries, vocabulary has " +
                                  std::to_string(vocab_size));
        } else {
            std::vector<std::uint64_t> ones(vocab_size, 1);
            pmf = quantize_weights(ones, spec.precision_bits);
        }
        pmf.validate();
        return [pmf](std::uint32_t window) { return std::make_unique<StaticModel>(pmf, window); };
    }
    case ModelKind::order0:
    case ModelKind::order1:
    case ModelKind::order2:
    case ModelKind::order3: {
        const unsigned order = static_cast<unsigned>(spec.kind) - 1;
        const unsigned precision = spec.precision_bits;
        // Validate eagerly so configuration errors surface before any coding.
        AdaptiveContextModel probe(order, vocab_size, precision, 1);
        return [=](std::uint32_t window) {
            return std::make_unique<AdaptiveContextModel>(order, vocab_size, precision, window);
        };
    }
    case ModelKind::bridge:
        break;
    }
    throw ConfigError("model '" + spec.to_string() + "' is not a built-in model");
}

} // namespace lmgc
