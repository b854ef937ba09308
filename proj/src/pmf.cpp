#include "lmgc/pmf.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>

#include "lmgc/errors.hpp"

namespace lmgc {

std::uint64_t QuantizedPmf::cumulative(Token symbol) const {
    std::uint64_t c = 0;
    for (Token i = 0; i < symbol; ++i)
        c += freqs[i];
    return c;
}

void QuantizedPmf::validate() const {
    if (precision_bits == 0 || precision_bits > kMaxPrecisionBits)
        throw ContractViolation("pmf precision out of range");
    std::uint64_t sum = 0;
    for (auto f : freqs) {
        if (f == 0)
            throw ContractViolation("pmf has a zero frequency");
        sum += f;
    }
    if (sum != total())
        throw ContractViolation("pmf frequencies sum to " + std::to_string(sum) + ", expected " +
                                std::to_string(total()));
}

unsigned min_precision_bits(std::size_t vocab_size) {
    unsigned bits = 0;
    while ((std::size_t{1} << bits) < vocab_size)
        ++bits;
    return bits + 1;
}

namespace {

void check_precision(std::size_t vocab, unsigned precision_bits) {
    if (vocab == 0)
        throw ConfigError("empty vocabulary");
    if (precision_bits > kMaxPrecisionBits)
        throw ConfigError("precision_bits " + std::to_string(precision_bits) + " exceeds " +
                          std::to_string(kMaxPrecisionBits));
    if (precision_bits < min_precision_bits(vocab))
        throw ConfigError("vocabulary of " + std::to_string(vocab) + " symbols needs at least " +
                          std::to_string(min_precision_bits(vocab)) + " precision bits");
}

// Distributes `leftover` units to the symbols with the largest remainders.
template <typename Rem>
void give_leftover(std::vector<std::uint32_t>& freqs, const std::vector<Rem>& rem, std::size_t leftover) {
    if (leftover == 0)
        return;
    thread_local std::vector<std::uint32_t> order;
    order.resize(freqs.size());
    std::iota(order.begin(), order.end(), 0u);
    auto by_remainder = [&](std::uint32_t a, std::uint32_t b) {
        return rem[a] != rem[b] ? rem[a] > rem[b] : a < b;
    };
    std::nth_element(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(leftover - 1), order.end(),
                     by_remainder);
    for (std::size_t i = 0; i < leftover; ++i)
        ++freqs[order[i]];
}

// Raises zeros to one, paying from the largest frequencies.
void enforce_floor(std::vector<std::uint32_t>& freqs) {
    std::size_t deficit = 0;
    for (auto& f : freqs) {
        if (f == 0) {
            f = 1;
            ++deficit;
        }
    }
    if (deficit == 0)
        return;
    auto cmp = [&](std::uint32_t a, std::uint32_t b) {
        return freqs[a] != freqs[b] ? freqs[a] < freqs[b] : a > b;
    };
    std::priority_queue<std::uint32_t, std::vector<std::uint32_t>, decltype(cmp)> heap(cmp);
    for (std::uint32_t i = 0; i < freqs.size(); ++i)
        if (freqs[i] > 1)
            heap.push(i);
    while (deficit > 0) {
        const auto top = heap.top();
        heap.pop();
        --freqs[top];
        --deficit;
        if (freqs[top] > 1)
            heap.push(top);
    }
}

} // namespace

QuantizedPmf quantize_pmf(std::span<const double> probs, unsigned precision_bits) {
    check_precision(probs.size(), precision_bits);
    double sum = 0.0;
    for (double p : probs) {
        if (!(p >= 0.0) || !std::isfinite(p))
            throw ContractViolation("probabilities must be finite and nonnegative");
        sum += p;
    }
    if (!(sum > 0.0))
        throw ContractViolation("probabilities sum to zero");

    QuantizedPmf pmf;
    pmf.precision_bits = static_cast<std::uint8_t>(precision_bits);
    const double total = static_cast<double>(pmf.total());
    pmf.freqs.resize(probs.size());
    std::vector<double> rem(probs.size());
    std::uint64_t assigned = 0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        const double scaled = probs[i] == sum ? total : probs[i] / sum * total;
        const double fl = std::floor(scaled);
        pmf.freqs[i] = static_cast<std::uint32_t>(fl);
        rem[i] = scaled - fl;
        assigned += pmf.freqs[i];
    }
    // Rounding in the normalisation can overshoot by a unit or two.
    while (assigned > pmf.total()) {
        auto it = std::max_element(pmf.freqs.begin(), pmf.freqs.end());
        --*it;
        --assigned;
    }
    give_leftover(pmf.freqs, rem, static_cast<std::size_t>(pmf.total() - assigned));
    enforce_floor(pmf.freqs);
    return pmf;
}

void quantize_weights(std::span<const std::uint64_t> weights, unsigned precision_bits, QuantizedPmf& out) {
    check_precision(weights.size(), precision_bits);
    std::uint64_t sum = 0;
    for (auto w : weights)
        sum += w;
    if (sum == 0)
        throw ContractViolation("weights sum to zero");

    out.precision_bits = static_cast<std::uint8_t>(precision_bits);
    out.freqs.resize(weights.size());
    const std::uint64_t total = out.total();
    thread_local std::vector<std::uint64_t> rem;
    rem.resize(weights.size());
    std::uint64_t assigned = 0;
    if (sum < (std::uint64_t{1} << (64 - precision_bits))) {
        for (std::size_t i = 0; i < weights.size(); ++i) {
            const std::uint64_t scaled = weights[i] * total;
            out.freqs[i] = static_cast<std::uint32_t>(scaled / sum);
            rem[i] = scaled % sum;
            assigned += out.freqs[i];
        }
    } else {
        for (std::size_t i = 0; i < weights.size(); ++i) {
            const unsigned __int128 scaled = static_cast<unsigned __int128>(weights[i]) * total;
            out.freqs[i] = static_cast<std::uint32_t>(scaled / sum);
            rem[i] = static_cast<std::uint64_t>(scaled % sum);
            assigned += out.freqs[i];
        }
    }
    give_leftover(out.freqs, rem, static_cast<std::size_t>(total - assigned));
    enforce_floor(out.freqs);
}

QuantizedPmf quantize_weights(std::span<const std::uint64_t> weights, unsigned precision_bits) {
    QuantizedPmf pmf;
    quantize_weights(weights, precision_bits, pmf);
    return pmf;
}

} // namespace lmgc
