#include "lmgc/lossy.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>

#include "lmgc/errors.hpp"

namespace lmgc {

bool operator==(const SparseTensor& a, const SparseTensor& b) {
    if (a.kept_indices != b.kept_indices || a.original_len != b.original_len || a.proportion != b.proportion ||
        a.kept_values.size() != b.kept_values.size())
        return false;
    for (std::size_t i = 0; i < a.kept_values.size(); ++i)
        if (std::bit_cast<std::uint32_t>(a.kept_values[i]) != std::bit_cast<std::uint32_t>(b.kept_values[i]))
            return false;
    return true;
}

namespace {

void require_finite(std::span<const float> values) {
    for (std::size_t i = 0; i < values.size(); ++i)
        if (!std::isfinite(values[i]))
            throw ContractViolation("non-finite value at index " + std::to_string(i) +
                                    "; filter NaN/inf before lossy compression");
}

template <typename T>
void put(std::vector<std::uint8_t>& out, T value) {
    using U = std::conditional_t<sizeof(T) == 8, std::uint64_t, std::uint32_t>;
    U bits;
    if constexpr (std::is_floating_point_v<T>)
        bits = std::bit_cast<U>(value);
    else
        bits = static_cast<U>(value);
    for (std::size_t i = 0; i < sizeof(T); ++i)
        out.push_back(static_cast<std::uint8_t>(bits >> (8 * i)));
}

template <typename T>
T get(std::span<const std::uint8_t> in, std::size_t offset) {
    using U = std::conditional_t<sizeof(T) == 8, std::uint64_t, std::uint32_t>;
    U bits = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i)
        bits |= static_cast<U>(in[offset + i]) << (8 * i);
    if constexpr (std::is_floating_point_v<T>)
        return std::bit_cast<T>(bits);
    else
        return static_cast<T>(bits);
}

} // namespace

QuantizedTensor quantize_linear(std::span<const float> values, unsigned n_bits) {
    if (values.empty())
        throw ContractViolation("quantize_linear: empty input");
    if (n_bits < 1 || n_bits > 16)
        throw ContractViolation("quantize_linear: n_bits must be in 1..16");
    require_finite(values);

    QuantizedTensor q;
    q.n_bits = n_bits;
    const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    q.vmin = *lo;
    q.vmax = *hi;
    q.indices.resize(values.size());
    if (q.vmin == q.vmax)
        return q;

    const double vmin = q.vmin;
    const double range = static_cast<double>(q.vmax) - vmin;
    const double levels = q.levels();
    for (std::size_t i = 0; i < values.size(); ++i) {
        // nearbyint under the default rounding mode rounds half to even.
        const double scaled = std::nearbyint((static_cast<double>(values[i]) - vmin) / range * levels);
        q.indices[i] = static_cast<std::uint32_t>(std::clamp(scaled, 0.0, levels));
    }
    return q;
}

std::vector<double> dequantize_linear(const QuantizedTensor& q) {
    std::vector<double> out(q.indices.size());
    const double vmin = q.vmin;
    const double range = static_cast<double>(q.vmax) - vmin;
    const std::uint32_t levels = q.levels();
    for (std::size_t i = 0; i < out.size(); ++i) {
        const std::uint32_t idx = q.indices[i];
        if (idx > levels)
            throw ContractViolation("index exceeds 2^n - 1");
        out[i] = idx == levels ? static_cast<double>(q.vmax) : vmin + idx * range / levels;
    }
    return out;
}

QuantizedTensor sign_quantize(std::span<const float> values) {
    return quantize_linear(values, 1);
}

std::vector<QuantizedTensor> quantize_linear_per_layer(std::span<const float> values,
                                                       std::span<const std::size_t> layer_sizes, unsigned n_bits) {
    std::size_t total = std::accumulate(layer_sizes.begin(), layer_sizes.end(), std::size_t{0});
    if (total != values.size())
        throw ContractViolation("layer sizes sum to " + std::to_string(total) + " but there are " +
                                std::to_string(values.size()) + " values");
    std::vector<QuantizedTensor> out;
    std::size_t offset = 0;
    for (auto n : layer_sizes) {
        out.push_back(quantize_linear(values.subspan(offset, n), n_bits));
        offset += n;
    }
    return out;
}

std::size_t kept_count(double proportion, std::size_t len) {
    const double x = proportion * static_cast<double>(len);
    const double r = std::round(x);
    if (std::abs(x - r) <= 1e-9 * std::max(1.0, x))
        return static_cast<std::size_t>(r);
    return static_cast<std::size_t>(std::ceil(x));
}

SparseTensor sparsify_topk(std::span<const float> values, double proportion) {
    if (!(proportion > 0.0 && proportion <= 1.0))
        throw ConfigError("sparsification proportion must lie in (0, 1]");
    if (values.size() > 0xFFFFFFFFu)
        throw ContractViolation("sparsify_topk: more than 2^32 values");
    for (std::size_t i = 0; i < values.size(); ++i)
        if (std::isnan(values[i]))
            throw ContractViolation("NaN at index " + std::to_string(i) + "; filter before sparsifying");

    SparseTensor s;
    s.original_len = static_cast<std::uint32_t>(values.size());
    s.proportion = proportion;
    const std::size_t k = kept_count(proportion, values.size());

    std::vector<std::uint32_t> order(values.size());
    std::iota(order.begin(), order.end(), 0u);
    auto larger = [&](std::uint32_t a, std::uint32_t b) {
        const float ma = std::abs(values[a]);
        const float mb = std::abs(values[b]);
        return ma != mb ? ma > mb : a < b;
    };
    if (k < order.size())
        std::nth_element(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(), larger);
    order.resize(k);
    std::sort(order.begin(), order.end());

    s.kept_indices = std::move(order);
    s.kept_values.reserve(k);
    for (auto i : s.kept_indices)
        s.kept_values.push_back(values[i]);
    return s;
}

std::vector<float> densify(const SparseTensor& s) {
    std::vector<float> out(s.original_len, 0.0f);
    for (std::size_t i = 0; i < s.kept_indices.size(); ++i)
        out.at(s.kept_indices[i]) = s.kept_values[i];
    return out;
}

// ---------------------------------------------------------------------------

std::vector<std::uint8_t> pack(const QuantizedTensor& q) {
    if (q.n_bits < 1 || q.n_bits > 16)
        throw ContractViolation("pack: n_bits must be in 1..16");
    const std::uint64_t bits = std::uint64_t{q.n_bits} * q.indices.size();
    const std::size_t payload = static_cast<std::size_t>((bits + 7) / 8);

    std::vector<std::uint8_t> out;
    out.reserve(kQuantizedHeaderSize + payload);
    out.push_back(kPackVersion);
    out.push_back(static_cast<std::uint8_t>(q.n_bits));
    out.push_back(static_cast<std::uint8_t>(payload * 8 - bits));
    out.push_back(1);
    put(out, q.vmin);
    put(out, q.vmax);

    out.resize(kQuantizedHeaderSize + payload, 0);
    std::uint8_t* body = out.data() + kQuantizedHeaderSize;
    std::uint64_t pos = 0;
    for (auto idx : q.indices) {
        if (idx > q.levels())
            throw ContractViolation("pack: index exceeds 2^n - 1");
        for (unsigned b = 0; b < q.n_bits; ++b, ++pos)
            if ((idx >> b) & 1u)
                body[pos >> 3] |= static_cast<std::uint8_t>(1u << (pos & 7));
    }
    return out;
}

QuantizedTensor unpack_quantized(std::span<const std::uint8_t> data) {
    if (data.size() < kQuantizedHeaderSize)
        throw FormatError("quantized record shorter than its header");
    if (data[0] != kPackVersion || data[3] != 1)
        throw FormatError("not a version-1 quantized record");
    QuantizedTensor q;
    q.n_bits = data[1];
    if (q.n_bits < 1 || q.n_bits > 16)
        throw FormatError("quantized record has invalid n_bits");
    const unsigned pad = data[2];
    q.vmin = get<float>(data, 4);
    q.vmax = get<float>(data, 8);
    const auto body = data.subspan(kQuantizedHeaderSize);
    const std::uint64_t bits = std::uint64_t{body.size()} * 8;
    if (pad > 7 || pad > bits || (bits - pad) % q.n_bits != 0)
        throw FormatError("quantized record length is inconsistent with n_bits and padding");
    q.indices.resize(static_cast<std::size_t>((bits - pad) / q.n_bits));
    std::uint64_t pos = 0;
    for (auto& idx : q.indices) {
        std::uint32_t v = 0;
        for (unsigned b = 0; b < q.n_bits; ++b, ++pos)
            v |= static_cast<std::uint32_t>((body[pos >> 3] >> (pos & 7)) & 1u) << b;
        idx = v;
    }
    return q;
}

std::vector<std::uint8_t> pack(const SparseTensor& s) {
    if (s.kept_indices.size() != s.kept_values.size())
        throw ContractViolation("pack: sparse index/value counts differ");
    std::vector<std::uint8_t> out;
    out.reserve(kSparseHeaderSize + 8 * s.kept_indices.size());
    out.push_back(kPackVersion);
    out.push_back(2);
    out.push_back(0);
    out.push_back(0);
    put(out, s.original_len);
    put(out, s.proportion);
    for (auto i : s.kept_indices)
        put(out, i);
    for (auto v : s.kept_values)
        put(out, v);
    return out;
}

SparseTensor unpack_sparse(std::span<const std::uint8_t> data) {
    if (data.size() < kSparseHeaderSize)
        throw FormatError("sparse record shorter than its header");
    if (data[0] != kPackVersion || data[1] != 2)
        throw FormatError("not a version-1 sparse record");
    if ((data.size() - kSparseHeaderSize) % 8 != 0)
        throw FormatError("sparse record body is not a whole number of (position, value) pairs");
    SparseTensor s;
    s.original_len = get<std::uint32_t>(data, 4);
    s.proportion = get<double>(data, 8);
    const std::size_t k = (data.size() - kSparseHeaderSize) / 8;
    s.kept_indices.resize(k);
    s.kept_values.resize(k);
    for (std::size_t i = 0; i < k; ++i) {
        s.kept_indices[i] = get<std::uint32_t>(data, kSparseHeaderSize + 4 * i);
        s.kept_values[i] = get<float>(data, kSparseHeaderSize + 4 * k + 4 * i);
        if (s.kept_indices[i] >= s.original_len || (i > 0 && s.kept_indices[i] <= s.kept_indices[i - 1]))
            throw FormatError("sparse positions must be strictly increasing and in range");
    }
    return s;
}

std::vector<std::uint8_t> pack(std::span<const QuantizedTensor> layers) {
    std::vector<std::uint8_t> out = {kPackVersion, 3, 0, 0};
    put(out, static_cast<std::uint32_t>(layers.size()));
    for (const auto& q : layers) {
        auto rec = pack(q);
        put(out, static_cast<std::uint32_t>(rec.size()));
        out.insert(out.end(), rec.begin(), rec.end());
    }
    return out;
}

std::vector<QuantizedTensor> unpack_layers(std::span<const std::uint8_t> data) {
    if (data.size() < 8 || data[0] != kPackVersion || data[1] != 3)
        throw FormatError("not a version-1 layered quantized record");
    const std::uint32_t n = get<std::uint32_t>(data, 4);
    std::vector<QuantizedTensor> out;
    std::size_t pos = 8;
    for (std::uint32_t i = 0; i < n; ++i) {
        if (data.size() - pos < 4)
            throw FormatError("layered record truncated");
        const std::uint32_t len = get<std::uint32_t>(data, pos);
        pos += 4;
        if (data.size() - pos < len)
            throw FormatError("layered record truncated");
        out.push_back(unpack_quantized(data.subspan(pos, len)));
        pos += len;
    }
    if (pos != data.size())
        throw FormatError("trailing bytes after layered record");
    return out;
}

} // namespace lmgc
