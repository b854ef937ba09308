#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace lmgc {

/// Linear quantization: each value becomes an index in [0, 2^n_bits - 1].
struct QuantizedTensor {
    std::vector<std::uint32_t> indices;
    unsigned n_bits = 8;
    float vmin = 0.0f;
    float vmax = 0.0f;

    std::size_t element_count() const noexcept { return indices.size(); }
    std::uint32_t levels() const noexcept { return (std::uint32_t{1} << n_bits) - 1; }

    friend bool operator==(const QuantizedTensor&, const QuantizedTensor&) = default;
};

/// Top-k sparsification keeping bit-exact binary32 values.
struct SparseTensor {
    std::vector<std::uint32_t> kept_indices;
    std::vector<float> kept_values;
    std::uint32_t original_len = 0;
    double proportion = 1.0;

    friend bool operator==(const SparseTensor& a, const SparseTensor& b);
};

/// index = round((v - min) / (max - min) * (2^n - 1)), ties to even; a constant
/// input maps to all zeros. Rejects empty input, NaN/inf, and n outside 1..16.
QuantizedTensor quantize_linear(std::span<const float> values, unsigned n_bits);

/// vmin + index * (vmax - vmin) / (2^n - 1); the top index returns vmax exactly.
std::vector<double> dequantize_linear(const QuantizedTensor& q);

/// 1-bit (SignSGD-style) quantization, identical to quantize_linear(values, 1).
QuantizedTensor sign_quantize(std::span<const float> values);

/// Per-layer variant: one QuantizedTensor per consecutive slice of `layer_sizes`.
std::vector<QuantizedTensor> quantize_linear_per_layer(std::span<const float> values,
                                                       std::span<const std::size_t> layer_sizes, unsigned n_bits);

/// Number of entries kept for a proportion: ceil(proportion * len), with
/// products within 1e-9 of an integer snapped to it.
std::size_t kept_count(double proportion, std::size_t len);

/// Keeps the kept_count() largest-magnitude entries, ties to the lower index.
SparseTensor sparsify_topk(std::span<const float> values, double proportion);

/// Dense reconstruction with zeros at dropped positions.
std::vector<float> densify(const SparseTensor& s);

// Packed byte layouts, all little-endian.
//
// Quantized: u8 version | u8 n_bits | u8 pad bits | u8 kind=1 | f32 vmin | f32 vmax,
//            then indices bit-packed LSB-first at n_bits each.
// Sparse:    u8 version | u8 kind=2 | u16 0 | u32 original_len | f64 proportion,
//            then k u32 positions, then k binary32 values.
// Layered:   u8 version | u8 kind=3 | u16 0 | u32 layer count, then per layer
//            u32 length + a quantized record.
inline constexpr std::uint8_t kPackVersion = 1;
inline constexpr std::size_t kQuantizedHeaderSize = 12;
inline constexpr std::size_t kSparseHeaderSize = 16;

std::vector<std::uint8_t> pack(const QuantizedTensor& q);
std::vector<std::uint8_t> pack(const SparseTensor& s);
std::vector<std::uint8_t> pack(std::span<const QuantizedTensor> layers);

QuantizedTensor unpack_quantized(std::span<const std::uint8_t> data);
SparseTensor unpack_sparse(std::span<const std::uint8_t> data);
std::vector<QuantizedTensor> unpack_layers(std::span<const std::uint8_t> data);

} // namespace lmgc
