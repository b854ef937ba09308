#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lmgc/bitstream.hpp"
#include "lmgc/models.hpp"
#include "lmgc/serializer.hpp"

namespace lmgc {

namespace bridge {
class Connection;
}

struct CompressOptions {
    Scheme scheme = Scheme::default_scheme();
    ModelSpec model;
    std::uint32_t window_size = 2048;
    unsigned threads = 1;
    /// Reused instead of opening model.bridge_endpoint when set.
    std::shared_ptr<bridge::Connection> bridge;
};

struct DecompressOptions {
    /// Needed only for streams coded with a non-uniform static model.
    std::optional<QuantizedPmf> static_pmf;
    std::string bridge_endpoint;
    std::shared_ptr<bridge::Connection> bridge;
    unsigned threads = 1;
};

/// Bytes -> symbols (serializer) -> tokens (identity, or the bridge tokenizer)
/// -> arithmetic-coded windows. The header digest covers the input bytes.
Bitstream compress_to_bitstream(std::span<const std::uint8_t> data, const CompressOptions& options);
std::vector<std::uint8_t> compress(std::span<const std::uint8_t> data, const CompressOptions& options);

/// Reconstructs the model from the header, decodes, and checks length and
/// digest. Throws CorruptStream when the result does not match.
std::vector<std::uint8_t> decompress(const Bitstream& stream, const DecompressOptions& options = {});
std::vector<std::uint8_t> decompress(std::span<const std::uint8_t> stream, const DecompressOptions& options = {});

std::uint64_t byte_digest(std::span<const std::uint8_t> data);

} // namespace lmgc
