#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "lmgc/bitstream.hpp"
#include "lmgc/models.hpp"

namespace lmgc {

struct EncodeOptions {
    std::uint8_t scheme_tag = kRawTokensTag;
    /// Worker threads for window-parallel coding. Only used when the model
    /// reports windows_independent(); adaptive models always run sequentially.
    unsigned threads = 1;
};

/// Codes one window from a freshly reset context.
WindowPayload encode_window(ProbabilityModel& model, std::span<const Token> window);
std::vector<Token> decode_window(ProbabilityModel& model, const WindowPayload& payload, std::size_t count);

/// Splits tokens into consecutive windows of at most window_size tokens and
/// codes each from a reset context. For raw token streams the header digest
/// covers the token ids; higher layers overwrite it with a digest of their
/// own source bytes.
Bitstream encode(std::span<const Token> tokens, const ModelFactory& factory, std::uint32_t window_size,
                 const EncodeOptions& options = {});

/// Inverse of encode(). Throws FingerprintMismatch when the factory builds a
/// different model and CorruptStream (naming the window) on damaged payloads.
std::vector<Token> decode(const Bitstream& bitstream, const ModelFactory& factory, unsigned threads = 1);

std::uint64_t token_digest(std::span<const Token> tokens);

} // namespace lmgc
