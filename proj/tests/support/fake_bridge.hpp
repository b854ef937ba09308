#pragma once

// In-repo stand-in for the language-model bridge server: a byte-level
// tokenizer (token id = UTF-8 byte) and an add-one count model over the
// tokens of the current context.

#include <cstdint>
#include <memory>
#include <thread>

#include "lmgc/bridge.hpp"

namespace lmgc::testkit {

struct FakeBridgeOptions {
    std::uint32_t max_context = 4096;
    std::uint8_t precision_bits = 16;
    std::uint64_t fingerprint = 0x5eed0001;
    bool corrupt_pmf = false;       // PMF frames that do not sum to 2^precision
    bool lossy_tokenizer = false;   // DETOKENIZE drops ' ' so text does not round-trip
};

/// The PMF the fake server returns for `context`.
QuantizedPmf fake_pmf(std::span<const Token> context, std::uint8_t precision_bits);

/// Serves one client until end of stream.
void serve(int read_fd, int write_fd, const FakeBridgeOptions& options);

/// A server on one end of a socketpair, running on its own thread.
class InProcessBridge {
public:
    explicit InProcessBridge(FakeBridgeOptions options = {});
    ~InProcessBridge();

    std::shared_ptr<bridge::Connection> connect();

private:
    FakeBridgeOptions options_;
    int client_fd_ = -1;
    std::thread thread_;
};

} // namespace lmgc::testkit
