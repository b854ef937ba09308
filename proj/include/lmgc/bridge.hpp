#pragma once

// Client side of the language-model bridge.
//
// Frames are `u32 payload length | u8 type | payload`, integers little-endian.
//
//   INIT       (1)   client -> server, empty
//   INFO       (2)   u32 vocab_size, u32 max_context, u8 precision_bits, u64 fingerprint
//   PREDICT    (3)   u32 n, n x u32 context token ids
//   PMF        (4)   vocab_size x u32 frequencies summing to 2^precision_bits
//   SCORE_SEQ  (5)   u32 n, n x u32 token ids; answered by n PMF frames, frame k
//                    conditioned on ids[0..k)
//   TOKENIZE   (6)   UTF-8 text
//   TOKENS     (7)   u32 n, n x u32 token ids
//   DETOKENIZE (8)   u32 n, n x u32 token ids
//   TEXT       (9)   UTF-8 text
//   ERROR    (255)   u16 code, UTF-8 message
//
// Endpoints: "tcp:<host>:<port>", "unix:<path>" or "exec:<shell command>"
// (the command speaks the protocol on its stdin/stdout).

#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lmgc/models.hpp"

namespace lmgc::bridge {

inline constexpr const char* kEndpointEnv = "LMGC_BRIDGE";

enum class MessageType : std::uint8_t {
    init = 1,
    info = 2,
    predict = 3,
    pmf = 4,
    score_seq = 5,
    tokenize = 6,
    tokens = 7,
    detokenize = 8,
    text = 9,
    error = 255,
};

enum class ErrorCode : std::uint16_t {
    context_too_long = 1,
    malformed_frame = 2,
};

struct Frame {
    MessageType type = MessageType::error;
    std::vector<std::uint8_t> payload;
};

struct ServerInfo {
    std::uint32_t vocab_size = 0;
    std::uint32_t max_context = 0;
    std::uint8_t precision_bits = 0;
    std::uint64_t model_fingerprint = 0;
};

// Payload codecs, shared by the client and by test servers.
std::vector<std::uint8_t> encode_info(const ServerInfo& info);
ServerInfo decode_info(std::span<const std::uint8_t> payload);
std::vector<std::uint8_t> encode_token_list(std::span<const Token> ids);
std::vector<Token> decode_token_list(std::span<const std::uint8_t> payload);
std::vector<std::uint8_t> encode_pmf(const QuantizedPmf& pmf);
QuantizedPmf decode_pmf(std::span<const std::uint8_t> payload, std::uint32_t vocab_size, std::uint8_t precision_bits);
std::vector<std::uint8_t> encode_error(ErrorCode code, std::string_view message);

/// Blocking frame I/O over a pair of file descriptors (equal for sockets).
/// read_frame returns nullopt on a clean end of stream.
void write_frame(int fd, const Frame& frame);
std::optional<Frame> read_frame(int fd);

/// One client connection. Calls are serialized by an internal mutex, so a
/// connection can be shared by several models.
class Connection {
public:
    /// Connects and performs the INIT/INFO handshake. Throws ModelUnavailable.
    static std::shared_ptr<Connection> open(const std::string& endpoint);
    /// Adopts already connected descriptors (used by tests and embedders).
    static std::shared_ptr<Connection> adopt(int read_fd, int write_fd);

    ~Connection();
    Connection(const Connection&) = delete;
    Connection& operator=(const Connection&) = delete;

    const ServerInfo& info() const noexcept { return info_; }

    QuantizedPmf predict(std::span<const Token> context);
    std::vector<QuantizedPmf> score(std::span<const Token> sequence);
    std::vector<Token> tokenize(std::string_view utf8);
    std::string detokenize(std::span<const Token> ids);

private:
    Connection(int read_fd, int write_fd, int child_pid);
    void handshake();
    Frame roundtrip(const Frame& request, MessageType expected);
    Frame expect(MessageType expected);

    int read_fd_;
    int write_fd_;
    int child_pid_;
    ServerInfo info_;
    std::mutex mutex_;
};

/// ProbabilityModel backed by a bridge connection. Context only; the server
/// weights are frozen, so windows are independent.
class BridgeModel final : public ProbabilityModel {
public:
    BridgeModel(std::shared_ptr<Connection> connection, std::uint32_t window_size);

    ModelKind kind() const override { return ModelKind::bridge; }
    std::uint32_t vocab_size() const override { return connection_->info().vocab_size; }
    std::uint8_t precision_bits() const override { return connection_->info().precision_bits; }
    std::uint64_t fingerprint() const override { return connection_->info().model_fingerprint; }

    std::optional<std::vector<QuantizedPmf>> score_window(std::span<const Token> window) override;

protected:
    const QuantizedPmf& predict(std::span<const Token> context) override;

private:
    std::shared_ptr<Connection> connection_;
    QuantizedPmf last_;
};

/// Endpoint from the argument, falling back to $LMGC_BRIDGE. Throws
/// ModelUnavailable when neither is set.
std::string resolve_endpoint(const std::string& endpoint);

ModelFactory make_factory(std::shared_ptr<Connection> connection);

} // namespace lmgc::bridge
