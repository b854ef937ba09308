#include "lmgc/bridge.hpp"

#include <cerrno>
#include <csignal>
#include <cstdlib>
#include <cstring>

#include <netdb.h>
#include <spawn.h>
#include <sys/socket.h>
#include <sys/un.h>
#include <sys/wait.h>
#include <unistd.h>

#include "lmgc/errors.hpp"

extern char** environ;

namespace lmgc::bridge {

namespace {

// Frames larger than this are treated as a protocol error (2^18 vocab * 4 bytes fits easily).
constexpr std::uint32_t kMaxPayload = 64u << 20;

template <typename T>
void put(std::vector<std::uint8_t>& out, T value) {
    for (std::size_t i = 0; i < sizeof(T); ++i)
        out.push_back(static_cast<std::uint8_t>(static_cast<std::uint64_t>(value) >> (8 * i)));
}

template <typename T>
T get(std::span<const std::uint8_t> in, std::size_t offset) {
    T v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i)
        v |= static_cast<T>(static_cast<T>(in[offset + i]) << (8 * i));
    return v;
}

void write_all(int fd, const std::uint8_t* data, std::size_t n) {
    while (n > 0) {
        const ssize_t w = ::write(fd, data, n);
        if (w < 0) {
            if (errno == EINTR)
                continue;
            throw ModelUnavailable(std::string("bridge write failed: ") + std::strerror(errno));
        }
        data += w;
        n -= static_cast<std::size_t>(w);
    }
}

// Returns false on end of stream before the first byte.
bool read_all(int fd, std::uint8_t* data, std::size_t n) {
    std::size_t got = 0;
    while (got < n) {
        const ssize_t r = ::read(fd, data + got, n - got);
        if (r < 0) {
            if (errno == EINTR)
                continue;
            throw ModelUnavailable(std::string("bridge read failed: ") + std::strerror(errno));
        }
        if (r == 0) {
            if (got == 0)
                return false;
            throw ModelUnavailable("bridge connection closed mid-frame");
        }
        got += static_cast<std::size_t>(r);
    }
    return true;
}

int connect_tcp(const std::string& host, const std::string& port) {
    addrinfo hints{};
    hints.ai_family = AF_UNSPEC;
    hints.ai_socktype = SOCK_STREAM;
    addrinfo* res = nullptr;
    if (int rc = ::getaddrinfo(host.c_str(), port.c_str(), &hints, &res); rc != 0)
        throw ModelUnavailable("cannot resolve bridge host " + host + ": " + ::gai_strerror(rc));
    int fd = -1;
    for (auto* ai = res; ai != nullptr; ai = ai->ai_next) {
        fd = ::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol);
        if (fd < 0)
            continue;
        if (::connect(fd, ai->ai_addr, ai->ai_addrlen) == 0)
            break;
        ::close(fd);
        fd = -1;
    }
    ::freeaddrinfo(res);
    if (fd < 0)
        throw ModelUnavailable("cannot connect to bridge at " + host + ":" + port);
    return fd;
}

int connect_unix(const std::string& path) {
    sockaddr_un addr{};
    if (path.size() >= sizeof(addr.sun_path))
        throw ConfigError("unix socket path too long: " + path);
    addr.sun_family = AF_UNIX;
    std::memcpy(addr.sun_path, path.c_str(), path.size() + 1);
    int fd = ::socket(AF_UNIX, SOCK_STREAM, 0);
    if (fd < 0)
        throw ModelUnavailable(std::string("socket: ") + std::strerror(errno));
    if (::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0) {
        ::close(fd);
        throw ModelUnavailable("cannot connect to bridge socket " + path + ": " + std::strerror(errno));
    }
    return fd;
}

} // namespace

// ---------------------------------------------------------------------------
// Payloads

std::vector<std::uint8_t> encode_info(const ServerInfo& info) {
    std::vector<std::uint8_t> out;
    put(out, info.vocab_size);
    put(out, info.max_context);
    put(out, info.precision_bits);
    put(out, info.model_fingerprint);
    return out;
}

ServerInfo decode_info(std::span<const std::uint8_t> payload) {
    if (payload.size() != 17)
        throw ModelUnavailable("INFO payload has " + std::to_string(payload.size()) + " bytes, expected 17");
    ServerInfo info;
    info.vocab_size = get<std::uint32_t>(payload, 0);
    info.max_context = get<std::uint32_t>(payload, 4);
    info.precision_bits = payload[8];
    info.model_fingerprint = get<std::uint64_t>(payload, 9);
    return info;
}

std::vector<std::uint8_t> encode_token_list(std::span<const Token> ids) {
    std::vector<std::uint8_t> out;
    out.reserve(4 + 4 * ids.size());
    put(out, static_cast<std::uint32_t>(ids.size()));
    for (Token t : ids)
        put(out, t);
    return out;
}

std::vector<Token> decode_token_list(std::span<const std::uint8_t> payload) {
    if (payload.size() < 4)
        throw FormatError("token list payload too short");
    const std::uint32_t n = get<std::uint32_t>(payload, 0);
    if (payload.size() != 4 + 4 * std::uint64_t{n})
        throw FormatError("token list length does not match payload size");
    std::vector<Token> ids(n);
    for (std::uint32_t i = 0; i < n; ++i)
        ids[i] = get<std::uint32_t>(payload, 4 + 4 * std::size_t{i});
    return ids;
}

std::vector<std::uint8_t> encode_pmf(const QuantizedPmf& pmf) {
    std::vector<std::uint8_t> out;
    out.reserve(4 * pmf.size());
    for (auto f : pmf.freqs)
        put(out, f);
    return out;
}

QuantizedPmf decode_pmf(std::span<const std::uint8_t> payload, std::uint32_t vocab_size,
                        std::uint8_t precision_bits) {
    if (payload.size() != 4 * std::uint64_t{vocab_size})
        throw ModelUnavailable("PMF frame has " + std::to_string(payload.size()) + " bytes, expected " +
                               std::to_string(4 * std::uint64_t{vocab_size}));
    QuantizedPmf pmf;
    pmf.precision_bits = precision_bits;
    pmf.freqs.resize(vocab_size);
    for (std::uint32_t i = 0; i < vocab_size; ++i)
        pmf.freqs[i] = get<std::uint32_t>(payload, 4 * std::size_t{i});
    try {
        pmf.validate();
    } catch (const ContractViolation& e) {
        throw ModelUnavailable(std::string("server sent an invalid PMF: ") + e.what());
    }
    return pmf;
}

std::vector<std::uint8_t> encode_error(ErrorCode code, std::string_view message) {
    std::vector<std::uint8_t> out;
    put(out, static_cast<std::uint16_t>(code));
    out.insert(out.end(), message.begin(), message.end());
    return out;
}

void write_frame(int fd, const Frame& frame) {
    std::vector<std::uint8_t> buf;
    buf.reserve(5 + frame.payload.size());
    put(buf, static_cast<std::uint32_t>(frame.payload.size()));
    buf.push_back(static_cast<std::uint8_t>(frame.type));
    buf.insert(buf.end(), frame.payload.begin(), frame.payload.end());
    write_all(fd, buf.data(), buf.size());
}

std::optional<Frame> read_frame(int fd) {
    std::uint8_t head[5];
    if (!read_all(fd, head, sizeof(head)))
        return std::nullopt;
    const auto len = get<std::uint32_t>(head, 0);
    if (len > kMaxPayload)
        throw ModelUnavailable("bridge frame of " + std::to_string(len) + " bytes exceeds the limit");
    Frame f;
    f.type = static_cast<MessageType>(head[4]);
    f.payload.resize(len);
    if (len > 0 && !read_all(fd, f.payload.data(), len))
        throw ModelUnavailable("bridge connection closed mid-frame");
    return f;
}

// ---------------------------------------------------------------------------
// Connection

Connection::Connection(int read_fd, int write_fd, int child_pid)
    : read_fd_(read_fd), write_fd_(write_fd), child_pid_(child_pid) {}

Connection::~Connection() {
    if (write_fd_ != read_fd_ && write_fd_ >= 0)
        ::close(write_fd_);
    if (read_fd_ >= 0)
        ::close(read_fd_);
    if (child_pid_ > 0) {
        int status = 0;
        ::waitpid(child_pid_, &status, 0);
    }
}

std::shared_ptr<Connection> Connection::adopt(int read_fd, int write_fd) {
    std::shared_ptr<Connection> c(new Connection(read_fd, write_fd, -1));
    c->handshake();
    return c;
}

std::shared_ptr<Connection> Connection::open(const std::string& endpoint) {
    auto colon = endpoint.find(':');
    const std::string scheme = endpoint.substr(0, colon);
    const std::string rest = colon == std::string::npos ? std::string() : endpoint.substr(colon + 1);

    if (scheme == "tcp") {
        auto last = rest.rfind(':');
        if (last == std::string::npos)
            throw ConfigError("tcp endpoint needs host:port, got '" + endpoint + "'");
        const int fd = connect_tcp(rest.substr(0, last), rest.substr(last + 1));
        std::shared_ptr<Connection> c(new Connection(fd, fd, -1));
        c->handshake();
        return c;
    }
    if (scheme == "unix") {
        const int fd = connect_unix(rest);
        std::shared_ptr<Connection> c(new Connection(fd, fd, -1));
        c->handshake();
        return c;
    }
    if (scheme == "exec") {
        // A dying server must surface as a read/write error, not kill the client.
        std::signal(SIGPIPE, SIG_IGN);
        int to_child[2];
        int from_child[2];
        if (::pipe(to_child) != 0 || ::pipe(from_child) != 0)
            throw ModelUnavailable(std::string("pipe: ") + std::strerror(errno));
        posix_spawn_file_actions_t actions;
        posix_spawn_file_actions_init(&actions);
        posix_spawn_file_actions_adddup2(&actions, to_child[0], STDIN_FILENO);
        posix_spawn_file_actions_adddup2(&actions, from_child[1], STDOUT_FILENO);
        posix_spawn_file_actions_addclose(&actions, to_child[1]);
        posix_spawn_file_actions_addclose(&actions, from_child[0]);
        const char* argv[] = {"/bin/sh", "-c", rest.c_str(), nullptr};
        pid_t pid = -1;
        const int rc = ::posix_spawn(&pid, "/bin/sh", &actions, nullptr, const_cast<char* const*>(argv), environ);
        posix_spawn_file_actions_destroy(&actions);
        ::close(to_child[0]);
        ::close(from_child[1]);
        if (rc != 0) {
            ::close(to_child[1]);
            ::close(from_child[0]);
            throw ModelUnavailable("cannot start bridge command: " + std::string(std::strerror(rc)));
        }
        std::shared_ptr<Connection> c(new Connection(from_child[0], to_child[1], pid));
        c->handshake();
        return c;
    }
    throw ConfigError("unknown bridge endpoint '" + endpoint + "' (expected tcp:, unix: or exec:)");
}

Frame Connection::expect(MessageType expected) {
    auto reply = read_frame(read_fd_);
    if (!reply)
        throw ModelUnavailable("bridge closed the connection");
    if (reply->type == MessageType::error) {
        const auto code = reply->payload.size() >= 2 ? get<std::uint16_t>(reply->payload, 0) : 0;
        const std::string msg = reply->payload.size() > 2
                                    ? std::string(reply->payload.begin() + 2, reply->payload.end())
                                    : std::string();
        throw ModelUnavailable("bridge error " + std::to_string(code) + ": " + msg);
    }
    if (reply->type != expected)
        throw ModelUnavailable("bridge replied with message type " +
                               std::to_string(static_cast<int>(reply->type)) + ", expected " +
                               std::to_string(static_cast<int>(expected)));
    return std::move(*reply);
}

Frame Connection::roundtrip(const Frame& request, MessageType expected) {
    write_frame(write_fd_, request);
    return expect(expected);
}

void Connection::handshake() {
    std::lock_guard lock(mutex_);
    info_ = decode_info(roundtrip({MessageType::init, {}}, MessageType::info).payload);
    if (info_.vocab_size == 0)
        throw ModelUnavailable("bridge reports an empty vocabulary");
    if (info_.precision_bits > kMaxPrecisionBits || info_.precision_bits < min_precision_bits(info_.vocab_size))
        throw ModelUnavailable("bridge precision of " + std::to_string(info_.precision_bits) +
                               " bits is unusable for a vocabulary of " + std::to_string(info_.vocab_size));
}

QuantizedPmf Connection::predict(std::span<const Token> context) {
    std::lock_guard lock(mutex_);
    auto reply = roundtrip({MessageType::predict, encode_token_list(context)}, MessageType::pmf);
    return decode_pmf(reply.payload, info_.vocab_size, info_.precision_bits);
}

std::vector<QuantizedPmf> Connection::score(std::span<const Token> sequence) {
    std::lock_guard lock(mutex_);
    write_frame(write_fd_, {MessageType::score_seq, encode_token_list(sequence)});
    std::vector<QuantizedPmf> out;
    out.reserve(sequence.size());
    for (std::size_t k = 0; k < sequence.size(); ++k)
        out.push_back(decode_pmf(expect(MessageType::pmf).payload, info_.vocab_size, info_.precision_bits));
    return out;
}

std::vector<Token> Connection::tokenize(std::string_view utf8) {
    std::lock_guard lock(mutex_);
    auto reply = roundtrip({MessageType::tokenize, {utf8.begin(), utf8.end()}}, MessageType::tokens);
    try {
        return decode_token_list(reply.payload);
    } catch (const FormatError& e) {
        throw ModelUnavailable(std::string("bad TOKENS frame: ") + e.what());
    }
}

std::string Connection::detokenize(std::span<const Token> ids) {
    std::lock_guard lock(mutex_);
    auto reply = roundtrip({MessageType::detokenize, encode_token_list(ids)}, MessageType::text);
    return {reply.payload.begin(), reply.payload.end()};
}

// ---------------------------------------------------------------------------

BridgeModel::BridgeModel(std::shared_ptr<Connection> connection, std::uint32_t window_size)
    : ProbabilityModel(window_size), connection_(std::move(connection)) {
    if (window_size > connection_->info().max_context)
        throw ConfigError("window of " + std::to_string(window_size) + " tokens exceeds the bridge context limit of " +
                          std::to_string(connection_->info().max_context));
}

const QuantizedPmf& BridgeModel::predict(std::span<const Token> context) {
    last_ = connection_->predict(context);
    return last_;
}

std::optional<std::vector<QuantizedPmf>> BridgeModel::score_window(std::span<const Token> window) {
    if (window.empty())
        return std::vector<QuantizedPmf>{};
    return connection_->score(window);
}

std::string resolve_endpoint(const std::string& endpoint) {
    if (!endpoint.empty())
        return endpoint;
    if (const char* env = std::getenv(kEndpointEnv); env != nullptr && *env != '\0')
        return env;
    throw ModelUnavailable(std::string("no bridge endpoint given and ") + kEndpointEnv + " is not set");
}

ModelFactory make_factory(std::shared_ptr<Connection> connection) {
    return [connection](std::uint32_t window) { return std::make_unique<BridgeModel>(connection, window); };
}

} // namespace lmgc::bridge
