#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace lmgc {

/// Base of every error the library throws.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class IoError : public Error {
public:
    using Error::Error;
};

/// Input bytes do not follow an expected on-disk format.
class FormatError : public Error {
public:
    using Error::Error;
};

/// Invalid configuration (bad scheme, bad generator spec, bad precision...).
class ConfigError : public Error {
public:
    using Error::Error;
};

/// A caller broke a documented precondition.
class ContractViolation : public Error {
public:
    using Error::Error;
};

/// Symbol stream does not follow its scheme grammar.
class MalformedStream : public Error {
public:
    MalformedStream(const std::string& what, std::size_t offset)
        : Error(what + " (at symbol offset " + std::to_string(offset) + ")"), offset_(offset) {}
    std::size_t offset() const noexcept { return offset_; }

private:
    std::size_t offset_;
};

/// Compressed bitstream is damaged or truncated.
class CorruptStream : public Error {
public:
    using Error::Error;
};

/// The model has seen window_size tokens and must be reset before predicting again.
class WindowFull : public Error {
public:
    using Error::Error;
};

/// External model (bridge) could not be reached or answered with an error.
class ModelUnavailable : public Error {
public:
    using Error::Error;
};

/// Decoder was handed a model that differs from the one used to encode.
class FingerprintMismatch : public Error {
public:
    using Error::Error;
};

/// Round trip produced different bytes than the original.
class VerificationError : public Error {
public:
    using Error::Error;
};

} // namespace lmgc
