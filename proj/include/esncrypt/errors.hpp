#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace esncrypt {

class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Malformed key or ciphertext data. Carries the byte offset at which
/// parsing failed, when known.
class FormatError : public Error {
public:
    explicit FormatError(const std::string& msg, std::uint64_t offset = 0)
        : Error(msg), offset_(offset) {}
    std::uint64_t offset() const noexcept { return offset_; }

private:
    std::uint64_t offset_;
};

/// Failures of the scheme itself: untrainable or unmemorizable chunks,
/// numerical blow-up during recall, key/ciphertext mismatches.
class CryptoError : public Error {
public:
    explicit CryptoError(const std::string& msg, std::int64_t position = -1)
        : Error(msg), position_(position) {}
    /// First offending byte position for unmemorizable chunks, -1 otherwise.
    std::int64_t position() const noexcept { return position_; }

private:
    std::int64_t position_;
};

/// Iterative estimate failed to converge; carries the best value reached.
class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& msg, double best_estimate)
        : Error(msg), best_estimate_(best_estimate) {}
    double best_estimate() const noexcept { return best_estimate_; }

private:
    double best_estimate_;
};

class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace esncrypt
