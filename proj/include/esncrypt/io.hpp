#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace esncrypt {

/// Appends little-endian scalars to a growing byte buffer.
class ByteWriter {
public:
    void u8(std::uint8_t v) { buf_.push_back(v); }
    void u16(std::uint16_t v);
    void u32(std::uint32_t v);
    void u64(std::uint64_t v);
    void f64(double v);
    void bytes(std::span<const std::uint8_t> b);

    std::vector<std::uint8_t> take() { return std::move(buf_); }
    std::size_t size() const { return buf_.size(); }

private:
    std::vector<std::uint8_t> buf_;
};

/// Reads little-endian scalars; throws FormatError with the byte offset
/// on truncation.
class ByteReader {
public:
    explicit ByteReader(std::span<const std::uint8_t> buf) : buf_(buf) {}

    std::uint8_t u8();
    std::uint16_t u16();
    std::uint32_t u32();
    std::uint64_t u64();
    double f64();
    void bytes(std::span<std::uint8_t> out);

    std::size_t offset() const { return pos_; }
    std::size_t remaining() const { return buf_.size() - pos_; }

    /// Rejects trailing data; `what` names the container being parsed.
    void expect_end(const char* what) const;

private:
    void need(std::size_t n) const;

    std::span<const std::uint8_t> buf_;
    std::size_t pos_ = 0;
};

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);

/// Writes to a temporary sibling, then renames. An interrupted run never
/// leaves a half-written file at the target path.
void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> data);
void write_text_atomic(const std::filesystem::path& path, std::string_view text);

}  // namespace esncrypt
