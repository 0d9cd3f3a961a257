#include "esncrypt/io.hpp"

#include <bit>
#include <cstdio>
#include <fstream>
#include <random>
#include <system_error>

#include "esncrypt/errors.hpp"

namespace esncrypt {

void ByteWriter::u16(std::uint16_t v) {
    buf_.push_back(static_cast<std::uint8_t>(v));
    buf_.push_back(static_cast<std::uint8_t>(v >> 8));
}

void ByteWriter::u32(std::uint32_t v) {
    for (int s = 0; s < 32; s += 8) buf_.push_back(static_cast<std::uint8_t>(v >> s));
}

void ByteWriter::u64(std::uint64_t v) {
    for (int s = 0; s < 64; s += 8) buf_.push_back(static_cast<std::uint8_t>(v >> s));
}

void ByteWriter::f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }

void ByteWriter::bytes(std::span<const std::uint8_t> b) {
    buf_.insert(buf_.end(), b.begin(), b.end());
}

void ByteReader::need(std::size_t n) const {
    if (buf_.size() - pos_ < n) throw FormatError("unexpected end of data", pos_);
}

std::uint8_t ByteReader::u8() {
    need(1);
    return buf_[pos_++];
}

std::uint16_t ByteReader::u16() {
    need(2);
    std::uint16_t v = static_cast<std::uint16_t>(buf_[pos_] | (buf_[pos_ + 1] << 8));
    pos_ += 2;
    return v;
}

std::uint32_t ByteReader::u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(buf_[pos_ + i]) << (8 * i);
    pos_ += 4;
    return v;
}

std::uint64_t ByteReader::u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(buf_[pos_ + i]) << (8 * i);
    pos_ += 8;
    return v;
}

double ByteReader::f64() { return std::bit_cast<double>(u64()); }

void ByteReader::bytes(std::span<std::uint8_t> out) {
    need(out.size());
    std::copy_n(buf_.data() + pos_, out.size(), out.data());
    pos_ += out.size();
}

void ByteReader::expect_end(const char* what) const {
    if (pos_ != buf_.size()) {
        throw FormatError(std::string("trailing data after ") + what, pos_);
    }
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string() + " for reading");
    std::vector<std::uint8_t> data((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
    if (in.bad()) throw IoError("read failure on " + path.string());
    return data;
}

void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> data) {
    std::filesystem::path dir = path.parent_path();
    if (dir.empty()) dir = ".";

    std::random_device rd;
    std::filesystem::path tmp =
        dir / (path.filename().string() + ".tmp" + std::to_string(rd() % 1000000));
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
        out.write(reinterpret_cast<const char*>(data.data()),
                  static_cast<std::streamsize>(data.size()));
        out.flush();
        if (!out) {
            std::error_code ec;
            std::filesystem::remove(tmp, ec);
            throw IoError("write failure on " + tmp.string());
        }
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::error_code ec2;
        std::filesystem::remove(tmp, ec2);
        throw IoError("cannot move " + tmp.string() + " to " + path.string() + ": " +
                      ec.message());
    }
}

void write_text_atomic(const std::filesystem::path& path, std::string_view text) {
    write_file_atomic(path, {reinterpret_cast<const std::uint8_t*>(text.data()), text.size()});
}

}  // namespace esncrypt
