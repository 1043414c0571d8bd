#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace feather {

using Bytes = std::vector<std::uint8_t>;
using ByteSpan = std::span<const std::uint8_t>;

/// Base class for every error raised by the library.
class FeatherError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Raised when a byte or text encoding cannot be parsed.
class DecodeError : public FeatherError {
public:
    using FeatherError::FeatherError;
};

/// Little-endian append-only encoder.
class ByteWriter {
public:
    void reserve(std::size_t n) { buf_.reserve(n); }
    void u8(std::uint8_t v) { buf_.push_back(v); }
    void u16(std::uint16_t v);
    void u32(std::uint32_t v);
    void u64(std::uint64_t v);
    void i32(std::int32_t v) { u32(static_cast<std::uint32_t>(v)); }
    void raw(ByteSpan data) { buf_.insert(buf_.end(), data.begin(), data.end()); }

    const Bytes& bytes() const& { return buf_; }
    Bytes take() && { return std::move(buf_); }

private:
    Bytes buf_;
};

/// Bounds-checked little-endian decoder over a borrowed buffer.
class ByteReader {
public:
    explicit ByteReader(ByteSpan data) : data_(data) {}

    std::uint8_t u8();
    std::uint16_t u16();
    std::uint32_t u32();
    std::uint64_t u64();
    std::int32_t i32() { return static_cast<std::int32_t>(u32()); }
    ByteSpan raw(std::size_t n);

    std::size_t remaining() const { return data_.size() - pos_; }
    bool done() const { return pos_ == data_.size(); }
    /// Throws DecodeError if unread bytes remain.
    void expect_done() const;

private:
    ByteSpan data_;
    std::size_t pos_ = 0;
};

std::string to_hex(ByteSpan data);
Bytes from_hex(std::string_view hex);

inline ByteSpan as_bytes(std::string_view s)
{
    return {reinterpret_cast<const std::uint8_t*>(s.data()), s.size()};
}

} // namespace feather
