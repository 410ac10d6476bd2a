#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace dpush {

using Bytes = std::vector<std::uint8_t>;
using BytesView = std::span<const std::uint8_t>;

inline Bytes to_bytes(std::string_view s) {
    return Bytes(s.begin(), s.end());
}

inline std::string to_string(BytesView b) {
    return std::string(b.begin(), b.end());
}

std::string bytes_to_hex(BytesView data);
std::optional<Bytes> hex_to_bytes(std::string_view hex);

// Big-endian integer packing used by every wire format in the project.
void put_u16_be(Bytes& out, std::uint16_t v);
void put_u32_be(Bytes& out, std::uint32_t v);
void put_u64_be(Bytes& out, std::uint64_t v);
void store_u64_be(std::uint8_t* p, std::uint64_t v);
std::uint16_t load_u16_be(const std::uint8_t* p);
std::uint32_t load_u32_be(const std::uint8_t* p);
std::uint64_t load_u64_be(const std::uint8_t* p);

// Cursor-style reader for decoding length-prefixed formats. Every take_*
// returns nullopt on truncation instead of reading past the end.
class ByteReader {
public:
    explicit ByteReader(BytesView data) : data_(data) {}

    bool done() const { return pos_ == data_.size(); }
    std::size_t remaining() const { return data_.size() - pos_; }

    std::optional<std::uint16_t> take_u16_be();
    std::optional<std::uint32_t> take_u32_be();
    std::optional<std::uint64_t> take_u64_be();
    std::optional<BytesView> take(std::size_t n);

private:
    BytesView data_;
    std::size_t pos_ = 0;
};

}  // namespace dpush
