#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "dpush/bytes.hpp"

namespace dpush {

// 512-bit identifier. Node IDs, block IDs, addresses and target keys all
// live in this one key space; ordering is the big-endian numeric order.
struct KeyId {
    static constexpr std::size_t size = 64;
    static constexpr int bits = 512;

    std::array<std::uint8_t, size> bytes{};

    auto operator<=>(const KeyId&) const = default;

    std::string hex() const { return bytes_to_hex(bytes); }
    BytesView view() const { return BytesView(bytes.data(), bytes.size()); }

    static std::optional<KeyId> from_hex(std::string_view hex);
    static std::optional<KeyId> from_bytes(BytesView data);
};

// Bitwise XOR of the two ids interpreted as a 512-bit big-endian value.
KeyId xor_distance(const KeyId& a, const KeyId& b);

// Number of leading bits on which a and b agree, in [0, 512].
int matched_prefix_bits(const KeyId& a, const KeyId& b);

// id + 1 with carry; wraps at the top of the key space.
KeyId successor(const KeyId& id);

}  // namespace dpush
