#include "dpush/key_id.hpp"

#include <algorithm>
#include <bit>

namespace dpush {

std::optional<KeyId> KeyId::from_hex(std::string_view hex) {
    if (hex.size() != size * 2) return std::nullopt;
    // Upper-case hex is rejected: the canonical text form is lowercase only.
    if (hex.find_first_not_of("0123456789abcdef") != std::string_view::npos) return std::nullopt;
    auto raw = hex_to_bytes(hex);
    if (!raw) return std::nullopt;
    return from_bytes(*raw);
}

std::optional<KeyId> KeyId::from_bytes(BytesView data) {
    if (data.size() != size) return std::nullopt;
    KeyId id;
    std::copy(data.begin(), data.end(), id.bytes.begin());
    return id;
}

KeyId xor_distance(const KeyId& a, const KeyId& b) {
    KeyId d;
    for (std::size_t i = 0; i < KeyId::size; ++i) d.bytes[i] = a.bytes[i] ^ b.bytes[i];
    return d;
}

int matched_prefix_bits(const KeyId& a, const KeyId& b) {
    int bits = 0;
    for (std::size_t i = 0; i < KeyId::size; ++i) {
        std::uint8_t diff = a.bytes[i] ^ b.bytes[i];
        if (diff == 0) {
            bits += 8;
            continue;
        }
        return bits + std::countl_zero(diff);
    }
    return bits;
}

KeyId successor(const KeyId& id) {
    KeyId next = id;
    for (int i = static_cast<int>(KeyId::size) - 1; i >= 0; --i) {
        if (++next.bytes[i] != 0) break;
    }
    return next;
}

}  // namespace dpush
