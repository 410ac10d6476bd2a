#include "dpush/rng.hpp"

#include <sodium.h>

namespace dpush {

Rng Rng::system() {
    if (sodium_init() < 0) throw std::bad_alloc();
    return Rng();
}

std::uint64_t Rng::next_u64() {
    if (system_) {
        std::uint64_t v;
        randombytes_buf(&v, sizeof v);
        return v;
    }
    return eng_();
}

void Rng::fill(std::span<std::uint8_t> out) {
    if (system_) {
        randombytes_buf(out.data(), out.size());
        return;
    }
    std::size_t i = 0;
    while (i < out.size()) {
        std::uint64_t v = eng_();
        for (int b = 7; b >= 0 && i < out.size(); --b)
            out[i++] = static_cast<std::uint8_t>(v >> (8 * b));
    }
}

std::array<std::uint8_t, 32> Rng::seed_bytes() {
    std::array<std::uint8_t, 32> seed;
    fill(seed);
    return seed;
}

KeyId Rng::random_key() {
    KeyId id;
    fill(id.bytes);
    return id;
}

}  // namespace dpush
