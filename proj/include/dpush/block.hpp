#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>

#include "dpush/bytes.hpp"
#include "dpush/crypto.hpp"
#include "dpush/key_id.hpp"

namespace dpush {

// Leading-bit match requirement for a TargetedBlock header hash.
struct Difficulty {
    int bits = 0;

    Difficulty() = default;
    explicit Difficulty(int b) : bits(b) {
        if (b < 0 || b > KeyId::bits) throw std::invalid_argument("difficulty out of [0,512]");
    }

    auto operator<=>(const Difficulty&) const = default;
};

inline constexpr std::size_t kDefaultMaxBlockSize = 32768;

// The proof-of-work unit: only the fixed-size header is hashed when mining,
// so the work is independent of the payload size.
struct BlockHeader {
    static constexpr std::size_t encoded_size = 8 + KeyId::size + KeyId::size;  // 136

    std::uint64_t nonce = 0;
    KeyId target_key;
    KeyId block_hash;  // sha512 of the data payload

    bool operator==(const BlockHeader&) const = default;
};

struct TargetedBlock {
    BlockHeader header;
    Bytes data;

    bool operator==(const TargetedBlock&) const = default;
};

// nonce(8, big-endian) || target_key(64) || block_hash(64)
std::array<std::uint8_t, BlockHeader::encoded_size> encode_header(const BlockHeader& h);
std::optional<BlockHeader> decode_header(BytesView raw);

// Storage ID: the hash of the encoded header alone.
KeyId block_id(const BlockHeader& h);

// True iff the header hash matches at least d.bits leading bits of the
// header's own target_key.
bool pow_valid(const BlockHeader& h, Difficulty d);

enum class BlockCheck {
    ok,
    block_hash_mismatch,
    insufficient_work,
    target_mismatch,
};

const char* to_string(BlockCheck c);

// Full verification: payload hash, proof of work, and (when the caller
// knows which target it expects) an exact target_key match.
BlockCheck verify_block(const TargetedBlock& tb, const std::optional<KeyId>& expected_target,
                        Difficulty d);

struct MineResult {
    std::optional<TargetedBlock> block;  // empty when the attempt budget ran out
    std::uint64_t attempts = 0;          // hashes performed
    std::size_t hashed_input_bytes = BlockHeader::encoded_size;
};

// Nonce search starting at start_nonce (wrapping). Throws
// std::invalid_argument when data is empty or exceeds max_size.
MineResult mine(const KeyId& target_key, Difficulty d, BytesView data,
                std::uint64_t start_nonce = 0,
                std::optional<std::uint64_t> max_attempts = std::nullopt,
                std::size_t max_size = kDefaultMaxBlockSize);

// Wire form: header(136) || length(4, big-endian) || data
Bytes encode_block(const TargetedBlock& tb);
std::optional<TargetedBlock> decode_block(BytesView raw);

}  // namespace dpush
