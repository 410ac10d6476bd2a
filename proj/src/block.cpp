#include "dpush/block.hpp"

#include <sodium.h>

#include <algorithm>

namespace dpush {

std::array<std::uint8_t, BlockHeader::encoded_size> encode_header(const BlockHeader& h) {
    std::array<std::uint8_t, BlockHeader::encoded_size> out;
    store_u64_be(out.data(), h.nonce);
    std::copy(h.target_key.bytes.begin(), h.target_key.bytes.end(), out.data() + 8);
    std::copy(h.block_hash.bytes.begin(), h.block_hash.bytes.end(), out.data() + 8 + KeyId::size);
    return out;
}

std::optional<BlockHeader> decode_header(BytesView raw) {
    if (raw.size() != BlockHeader::encoded_size) return std::nullopt;
    BlockHeader h;
    h.nonce = load_u64_be(raw.data());
    std::copy(raw.begin() + 8, raw.begin() + 8 + KeyId::size, h.target_key.bytes.begin());
    std::copy(raw.begin() + 8 + KeyId::size, raw.end(), h.block_hash.bytes.begin());
    return h;
}

KeyId block_id(const BlockHeader& h) {
    auto raw = encode_header(h);
    return sha512(raw);
}

bool pow_valid(const BlockHeader& h, Difficulty d) {
    return matched_prefix_bits(block_id(h), h.target_key) >= d.bits;
}

const char* to_string(BlockCheck c) {
    switch (c) {
        case BlockCheck::ok: return "ok";
        case BlockCheck::block_hash_mismatch: return "block-hash-mismatch";
        case BlockCheck::insufficient_work: return "insufficient-work";
        case BlockCheck::target_mismatch: return "target-mismatch";
    }
    return "unknown";
}

BlockCheck verify_block(const TargetedBlock& tb, const std::optional<KeyId>& expected_target,
                        Difficulty d) {
    if (sha512(tb.data) != tb.header.block_hash) return BlockCheck::block_hash_mismatch;
    if (!pow_valid(tb.header, d)) return BlockCheck::insufficient_work;
    if (expected_target && tb.header.target_key != *expected_target)
        return BlockCheck::target_mismatch;
    return BlockCheck::ok;
}

MineResult mine(const KeyId& target_key, Difficulty d, BytesView data, std::uint64_t start_nonce,
                std::optional<std::uint64_t> max_attempts, std::size_t max_size) {
    if (data.empty()) throw std::invalid_argument("mine: empty payload");
    if (data.size() > max_size) throw std::invalid_argument("mine: payload exceeds block size");

    BlockHeader header;
    header.target_key = target_key;
    header.block_hash = sha512(data);

    auto buf = encode_header(header);
    MineResult result;
    result.hashed_input_bytes = buf.size();

    std::uint64_t nonce = start_nonce;
    for (;;) {
        if (max_attempts && result.attempts >= *max_attempts) return result;
        store_u64_be(buf.data(), nonce);
        ++result.attempts;
        KeyId id;
        crypto_hash_sha512(id.bytes.data(), buf.data(), buf.size());
        if (matched_prefix_bits(id, target_key) >= d.bits) {
            header.nonce = nonce;
            result.block = TargetedBlock{header, Bytes(data.begin(), data.end())};
            return result;
        }
        ++nonce;  // wraps; the search is memoryless
    }
}

Bytes encode_block(const TargetedBlock& tb) {
    Bytes out;
    out.reserve(BlockHeader::encoded_size + 4 + tb.data.size());
    auto head = encode_header(tb.header);
    out.insert(out.end(), head.begin(), head.end());
    put_u32_be(out, static_cast<std::uint32_t>(tb.data.size()));
    out.insert(out.end(), tb.data.begin(), tb.data.end());
    return out;
}

std::optional<TargetedBlock> decode_block(BytesView raw) {
    ByteReader r(raw);
    auto head = r.take(BlockHeader::encoded_size);
    if (!head) return std::nullopt;
    auto header = decode_header(*head);
    if (!header) return std::nullopt;
    auto len = r.take_u32_be();
    if (!len) return std::nullopt;
    auto data = r.take(*len);
    if (!data || !r.done()) return std::nullopt;
    return TargetedBlock{*header, Bytes(data->begin(), data->end())};
}

}  // namespace dpush
