#include "dpush/store.hpp"

#include <istream>
#include <ostream>

namespace dpush {

Bytes UpdateableRecord::signed_payload() const {
    Bytes out;
    out.reserve(8 + data.size());
    put_u64_be(out, version);
    out.insert(out.end(), data.begin(), data.end());
    return out;
}

UpdateableRecord make_updateable_record(const CryptoSuite& suite, const SigKeypair& keys,
                                        std::uint64_t version, BytesView data) {
    UpdateableRecord rec;
    rec.public_key = keys.public_key;
    rec.version = version;
    rec.data.assign(data.begin(), data.end());
    rec.signature = suite.sign(keys.secret_key, rec.signed_payload());
    return rec;
}

bool updateable_signature_ok(const CryptoSuite& suite, const UpdateableRecord& rec) {
    return suite.sig_verify(rec.public_key, rec.signed_payload(), rec.signature);
}

Bytes encode_updateable_record(const UpdateableRecord& rec) {
    Bytes out;
    put_u16_be(out, static_cast<std::uint16_t>(rec.public_key.size()));
    out.insert(out.end(), rec.public_key.begin(), rec.public_key.end());
    put_u64_be(out, rec.version);
    put_u32_be(out, static_cast<std::uint32_t>(rec.data.size()));
    out.insert(out.end(), rec.data.begin(), rec.data.end());
    put_u16_be(out, static_cast<std::uint16_t>(rec.signature.size()));
    out.insert(out.end(), rec.signature.begin(), rec.signature.end());
    return out;
}

std::optional<UpdateableRecord> decode_updateable_record(BytesView raw) {
    ByteReader r(raw);
    UpdateableRecord rec;
    auto pk_len = r.take_u16_be();
    if (!pk_len) return std::nullopt;
    auto pk = r.take(*pk_len);
    if (!pk) return std::nullopt;
    rec.public_key.assign(pk->begin(), pk->end());
    auto version = r.take_u64_be();
    if (!version) return std::nullopt;
    rec.version = *version;
    auto data_len = r.take_u32_be();
    if (!data_len) return std::nullopt;
    auto data = r.take(*data_len);
    if (!data) return std::nullopt;
    rec.data.assign(data->begin(), data->end());
    auto sig_len = r.take_u16_be();
    if (!sig_len) return std::nullopt;
    auto sig = r.take(*sig_len);
    if (!sig || !r.done()) return std::nullopt;
    rec.signature.assign(sig->begin(), sig->end());
    return rec;
}

const char* to_string(StoreStatus s) {
    switch (s) {
        case StoreStatus::accepted: return "accepted";
        case StoreStatus::rejected_block_hash_mismatch: return "block-hash-mismatch";
        case StoreStatus::rejected_insufficient_work: return "insufficient-work";
        case StoreStatus::rejected_target_mismatch: return "target-mismatch";
        case StoreStatus::rejected_bad_signature: return "bad-signature";
        case StoreStatus::rejected_stale_version: return "stale-version";
        case StoreStatus::rejected_oversize: return "oversize";
        case StoreStatus::rejected_capacity: return "capacity-exceeded";
    }
    return "unknown";
}

StaticPutResult NodeStore::put_static(BytesView data) {
    if (data.size() > policy_.max_block_size) return {StoreStatus::rejected_oversize};
    KeyId id = sha512(data);
    auto it = static_.find(id);
    if (it != static_.end()) return {StoreStatus::accepted, id};
    if (static_.size() >= policy_.max_static_records) return {StoreStatus::rejected_capacity};
    static_.emplace(id, Bytes(data.begin(), data.end()));
    return {StoreStatus::accepted, id};
}

std::optional<Bytes> NodeStore::get_static(const KeyId& id) const {
    auto it = static_.find(id);
    if (it == static_.end()) return std::nullopt;
    return it->second;
}

StoreStatus NodeStore::put_updateable(const UpdateableRecord& rec) {
    if (rec.data.size() > policy_.max_block_size) return StoreStatus::rejected_oversize;
    if (!updateable_signature_ok(*suite_, rec)) return StoreStatus::rejected_bad_signature;
    KeyId id = rec.id();
    auto it = updateable_.find(id);
    if (it != updateable_.end()) {
        if (rec.version <= it->second.version) return StoreStatus::rejected_stale_version;
        it->second = rec;
        return StoreStatus::accepted;
    }
    if (updateable_.size() >= policy_.max_updateable_records) return StoreStatus::rejected_capacity;
    updateable_.emplace(id, rec);
    return StoreStatus::accepted;
}

std::optional<UpdateableRecord> NodeStore::get_updateable(const KeyId& id) const {
    auto it = updateable_.find(id);
    if (it == updateable_.end()) return std::nullopt;
    return it->second;
}

StoreStatus NodeStore::put_targeted(const TargetedBlock& tb) {
    if (tb.data.size() > policy_.max_block_size || tb.data.empty())
        return StoreStatus::rejected_oversize;
    switch (verify_block(tb, std::nullopt, policy_.min_targeted_difficulty)) {
        case BlockCheck::block_hash_mismatch: return StoreStatus::rejected_block_hash_mismatch;
        case BlockCheck::insufficient_work: return StoreStatus::rejected_insufficient_work;
        case BlockCheck::target_mismatch: return StoreStatus::rejected_target_mismatch;
        case BlockCheck::ok: break;
    }
    KeyId id = block_id(tb.header);
    if (targeted_.contains(id)) return StoreStatus::accepted;  // idempotent
    if (targeted_.size() >= policy_.max_targeted_records) return StoreStatus::rejected_capacity;
    targeted_.emplace(id, tb);
    return StoreStatus::accepted;
}

ScanPage NodeStore::scan_targeted(const KeyId& target_key, Difficulty d, ScanCursor cursor,
                                  std::size_t limit) const {
    ScanPage page;
    page.next = cursor;
    for (auto it = targeted_.lower_bound(cursor.next_id); it != targeted_.end(); ++it) {
        const auto& [id, block] = *it;
        if (matched_prefix_bits(id, target_key) < d.bits) continue;
        if (block.header.target_key != target_key) continue;  // exact-target rule
        page.blocks.push_back(block);
        if (page.blocks.size() == limit) {
            page.next = ScanCursor{successor(id)};
            return page;
        }
    }
    if (!page.blocks.empty())
        page.next = ScanCursor{successor(block_id(page.blocks.back().header))};
    return page;
}

namespace {

constexpr char kSnapshotMagic[8] = {'D', 'P', 'S', 'T', 'O', 'R', 'E', '1'};

void write_chunk(std::ostream& out, BytesView data) {
    Bytes len;
    put_u32_be(len, static_cast<std::uint32_t>(data.size()));
    out.write(reinterpret_cast<const char*>(len.data()), static_cast<std::streamsize>(len.size()));
    out.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size()));
}

bool read_chunk(std::istream& in, Bytes& out) {
    std::uint8_t len_raw[4];
    if (!in.read(reinterpret_cast<char*>(len_raw), 4)) return false;
    std::uint32_t len = load_u32_be(len_raw);
    out.resize(len);
    return static_cast<bool>(in.read(reinterpret_cast<char*>(out.data()), len));
}

}  // namespace

void NodeStore::save(std::ostream& out) const {
    out.write(kSnapshotMagic, sizeof kSnapshotMagic);
    Bytes counts;
    put_u32_be(counts, static_cast<std::uint32_t>(static_.size()));
    put_u32_be(counts, static_cast<std::uint32_t>(updateable_.size()));
    put_u32_be(counts, static_cast<std::uint32_t>(targeted_.size()));
    out.write(reinterpret_cast<const char*>(counts.data()),
              static_cast<std::streamsize>(counts.size()));
    for (const auto& [id, data] : static_) write_chunk(out, data);
    for (const auto& [id, rec] : updateable_) write_chunk(out, encode_updateable_record(rec));
    for (const auto& [id, block] : targeted_) write_chunk(out, encode_block(block));
}

bool NodeStore::load(std::istream& in) {
    char magic[8];
    if (!in.read(magic, 8) || !std::equal(magic, magic + 8, kSnapshotMagic)) return false;
    std::uint8_t counts_raw[12];
    if (!in.read(reinterpret_cast<char*>(counts_raw), 12)) return false;
    std::uint32_t n_static = load_u32_be(counts_raw);
    std::uint32_t n_upd = load_u32_be(counts_raw + 4);
    std::uint32_t n_targeted = load_u32_be(counts_raw + 8);

    static_.clear();
    updateable_.clear();
    targeted_.clear();

    Bytes chunk;
    for (std::uint32_t i = 0; i < n_static; ++i) {
        if (!read_chunk(in, chunk)) return false;
        put_static(chunk);
    }
    for (std::uint32_t i = 0; i < n_upd; ++i) {
        if (!read_chunk(in, chunk)) return false;
        if (auto rec = decode_updateable_record(chunk)) put_updateable(*rec);
    }
    for (std::uint32_t i = 0; i < n_targeted; ++i) {
        if (!read_chunk(in, chunk)) return false;
        if (auto block = decode_block(chunk)) put_targeted(*block);
    }
    return true;
}

}  // namespace dpush
