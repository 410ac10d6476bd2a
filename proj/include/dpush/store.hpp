#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <vector>

#include "dpush/block.hpp"
#include "dpush/bytes.hpp"
#include "dpush/crypto.hpp"
#include "dpush/key_id.hpp"

namespace dpush {

// Signed, versioned record stored under the hash of its signing public key.
// The signature covers version(8, big-endian) || data.
struct UpdateableRecord {
    Bytes public_key;
    std::uint64_t version = 0;
    Bytes data;
    Bytes signature;

    KeyId id() const { return key_id(public_key); }
    Bytes signed_payload() const;

    bool operator==(const UpdateableRecord&) const = default;
};

UpdateableRecord make_updateable_record(const CryptoSuite& suite, const SigKeypair& keys,
                                        std::uint64_t version, BytesView data);
bool updateable_signature_ok(const CryptoSuite& suite, const UpdateableRecord& rec);

Bytes encode_updateable_record(const UpdateableRecord& rec);
std::optional<UpdateableRecord> decode_updateable_record(BytesView raw);

struct StorePolicy {
    // Anti-junk floor every node applies to targeted blocks; the receiver's
    // advertised difficulty is enforced at scan time, not here.
    Difficulty min_targeted_difficulty{16};
    std::size_t max_block_size = kDefaultMaxBlockSize;
    std::size_t max_static_records = 1 << 16;
    std::size_t max_updateable_records = 1 << 16;
    std::size_t max_targeted_records = 1 << 16;
};

enum class StoreStatus {
    accepted,
    rejected_block_hash_mismatch,
    rejected_insufficient_work,
    rejected_target_mismatch,
    rejected_bad_signature,
    rejected_stale_version,
    rejected_oversize,
    rejected_capacity,
};

const char* to_string(StoreStatus s);
inline bool accepted(StoreStatus s) { return s == StoreStatus::accepted; }

// Inclusive lower bound for the next page of a targeted scan.
struct ScanCursor {
    KeyId next_id{};

    bool operator==(const ScanCursor&) const = default;
};

struct ScanPage {
    std::vector<TargetedBlock> blocks;  // ascending block_id order
    ScanCursor next;
};

struct StaticPutResult {
    StoreStatus status;
    KeyId id{};
};

// Node-local storage for the three record kinds. Single-owner: callers
// serialize mutations (the simulator touches each store from one node's
// event handler only).
class NodeStore {
public:
    explicit NodeStore(StorePolicy policy = {}, const CryptoSuite& suite = default_suite())
        : policy_(policy), suite_(&suite) {}

    const StorePolicy& policy() const { return policy_; }

    StaticPutResult put_static(BytesView data);
    std::optional<Bytes> get_static(const KeyId& id) const;

    StoreStatus put_updateable(const UpdateableRecord& rec);
    std::optional<UpdateableRecord> get_updateable(const KeyId& id) const;

    StoreStatus put_targeted(const TargetedBlock& tb);
    ScanPage scan_targeted(const KeyId& target_key, Difficulty d, ScanCursor cursor,
                           std::size_t limit) const;

    std::size_t static_count() const { return static_.size(); }
    std::size_t updateable_count() const { return updateable_.size(); }
    std::size_t targeted_count() const { return targeted_.size(); }

    // Test and audit access.
    const std::map<KeyId, TargetedBlock>& targeted_blocks() const { return targeted_; }
    const std::map<KeyId, Bytes>& static_blocks() const { return static_; }
    const std::map<KeyId, UpdateableRecord>& updateable_records() const { return updateable_; }

    // Snapshot format is private to the implementation, not a protocol
    // surface. load() drops any entry that no longer verifies.
    void save(std::ostream& out) const;
    bool load(std::istream& in);

private:
    StorePolicy policy_;
    const CryptoSuite* suite_;
    std::map<KeyId, Bytes> static_;
    std::map<KeyId, UpdateableRecord> updateable_;
    std::map<KeyId, TargetedBlock> targeted_;
};

}  // namespace dpush
