#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "dpush/key_id.hpp"

namespace dpush {

using Endpoint = std::uint64_t;  // opaque transport token; the node index in simulation

struct NodeInfo {
    KeyId node_id;  // key_id of the node's public key
    Endpoint endpoint = 0;

    bool operator==(const NodeInfo&) const = default;
};

// XOR-metric k-bucket table. Bucket i holds contacts whose node_id shares
// exactly i leading bits with the owner, least-recently-seen first.
class RoutingTable {
public:
    explicit RoutingTable(const KeyId& owner, std::size_t k = 20) : owner_(owner), k_(k) {}

    const KeyId& owner() const { return owner_; }
    std::size_t k() const { return k_; }

    // Moves a known contact to most-recently-seen, inserts into a bucket
    // with room, and otherwise drops the candidate. No liveness probe: the
    // simulator has explicit liveness, so classic ping-the-oldest eviction
    // is deliberately not implemented.
    void observe(const NodeInfo& contact);

    // Up to count contacts sorted ascending by XOR distance to id. The
    // owner never appears.
    std::vector<NodeInfo> closest(const KeyId& id, std::size_t count) const;

    std::vector<NodeInfo> contacts() const;
    std::size_t size() const;
    bool empty() const { return size() == 0; }
    const std::vector<NodeInfo>& bucket(int index) const { return buckets_[index]; }

private:
    KeyId owner_;
    std::size_t k_;
    std::array<std::vector<NodeInfo>, KeyId::bits> buckets_{};
};

}  // namespace dpush
