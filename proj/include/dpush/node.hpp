#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "dpush/routing.hpp"
#include "dpush/rpc.hpp"
#include "dpush/store.hpp"

namespace dpush {

struct NodeParams {
    std::size_t k = 20;
    std::size_t alpha = 3;
    std::size_t replication = 20;
    StorePolicy policy{};
};

struct LookupResult {
    std::vector<NodeInfo> nodes;  // ascending distance from the lookup target
    int hops = 0;                 // query rounds executed
    bool network_failed = false;  // queries were sent and every one went unanswered
};

struct ReplicateResult {
    std::size_t replicas = 0;
    int hops = 0;
    bool ok() const { return replicas > 0; }
};

struct FetchUpdateableResult {
    std::optional<UpdateableRecord> record;
    int hops = 0;
};

struct NetScanPage {
    std::vector<TargetedBlock> blocks;  // ascending block_id order, deduplicated
    ScanCursor next;
    int hops = 0;
    bool network_failed = false;
};

// A full protocol node: identity keypair, local store, routing table and
// the iterative procedures that drive them over an abstract transport.
class ProtocolNode {
public:
    ProtocolNode(const CryptoSuite& suite, SigKeypair identity, Endpoint endpoint,
                 NodeParams params, Transport& transport);

    const KeyId& id() const { return id_; }
    NodeInfo info() const { return {id_, endpoint_}; }
    const SigKeypair& identity() const { return identity_; }
    const NodeParams& params() const { return params_; }
    const CryptoSuite& suite() const { return *suite_; }

    NodeStore& store() { return store_; }
    const NodeStore& store() const { return store_; }
    RoutingTable& table() { return table_; }
    const RoutingTable& table() const { return table_; }

    // Inbound dispatch. Observes the caller as a live contact.
    RpcResponse handle(const NodeInfo& from, const RpcRequest& request);

    // Seeds the table with a bootstrap contact and converges on the
    // neighborhood via a self-lookup.
    void bootstrap(const NodeInfo& seed);

    // Iterative lookup: each round queries the alpha nearest unqueried
    // candidates and ends when a round leaves the k-best set unchanged.
    LookupResult find_nodes(const KeyId& target);

    // Replicates a block to the replication-factor nodes closest to its
    // block ID (possibly including this node).
    ReplicateResult store_targeted(const TargetedBlock& block);

    ReplicateResult store_updateable(const UpdateableRecord& record);
    FetchUpdateableResult fetch_updateable(const KeyId& id);

    ReplicateResult store_static(BytesView data, KeyId* id_out = nullptr);
    std::optional<Bytes> fetch_static(const KeyId& id);

    // One page of a network scan: queries the nodes closest to target_key,
    // merges their pages with the local store and returns a globally
    // ordered, provably complete page.
    NetScanPage scan(const KeyId& target_key, Difficulty d, ScanCursor cursor, std::size_t limit);

private:
    std::vector<RpcOutcome> call_waves(const std::vector<RpcCall>& calls);
    std::vector<NodeInfo> replica_set(const KeyId& id, LookupResult& lookup);

    const CryptoSuite* suite_;
    SigKeypair identity_;
    KeyId id_;
    Endpoint endpoint_;
    NodeParams params_;
    Transport* transport_;
    NodeStore store_;
    RoutingTable table_;
};

}  // namespace dpush
