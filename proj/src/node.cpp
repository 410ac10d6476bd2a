#include "dpush/node.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace dpush {

namespace {

constexpr int kMaxLookupRounds = 64;

std::vector<KeyId> top_ids(const std::map<KeyId, NodeInfo>& by_distance, std::size_t k) {
    std::vector<KeyId> ids;
    ids.reserve(k);
    for (const auto& [dist, info] : by_distance) {
        ids.push_back(info.node_id);
        if (ids.size() == k) break;
    }
    return ids;
}

}  // namespace

ProtocolNode::ProtocolNode(const CryptoSuite& suite, SigKeypair identity, Endpoint endpoint,
                           NodeParams params, Transport& transport)
    : suite_(&suite),
      identity_(std::move(identity)),
      id_(key_id(identity_.public_key)),
      endpoint_(endpoint),
      params_(params),
      transport_(&transport),
      store_(params.policy, suite),
      table_(id_, params.k) {}

RpcResponse ProtocolNode::handle(const NodeInfo& from, const RpcRequest& request) {
    table_.observe(from);
    struct Visitor {
        ProtocolNode& self;
        RpcResponse operator()(const PingRequest&) { return PingResponse{}; }
        RpcResponse operator()(const FindNodeRequest& r) {
            return FindNodeResponse{self.table_.closest(r.target, self.params_.k)};
        }
        RpcResponse operator()(const StoreStaticRequest& r) {
            auto res = self.store_.put_static(r.data);
            return StoreStaticResponse{res.status, res.id};
        }
        RpcResponse operator()(const GetStaticRequest& r) {
            return GetStaticResponse{self.store_.get_static(r.id)};
        }
        RpcResponse operator()(const StoreUpdateableRequest& r) {
            return StoreUpdateableResponse{self.store_.put_updateable(r.record)};
        }
        RpcResponse operator()(const GetUpdateableRequest& r) {
            return GetUpdateableResponse{self.store_.get_updateable(r.id)};
        }
        RpcResponse operator()(const StoreTargetedRequest& r) {
            return StoreTargetedResponse{self.store_.put_targeted(r.block)};
        }
        RpcResponse operator()(const ScanTargetedRequest& r) {
            auto page = self.store_.scan_targeted(r.target_key, r.difficulty, r.cursor, r.limit);
            return ScanTargetedResponse{std::move(page.blocks), page.next};
        }
    };
    return std::visit(Visitor{*this}, request);
}

void ProtocolNode::bootstrap(const NodeInfo& seed) {
    if (seed.node_id == id_) return;
    table_.observe(seed);
    find_nodes(id_);
}

std::vector<RpcOutcome> ProtocolNode::call_waves(const std::vector<RpcCall>& calls) {
    // Fan-out wider than alpha goes in alpha-sized waves.
    std::vector<RpcOutcome> outcomes;
    outcomes.reserve(calls.size());
    for (std::size_t i = 0; i < calls.size(); i += params_.alpha) {
        std::vector<RpcCall> wave(calls.begin() + i,
                                  calls.begin() + std::min(calls.size(), i + params_.alpha));
        auto part = transport_->call(info(), wave);
        outcomes.insert(outcomes.end(), part.begin(), part.end());
    }
    return outcomes;
}

LookupResult ProtocolNode::find_nodes(const KeyId& target) {
    LookupResult result;
    std::map<KeyId, NodeInfo> shortlist;  // xor distance -> contact
    for (const auto& contact : table_.closest(target, params_.k))
        shortlist.emplace(xor_distance(contact.node_id, target), contact);

    std::set<KeyId> queried;
    std::size_t queries_sent = 0;
    bool any_response = false;

    for (int round = 0; round < kMaxLookupRounds; ++round) {
        std::vector<NodeInfo> wave;
        for (const auto& [dist, contact] : shortlist) {
            if (queried.contains(contact.node_id)) continue;
            wave.push_back(contact);
            if (wave.size() == params_.alpha) break;
        }
        if (wave.empty()) break;

        auto before = top_ids(shortlist, params_.k);

        std::vector<RpcCall> batch;
        batch.reserve(wave.size());
        for (const auto& contact : wave) {
            queried.insert(contact.node_id);
            batch.emplace_back(contact, FindNodeRequest{target});
        }
        auto outcomes = transport_->call(info(), batch);
        ++result.hops;
        queries_sent += batch.size();

        for (std::size_t i = 0; i < outcomes.size(); ++i) {
            if (!outcomes[i]) continue;
            any_response = true;
            table_.observe(wave[i]);
            const auto* found = std::get_if<FindNodeResponse>(&*outcomes[i]);
            if (!found) continue;
            for (const auto& contact : found->nodes) {
                if (contact.node_id == id_) continue;
                shortlist.emplace(xor_distance(contact.node_id, target), contact);
            }
        }

        if (top_ids(shortlist, params_.k) == before) break;  // k-best set is stable
    }

    result.network_failed = queries_sent > 0 && !any_response;
    for (const auto& [dist, contact] : shortlist) {
        result.nodes.push_back(contact);
        if (result.nodes.size() == params_.k) break;
    }
    return result;
}

std::vector<NodeInfo> ProtocolNode::replica_set(const KeyId& id, LookupResult& lookup) {
    lookup = find_nodes(id);
    std::vector<NodeInfo> candidates = lookup.nodes;
    candidates.push_back(info());  // this node competes for membership too
    std::sort(candidates.begin(), candidates.end(), [&](const NodeInfo& a, const NodeInfo& b) {
        return xor_distance(a.node_id, id) < xor_distance(b.node_id, id);
    });
    if (candidates.size() > params_.replication) candidates.resize(params_.replication);
    return candidates;
}

ReplicateResult ProtocolNode::store_targeted(const TargetedBlock& block) {
    ReplicateResult result;
    if (verify_block(block, std::nullopt, params_.policy.min_targeted_difficulty) != BlockCheck::ok)
        return result;

    LookupResult lookup;
    auto replicas = replica_set(block_id(block.header), lookup);
    result.hops = lookup.hops;

    std::vector<RpcCall> calls;
    for (const auto& target : replicas) {
        if (target.node_id == id_) {
            if (accepted(store_.put_targeted(block))) ++result.replicas;
        } else {
            calls.emplace_back(target, StoreTargetedRequest{block});
        }
    }
    for (const auto& outcome : call_waves(calls)) {
        if (!outcome) continue;
        const auto* resp = std::get_if<StoreTargetedResponse>(&*outcome);
        if (resp && accepted(resp->status)) ++result.replicas;
    }
    return result;
}

ReplicateResult ProtocolNode::store_updateable(const UpdateableRecord& record) {
    ReplicateResult result;
    LookupResult lookup;
    auto replicas = replica_set(record.id(), lookup);
    result.hops = lookup.hops;

    std::vector<RpcCall> calls;
    for (const auto& target : replicas) {
        if (target.node_id == id_) {
            if (accepted(store_.put_updateable(record))) ++result.replicas;
        } else {
            calls.emplace_back(target, StoreUpdateableRequest{record});
        }
    }
    for (const auto& outcome : call_waves(calls)) {
        if (!outcome) continue;
        const auto* resp = std::get_if<StoreUpdateableResponse>(&*outcome);
        if (resp && accepted(resp->status)) ++result.replicas;
    }
    return result;
}

FetchUpdateableResult ProtocolNode::fetch_updateable(const KeyId& id) {
    FetchUpdateableResult result;
    LookupResult lookup;
    auto holders = replica_set(id, lookup);
    result.hops = lookup.hops;

    std::vector<RpcCall> calls;
    for (const auto& holder : holders) {
        if (holder.node_id == id_) continue;
        calls.emplace_back(holder, GetUpdateableRequest{id});
    }

    auto consider = [&](const std::optional<UpdateableRecord>& rec) {
        if (!rec) return;
        if (rec->id() != id || !updateable_signature_ok(*suite_, *rec)) return;
        if (!result.record || rec->version > result.record->version) result.record = *rec;
    };

    consider(store_.get_updateable(id));
    for (const auto& outcome : call_waves(calls)) {
        if (!outcome) continue;
        const auto* resp = std::get_if<GetUpdateableResponse>(&*outcome);
        if (resp) consider(resp->record);
    }
    return result;
}

ReplicateResult ProtocolNode::store_static(BytesView data, KeyId* id_out) {
    ReplicateResult result;
    KeyId id = sha512(data);
    if (id_out) *id_out = id;

    LookupResult lookup;
    auto replicas = replica_set(id, lookup);
    result.hops = lookup.hops;

    Bytes payload(data.begin(), data.end());
    std::vector<RpcCall> calls;
    for (const auto& target : replicas) {
        if (target.node_id == id_) {
            if (accepted(store_.put_static(payload).status)) ++result.replicas;
        } else {
            calls.emplace_back(target, StoreStaticRequest{payload});
        }
    }
    for (const auto& outcome : call_waves(calls)) {
        if (!outcome) continue;
        const auto* resp = std::get_if<StoreStaticResponse>(&*outcome);
        if (resp && accepted(resp->status)) ++result.replicas;
    }
    return result;
}

std::optional<Bytes> ProtocolNode::fetch_static(const KeyId& id) {
    if (auto local = store_.get_static(id)) return local;
    LookupResult lookup;
    auto holders = replica_set(id, lookup);
    std::vector<RpcCall> calls;
    for (const auto& holder : holders) {
        if (holder.node_id == id_) continue;
        calls.emplace_back(holder, GetStaticRequest{id});
    }
    for (const auto& outcome : call_waves(calls)) {
        if (!outcome) continue;
        const auto* resp = std::get_if<GetStaticResponse>(&*outcome);
        if (resp && resp->data && sha512(*resp->data) == id) return resp->data;
    }
    return std::nullopt;
}

NetScanPage ProtocolNode::scan(const KeyId& target_key, Difficulty d, ScanCursor cursor,
                               std::size_t limit) {
    NetScanPage page;
    page.next = cursor;
    if (limit == 0) return page;

    LookupResult lookup = find_nodes(target_key);
    page.hops = lookup.hops;
    page.network_failed = lookup.network_failed;

    std::vector<RpcCall> calls;
    for (const auto& holder : lookup.nodes)
        calls.emplace_back(holder,
                           ScanTargetedRequest{target_key, d, cursor,
                                               static_cast<std::uint32_t>(limit)});

    // Merged candidates plus the completeness bound: results past the
    // smallest full page's maximum cannot be certified complete yet, so
    // they wait for the next page.
    std::map<KeyId, TargetedBlock> merged;
    std::optional<KeyId> bound;

    auto merge_page = [&](const std::vector<TargetedBlock>& blocks) {
        std::optional<KeyId> page_max;
        for (const auto& block : blocks) {
            if (verify_block(block, target_key, d) != BlockCheck::ok) continue;
            KeyId id = block_id(block.header);
            if (id < cursor.next_id) continue;
            page_max = page_max ? std::max(*page_max, id) : id;
            merged.emplace(id, block);
        }
        if (blocks.size() >= limit && page_max && (!bound || *page_max < *bound)) bound = *page_max;
    };

    merge_page(store_.scan_targeted(target_key, d, cursor, limit).blocks);
    for (const auto& outcome : call_waves(calls)) {
        if (!outcome) continue;
        const auto* resp = std::get_if<ScanTargetedResponse>(&*outcome);
        if (resp) merge_page(resp->blocks);
    }

    for (const auto& [id, block] : merged) {
        if (bound && id > *bound) break;
        page.blocks.push_back(block);
        if (page.blocks.size() == limit) break;
    }
    if (!page.blocks.empty()) page.next = ScanCursor{successor(block_id(page.blocks.back().header))};
    return page;
}

}  // namespace dpush
