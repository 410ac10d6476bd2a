#include "dpush/routing.hpp"

#include <algorithm>

namespace dpush {

void RoutingTable::observe(const NodeInfo& contact) {
    if (contact.node_id == owner_) return;
    int index = matched_prefix_bits(owner_, contact.node_id);
    auto& bucket = buckets_[index];
    auto it = std::find_if(bucket.begin(), bucket.end(),
                           [&](const NodeInfo& n) { return n.node_id == contact.node_id; });
    if (it != bucket.end()) {
        bucket.erase(it);
        bucket.push_back(contact);
        return;
    }
    if (bucket.size() < k_) bucket.push_back(contact);
}

std::vector<NodeInfo> RoutingTable::closest(const KeyId& id, std::size_t count) const {
    std::vector<NodeInfo> all = contacts();
    std::sort(all.begin(), all.end(), [&](const NodeInfo& a, const NodeInfo& b) {
        return xor_distance(a.node_id, id) < xor_distance(b.node_id, id);
    });
    if (all.size() > count) all.resize(count);
    return all;
}

std::vector<NodeInfo> RoutingTable::contacts() const {
    std::vector<NodeInfo> all;
    for (const auto& bucket : buckets_) all.insert(all.end(), bucket.begin(), bucket.end());
    return all;
}

std::size_t RoutingTable::size() const {
    std::size_t n = 0;
    for (const auto& bucket : buckets_) n += bucket.size();
    return n;
}

}  // namespace dpush
