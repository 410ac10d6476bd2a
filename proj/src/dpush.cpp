#include "dpush/dpush.hpp"

#include <algorithm>

namespace dpush {

namespace {

nlohmann::json target_to_json(const SiteTarget& t) {
    return nlohmann::json{{"difficulty", t.difficulty.bits}, {"target_key", t.target_key.hex()}};
}

SiteTarget target_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw MalformedSite("target entry is not an object");
    if (!j.contains("target_key") || !j["target_key"].is_string())
        throw MalformedSite("missing target_key");
    if (!j.contains("difficulty") || !j["difficulty"].is_number_integer())
        throw MalformedSite("missing difficulty");
    auto key = KeyId::from_hex(j["target_key"].get<std::string>());
    if (!key) throw MalformedSite("target_key is not 128 lowercase hex characters");
    int bits = j["difficulty"].get<int>();
    if (bits < 1 || bits > KeyId::bits) throw MalformedSite("difficulty out of range");
    return SiteTarget{*key, Difficulty(bits)};
}

nlohmann::json cursor_to_json(const TargetCursor& tc) {
    return nlohmann::json{{"cursor", tc.cursor.next_id.hex()},
                          {"difficulty", tc.target.difficulty.bits},
                          {"target_key", tc.target.target_key.hex()}};
}

TargetCursor cursor_from_json(const nlohmann::json& j) {
    TargetCursor tc;
    tc.target = target_from_json(j);
    auto cur = KeyId::from_hex(j.at("cursor").get<std::string>());
    if (!cur) throw std::invalid_argument("bad cursor hex");
    tc.cursor.next_id = *cur;
    return tc;
}

}  // namespace

std::string Site::canonical_json() const {
    nlohmann::json j;
    j["ext"] = ext;
    j["kind"] = kind;
    auto targets_json = nlohmann::json::array();
    for (const auto& t : targets) targets_json.push_back(target_to_json(t));
    j["targets"] = targets_json;
    return j.dump();
}

Site Site::parse(BytesView raw) {
    nlohmann::json j = nlohmann::json::parse(raw.begin(), raw.end(), nullptr, false);
    if (j.is_discarded()) throw MalformedSite("invalid JSON");
    if (!j.is_object()) throw MalformedSite("site is not a JSON object");
    Site site;
    if (!j.contains("kind") || !j["kind"].is_string()) throw MalformedSite("missing kind");
    site.kind = j["kind"].get<std::string>();
    if (site.kind != "dpush/site" && site.kind != "dmail/site")
        throw MalformedSite("unknown kind: " + site.kind);
    if (!j.contains("targets") || !j["targets"].is_array() || j["targets"].empty())
        throw MalformedSite("site must list at least one target");
    for (const auto& t : j["targets"]) site.targets.push_back(target_from_json(t));
    site.ext = j.value("ext", nlohmann::json::object());
    return site;
}

nlohmann::json Mailbox::to_json() const {
    nlohmann::json j;
    j["kind"] = kind;
    j["site_version"] = site_version;
    auto act = nlohmann::json::array();
    for (const auto& tc : active) act.push_back(cursor_to_json(tc));
    j["active"] = act;
    auto ret = nlohmann::json::array();
    for (const auto& tc : retired) ret.push_back(cursor_to_json(tc));
    j["retired"] = ret;
    auto fol = nlohmann::json::array();
    for (const auto& f : follows)
        fol.push_back(nlohmann::json{{"channel", f.channel_id.hex()},
                                     {"last_seen", f.last_seen_version}});
    j["follows"] = fol;
    return j;
}

Mailbox Mailbox::from_json(const nlohmann::json& j) {
    Mailbox box;
    box.kind = j.at("kind").get<std::string>();
    box.site_version = j.at("site_version").get<std::uint64_t>();
    for (const auto& tc : j.at("active")) box.active.push_back(cursor_from_json(tc));
    for (const auto& tc : j.at("retired")) box.retired.push_back(cursor_from_json(tc));
    for (const auto& f : j.at("follows")) {
        auto id = KeyId::from_hex(f.at("channel").get<std::string>());
        if (!id) throw std::invalid_argument("bad channel hex");
        box.follows.push_back(FollowEntry{*id, f.at("last_seen").get<std::uint64_t>()});
    }
    return box;
}

Site make_site(const Mailbox& box) {
    Site site;
    site.kind = box.kind;
    for (const auto& tc : box.active) site.targets.push_back(tc.target);
    return site;
}

namespace {

void publish_site(ProtocolNode& via, const SigKeypair& keys, const Site& site,
                  std::uint64_t version) {
    auto record = make_updateable_record(via.suite(), keys, version,
                                         to_bytes(site.canonical_json()));
    auto res = via.store_updateable(record);
    if (!res.ok()) throw StoreFailed();
}

}  // namespace

Mailbox create_address(ProtocolNode& via, const SigKeypair& keys, Rng& rng,
                       const std::vector<Difficulty>& difficulties) {
    Mailbox box;
    for (const auto& d : difficulties)
        box.active.push_back(TargetCursor{SiteTarget{rng.random_key(), d}, ScanCursor{}});
    box.site_version = 1;
    publish_site(via, keys, make_site(box), box.site_version);
    return box;
}

Site fetch_site(ProtocolNode& via, const DpushAddress& address) {
    auto fetched = via.fetch_updateable(address);
    if (!fetched.record) throw SiteNotFound();
    const auto& record = *fetched.record;
    // fetch_updateable verified the signature; the address binding is the
    // part a hostile storage node could still fake.
    if (key_id(record.public_key) != address) throw AddressMismatch();
    return Site::parse(record.data);
}

SendReceipt send_message(ProtocolNode& via, const DpushAddress& to, BytesView payload, Rng& rng,
                         std::size_t priority, std::optional<std::uint64_t> max_attempts) {
    Site site = fetch_site(via, to);
    if (priority >= site.targets.size()) priority = site.targets.size() - 1;
    const SiteTarget& target = site.targets[priority];

    auto mined = mine(target.target_key, target.difficulty, payload, rng.next_u64(), max_attempts,
                      via.store().policy().max_block_size);
    if (!mined.block) throw MiningBudgetExhausted(mined.attempts);

    auto replicated = via.store_targeted(*mined.block);
    if (!replicated.ok()) throw StoreFailed();

    SendReceipt receipt;
    receipt.block_id = block_id(mined.block->header);
    receipt.target_used = target.target_key;
    receipt.difficulty_used = target.difficulty;
    receipt.attempts = mined.attempts;
    receipt.replicas = replicated.replicas;
    receipt.hops = replicated.hops;
    return receipt;
}

namespace {

void scan_target_list(ProtocolNode& via, std::vector<TargetCursor>& list, bool retired,
                      std::size_t limit, InboxScan& out) {
    for (auto& tc : list) {
        NetScanPage page;
        try {
            page = via.scan(tc.target.target_key, tc.target.difficulty, tc.cursor, limit);
        } catch (const std::exception& e) {
            out.target_errors.push_back(tc.target.target_key.hex() + ": " + e.what());
            continue;
        }
        if (page.network_failed) {
            out.target_errors.push_back(tc.target.target_key.hex() + ": no responsible node reachable");
            continue;
        }
        for (const auto& block : page.blocks)
            out.messages.push_back(InboxMessage{block.data, block_id(block.header),
                                                tc.target.target_key, retired});
        if (page.next.next_id > tc.cursor.next_id) tc.cursor = page.next;  // never regresses
    }
}

}  // namespace

InboxScan scan_inbox(ProtocolNode& via, Mailbox& box, std::size_t limit_per_target) {
    InboxScan out;
    scan_target_list(via, box.active, false, limit_per_target, out);
    scan_target_list(via, box.retired, true, limit_per_target, out);
    return out;
}

void rotate_target(ProtocolNode& via, Mailbox& box, const SigKeypair& keys, Rng& rng) {
    Mailbox next = box;
    next.site_version += 1;
    next.retired.insert(next.retired.end(), next.active.begin(), next.active.end());
    next.active.clear();
    for (const auto& tc : box.active)
        next.active.push_back(TargetCursor{SiteTarget{rng.random_key(), tc.target.difficulty},
                                           ScanCursor{}});
    publish_site(via, keys, make_site(next), next.site_version);  // throws on failure
    box = std::move(next);
}

bool drop_retired_target(Mailbox& box, const KeyId& target_key) {
    auto it = std::find_if(box.retired.begin(), box.retired.end(), [&](const TargetCursor& tc) {
        return tc.target.target_key == target_key;
    });
    if (it == box.retired.end()) return false;
    box.retired.erase(it);
    return true;
}

void follow(Mailbox& box, const KeyId& channel_id) {
    for (const auto& f : box.follows)
        if (f.channel_id == channel_id) return;
    box.follows.push_back(FollowEntry{channel_id, 0});
}

PollResult poll_followed(ProtocolNode& via, Mailbox& box) {
    PollResult out;
    for (auto& entry : box.follows) {
        auto fetched = via.fetch_updateable(entry.channel_id);
        out.hops += fetched.hops;
        if (!fetched.record) {
            out.missing.push_back(entry.channel_id);
            continue;
        }
        if (fetched.record->version <= entry.last_seen_version) continue;
        out.messages.push_back(
            ChannelMessage{entry.channel_id, fetched.record->version, fetched.record->data});
        entry.last_seen_version = fetched.record->version;
    }
    return out;
}

std::uint64_t publish_to_channel(ProtocolNode& via, FollowChannel& channel, BytesView data) {
    auto record = make_updateable_record(via.suite(), channel.keys, channel.version + 1, data);
    auto res = via.store_updateable(record);
    if (!res.ok()) throw StoreFailed();
    channel.version += 1;
    return channel.version;
}

}  // namespace dpush
