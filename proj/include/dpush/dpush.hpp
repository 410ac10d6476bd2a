#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "dpush/node.hpp"
#include "dpush/rng.hpp"

namespace dpush {

// Layer errors. Verification outcomes stay return values; these are
// operational failures.
struct ProtocolError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct SiteNotFound : ProtocolError {
    SiteNotFound() : ProtocolError("site not found") {}
};
struct AddressMismatch : ProtocolError {
    AddressMismatch() : ProtocolError("record signed by a key that does not hash to the address") {}
};
struct MalformedSite : ProtocolError {
    explicit MalformedSite(const std::string& why) : ProtocolError("malformed site: " + why) {}
};
struct UnsupportedScheme : ProtocolError {
    explicit UnsupportedScheme(const std::string& name)
        : ProtocolError("unsupported encryption scheme: " + name) {}
};
struct MiningBudgetExhausted : ProtocolError {
    std::uint64_t attempts;
    explicit MiningBudgetExhausted(std::uint64_t n)
        : ProtocolError("mining attempt budget exhausted"), attempts(n) {}
};
struct StoreFailed : ProtocolError {
    StoreFailed() : ProtocolError("no replica accepted the record") {}
};
struct LookupFailed : ProtocolError {
    LookupFailed() : ProtocolError("no responsible node reachable") {}
};

struct SiteTarget {
    KeyId target_key;
    Difficulty difficulty{16};

    bool operator==(const SiteTarget&) const = default;
};

// Receiver-published metadata stored as an updateable record under the
// owner's address. Serialized as canonical JSON (sorted keys, no
// insignificant whitespace) so publishes are reproducible.
struct Site {
    std::string kind = "dpush/site";
    std::vector<SiteTarget> targets;
    nlohmann::json ext = nlohmann::json::object();

    std::string canonical_json() const;
    static Site parse(BytesView raw);  // throws MalformedSite

    bool operator==(const Site& o) const {
        return kind == o.kind && targets == o.targets && ext == o.ext;
    }
};

using DpushAddress = KeyId;

struct TargetCursor {
    SiteTarget target;
    ScanCursor cursor{};
};

struct FollowEntry {
    KeyId channel_id;
    std::uint64_t last_seen_version = 0;
};

// Receiver-side state for one address: active and retired targets with
// their scan cursors, plus the followed zero-work channels. Owned by a
// single logical actor.
struct Mailbox {
    std::string kind = "dpush/site";
    std::uint64_t site_version = 0;
    std::vector<TargetCursor> active;
    std::vector<TargetCursor> retired;
    std::vector<FollowEntry> follows;

    nlohmann::json to_json() const;
    static Mailbox from_json(const nlohmann::json& j);
};

struct SendReceipt {
    KeyId block_id;
    KeyId target_used;
    Difficulty difficulty_used;
    std::uint64_t attempts = 0;
    std::size_t replicas = 0;
    int hops = 0;
};

struct InboxMessage {
    Bytes payload;
    KeyId block_id;
    KeyId target_key;
    bool from_retired_target = false;
};

struct InboxScan {
    std::vector<InboxMessage> messages;
    std::vector<std::string> target_errors;  // per-target failures; cursors stay intact
};

struct ChannelMessage {
    KeyId channel_id;
    std::uint64_t version = 0;
    Bytes data;
};

struct PollResult {
    std::vector<ChannelMessage> messages;
    std::vector<KeyId> missing;  // followed ids that resolved to nothing
    int hops = 0;
};

// Sender-owned zero-work channel: a keypair whose updateable record carries
// successive messages.
struct FollowChannel {
    SigKeypair keys;
    std::uint64_t version = 0;

    KeyId id() const { return key_id(keys.public_key); }
};

Site make_site(const Mailbox& box);

// Generates the initial site (one random target at the given difficulty),
// publishes it at version 1 and returns the local mailbox.
Mailbox create_address(ProtocolNode& via, const SigKeypair& keys, Rng& rng,
                       const std::vector<Difficulty>& difficulties = {Difficulty(16)});

// Resolves, authenticates and parses an address's site.
Site fetch_site(ProtocolNode& via, const DpushAddress& address);

// Fetch + mine at the advertised difficulty + replicate.
SendReceipt send_message(ProtocolNode& via, const DpushAddress& to, BytesView payload, Rng& rng,
                         std::size_t priority = 0,
                         std::optional<std::uint64_t> max_attempts = std::nullopt);

// One page of up to limit_per_target new messages from every active and
// retired target; cursors advance past returned messages only.
InboxScan scan_inbox(ProtocolNode& via, Mailbox& box, std::size_t limit_per_target = 16);

// New random target published as site version+1; the old target keeps its
// cursor on the retired list. The address never changes. Local state is
// committed only when the publish succeeds.
void rotate_target(ProtocolNode& via, Mailbox& box, const SigKeypair& keys, Rng& rng);

// Drops one retired target from the checked set.
bool drop_retired_target(Mailbox& box, const KeyId& target_key);

void follow(Mailbox& box, const KeyId& channel_id);
PollResult poll_followed(ProtocolNode& via, Mailbox& box);

std::uint64_t publish_to_channel(ProtocolNode& via, FollowChannel& channel, BytesView data);

}  // namespace dpush
