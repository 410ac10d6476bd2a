#include "dpush/scenario.hpp"

#include <algorithm>
#include <map>
#include <optional>

#include "dpush/dmail.hpp"
#include "dpush/dpush.hpp"

namespace dpush {

namespace {

struct Actor {
    std::size_t node = 0;
    SigKeypair keys;
    std::optional<Mailbox> plain;
    std::optional<dmail::MailInbox> mail;

    KeyId address() const { return key_id(keys.public_key); }
};

struct Channel {
    std::size_t node = 0;
    FollowChannel channel;
};

class ScenarioRunner {
public:
    explicit ScenarioRunner(const nlohmann::json& doc)
        : sim_(sim_config_from_json(doc.value("config", nlohmann::json::object()))) {
        actions_ = doc.value("actions", nlohmann::json::array());
    }

    ScenarioResult run() {
        for (const auto& action : actions_) {
            try {
                dispatch(action);
            } catch (const std::exception& e) {
                fail(action.value("op", "?") + std::string(": ") + e.what());
            }
        }
        sim_.run_until_quiescent();
        ScenarioResult out;
        out.metrics = sim_.metrics();
        out.metrics_csv = out.metrics.to_csv();
        out.trace = sim_.trace();
        out.failures = std::move(failures_);
        out.log = std::move(log_);
        return out;
    }

private:
    void fail(std::string why) { failures_.push_back(std::move(why)); }
    void note(std::string line) { log_.push_back(std::move(line)); }

    Actor& actor(const nlohmann::json& a, const char* field) {
        auto name = a.at(field).get<std::string>();
        auto it = actors_.find(name);
        if (it == actors_.end()) throw std::runtime_error("unknown actor: " + name);
        return it->second;
    }

    std::size_t node_of(const nlohmann::json& a) {
        if (a.contains("node")) return a.at("node").get<std::size_t>();
        if (a.contains("name")) return actor(a, "name").node;
        throw std::runtime_error("offline/online needs node or name");
    }

    // Destination: an actor name or a 128-hex address literal.
    KeyId address_of(const nlohmann::json& a, const char* field) {
        auto text = a.at(field).get<std::string>();
        if (auto direct = KeyId::from_hex(text)) return *direct;
        auto it = actors_.find(text);
        if (it == actors_.end()) throw std::runtime_error("unknown destination: " + text);
        return it->second.address();
    }

    KeyId channel_id_of(const nlohmann::json& a, const char* field) {
        auto text = a.at(field).get<std::string>();
        if (auto direct = KeyId::from_hex(text)) return *direct;
        auto it = channels_.find(text);
        if (it == channels_.end()) throw std::runtime_error("unknown channel: " + text);
        return it->second.channel.id();
    }

    void expect_multiset(const nlohmann::json& a, const char* field,
                         std::vector<std::string> got, const std::string& what) {
        if (!a.contains(field)) return;
        std::vector<std::string> want;
        for (const auto& v : a.at(field)) want.push_back(v.get<std::string>());
        std::sort(want.begin(), want.end());
        std::sort(got.begin(), got.end());
        if (want != got) {
            std::string msg = what + ": expected {";
            for (const auto& w : want) msg += w + ",";
            msg += "} got {";
            for (const auto& g : got) msg += g + ",";
            msg += "}";
            fail(msg);
        }
    }

    void dispatch(const nlohmann::json& a) {
        auto op = a.at("op").get<std::string>();
        if (op == "create_identity") return create_identity(a);
        if (op == "create_address") return create_address_op(a);
        if (op == "send") return send_op(a);
        if (op == "send_dmail") return send_dmail_op(a);
        if (op == "scan") return scan_op(a);
        if (op == "scan_dmail") return scan_dmail_op(a);
        if (op == "rotate") return rotate_op(a);
        if (op == "offline") return offline_op(a, false);
        if (op == "online") return offline_op(a, true);
        if (op == "create_channel") return create_channel_op(a);
        if (op == "publish_channel") return publish_channel_op(a);
        if (op == "follow") return follow_op(a);
        if (op == "poll") return poll_op(a);
        if (op == "lookup") return lookup_op(a);
        throw std::runtime_error("unknown op: " + op);
    }

    Actor& make_actor(const nlohmann::json& a) {
        auto name = a.at("name").get<std::string>();
        Actor actor;
        actor.node = a.at("node").get<std::size_t>();
        if (actor.node >= sim_.node_count()) throw std::runtime_error("node index out of range");
        actor.keys = default_suite().sig_keypair_from_seed(sim_.rng().seed_bytes());
        return actors_[name] = std::move(actor);
    }

    void create_identity(const nlohmann::json& a) {
        auto& actor = make_actor(a);
        note("identity " + a.at("name").get<std::string>() + " addr=" + actor.address().hex());
    }

    void create_address_op(const nlohmann::json& a) {
        auto& actor = make_actor(a);
        auto kind = a.value("kind", "dpush");
        Difficulty d(a.value("difficulty", 16));
        auto& node = sim_.node(actor.node);
        std::uint64_t before = sim_.metrics().messages_total;
        if (kind == "dmail") {
            actor.mail = dmail::create_mail_address(node, actor.keys, sim_.rng(), d);
        } else if (kind == "dpush") {
            actor.plain = create_address(node, actor.keys, sim_.rng(), {d});
        } else {
            throw std::runtime_error("kind must be dpush or dmail");
        }
        sim_.metrics().add_op("publish_site", 0, sim_.metrics().messages_total - before, 0);
        note("address " + a.at("name").get<std::string>() + " addr=" + actor.address().hex());
    }

    void send_op(const nlohmann::json& a) {
        auto& from = actor(a, "from");
        KeyId to = address_of(a, "to");
        Bytes payload = to_bytes(a.at("body").get<std::string>());
        std::size_t priority = a.value("priority", 0);
        std::uint64_t before = sim_.metrics().messages_total;
        auto receipt = send_message(sim_.node(from.node), to, payload, sim_.rng(), priority);
        sim_.metrics().add_op("send", receipt.hops, sim_.metrics().messages_total - before,
                              receipt.attempts);
        note("send block=" + receipt.block_id.hex().substr(0, 16) +
             " attempts=" + std::to_string(receipt.attempts));
    }

    void send_dmail_op(const nlohmann::json& a) {
        auto& from = actor(a, "from");
        KeyId to = address_of(a, "to");
        Bytes body = to_bytes(a.at("body").get<std::string>());
        std::uint64_t before = sim_.metrics().messages_total;
        auto receipt = dmail::compose_and_send(sim_.node(from.node), from.keys, to, body,
                                               sim_.now_ms() / 1000, sim_.rng());
        sim_.metrics().add_op("send_dmail", receipt.hops, sim_.metrics().messages_total - before,
                              receipt.attempts);
        note("send_dmail block=" + receipt.block_id.hex().substr(0, 16) +
             " attempts=" + std::to_string(receipt.attempts));
    }

    void scan_op(const nlohmann::json& a) {
        auto& who = actor(a, "as");
        if (!who.plain) throw std::runtime_error("actor has no dpush mailbox");
        std::size_t limit = a.value("limit", 16);
        std::uint64_t before = sim_.metrics().messages_total;
        std::vector<std::string> payloads;
        for (;;) {
            auto page = scan_inbox(sim_.node(who.node), *who.plain, limit);
            for (const auto& e : page.target_errors) fail("scan: " + e);
            if (page.messages.empty()) break;
            for (const auto& m : page.messages) payloads.push_back(to_string(m.payload));
        }
        sim_.metrics().add_op("scan", 0, sim_.metrics().messages_total - before, 0);
        expect_multiset(a, "expect_payloads", payloads, "scan payloads");
        note("scan got " + std::to_string(payloads.size()) + " message(s)");
    }

    void scan_dmail_op(const nlohmann::json& a) {
        auto& who = actor(a, "as");
        if (!who.mail) throw std::runtime_error("actor has no dmail inbox");
        std::size_t limit = a.value("limit", 16);
        std::uint64_t before = sim_.metrics().messages_total;
        std::vector<std::string> bodies;
        std::vector<KeyId> senders;
        for (;;) {
            auto page = dmail::scan_mail(sim_.node(who.node), *who.mail, limit);
            for (const auto& e : page.target_errors) fail("scan_dmail: " + e);
            for (const auto& r : page.rejected)
                fail("scan_dmail: rejected block " + r.first.hex().substr(0, 16) + ": " +
                     dmail::to_string(r.second));
            if (page.accepted.empty() && page.rejected.empty()) break;
            for (const auto& m : page.accepted) {
                bodies.push_back(to_string(m.message.body));
                senders.push_back(m.sender_address);
            }
        }
        sim_.metrics().add_op("scan_dmail", 0, sim_.metrics().messages_total - before, 0);
        expect_multiset(a, "expect_bodies", bodies, "scan_dmail bodies");
        if (a.contains("expect_senders")) {
            std::vector<std::string> got;
            for (const auto& s : senders) got.push_back(s.hex());
            std::vector<std::string> want;
            for (const auto& v : a.at("expect_senders")) {
                auto text = v.get<std::string>();
                auto it = actors_.find(text);
                want.push_back(it != actors_.end() ? it->second.address().hex() : text);
            }
            std::sort(want.begin(), want.end());
            std::sort(got.begin(), got.end());
            if (want != got) fail("scan_dmail senders mismatch");
        }
        note("scan_dmail got " + std::to_string(bodies.size()) + " message(s)");
    }

    void rotate_op(const nlohmann::json& a) {
        auto& who = actor(a, "as");
        std::uint64_t before = sim_.metrics().messages_total;
        if (who.mail) {
            dmail::rotate_mail_target(sim_.node(who.node), *who.mail, who.keys, sim_.rng());
        } else if (who.plain) {
            rotate_target(sim_.node(who.node), *who.plain, who.keys, sim_.rng());
        } else {
            throw std::runtime_error("actor has no mailbox to rotate");
        }
        sim_.metrics().add_op("publish_site", 0, sim_.metrics().messages_total - before, 0);
        note("rotate " + a.at("as").get<std::string>());
    }

    void offline_op(const nlohmann::json& a, bool online) {
        std::size_t node = node_of(a);
        if (online)
            sim_.set_online(node);
        else
            sim_.set_offline(node);
    }

    void create_channel_op(const nlohmann::json& a) {
        auto name = a.at("name").get<std::string>();
        auto& owner = actor(a, "owner");
        Channel ch;
        ch.node = owner.node;
        ch.channel.keys = default_suite().sig_keypair_from_seed(sim_.rng().seed_bytes());
        channels_[name] = std::move(ch);
        note("channel " + name + " id=" + channels_[name].channel.id().hex());
    }

    void publish_channel_op(const nlohmann::json& a) {
        auto name = a.at("channel").get<std::string>();
        auto it = channels_.find(name);
        if (it == channels_.end()) throw std::runtime_error("unknown channel: " + name);
        Bytes data = to_bytes(a.at("body").get<std::string>());
        std::uint64_t before = sim_.metrics().messages_total;
        publish_to_channel(sim_.node(it->second.node), it->second.channel, data);
        sim_.metrics().add_op("publish_channel", 0, sim_.metrics().messages_total - before, 0);
    }

    void follow_op(const nlohmann::json& a) {
        auto& who = actor(a, "as");
        KeyId id = channel_id_of(a, "channel");
        Mailbox& box = who.mail ? who.mail->box : *who.plain;
        follow(box, id);
    }

    void poll_op(const nlohmann::json& a) {
        auto& who = actor(a, "as");
        Mailbox& box = who.mail ? who.mail->box : *who.plain;
        std::uint64_t before = sim_.metrics().messages_total;
        auto result = poll_followed(sim_.node(who.node), box);
        sim_.metrics().add_op("poll", result.hops, sim_.metrics().messages_total - before, 0);
        std::vector<std::string> bodies;
        for (const auto& m : result.messages) bodies.push_back(to_string(m.data));
        expect_multiset(a, "expect_bodies", bodies, "poll bodies");
        note("poll got " + std::to_string(bodies.size()) + " message(s)");
    }

    void lookup_op(const nlohmann::json& a) {
        std::size_t node = a.contains("node") ? a.at("node").get<std::size_t>()
                                              : actor(a, "from").node;
        auto key_text = a.value("key", "random");
        KeyId key = key_text == "random" ? sim_.rng().random_key()
                                         : KeyId::from_hex(key_text).value();
        std::uint64_t before = sim_.metrics().messages_total;
        auto result = sim_.node(node).find_nodes(key);
        sim_.metrics().add_op("lookup", result.hops, sim_.metrics().messages_total - before, 0);
    }

    Sim sim_;
    nlohmann::json actions_;
    std::map<std::string, Actor> actors_;
    std::map<std::string, Channel> channels_;
    std::vector<std::string> failures_;
    std::vector<std::string> log_;
};

}  // namespace

SimConfig sim_config_from_json(const nlohmann::json& j) {
    SimConfig cfg;
    cfg.node_count = j.value("nodes", 8);
    cfg.seed = j.value("seed", 1);
    if (j.contains("latency_ms")) {
        const auto& lat = j.at("latency_ms");
        if (lat.is_array()) {
            cfg.latency_min_ms = lat.at(0).get<std::uint32_t>();
            cfg.latency_max_ms = lat.at(1).get<std::uint32_t>();
        } else {
            cfg.latency_min_ms = cfg.latency_max_ms = lat.get<std::uint32_t>();
        }
    }
    cfg.drop_rate = j.value("drop_rate", 0.0);
    cfg.k = j.value("k", 20);
    cfg.alpha = j.value("alpha", 3);
    cfg.replication = j.value("replication", cfg.k);
    cfg.floor_bits = j.value("floor_bits", 16);
    cfg.max_block_size = j.value("max_block_size", kDefaultMaxBlockSize);
    cfg.timeout_ms = j.value("timeout_ms", 0);
    cfg.max_events = j.value("max_events", 50'000'000ull);
    cfg.record_trace = j.value("record_trace", true);
    return cfg;
}

ScenarioResult run_scenario(const nlohmann::json& doc) {
    return ScenarioRunner(doc).run();
}

ScenarioResult run_scenario_text(const std::string& text) {
    auto doc = nlohmann::json::parse(text);
    return run_scenario(doc);
}

}  // namespace dpush
