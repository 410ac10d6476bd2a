// dpush — command line client for the proof-of-work targeted messaging
// stack. Network commands run against a persistent in-process simulated
// world (config.json + state.bin in the world directory); profiles hold
// keys, inbox cursors and follows as canonical JSON.

#include <CLI11.hpp>

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "dpush/dmail.hpp"
#include "dpush/dpush.hpp"
#include "dpush/economics.hpp"
#include "dpush/profile.hpp"
#include "dpush/scenario.hpp"
#include "dpush/world.hpp"

namespace {

using namespace dpush;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct StateError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

constexpr int kExitUsage = 2;
constexpr int kExitProtocol = 3;
constexpr int kExitNetwork = 4;
constexpr int kExitState = 5;

std::string default_path(const char* env, const char* fallback) {
    if (const char* v = std::getenv(env)) return v;
    return fallback;
}

Bytes read_payload(const std::string& in_file, const std::string& body) {
    if (!in_file.empty() && !body.empty()) throw UsageError("--in and --body are exclusive");
    if (!in_file.empty()) {
        std::ifstream in(in_file, std::ios::binary);
        if (!in) throw StateError("cannot read " + in_file);
        std::stringstream buf;
        buf << in.rdbuf();
        auto s = buf.str();
        return Bytes(s.begin(), s.end());
    }
    if (!body.empty()) return to_bytes(body);
    throw UsageError("one of --in or --body is required");
}

KeyId parse_key(const std::string& hex, const std::string& what) {
    auto id = KeyId::from_hex(hex);
    if (!id) throw UsageError(what + " must be 128 lowercase hex characters");
    return id ? *id : KeyId{};
}

std::string printable(BytesView data) {
    // JSON-escaped so arbitrary payload bytes stay on one line.
    return nlohmann::json(std::string(data.begin(), data.end())).dump();
}

std::uint64_t wall_clock_seconds() {
    return static_cast<std::uint64_t>(
        std::chrono::duration_cast<std::chrono::seconds>(
            std::chrono::system_clock::now().time_since_epoch()).count());
}

struct Ctx {
    std::string profile_dir;
    std::string world_dir;
    std::string passphrase;
};

void cmd_keygen(const Ctx& ctx, bool force) {
    Profile profile{ctx.profile_dir};
    ProfileLock lock(profile.dir());
    if (profile.has_keys() && !force) throw StateError("profile already has keys (use --force)");
    if (ctx.passphrase.empty())
        std::cerr << "warning: private key stored unencrypted; pass --passphrase to protect it\n";
    profile.create_keys(default_suite(), ctx.passphrase);
    std::cout << "address=" << profile.address(ctx.passphrase).hex() << '\n';
}

void cmd_address_create(const Ctx& ctx, const std::string& kind, int difficulty) {
    Profile profile{ctx.profile_dir};
    ProfileLock lock(profile.dir());
    if (!profile.has_keys()) throw StateError("no keys; run keygen first");
    auto keys = profile.load_keys(ctx.passphrase);
    auto world = World::open(ctx.world_dir);
    auto rng = Rng::system();
    if (kind == "dmail") {
        auto inbox = dmail::create_mail_address(world.access_node(), keys, rng,
                                                Difficulty(difficulty));
        profile.save_inbox(inbox);
        std::cout << "address=" << inbox.address.hex() << '\n'
                  << "target=" << inbox.box.active.front().target.target_key.hex() << '\n'
                  << "difficulty=" << difficulty << '\n';
    } else if (kind == "dpush") {
        auto box = create_address(world.access_node(), keys, rng, {Difficulty(difficulty)});
        profile.save_inbox(box);
        std::cout << "address=" << key_id(keys.public_key).hex() << '\n'
                  << "target=" << box.active.front().target.target_key.hex() << '\n'
                  << "difficulty=" << difficulty << '\n';
    } else {
        throw UsageError("--kind must be dmail or dpush");
    }
    world.save();
}

void cmd_site_show(const Ctx& ctx, const std::string& address_hex) {
    auto world = World::open(ctx.world_dir);
    KeyId address;
    if (!address_hex.empty()) {
        address = parse_key(address_hex, "--address");
    } else {
        Profile profile{ctx.profile_dir};
        if (!profile.has_keys()) throw StateError("no keys and no --address given");
        address = profile.address(ctx.passphrase);
    }
    Site site = fetch_site(world.access_node(), address);
    std::cout << site.canonical_json() << '\n';
}

void cmd_site_rotate(const Ctx& ctx) {
    Profile profile{ctx.profile_dir};
    ProfileLock lock(profile.dir());
    auto keys = profile.load_keys(ctx.passphrase);
    auto world = World::open(ctx.world_dir);
    auto rng = Rng::system();
    if (auto inbox = profile.load_mail_inbox()) {
        dmail::rotate_mail_target(world.access_node(), *inbox, keys, rng);
        profile.save_inbox(*inbox);
        std::cout << "site_version=" << inbox->box.site_version << '\n'
                  << "target=" << inbox->box.active.front().target.target_key.hex() << '\n';
    } else if (auto box = profile.load_plain_inbox()) {
        rotate_target(world.access_node(), *box, keys, rng);
        profile.save_inbox(*box);
        std::cout << "site_version=" << box->site_version << '\n'
                  << "target=" << box->active.front().target.target_key.hex() << '\n';
    } else {
        throw StateError("no inbox; run address create first");
    }
    world.save();
}

void cmd_site_retire(const Ctx& ctx, const std::string& target_hex) {
    Profile profile{ctx.profile_dir};
    ProfileLock lock(profile.dir());
    KeyId target = parse_key(target_hex, "target");
    if (auto inbox = profile.load_mail_inbox()) {
        if (!drop_retired_target(inbox->box, target)) throw StateError("target not on retired list");
        profile.save_inbox(*inbox);
    } else if (auto box = profile.load_plain_inbox()) {
        if (!drop_retired_target(*box, target)) throw StateError("target not on retired list");
        profile.save_inbox(*box);
    } else {
        throw StateError("no inbox; run address create first");
    }
    std::cout << "dropped=" << target.hex() << '\n';
}

void cmd_send(const Ctx& ctx, const std::string& to_hex, const std::string& in_file,
              const std::string& body, bool raw, std::size_t priority,
              std::uint64_t max_attempts) {
    KeyId to = parse_key(to_hex, "--to");
    Bytes payload = read_payload(in_file, body);
    auto world = World::open(ctx.world_dir);
    auto rng = Rng::system();
    std::optional<std::uint64_t> budget;
    if (max_attempts > 0) budget = max_attempts;

    SendReceipt receipt;
    if (raw) {
        receipt = send_message(world.access_node(), to, payload, rng, priority, budget);
    } else {
        Profile profile{ctx.profile_dir};
        if (!profile.has_keys()) throw StateError("no keys; run keygen first (or use --raw)");
        auto keys = profile.load_keys(ctx.passphrase);
        receipt = dmail::compose_and_send(world.access_node(), keys, to, payload,
                                          wall_clock_seconds(), rng, budget);
    }
    world.save();
    std::cout << "block_id=" << receipt.block_id.hex() << '\n'
              << "target=" << receipt.target_used.hex() << '\n'
              << "difficulty=" << receipt.difficulty_used.bits << '\n'
              << "attempts=" << receipt.attempts << '\n'
              << "replicas=" << receipt.replicas << '\n';
}

void cmd_inbox_scan(const Ctx& ctx, std::size_t limit, bool drain) {
    Profile profile{ctx.profile_dir};
    ProfileLock lock(profile.dir());
    auto world = World::open(ctx.world_dir);
    std::size_t count = 0;
    if (auto inbox = profile.load_mail_inbox()) {
        for (;;) {
            auto page = dmail::scan_mail(world.access_node(), *inbox, limit);
            for (const auto& e : page.target_errors)
                std::cerr << "warning: target " << e << '\n';
            for (const auto& r : page.rejected)
                std::cerr << "rejected block=" << r.first.hex() << " reason="
                          << dmail::to_string(r.second) << '\n';
            for (const auto& m : page.accepted) {
                std::cout << "message block=" << m.block_id.hex().substr(0, 32)
                          << " from=" << m.sender_address.hex()
                          << " time=" << m.message.timestamp
                          << " body=" << printable(m.message.body) << '\n';
                ++count;
            }
            if (!drain || (page.accepted.empty() && page.rejected.empty())) break;
        }
        profile.save_inbox(*inbox);
    } else if (auto box = profile.load_plain_inbox()) {
        for (;;) {
            auto page = scan_inbox(world.access_node(), *box, limit);
            for (const auto& e : page.target_errors)
                std::cerr << "warning: target " << e << '\n';
            for (const auto& m : page.messages) {
                std::cout << "message block=" << m.block_id.hex().substr(0, 32)
                          << " body=" << printable(m.payload) << '\n';
                ++count;
            }
            if (!drain || page.messages.empty()) break;
        }
        profile.save_inbox(*box);
    } else {
        throw StateError("no inbox; run address create first");
    }
    std::cout << "total=" << count << '\n';
}

void cmd_follow_add(const Ctx& ctx, const std::string& channel_hex) {
    Profile profile{ctx.profile_dir};
    ProfileLock lock(profile.dir());
    KeyId id = parse_key(channel_hex, "channel");
    if (auto inbox = profile.load_mail_inbox()) {
        follow(inbox->box, id);
        profile.save_inbox(*inbox);
    } else if (auto box = profile.load_plain_inbox()) {
        follow(*box, id);
        profile.save_inbox(*box);
    } else {
        throw StateError("no inbox; run address create first");
    }
    std::cout << "following=" << id.hex() << '\n';
}

void cmd_follow_poll(const Ctx& ctx) {
    Profile profile{ctx.profile_dir};
    ProfileLock lock(profile.dir());
    auto world = World::open(ctx.world_dir);
    auto poll_and_print = [&](Mailbox& box) {
        auto result = poll_followed(world.access_node(), box);
        for (const auto& m : result.messages)
            std::cout << "channel=" << m.channel_id.hex().substr(0, 32) << " version=" << m.version
                      << " body=" << printable(m.data) << '\n';
        for (const auto& id : result.missing)
            std::cerr << "warning: channel " << id.hex() << " not found\n";
        std::cout << "total=" << result.messages.size() << '\n';
    };
    if (auto inbox = profile.load_mail_inbox()) {
        poll_and_print(inbox->box);
        profile.save_inbox(*inbox);
    } else if (auto box = profile.load_plain_inbox()) {
        poll_and_print(*box);
        profile.save_inbox(*box);
    } else {
        throw StateError("no inbox; run address create first");
    }
}

void cmd_follow_publish(const Ctx& ctx, const std::string& in_file, const std::string& body) {
    Profile profile{ctx.profile_dir};
    ProfileLock lock(profile.dir());
    Bytes payload = read_payload(in_file, body);
    auto world = World::open(ctx.world_dir);
    FollowChannel channel;
    if (auto existing = profile.load_own_channel()) {
        channel = *existing;
    } else {
        channel.keys = default_suite().sig_keypair();
    }
    auto version = publish_to_channel(world.access_node(), channel, payload);
    profile.save_own_channel(channel);
    world.save();
    std::cout << "channel=" << channel.id().hex() << '\n' << "version=" << version << '\n';
}

int cmd_sim_run(const std::string& scenario_file, const std::string& metrics_file,
                const std::string& trace_file) {
    std::ifstream in(scenario_file);
    if (!in) throw StateError("cannot read " + scenario_file);
    nlohmann::json doc = nlohmann::json::parse(in, nullptr, false);
    if (doc.is_discarded()) throw UsageError("scenario is not valid JSON");

    auto result = run_scenario(doc);
    for (const auto& line : result.log) std::cout << line << '\n';
    if (!metrics_file.empty()) {
        std::ofstream out(metrics_file, std::ios::trunc);
        out << result.metrics_csv;
        if (!out) throw StateError("cannot write " + metrics_file);
    }
    if (!trace_file.empty()) {
        std::ofstream out(trace_file, std::ios::trunc);
        out << result.trace;
        if (!out) throw StateError("cannot write " + trace_file);
    }
    for (const auto& f : result.failures) std::cerr << "assert failed: " << f << '\n';
    std::cout << "ops=" << result.metrics.ops.size()
              << " messages=" << result.metrics.messages_total
              << " attempts=" << result.metrics.mining_attempts_total
              << " failures=" << result.failures.size() << '\n';
    return result.ok() ? 0 : 1;
}

void cmd_bench_pow(int bits, std::size_t trials, std::uint64_t seed) {
    auto rng = seed ? Rng(seed) : Rng::system();
    auto report = bench_pow(bits, trials, rng);
    std::cout << "difficulty_bits=" << report.difficulty_bits << '\n'
              << "trials=" << report.trials << '\n'
              << "min_attempts=" << report.min_attempts << '\n'
              << "median_attempts=" << report.median_attempts << '\n'
              << "geomean_attempts=" << report.geomean_attempts << '\n'
              << "max_attempts=" << report.max_attempts << '\n'
              << "hashes_per_second=" << report.hashes_per_second << '\n'
              << "implied_seconds_per_message=" << report.implied_seconds_per_message << '\n';
}

void cmd_economics(double pow_seconds, double per_conversion) {
    EconomicsReport report;
    try {
        report = conversion_cost(pow_seconds, per_conversion);
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    std::cout << "pow_seconds_per_message=" << report.pow_seconds_per_message << '\n'
              << "messages_per_conversion=" << report.messages_per_conversion << '\n'
              << "total_seconds_per_conversion=" << report.total_seconds_per_conversion << '\n'
              << "total_years_per_conversion=" << report.total_years_per_conversion << '\n';
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"dpush: spam-resistant targeted messaging over a DHT"};
    app.require_subcommand(1);

    Ctx ctx;
    ctx.profile_dir = default_path("DPUSH_PROFILE", ".dpush-profile");
    ctx.world_dir = default_path("DPUSH_WORLD", ".dpush-world");
    app.add_option("--profile", ctx.profile_dir, "Profile directory");
    app.add_option("--world", ctx.world_dir, "World (simulated network) directory");
    app.add_option("--passphrase", ctx.passphrase, "Passphrase protecting the profile keys");

    bool force = false;
    auto* keygen = app.add_subcommand("keygen", "Create the profile signing keypair");
    keygen->add_flag("--force", force, "Overwrite existing keys");

    auto* address = app.add_subcommand("address", "Address management");
    address->require_subcommand(1);
    std::string kind = "dmail";
    int difficulty = 16;
    auto* address_create = address->add_subcommand("create", "Create and publish an address");
    address_create->add_option("--kind", kind, "dmail or dpush")
        ->check(CLI::IsMember({"dmail", "dpush"}));
    address_create->add_option("--difficulty", difficulty, "Advertised difficulty bits")
        ->check(CLI::Range(1, 512));

    auto* site = app.add_subcommand("site", "Published site management");
    site->require_subcommand(1);
    std::string show_address;
    auto* site_show = site->add_subcommand("show", "Fetch and print a site");
    site_show->add_option("--address", show_address, "Address (defaults to own)");
    auto* site_rotate = site->add_subcommand("rotate", "Rotate to a fresh target key");
    std::string retire_target;
    auto* site_retire = site->add_subcommand("retire", "Drop a retired target from scanning");
    site_retire->add_option("target", retire_target, "Retired target key (hex)")->required();

    auto* send = app.add_subcommand("send", "Send a message (mines the proof of work)");
    std::string to_hex, in_file, body;
    bool raw = false;
    std::size_t priority = 0;
    std::uint64_t max_attempts = 0;
    send->add_option("--to", to_hex, "Destination address (hex)")->required();
    send->add_option("--in", in_file, "Payload file");
    send->add_option("--body", body, "Payload text");
    send->add_flag("--raw", raw, "Plain Dpush payload (no encryption, no profile needed)");
    send->add_option("--priority", priority, "Target index for multi-target sites");
    send->add_option("--max-attempts", max_attempts, "Mining attempt budget (0 = unbounded)");

    auto* inbox = app.add_subcommand("inbox", "Inbox operations");
    inbox->require_subcommand(1);
    std::size_t limit = 16;
    bool drain = true;
    auto* inbox_scan = inbox->add_subcommand("scan", "Scan targets for new messages");
    inbox_scan->add_option("--limit", limit, "Page size per target");
    inbox_scan->add_flag("!--single-page", drain, "Fetch one page instead of draining");

    auto* follow_cmd = app.add_subcommand("follow", "Zero-work follow channels");
    follow_cmd->require_subcommand(1);
    std::string channel_hex;
    auto* follow_add = follow_cmd->add_subcommand("add", "Follow a sender channel");
    follow_add->add_option("channel", channel_hex, "Channel ID (hex)")->required();
    auto* follow_poll = follow_cmd->add_subcommand("poll", "Poll followed channels");
    std::string pub_in, pub_body;
    auto* follow_publish = follow_cmd->add_subcommand("publish", "Publish on the own channel");
    follow_publish->add_option("--in", pub_in, "Payload file");
    follow_publish->add_option("--body", pub_body, "Payload text");

    auto* sim = app.add_subcommand("sim", "Simulation scenarios");
    sim->require_subcommand(1);
    std::string scenario_file, metrics_file, trace_file;
    auto* sim_run = sim->add_subcommand("run", "Run a scenario file");
    sim_run->add_option("scenario", scenario_file, "Scenario JSON")->required();
    sim_run->add_option("--metrics", metrics_file, "Write metrics CSV here");
    sim_run->add_option("--trace", trace_file, "Write the event trace here");

    auto* bench = app.add_subcommand("bench-pow", "Measure mining cost");
    int bench_bits = 12;
    std::size_t bench_trials = 50;
    std::uint64_t bench_seed = 0;
    bench->add_option("--bits", bench_bits, "Difficulty bits")->check(CLI::Range(0, 512));
    bench->add_option("--trials", bench_trials, "Number of mines");
    bench->add_option("--seed", bench_seed, "Deterministic seed (0 = system entropy)");

    auto* econ = app.add_subcommand("economics", "Spam conversion cost calculator");
    double pow_seconds = 0.0, per_conversion = 0.0;
    econ->add_option("--pow-seconds", pow_seconds, "Seconds of work per message")->required();
    econ->add_option("--per-conversion", per_conversion, "Messages per conversion")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    try {
        if (*keygen) cmd_keygen(ctx, force);
        if (*address_create) cmd_address_create(ctx, kind, difficulty);
        if (*site_show) cmd_site_show(ctx, show_address);
        if (*site_rotate) cmd_site_rotate(ctx);
        if (*site_retire) cmd_site_retire(ctx, retire_target);
        if (*send) cmd_send(ctx, to_hex, in_file, body, raw, priority, max_attempts);
        if (*inbox_scan) cmd_inbox_scan(ctx, limit, drain);
        if (*follow_add) cmd_follow_add(ctx, channel_hex);
        if (*follow_poll) cmd_follow_poll(ctx);
        if (*follow_publish) cmd_follow_publish(ctx, pub_in, pub_body);
        if (*sim_run) return cmd_sim_run(scenario_file, metrics_file, trace_file);
        if (*bench) cmd_bench_pow(bench_bits, bench_trials, bench_seed);
        if (*econ) cmd_economics(pow_seconds, per_conversion);
    } catch (const UsageError& e) {
        std::cerr << "error: usage: " << e.what() << '\n';
        return kExitUsage;
    } catch (const StoreFailed& e) {
        std::cerr << "error: network: " << e.what() << '\n';
        return kExitNetwork;
    } catch (const LookupFailed& e) {
        std::cerr << "error: network: " << e.what() << '\n';
        return kExitNetwork;
    } catch (const ProtocolError& e) {
        std::cerr << "error: protocol: " << e.what() << '\n';
        return kExitProtocol;
    } catch (const std::exception& e) {
        std::cerr << "error: state: " << e.what() << '\n';
        return kExitState;
    }
    return 0;
}
