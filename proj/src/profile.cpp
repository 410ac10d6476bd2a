#include "dpush/profile.hpp"

#include <sodium.h>
#include <sys/file.h>

#include <fcntl.h>
#include <unistd.h>

#include <fstream>
#include <stdexcept>

namespace dpush {

namespace {

nlohmann::json read_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
    if (j.is_discarded()) throw std::runtime_error("invalid JSON in " + path.string());
    return j;
}

void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << j.dump() << '\n';
}

std::array<std::uint8_t, 32> passphrase_key(const std::string& passphrase,
                                            const Bytes& salt) {
    if (salt.size() != crypto_pwhash_SALTBYTES) throw std::runtime_error("bad key salt");
    std::array<std::uint8_t, 32> key;
    if (crypto_pwhash(key.data(), key.size(), passphrase.data(), passphrase.size(), salt.data(),
                      crypto_pwhash_OPSLIMIT_INTERACTIVE, crypto_pwhash_MEMLIMIT_INTERACTIVE,
                      crypto_pwhash_ALG_DEFAULT) != 0)
        throw std::runtime_error("passphrase key derivation failed");
    return key;
}

}  // namespace

bool Profile::has_keys() const {
    return std::filesystem::exists(dir_ / "keys.json");
}

void Profile::create_keys(const CryptoSuite& suite, const std::string& passphrase) {
    std::filesystem::create_directories(dir_);
    auto keys = suite.sig_keypair();
    nlohmann::json j;
    j["sig_scheme"] = std::string(suite.sig_scheme());
    j["sig_pk"] = bytes_to_hex(keys.public_key);
    if (passphrase.empty()) {
        j["sig_sk"] = bytes_to_hex(keys.secret_key);
    } else {
        Bytes salt(crypto_pwhash_SALTBYTES);
        randombytes_buf(salt.data(), salt.size());
        Bytes nonce(suite.ae_nonce_size());
        randombytes_buf(nonce.data(), nonce.size());
        auto key = passphrase_key(passphrase, salt);
        j["sig_sk_enc"] = nlohmann::json{
            {"cipher", bytes_to_hex(suite.ae_encrypt(key, nonce, keys.secret_key))},
            {"nonce", bytes_to_hex(nonce)},
            {"salt", bytes_to_hex(salt)}};
    }
    write_json(dir_ / "keys.json", j);
}

SigKeypair Profile::load_keys(const std::string& passphrase) const {
    auto j = read_json(dir_ / "keys.json");
    SigKeypair keys;
    keys.public_key = *hex_to_bytes(j.at("sig_pk").get<std::string>());
    if (j.contains("sig_sk")) {
        keys.secret_key = *hex_to_bytes(j.at("sig_sk").get<std::string>());
        return keys;
    }
    if (passphrase.empty()) throw std::runtime_error("profile keys are passphrase-protected");
    const auto& enc = j.at("sig_sk_enc");
    auto salt = *hex_to_bytes(enc.at("salt").get<std::string>());
    auto nonce = *hex_to_bytes(enc.at("nonce").get<std::string>());
    auto cipher = *hex_to_bytes(enc.at("cipher").get<std::string>());
    auto key = passphrase_key(passphrase, salt);
    auto secret = default_suite().ae_decrypt(key, nonce, cipher);
    if (!secret) throw std::runtime_error("wrong passphrase");
    keys.secret_key = std::move(*secret);
    return keys;
}

KeyId Profile::address(const std::string& passphrase) const {
    auto j = read_json(dir_ / "keys.json");
    (void)passphrase;
    return key_id(*hex_to_bytes(j.at("sig_pk").get<std::string>()));
}

void Profile::save_inbox(const dmail::MailInbox& inbox) {
    std::filesystem::create_directories(dir_);
    auto j = inbox.to_json();
    j["box"]["follows"] = nlohmann::json::array();  // follows live in follows.json
    write_json(dir_ / "inbox.json", j);
    save_follows(inbox.box);
}

void Profile::save_inbox(const Mailbox& box) {
    std::filesystem::create_directories(dir_);
    auto j = box.to_json();
    j["follows"] = nlohmann::json::array();
    write_json(dir_ / "inbox.json", j);
    save_follows(box);
}

std::string Profile::inbox_kind() const {
    auto path = dir_ / "inbox.json";
    if (!std::filesystem::exists(path)) return "";
    auto j = read_json(path);
    if (j.contains("address")) return "dmail";
    return "dpush";
}

std::optional<dmail::MailInbox> Profile::load_mail_inbox() const {
    if (inbox_kind() != "dmail") return std::nullopt;
    auto inbox = dmail::MailInbox::from_json(read_json(dir_ / "inbox.json"));
    merge_follows(inbox.box);
    return inbox;
}

std::optional<Mailbox> Profile::load_plain_inbox() const {
    if (inbox_kind() != "dpush") return std::nullopt;
    auto box = Mailbox::from_json(read_json(dir_ / "inbox.json"));
    merge_follows(box);
    return box;
}

void Profile::save_follows(const Mailbox& box) {
    nlohmann::json j;
    auto follows = nlohmann::json::array();
    for (const auto& f : box.follows)
        follows.push_back(nlohmann::json{{"channel", f.channel_id.hex()},
                                         {"last_seen", f.last_seen_version}});
    j["follows"] = follows;
    auto path = dir_ / "follows.json";
    if (std::filesystem::exists(path)) {
        auto old = read_json(path);
        if (old.contains("own_channel")) j["own_channel"] = old["own_channel"];
    }
    write_json(path, j);
}

void Profile::merge_follows(Mailbox& box) const {
    auto path = dir_ / "follows.json";
    if (!std::filesystem::exists(path)) return;
    auto j = read_json(path);
    box.follows.clear();
    for (const auto& f : j.value("follows", nlohmann::json::array())) {
        auto id = KeyId::from_hex(f.at("channel").get<std::string>());
        if (!id) continue;
        box.follows.push_back(FollowEntry{*id, f.at("last_seen").get<std::uint64_t>()});
    }
}

std::optional<FollowChannel> Profile::load_own_channel() const {
    auto path = dir_ / "follows.json";
    if (!std::filesystem::exists(path)) return std::nullopt;
    auto j = read_json(path);
    if (!j.contains("own_channel") || j["own_channel"].is_null()) return std::nullopt;
    const auto& c = j["own_channel"];
    FollowChannel channel;
    channel.keys.public_key = *hex_to_bytes(c.at("pk").get<std::string>());
    channel.keys.secret_key = *hex_to_bytes(c.at("sk").get<std::string>());
    channel.version = c.at("version").get<std::uint64_t>();
    return channel;
}

void Profile::save_own_channel(const FollowChannel& channel) {
    std::filesystem::create_directories(dir_);
    auto path = dir_ / "follows.json";
    nlohmann::json j;
    if (std::filesystem::exists(path)) j = read_json(path);
    if (!j.contains("follows")) j["follows"] = nlohmann::json::array();
    j["own_channel"] = nlohmann::json{{"pk", bytes_to_hex(channel.keys.public_key)},
                                      {"sk", bytes_to_hex(channel.keys.secret_key)},
                                      {"version", channel.version}};
    write_json(path, j);
}

ProfileLock::ProfileLock(const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    auto path = dir / ".lock";
    fd_ = ::open(path.c_str(), O_CREAT | O_RDWR, 0600);
    if (fd_ < 0) throw std::runtime_error("cannot open profile lock file");
    if (::flock(fd_, LOCK_EX | LOCK_NB) != 0) {
        ::close(fd_);
        fd_ = -1;
        throw std::runtime_error("profile is locked by another invocation");
    }
}

ProfileLock::~ProfileLock() {
    if (fd_ >= 0) {
        ::flock(fd_, LOCK_UN);
        ::close(fd_);
    }
}

}  // namespace dpush
