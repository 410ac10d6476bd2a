#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dpush/dpush.hpp"

namespace dpush::dmail {

inline constexpr std::uint16_t kSchemeAes256Gcm = 1;

// Site extension carried under ext["enc"]: the symmetric scheme name plus
// the receiver's current ephemeral key-agreement public value.
struct MailSite {
    Site base;
    std::string scheme = "aes-256-gcm";
    Bytes ka_public;

    Site to_site() const;
    static MailSite from_site(const Site& site);  // throws MalformedSite
};

// Plaintext message. The signature covers the canonical serialization of
// (sender public key, destination, timestamp, body); the sender's address
// is always recomputed from the embedded public key, never trusted.
struct MailMessage {
    Bytes sender_public_key;
    KeyId destination;
    std::uint64_t timestamp = 0;  // sender-asserted seconds
    Bytes body;
    Bytes signature;

    KeyId sender_address() const { return key_id(sender_public_key); }
    bool operator==(const MailMessage&) const = default;
};

Bytes mail_signing_bytes(const MailMessage& m);
Bytes encode_mail_message(const MailMessage& m);
std::optional<MailMessage> decode_mail_message(BytesView raw);

// The encrypted envelope stored as a TargetedBlock payload:
// scheme(2, big-endian) || ka_len(2) || ka_public || nonce(12) || ciphertext.
struct MailWrapper {
    std::uint16_t scheme_id = kSchemeAes256Gcm;
    Bytes sender_ka_public;
    Bytes nonce;
    Bytes ciphertext;

    bool operator==(const MailWrapper&) const = default;
};

Bytes encode_wrapper(const MailWrapper& w);
std::optional<MailWrapper> decode_wrapper(BytesView raw);

// Receiver state: the plain mailbox plus the key-agreement secrets needed
// to open wrappers (current first, then retired, so in-flight mail keyed to
// a rotated-out value stays readable).
struct MailInbox {
    KeyId address;
    Mailbox box;
    std::string scheme = "aes-256-gcm";
    KaKeypair ka_current;
    std::vector<KaKeypair> ka_retired;

    nlohmann::json to_json() const;
    static MailInbox from_json(const nlohmann::json& j);
};

MailInbox create_mail_address(ProtocolNode& via, const SigKeypair& keys, Rng& rng,
                              Difficulty difficulty = Difficulty(16));

MailSite fetch_mail_site(ProtocolNode& via, const KeyId& address);

// Sign, agree, encrypt, wrap, mine, replicate. The scheme check happens
// before any mining.
SendReceipt compose_and_send(ProtocolNode& via, const SigKeypair& sender_keys, const KeyId& to,
                             BytesView body, std::uint64_t timestamp, Rng& rng,
                             std::optional<std::uint64_t> max_attempts = std::nullopt);

enum class OpenStatus { ok, undecryptable, bad_signature, wrong_destination };
const char* to_string(OpenStatus s);

struct OpenResult {
    OpenStatus status = OpenStatus::undecryptable;
    std::optional<MailMessage> message;
    KeyId sender_address;  // valid when status == ok
};

OpenResult open_wrapper(const CryptoSuite& suite, const MailWrapper& wrapper,
                        const MailInbox& inbox);

struct ReceivedMail {
    MailMessage message;
    KeyId sender_address;
    KeyId block_id;
    bool from_retired_target = false;
};

struct MailScan {
    std::vector<ReceivedMail> accepted;
    std::vector<std::pair<KeyId, OpenStatus>> rejected;  // block_id -> reason
    std::vector<std::string> target_errors;
};

// scan_inbox + decode + open over every new block.
MailScan scan_mail(ProtocolNode& via, MailInbox& inbox, std::size_t limit_per_target = 16);

// Target rotation with a fresh key-agreement pair; the old one joins the
// retired list. Address unchanged.
void rotate_mail_target(ProtocolNode& via, MailInbox& inbox, const SigKeypair& keys, Rng& rng);

}  // namespace dpush::dmail
