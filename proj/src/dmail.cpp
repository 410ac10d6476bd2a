#include "dpush/dmail.hpp"

namespace dpush::dmail {

Site MailSite::to_site() const {
    Site site = base;
    site.kind = "dmail/site";
    site.ext["enc"] = nlohmann::json{{"ka_pub", base64_encode(ka_public)}, {"scheme", scheme}};
    return site;
}

MailSite MailSite::from_site(const Site& site) {
    if (site.kind != "dmail/site") throw MalformedSite("kind is not dmail/site");
    if (!site.ext.contains("enc") || !site.ext["enc"].is_object())
        throw MalformedSite("missing enc extension");
    const auto& enc = site.ext["enc"];
    if (!enc.contains("scheme") || !enc["scheme"].is_string())
        throw MalformedSite("missing scheme name");
    if (!enc.contains("ka_pub") || !enc["ka_pub"].is_string())
        throw MalformedSite("missing ka_pub");
    MailSite out;
    out.base = site;
    out.scheme = enc["scheme"].get<std::string>();
    auto ka = base64_decode(enc["ka_pub"].get<std::string>());
    if (!ka) throw MalformedSite("ka_pub is not valid base64");
    out.ka_public = *ka;
    return out;
}

Bytes mail_signing_bytes(const MailMessage& m) {
    Bytes out;
    put_u16_be(out, static_cast<std::uint16_t>(m.sender_public_key.size()));
    out.insert(out.end(), m.sender_public_key.begin(), m.sender_public_key.end());
    out.insert(out.end(), m.destination.bytes.begin(), m.destination.bytes.end());
    put_u64_be(out, m.timestamp);
    put_u32_be(out, static_cast<std::uint32_t>(m.body.size()));
    out.insert(out.end(), m.body.begin(), m.body.end());
    return out;
}

Bytes encode_mail_message(const MailMessage& m) {
    Bytes out = mail_signing_bytes(m);
    put_u16_be(out, static_cast<std::uint16_t>(m.signature.size()));
    out.insert(out.end(), m.signature.begin(), m.signature.end());
    return out;
}

std::optional<MailMessage> decode_mail_message(BytesView raw) {
    ByteReader r(raw);
    MailMessage m;
    auto pk_len = r.take_u16_be();
    if (!pk_len) return std::nullopt;
    auto pk = r.take(*pk_len);
    if (!pk) return std::nullopt;
    m.sender_public_key.assign(pk->begin(), pk->end());
    auto dest = r.take(KeyId::size);
    if (!dest) return std::nullopt;
    m.destination = *KeyId::from_bytes(*dest);
    auto ts = r.take_u64_be();
    if (!ts) return std::nullopt;
    m.timestamp = *ts;
    auto body_len = r.take_u32_be();
    if (!body_len) return std::nullopt;
    auto body = r.take(*body_len);
    if (!body) return std::nullopt;
    m.body.assign(body->begin(), body->end());
    auto sig_len = r.take_u16_be();
    if (!sig_len) return std::nullopt;
    auto sig = r.take(*sig_len);
    if (!sig || !r.done()) return std::nullopt;
    m.signature.assign(sig->begin(), sig->end());
    return m;
}

Bytes encode_wrapper(const MailWrapper& w) {
    Bytes out;
    put_u16_be(out, w.scheme_id);
    put_u16_be(out, static_cast<std::uint16_t>(w.sender_ka_public.size()));
    out.insert(out.end(), w.sender_ka_public.begin(), w.sender_ka_public.end());
    out.insert(out.end(), w.nonce.begin(), w.nonce.end());
    out.insert(out.end(), w.ciphertext.begin(), w.ciphertext.end());
    return out;
}

std::optional<MailWrapper> decode_wrapper(BytesView raw) {
    ByteReader r(raw);
    MailWrapper w;
    auto scheme = r.take_u16_be();
    if (!scheme) return std::nullopt;
    w.scheme_id = *scheme;
    auto ka_len = r.take_u16_be();
    if (!ka_len) return std::nullopt;
    auto ka = r.take(*ka_len);
    if (!ka) return std::nullopt;
    w.sender_ka_public.assign(ka->begin(), ka->end());
    auto nonce = r.take(12);
    if (!nonce) return std::nullopt;
    w.nonce.assign(nonce->begin(), nonce->end());
    w.ciphertext.assign(raw.begin() + (raw.size() - r.remaining()), raw.end());
    return w;
}

nlohmann::json MailInbox::to_json() const {
    nlohmann::json j;
    j["address"] = address.hex();
    j["box"] = box.to_json();
    j["scheme"] = scheme;
    j["ka_pub"] = bytes_to_hex(ka_current.public_key);
    j["ka_sk"] = bytes_to_hex(ka_current.secret_key);
    auto retired = nlohmann::json::array();
    for (const auto& kp : ka_retired)
        retired.push_back(nlohmann::json{{"ka_pub", bytes_to_hex(kp.public_key)},
                                         {"ka_sk", bytes_to_hex(kp.secret_key)}});
    j["ka_retired"] = retired;
    return j;
}

MailInbox MailInbox::from_json(const nlohmann::json& j) {
    MailInbox inbox;
    auto addr = KeyId::from_hex(j.at("address").get<std::string>());
    if (!addr) throw std::invalid_argument("bad address hex");
    inbox.address = *addr;
    inbox.box = Mailbox::from_json(j.at("box"));
    inbox.scheme = j.at("scheme").get<std::string>();
    inbox.ka_current.public_key = *hex_to_bytes(j.at("ka_pub").get<std::string>());
    inbox.ka_current.secret_key = *hex_to_bytes(j.at("ka_sk").get<std::string>());
    for (const auto& kp : j.at("ka_retired")) {
        KaKeypair pair;
        pair.public_key = *hex_to_bytes(kp.at("ka_pub").get<std::string>());
        pair.secret_key = *hex_to_bytes(kp.at("ka_sk").get<std::string>());
        inbox.ka_retired.push_back(std::move(pair));
    }
    return inbox;
}

namespace {

void publish_mail_site(ProtocolNode& via, const SigKeypair& keys, const MailInbox& inbox) {
    MailSite site;
    site.base = make_site(inbox.box);
    site.scheme = inbox.scheme;
    site.ka_public = inbox.ka_current.public_key;
    auto record = make_updateable_record(via.suite(), keys, inbox.box.site_version,
                                         to_bytes(site.to_site().canonical_json()));
    if (!via.store_updateable(record).ok()) throw StoreFailed();
}

}  // namespace

MailInbox create_mail_address(ProtocolNode& via, const SigKeypair& keys, Rng& rng,
                              Difficulty difficulty) {
    MailInbox inbox;
    inbox.address = key_id(keys.public_key);
    inbox.box.kind = "dmail/site";
    inbox.box.site_version = 1;
    inbox.box.active.push_back(TargetCursor{SiteTarget{rng.random_key(), difficulty}, ScanCursor{}});
    inbox.scheme = std::string(via.suite().ae_scheme());
    inbox.ka_current = via.suite().ka_keypair_from_seed(rng.seed_bytes());
    publish_mail_site(via, keys, inbox);
    return inbox;
}

MailSite fetch_mail_site(ProtocolNode& via, const KeyId& address) {
    return MailSite::from_site(fetch_site(via, address));
}

SendReceipt compose_and_send(ProtocolNode& via, const SigKeypair& sender_keys, const KeyId& to,
                             BytesView body, std::uint64_t timestamp, Rng& rng,
                             std::optional<std::uint64_t> max_attempts) {
    if (body.empty()) throw std::invalid_argument("compose_and_send: empty body");
    const CryptoSuite& suite = via.suite();

    MailSite site = fetch_mail_site(via, to);
    if (site.scheme != suite.ae_scheme()) throw UnsupportedScheme(site.scheme);
    if (site.ka_public.size() != suite.ka_public_key_size())
        throw MalformedSite("ka_pub has the wrong length");

    MailMessage message;
    message.sender_public_key = sender_keys.public_key;
    message.destination = to;
    message.timestamp = timestamp;
    message.body.assign(body.begin(), body.end());
    message.signature = suite.sign(sender_keys.secret_key, mail_signing_bytes(message));

    KaKeypair ephemeral = suite.ka_keypair_from_seed(rng.seed_bytes());
    auto shared = suite.ka_shared(ephemeral.secret_key, site.ka_public);
    if (!shared) throw ProtocolError("key agreement failed against the advertised ka_pub");
    auto key = derive_symmetric_key(*shared);

    MailWrapper wrapper;
    wrapper.scheme_id = kSchemeAes256Gcm;
    wrapper.sender_ka_public = ephemeral.public_key;
    wrapper.nonce.resize(suite.ae_nonce_size());
    rng.fill(wrapper.nonce);
    wrapper.ciphertext = suite.ae_encrypt(key, wrapper.nonce, encode_mail_message(message));

    // Wrapper in hand, the rest is a plain Dpush send minus the second
    // site fetch: mine toward the advertised target and replicate.
    const SiteTarget& target = site.base.targets.front();
    auto mined = mine(target.target_key, target.difficulty, encode_wrapper(wrapper),
                      rng.next_u64(), max_attempts, via.store().policy().max_block_size);
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

const char* to_string(OpenStatus s) {
    switch (s) {
        case OpenStatus::ok: return "ok";
        case OpenStatus::undecryptable: return "undecryptable";
        case OpenStatus::bad_signature: return "bad-signature";
        case OpenStatus::wrong_destination: return "wrong-destination";
    }
    return "unknown";
}

OpenResult open_wrapper(const CryptoSuite& suite, const MailWrapper& wrapper,
                        const MailInbox& inbox) {
    OpenResult result;
    if (wrapper.scheme_id != kSchemeAes256Gcm) return result;  // undecryptable

    std::optional<Bytes> plaintext;
    auto try_key = [&](const KaKeypair& kp) {
        if (plaintext) return;
        auto shared = suite.ka_shared(kp.secret_key, wrapper.sender_ka_public);
        if (!shared) return;
        plaintext = suite.ae_decrypt(derive_symmetric_key(*shared), wrapper.nonce,
                                     wrapper.ciphertext);
    };
    try_key(inbox.ka_current);
    for (const auto& kp : inbox.ka_retired) try_key(kp);
    if (!plaintext) return result;  // undecryptable

    auto message = decode_mail_message(*plaintext);
    if (!message) return result;  // garbage after authenticated decrypt: treat as undecryptable

    if (!suite.sig_verify(message->sender_public_key, mail_signing_bytes(*message),
                          message->signature)) {
        result.status = OpenStatus::bad_signature;
        return result;
    }
    if (message->destination != inbox.address) {
        result.status = OpenStatus::wrong_destination;
        return result;
    }
    result.status = OpenStatus::ok;
    result.sender_address = message->sender_address();
    result.message = std::move(*message);
    return result;
}

MailScan scan_mail(ProtocolNode& via, MailInbox& inbox, std::size_t limit_per_target) {
    MailScan out;
    InboxScan raw = scan_inbox(via, inbox.box, limit_per_target);
    out.target_errors = std::move(raw.target_errors);
    for (const auto& msg : raw.messages) {
        auto wrapper = decode_wrapper(msg.payload);
        if (!wrapper) {
            out.rejected.emplace_back(msg.block_id, OpenStatus::undecryptable);
            continue;
        }
        auto opened = open_wrapper(via.suite(), *wrapper, inbox);
        if (opened.status != OpenStatus::ok) {
            out.rejected.emplace_back(msg.block_id, opened.status);
            continue;
        }
        out.accepted.push_back(ReceivedMail{std::move(*opened.message), opened.sender_address,
                                            msg.block_id, msg.from_retired_target});
    }
    return out;
}

void rotate_mail_target(ProtocolNode& via, MailInbox& inbox, const SigKeypair& keys, Rng& rng) {
    MailInbox next = inbox;
    next.box.site_version += 1;
    next.box.retired.insert(next.box.retired.end(), next.box.active.begin(),
                            next.box.active.end());
    next.box.active.clear();
    for (const auto& tc : inbox.box.active)
        next.box.active.push_back(
            TargetCursor{SiteTarget{rng.random_key(), tc.target.difficulty}, ScanCursor{}});
    next.ka_retired.insert(next.ka_retired.begin(), next.ka_current);
    next.ka_current = via.suite().ka_keypair_from_seed(rng.seed_bytes());
    publish_mail_site(via, keys, next);  // throws on failure, leaving inbox unrotated
    inbox = std::move(next);
}

}  // namespace dpush::dmail
