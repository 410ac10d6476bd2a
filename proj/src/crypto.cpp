#include "dpush/crypto.hpp"

#include <sodium.h>

#include <openssl/evp.h>

#include <mutex>
#include <stdexcept>

namespace dpush {

namespace {

void ensure_sodium() {
    static std::once_flag flag;
    std::call_once(flag, [] {
        if (sodium_init() < 0) throw std::runtime_error("libsodium initialization failed");
    });
}

constexpr std::size_t kGcmNonceSize = 12;
constexpr std::size_t kGcmTagSize = 16;

struct EvpCtx {
    EVP_CIPHER_CTX* ctx = EVP_CIPHER_CTX_new();
    ~EvpCtx() { EVP_CIPHER_CTX_free(ctx); }
};

class StandardSuite final : public CryptoSuite {
public:
    StandardSuite() { ensure_sodium(); }

    std::string_view sig_scheme() const override { return "ed25519"; }
    std::size_t sig_public_key_size() const override { return crypto_sign_PUBLICKEYBYTES; }

    SigKeypair sig_keypair() const override {
        SigKeypair kp;
        kp.public_key.resize(crypto_sign_PUBLICKEYBYTES);
        kp.secret_key.resize(crypto_sign_SECRETKEYBYTES);
        crypto_sign_keypair(kp.public_key.data(), kp.secret_key.data());
        return kp;
    }

    SigKeypair sig_keypair_from_seed(const std::array<std::uint8_t, 32>& seed) const override {
        SigKeypair kp;
        kp.public_key.resize(crypto_sign_PUBLICKEYBYTES);
        kp.secret_key.resize(crypto_sign_SECRETKEYBYTES);
        crypto_sign_seed_keypair(kp.public_key.data(), kp.secret_key.data(), seed.data());
        return kp;
    }

    Bytes sign(BytesView secret_key, BytesView message) const override {
        if (secret_key.size() != crypto_sign_SECRETKEYBYTES)
            throw std::invalid_argument("ed25519: bad secret key length");
        Bytes sig(crypto_sign_BYTES);
        crypto_sign_detached(sig.data(), nullptr, message.data(), message.size(),
                             secret_key.data());
        return sig;
    }

    bool sig_verify(BytesView public_key, BytesView message, BytesView signature) const override {
        if (public_key.size() != crypto_sign_PUBLICKEYBYTES) return false;
        if (signature.size() != crypto_sign_BYTES) return false;
        return crypto_sign_verify_detached(signature.data(), message.data(), message.size(),
                                           public_key.data()) == 0;
    }

    std::string_view ka_scheme() const override { return "x25519"; }
    std::size_t ka_public_key_size() const override { return crypto_scalarmult_BYTES; }

    KaKeypair ka_keypair() const override {
        std::array<std::uint8_t, 32> seed;
        randombytes_buf(seed.data(), seed.size());
        return ka_keypair_from_seed(seed);
    }

    KaKeypair ka_keypair_from_seed(const std::array<std::uint8_t, 32>& seed) const override {
        KaKeypair kp;
        kp.secret_key.assign(seed.begin(), seed.end());
        kp.public_key.resize(crypto_scalarmult_BYTES);
        crypto_scalarmult_base(kp.public_key.data(), kp.secret_key.data());
        return kp;
    }

    std::optional<Bytes> ka_shared(BytesView secret_key, BytesView public_key) const override {
        if (secret_key.size() != crypto_scalarmult_SCALARBYTES) return std::nullopt;
        if (public_key.size() != crypto_scalarmult_BYTES) return std::nullopt;
        Bytes shared(crypto_scalarmult_BYTES);
        if (crypto_scalarmult(shared.data(), secret_key.data(), public_key.data()) != 0)
            return std::nullopt;
        return shared;
    }

    std::string_view ae_scheme() const override { return "aes-256-gcm"; }
    std::size_t ae_nonce_size() const override { return kGcmNonceSize; }

    Bytes ae_encrypt(const std::array<std::uint8_t, 32>& key, BytesView nonce,
                     BytesView plaintext) const override {
        if (nonce.size() != kGcmNonceSize) throw std::invalid_argument("aes-256-gcm: bad nonce length");
        EvpCtx c;
        if (!c.ctx || EVP_EncryptInit_ex(c.ctx, EVP_aes_256_gcm(), nullptr, nullptr, nullptr) != 1 ||
            EVP_CIPHER_CTX_ctrl(c.ctx, EVP_CTRL_GCM_SET_IVLEN, kGcmNonceSize, nullptr) != 1 ||
            EVP_EncryptInit_ex(c.ctx, nullptr, nullptr, key.data(), nonce.data()) != 1)
            throw std::runtime_error("aes-256-gcm: encrypt init failed");
        Bytes out(plaintext.size() + kGcmTagSize);
        int len = 0;
        if (EVP_EncryptUpdate(c.ctx, out.data(), &len, plaintext.data(),
                              static_cast<int>(plaintext.size())) != 1)
            throw std::runtime_error("aes-256-gcm: encrypt failed");
        int fin = 0;
        if (EVP_EncryptFinal_ex(c.ctx, out.data() + len, &fin) != 1)
            throw std::runtime_error("aes-256-gcm: encrypt finalize failed");
        if (EVP_CIPHER_CTX_ctrl(c.ctx, EVP_CTRL_GCM_GET_TAG, kGcmTagSize,
                                out.data() + len + fin) != 1)
            throw std::runtime_error("aes-256-gcm: tag extraction failed");
        out.resize(static_cast<std::size_t>(len + fin) + kGcmTagSize);
        return out;
    }

    std::optional<Bytes> ae_decrypt(const std::array<std::uint8_t, 32>& key, BytesView nonce,
                                    BytesView ciphertext) const override {
        if (nonce.size() != kGcmNonceSize) return std::nullopt;
        if (ciphertext.size() < kGcmTagSize) return std::nullopt;
        const std::size_t body = ciphertext.size() - kGcmTagSize;
        EvpCtx c;
        if (!c.ctx || EVP_DecryptInit_ex(c.ctx, EVP_aes_256_gcm(), nullptr, nullptr, nullptr) != 1 ||
            EVP_CIPHER_CTX_ctrl(c.ctx, EVP_CTRL_GCM_SET_IVLEN, kGcmNonceSize, nullptr) != 1 ||
            EVP_DecryptInit_ex(c.ctx, nullptr, nullptr, key.data(), nonce.data()) != 1)
            return std::nullopt;
        Bytes out(body);
        int len = 0;
        if (body > 0 &&
            EVP_DecryptUpdate(c.ctx, out.data(), &len, ciphertext.data(), static_cast<int>(body)) != 1)
            return std::nullopt;
        // Tag check happens in final; a mismatch is an authentication failure.
        Bytes tag(ciphertext.end() - kGcmTagSize, ciphertext.end());
        if (EVP_CIPHER_CTX_ctrl(c.ctx, EVP_CTRL_GCM_SET_TAG, kGcmTagSize, tag.data()) != 1)
            return std::nullopt;
        int fin = 0;
        if (EVP_DecryptFinal_ex(c.ctx, out.data() + len, &fin) != 1) return std::nullopt;
        out.resize(static_cast<std::size_t>(len + fin));
        return out;
    }
};

}  // namespace

KeyId sha512(BytesView data) {
    ensure_sodium();
    KeyId out;
    crypto_hash_sha512(out.bytes.data(), data.data(), data.size());
    return out;
}

KeyId key_id(BytesView public_key) {
    return sha512(public_key);
}

std::array<std::uint8_t, 32> derive_symmetric_key(BytesView shared_secret) {
    if (shared_secret.empty()) throw std::invalid_argument("derive_symmetric_key: empty secret");
    KeyId digest = sha512(shared_secret);
    std::array<std::uint8_t, 32> key;
    std::copy(digest.bytes.begin(), digest.bytes.begin() + 32, key.begin());
    return key;
}

const CryptoSuite& default_suite() {
    static const StandardSuite suite;
    return suite;
}

std::string base64_encode(BytesView data) {
    ensure_sodium();
    std::string out(sodium_base64_encoded_len(data.size(), sodium_base64_VARIANT_ORIGINAL), '\0');
    sodium_bin2base64(out.data(), out.size(), data.data(), data.size(),
                      sodium_base64_VARIANT_ORIGINAL);
    out.resize(out.find('\0') == std::string::npos ? out.size() : out.find('\0'));
    return out;
}

std::optional<Bytes> base64_decode(std::string_view text) {
    ensure_sodium();
    Bytes out(text.size());
    std::size_t written = 0;
    if (sodium_base642bin(out.data(), out.size(), text.data(), text.size(), nullptr, &written,
                          nullptr, sodium_base64_VARIANT_ORIGINAL) != 0)
        return std::nullopt;
    out.resize(written);
    return out;
}

}  // namespace dpush
