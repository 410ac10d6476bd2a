#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>

#include "dpush/bytes.hpp"
#include "dpush/key_id.hpp"

namespace dpush {

// SHA-512. The whole key space is defined by this function.
KeyId sha512(BytesView data);

// Address / node-ID derivation: the hash of a public key's canonical byte
// encoding. The DHT never looks inside the encoding itself.
KeyId key_id(BytesView public_key);

// 256-bit symmetric key from a key-agreement shared secret: the first 32
// bytes of sha512(secret). Throws std::invalid_argument on empty input.
std::array<std::uint8_t, 32> derive_symmetric_key(BytesView shared_secret);

struct SigKeypair {
    Bytes public_key;
    Bytes secret_key;  // never serialized by any protocol operation
};

struct KaKeypair {
    Bytes public_key;
    Bytes secret_key;
};

// The pluggable primitive bundle. One concrete suite ships (Ed25519 +
// X25519 + AES-256-GCM over the fixed SHA-512 key space); everything above
// the suite is written against this interface so the asymmetric schemes can
// be swapped without touching the DHT or message layers.
class CryptoSuite {
public:
    virtual ~CryptoSuite() = default;

    virtual KeyId hash(BytesView data) const { return sha512(data); }

    virtual std::string_view sig_scheme() const = 0;
    virtual std::size_t sig_public_key_size() const = 0;
    virtual SigKeypair sig_keypair() const = 0;
    virtual SigKeypair sig_keypair_from_seed(const std::array<std::uint8_t, 32>& seed) const = 0;
    virtual Bytes sign(BytesView secret_key, BytesView message) const = 0;
    virtual bool sig_verify(BytesView public_key, BytesView message, BytesView signature) const = 0;

    virtual std::string_view ka_scheme() const = 0;
    virtual std::size_t ka_public_key_size() const = 0;
    virtual KaKeypair ka_keypair() const = 0;
    virtual KaKeypair ka_keypair_from_seed(const std::array<std::uint8_t, 32>& seed) const = 0;
    virtual std::optional<Bytes> ka_shared(BytesView secret_key, BytesView public_key) const = 0;

    virtual std::string_view ae_scheme() const = 0;  // "aes-256-gcm"
    virtual std::size_t ae_nonce_size() const = 0;
    virtual Bytes ae_encrypt(const std::array<std::uint8_t, 32>& key, BytesView nonce,
                             BytesView plaintext) const = 0;
    virtual std::optional<Bytes> ae_decrypt(const std::array<std::uint8_t, 32>& key, BytesView nonce,
                                            BytesView ciphertext) const = 0;
};

const CryptoSuite& default_suite();

std::string base64_encode(BytesView data);
std::optional<Bytes> base64_decode(std::string_view text);

}  // namespace dpush
