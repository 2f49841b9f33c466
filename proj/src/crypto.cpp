#include "chainpki/crypto.hpp"

#include <cstdio>
#include <fstream>
#include <memory>
#include <sstream>

#include <openssl/evp.h>
#include <openssl/rand.h>
#include <openssl/sha.h>

#include <sys/stat.h>

namespace chainpki {

namespace {

using EvpPkeyPtr = std::unique_ptr<EVP_PKEY, decltype(&EVP_PKEY_free)>;
using EvpMdCtxPtr = std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)>;

EvpPkeyPtr private_key_handle(const PrivateKey& key) {
    if (key.seed.size() != kSeedSize) {
        throw CryptoError("corrupt private key material: expected 32-byte seed");
    }
    EVP_PKEY* pkey = EVP_PKEY_new_raw_private_key(EVP_PKEY_ED25519, nullptr,
                                                  key.seed.data(), key.seed.size());
    if (pkey == nullptr) {
        throw CryptoError("failed to load ed25519 private key");
    }
    return {pkey, EVP_PKEY_free};
}

std::string hex_lower(std::span<const std::uint8_t> bytes) {
    static constexpr char digits[] = "0123456789abcdef";
    std::string out;
    out.reserve(bytes.size() * 2);
    for (std::uint8_t b : bytes) {
        out.push_back(digits[b >> 4]);
        out.push_back(digits[b & 0xf]);
    }
    return out;
}

}  // namespace

std::string base64_encode(std::span<const std::uint8_t> data) {
    std::string out;
    out.resize(4 * ((data.size() + 2) / 3));
    int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()),
                            data.data(), static_cast<int>(data.size()));
    out.resize(static_cast<std::size_t>(n));
    return out;
}

std::vector<std::uint8_t> base64_decode(std::string_view text) {
    if (text.size() % 4 != 0) {
        throw CryptoError("base64: length not a multiple of 4");
    }
    std::vector<std::uint8_t> out(3 * (text.size() / 4));
    int n = EVP_DecodeBlock(out.data(),
                            reinterpret_cast<const unsigned char*>(text.data()),
                            static_cast<int>(text.size()));
    if (n < 0) {
        throw CryptoError("base64: invalid input");
    }
    // EVP_DecodeBlock pads with zero bytes for trailing '='.
    std::size_t pad = 0;
    if (!text.empty() && text.back() == '=') {
        pad = text[text.size() - 2] == '=' ? 2 : 1;
    }
    out.resize(static_cast<std::size_t>(n) - pad);
    return out;
}

Digest hash_bytes(std::span<const std::uint8_t> data) {
    std::uint8_t md[SHA256_DIGEST_LENGTH];
    SHA256(data.data(), data.size(), md);
    return Digest{hex_lower(md)};
}

Digest hash_bytes(std::string_view data) {
    return hash_bytes(std::span<const std::uint8_t>(
        reinterpret_cast<const std::uint8_t*>(data.data()), data.size()));
}

PublicKey PublicKey::from_base64(std::string_view text) {
    auto raw = base64_decode(text);
    if (raw.size() != kPublicKeySize) {
        throw CryptoError("public key: expected 32 raw bytes");
    }
    return PublicKey{std::move(raw)};
}

std::string PublicKey::to_base64() const { return base64_encode(raw); }

std::string PublicKey::fingerprint() const { return hash_bytes(raw).hex; }

KeyPair generate_keypair(std::optional<std::span<const std::uint8_t>> seed) {
    std::vector<std::uint8_t> seed_bytes;
    if (seed.has_value()) {
        if (seed->size() != kSeedSize) {
            throw CryptoError("seed must be exactly 32 bytes");
        }
        seed_bytes.assign(seed->begin(), seed->end());
    } else {
        seed_bytes.resize(kSeedSize);
        if (RAND_bytes(seed_bytes.data(), static_cast<int>(seed_bytes.size())) != 1) {
            throw CryptoError("secure randomness source unavailable");
        }
    }

    PrivateKey private_key{std::move(seed_bytes)};
    auto pkey = private_key_handle(private_key);

    std::size_t pk_len = kPublicKeySize;
    std::vector<std::uint8_t> pk_raw(pk_len);
    if (EVP_PKEY_get_raw_public_key(pkey.get(), pk_raw.data(), &pk_len) != 1 ||
        pk_len != kPublicKeySize) {
        throw CryptoError("failed to derive ed25519 public key");
    }

    PublicKey public_key{std::move(pk_raw)};
    std::string fingerprint = public_key.fingerprint();
    return KeyPair{std::move(public_key), std::move(private_key), std::move(fingerprint)};
}

std::string Signature::to_base64() const { return base64_encode(bytes); }

Signature Signature::from_base64(std::string_view text) {
    return Signature{std::string(kSchemeId), base64_decode(text)};
}

Signature sign(const PrivateKey& key, std::span<const std::uint8_t> message) {
    auto pkey = private_key_handle(key);
    EvpMdCtxPtr ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
    if (!ctx || EVP_DigestSignInit(ctx.get(), nullptr, nullptr, nullptr, pkey.get()) != 1) {
        throw CryptoError("sign: init failed");
    }
    std::size_t sig_len = kSignatureSize;
    std::vector<std::uint8_t> sig(sig_len);
    if (EVP_DigestSign(ctx.get(), sig.data(), &sig_len, message.data(), message.size()) != 1) {
        throw CryptoError("sign: signing failed");
    }
    sig.resize(sig_len);
    return Signature{std::string(kSchemeId), std::move(sig)};
}

Signature sign(const PrivateKey& key, std::string_view message) {
    return sign(key, std::span<const std::uint8_t>(
                         reinterpret_cast<const std::uint8_t*>(message.data()), message.size()));
}

bool verify(const PublicKey& key, std::span<const std::uint8_t> message,
            const Signature& signature) {
    if (key.raw.size() != kPublicKeySize) return false;
    if (signature.scheme_id != kSchemeId) return false;
    if (signature.bytes.size() != kSignatureSize) return false;

    EVP_PKEY* raw = EVP_PKEY_new_raw_public_key(EVP_PKEY_ED25519, nullptr,
                                                key.raw.data(), key.raw.size());
    if (raw == nullptr) return false;
    EvpPkeyPtr pkey(raw, EVP_PKEY_free);

    EvpMdCtxPtr ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
    if (!ctx || EVP_DigestVerifyInit(ctx.get(), nullptr, nullptr, nullptr, pkey.get()) != 1) {
        return false;
    }
    return EVP_DigestVerify(ctx.get(), signature.bytes.data(), signature.bytes.size(),
                            message.data(), message.size()) == 1;
}

bool verify(const PublicKey& key, std::string_view message, const Signature& signature) {
    return verify(key,
                  std::span<const std::uint8_t>(
                      reinterpret_cast<const std::uint8_t*>(message.data()), message.size()),
                  signature);
}

namespace {

void write_key_file(const std::filesystem::path& path, std::string_view role,
                    std::string_view payload, bool owner_only) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) {
        throw CryptoError("cannot write key file: " + path.string());
    }
    out << kSchemeId << ' ' << role << '\n' << payload << '\n';
    out.close();
    if (!out) {
        throw CryptoError("short write on key file: " + path.string());
    }
    if (owner_only) {
        ::chmod(path.c_str(), S_IRUSR | S_IWUSR);
    }
}

std::string read_key_payload(const std::filesystem::path& path, std::string_view role) {
    std::ifstream in(path);
    if (!in) {
        throw CryptoError("cannot read key file: " + path.string());
    }
    std::string header;
    std::string payload;
    std::getline(in, header);
    std::getline(in, payload);
    std::string expected = std::string(kSchemeId) + ' ' + std::string(role);
    if (header != expected) {
        throw CryptoError("key file " + path.string() + ": bad header, expected \"" +
                          expected + "\"");
    }
    return payload;
}

}  // namespace

void write_public_key_file(const std::filesystem::path& path, const PublicKey& key) {
    write_key_file(path, "public", key.to_base64(), false);
}

void write_private_key_file(const std::filesystem::path& path, const PrivateKey& key) {
    write_key_file(path, "private", base64_encode(key.seed), true);
}

PublicKey load_public_key_file(const std::filesystem::path& path) {
    return PublicKey::from_base64(read_key_payload(path, "public"));
}

PrivateKey load_private_key_file(const std::filesystem::path& path) {
    auto seed = base64_decode(read_key_payload(path, "private"));
    if (seed.size() != kSeedSize) {
        throw CryptoError("private key file " + path.string() + ": bad seed length");
    }
    return PrivateKey{std::move(seed)};
}

}  // namespace chainpki
