#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace chainpki {

inline constexpr std::string_view kSchemeId = "ed25519";
inline constexpr std::size_t kSeedSize = 32;
inline constexpr std::size_t kPublicKeySize = 32;
inline constexpr std::size_t kSignatureSize = 64;

class CryptoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

std::string base64_encode(std::span<const std::uint8_t> data);
// Throws CryptoError on malformed input.
std::vector<std::uint8_t> base64_decode(std::string_view text);

/// SHA-256 digest, held as 64 lowercase hex characters.
struct Digest {
    std::string hex;

    bool operator==(const Digest&) const = default;
};

Digest hash_bytes(std::span<const std::uint8_t> data);
Digest hash_bytes(std::string_view data);

struct PublicKey {
    std::vector<std::uint8_t> raw;  // 32 bytes

    static PublicKey from_base64(std::string_view text);
    std::string to_base64() const;
    std::string fingerprint() const;

    bool operator==(const PublicKey&) const = default;
};

struct PrivateKey {
    std::vector<std::uint8_t> seed;  // 32 bytes

    bool operator==(const PrivateKey&) const = default;
};

struct KeyPair {
    PublicKey public_key;
    PrivateKey private_key;
    std::string key_fingerprint;
};

/// Derives a key pair from a 32-byte seed, or from secure randomness when
/// no seed is given. Identical seeds yield identical pairs.
KeyPair generate_keypair(std::optional<std::span<const std::uint8_t>> seed = std::nullopt);

struct Signature {
    std::string scheme_id{kSchemeId};
    std::vector<std::uint8_t> bytes;

    std::string to_base64() const;
    static Signature from_base64(std::string_view text);

    bool operator==(const Signature&) const = default;
};

Signature sign(const PrivateKey& key, std::span<const std::uint8_t> message);
Signature sign(const PrivateKey& key, std::string_view message);

/// Total: malformed or truncated signatures return false, never throw.
bool verify(const PublicKey& key, std::span<const std::uint8_t> message,
            const Signature& signature);
bool verify(const PublicKey& key, std::string_view message, const Signature& signature);

// Key files: one header line naming the scheme and role, then the base64
// payload. Private key files are created with owner-only permissions.
void write_public_key_file(const std::filesystem::path& path, const PublicKey& key);
void write_private_key_file(const std::filesystem::path& path, const PrivateKey& key);
PublicKey load_public_key_file(const std::filesystem::path& path);
PrivateKey load_private_key_file(const std::filesystem::path& path);

}  // namespace chainpki
