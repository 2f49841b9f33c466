#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "chainpki/crypto.hpp"
#include "chainpki/record.hpp"

namespace chainpki {

inline const std::string kZeroHash(64, '0');

struct BlockMeta {
    std::uint64_t index = 0;
    std::string prev_hash;
    std::int64_t timestamp = 0;

    bool operator==(const BlockMeta&) const = default;
};

struct Block {
    BlockMeta meta;
    std::optional<DeviceRecord> data;     // absent for genesis
    std::optional<Signature> signature;   // absent for genesis
    std::string hash;

    bool is_genesis() const { return !data.has_value(); }

    /// Digest over the canonical encoding of (meta, data, signature).
    std::string compute_hash() const;

    nlohmann::json to_json() const;
    static Block from_json(const nlohmann::json& value);

    bool operator==(const Block&) const = default;
};

enum class ValidationCause { None, Genesis, Linkage, Timestamp, Hash, Signature, Structure };

std::string_view to_string(ValidationCause cause);

struct ValidationResult {
    bool ok = true;
    ValidationCause cause = ValidationCause::None;
    std::uint64_t block_index = 0;
    std::string message;

    static ValidationResult pass() { return {}; }
    static ValidationResult fail(ValidationCause cause, std::uint64_t index, std::string message) {
        return {false, cause, index, std::move(message)};
    }
    explicit operator bool() const { return ok; }
};

class AppendError : public std::runtime_error {
public:
    AppendError(ValidationCause cause, std::string message)
        : std::runtime_error(std::move(message)), cause_(cause) {}
    ValidationCause cause() const { return cause_; }

private:
    ValidationCause cause_;
};

class Blockchain {
public:
    static Blockchain new_chain(std::int64_t genesis_timestamp);

    std::size_t size() const { return blocks_.size(); }
    const std::vector<Block>& blocks() const { return blocks_; }
    const Block& tip() const { return blocks_.back(); }
    const std::string& genesis_hash() const { return blocks_.front().hash; }

    /// Builds the successor block. Does not check the signature; that is
    /// append/verify territory.
    Block make_block(const DeviceRecord& record, const Signature& signature,
                     std::int64_t timestamp) const;

    /// Structural validation plus the first-claim rule on node_id.
    /// Throws AppendError naming the cause.
    void append(const Block& block);

    const Block* find_device(std::string_view node_id) const;

    nlohmann::json to_json() const;
    static Blockchain from_json(const nlohmann::json& value);
    void save(const std::filesystem::path& path) const;  // atomic: temp + rename
    static Blockchain load(const std::filesystem::path& path);

private:
    Blockchain() = default;

    std::vector<Block> blocks_;
    std::unordered_map<std::string, std::size_t> by_node_id_;
};

/// Linkage, timestamp and hash checks against the claimed predecessor;
/// with owner_pk also the signature over canonical_bytes(data).
ValidationResult validate_block(const Block& block, const Block& prev,
                                const PublicKey* owner_pk = nullptr);

/// Structural validation of the whole chain (signature checks need the
/// identity provider and live in the verifier).
ValidationResult validate_chain(const Blockchain& chain);

/// Longest-valid-chain rule: adopt remote iff strictly longer, same
/// genesis, and structurally valid. Ties keep local.
const Blockchain& choose_chain(const Blockchain& local, const Blockchain& remote);

// Value-semantics wrappers.
Blockchain append_block(Blockchain chain, const Block& block);

}  // namespace chainpki
