#include "chainpki/ledger.hpp"

#include <cstdio>
#include <fstream>

namespace chainpki {

std::string_view to_string(ValidationCause cause) {
    switch (cause) {
        case ValidationCause::None: return "none";
        case ValidationCause::Genesis: return "genesis";
        case ValidationCause::Linkage: return "linkage";
        case ValidationCause::Timestamp: return "timestamp";
        case ValidationCause::Hash: return "hash";
        case ValidationCause::Signature: return "signature";
        case ValidationCause::Structure: return "structure";
    }
    return "unknown";
}

std::string Block::compute_hash() const {
    nlohmann::json preimage{
        {"meta",
         {{"index", meta.index}, {"prev_hash", meta.prev_hash}, {"timestamp", meta.timestamp}}},
        {"data", data.has_value() ? record_to_json(*data) : nlohmann::json(nullptr)},
        {"signature",
         signature.has_value() ? nlohmann::json(signature->to_base64()) : nlohmann::json(nullptr)},
    };
    return hash_bytes(canonical_dump(preimage)).hex;
}

nlohmann::json Block::to_json() const {
    nlohmann::json out{
        {"meta",
         {{"index", meta.index}, {"prev_hash", meta.prev_hash}, {"timestamp", meta.timestamp}}},
        {"data", data.has_value() ? record_to_json(*data) : nlohmann::json(nullptr)},
        {"signature",
         signature.has_value() ? nlohmann::json(signature->to_base64()) : nlohmann::json(nullptr)},
        {"hash", hash},
    };
    return out;
}

Block Block::from_json(const nlohmann::json& value) {
    Block block;
    const auto& meta = value.at("meta");
    block.meta.index = meta.at("index").get<std::uint64_t>();
    block.meta.prev_hash = meta.at("prev_hash").get<std::string>();
    block.meta.timestamp = meta.at("timestamp").get<std::int64_t>();
    if (!value.at("data").is_null()) {
        block.data = record_from_json(value.at("data"));
    }
    if (!value.at("signature").is_null()) {
        block.signature = Signature::from_base64(value.at("signature").get<std::string>());
    }
    block.hash = value.at("hash").get<std::string>();
    return block;
}

Blockchain Blockchain::new_chain(std::int64_t genesis_timestamp) {
    Blockchain chain;
    Block genesis;
    genesis.meta.index = 0;
    genesis.meta.prev_hash = kZeroHash;
    genesis.meta.timestamp = genesis_timestamp;
    genesis.hash = genesis.compute_hash();
    chain.blocks_.push_back(std::move(genesis));
    return chain;
}

Block Blockchain::make_block(const DeviceRecord& record, const Signature& signature,
                             std::int64_t timestamp) const {
    const Block& last = tip();
    if (timestamp < last.meta.timestamp) {
        throw AppendError(ValidationCause::Timestamp,
                          "timestamp " + std::to_string(timestamp) + " precedes tip timestamp " +
                              std::to_string(last.meta.timestamp));
    }
    Block block;
    block.meta.index = last.meta.index + 1;
    block.meta.prev_hash = last.hash;
    block.meta.timestamp = timestamp;
    block.data = record;
    block.signature = signature;
    block.hash = block.compute_hash();
    return block;
}

void Blockchain::append(const Block& block) {
    if (!block.data.has_value() || !block.signature.has_value()) {
        throw AppendError(ValidationCause::Structure,
                          "non-genesis block must carry data and signature");
    }
    ValidationResult result = validate_block(block, tip());
    if (!result) {
        throw AppendError(result.cause, result.message);
    }
    if (by_node_id_.contains(block.data->node_id)) {
        throw AppendError(ValidationCause::Structure,
                          "duplicate node_id \"" + block.data->node_id +
                              "\": first claim wins");
    }
    by_node_id_.emplace(block.data->node_id, blocks_.size());
    blocks_.push_back(block);
}

const Block* Blockchain::find_device(std::string_view node_id) const {
    auto it = by_node_id_.find(std::string(node_id));
    if (it == by_node_id_.end()) return nullptr;
    return &blocks_[it->second];
}

nlohmann::json Blockchain::to_json() const {
    nlohmann::json blocks = nlohmann::json::array();
    for (const Block& block : blocks_) {
        blocks.push_back(block.to_json());
    }
    return {{"blocks", std::move(blocks)}};
}

Blockchain Blockchain::from_json(const nlohmann::json& value) {
    const auto& blocks = value.at("blocks");
    if (!blocks.is_array() || blocks.empty()) {
        throw std::invalid_argument("chain document needs a non-empty blocks array");
    }
    // Parse is shape-only; a loaded chain may be invalid and is checked by
    // validate_chain, so tampered files remain loadable for inspection.
    Blockchain chain;
    for (const auto& entry : blocks) {
        Block block = Block::from_json(entry);
        if (block.data.has_value()) {
            chain.by_node_id_.emplace(block.data->node_id, chain.blocks_.size());
        }
        chain.blocks_.push_back(std::move(block));
    }
    return chain;
}

void Blockchain::save(const std::filesystem::path& path) const {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::trunc);
        if (!out) {
            throw std::runtime_error("cannot write chain file: " + tmp.string());
        }
        out << canonical_dump(to_json()) << '\n';
        if (!out) {
            throw std::runtime_error("short write on chain file: " + tmp.string());
        }
    }
    std::filesystem::rename(tmp, path);
}

Blockchain Blockchain::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot read chain file: " + path.string());
    }
    nlohmann::json doc = nlohmann::json::parse(in);
    return from_json(doc);
}

ValidationResult validate_block(const Block& block, const Block& prev,
                                const PublicKey* owner_pk) {
    const std::uint64_t index = block.meta.index;
    if (index != prev.meta.index + 1) {
        return ValidationResult::fail(
            ValidationCause::Linkage, index,
            "index " + std::to_string(index) + " does not follow " +
                std::to_string(prev.meta.index));
    }
    if (block.meta.prev_hash != prev.hash) {
        return ValidationResult::fail(ValidationCause::Linkage, index,
                                      "prev_hash does not match predecessor hash");
    }
    if (block.meta.timestamp < prev.meta.timestamp) {
        return ValidationResult::fail(ValidationCause::Timestamp, index,
                                      "timestamp precedes predecessor");
    }
    if (block.hash != block.compute_hash()) {
        return ValidationResult::fail(ValidationCause::Hash, index,
                                      "stored hash does not recompute");
    }
    if (owner_pk != nullptr) {
        if (!block.data.has_value() || !block.signature.has_value() ||
            !verify(*owner_pk, canonical_bytes(*block.data), *block.signature)) {
            return ValidationResult::fail(ValidationCause::Signature, index,
                                          "owner signature does not verify over record");
        }
    }
    return ValidationResult::pass();
}

ValidationResult validate_chain(const Blockchain& chain) {
    const auto& blocks = chain.blocks();
    const Block& genesis = blocks.front();
    if (genesis.meta.index != 0 || genesis.meta.prev_hash != kZeroHash ||
        genesis.data.has_value() || genesis.signature.has_value()) {
        return ValidationResult::fail(ValidationCause::Genesis, 0, "malformed genesis block");
    }
    if (genesis.hash != genesis.compute_hash()) {
        return ValidationResult::fail(ValidationCause::Hash, 0, "genesis hash does not recompute");
    }
    for (std::size_t i = 1; i < blocks.size(); ++i) {
        if (!blocks[i].data.has_value() || !blocks[i].signature.has_value()) {
            return ValidationResult::fail(ValidationCause::Structure, blocks[i].meta.index,
                                          "non-genesis block missing data or signature");
        }
        ValidationResult result = validate_block(blocks[i], blocks[i - 1]);
        if (!result) return result;
    }
    return ValidationResult::pass();
}

const Blockchain& choose_chain(const Blockchain& local, const Blockchain& remote) {
    if (remote.size() <= local.size()) return local;
    if (remote.genesis_hash() != local.genesis_hash()) return local;
    if (!validate_chain(remote)) return local;
    return remote;
}

Blockchain append_block(Blockchain chain, const Block& block) {
    chain.append(block);
    return chain;
}

}  // namespace chainpki
