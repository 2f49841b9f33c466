#include "chainpki/identity.hpp"

#include <algorithm>

namespace chainpki {

int count_valid_proofs(const IdentityProfile& profile) {
    return static_cast<int>(std::count_if(
        profile.proofs.begin(), profile.proofs.end(),
        [](const Proof& proof) { return proof.state == ProofState::Valid; }));
}

std::string proof_type_name(const Proof& proof) {
    switch (proof.type) {
        case ProofType::Twitter: return "twitter";
        case ProofType::Github: return "github";
        case ProofType::Reddit: return "reddit";
        case ProofType::Facebook: return "facebook";
        case ProofType::Hackernews: return "hackernews";
        case ProofType::Dns: return "dns";
        case ProofType::Website: return "generic_web_site";
        case ProofType::Other: return proof.other_name.empty() ? "other" : proof.other_name;
    }
    return "other";
}

ProofType proof_type_from_name(std::string_view name) {
    if (name == "twitter") return ProofType::Twitter;
    if (name == "github") return ProofType::Github;
    if (name == "reddit") return ProofType::Reddit;
    if (name == "facebook") return ProofType::Facebook;
    if (name == "hackernews") return ProofType::Hackernews;
    if (name == "dns") return ProofType::Dns;
    if (name == "generic_web_site" || name == "website") return ProofType::Website;
    return ProofType::Other;
}

ProofState proof_state_from_wire(int state) {
    switch (state) {
        case 1: return ProofState::Valid;
        case 2: return ProofState::Pending;
        default: return ProofState::Broken;  // unknown numbers fail closed
    }
}

int proof_state_to_wire(ProofState state) {
    switch (state) {
        case ProofState::Valid: return 1;
        case ProofState::Pending: return 2;
        case ProofState::Broken: return 3;
    }
    return 3;
}

nlohmann::json profile_to_wire(const IdentityProfile& profile) {
    nlohmann::json proofs = nlohmann::json::array();
    for (const Proof& proof : profile.proofs) {
        proofs.push_back({
            {"proof_type", proof_type_name(proof)},
            {"nametag", proof.handle},
            {"state", proof_state_to_wire(proof.state)},
        });
    }
    return {
        {"basics", {{"username", profile.username}}},
        {"public_keys", {{"primary", {{"bundle", profile.public_key}}}}},
        {"proofs_summary", {{"all", std::move(proofs)}}},
    };
}

nlohmann::json lookup_response_to_wire(const std::vector<IdentityProfile>& found) {
    nlohmann::json them = nlohmann::json::array();
    for (const IdentityProfile& profile : found) {
        them.push_back(profile_to_wire(profile));
    }
    return {{"status", {{"code", 0}}}, {"them", std::move(them)}};
}

std::optional<IdentityProfile> parse_lookup_response(const std::string& body) {
    nlohmann::json doc = nlohmann::json::parse(body, nullptr, /*allow_exceptions=*/false);
    if (doc.is_discarded()) {
        throw ProviderError(ProviderError::Kind::Protocol, "lookup response is not valid JSON");
    }
    try {
        if (doc.at("status").at("code").get<int>() != 0) {
            throw ProviderError(ProviderError::Kind::Protocol,
                                "lookup response reports nonzero status");
        }
        const auto& them = doc.at("them");
        if (!them.is_array()) {
            throw ProviderError(ProviderError::Kind::Protocol, "them is not an array");
        }
        // Keybase signals an unknown user with an empty (or null-entry)
        // list rather than a 404.
        if (them.empty() || them[0].is_null()) {
            return std::nullopt;
        }
        const auto& entry = them[0];
        IdentityProfile profile;
        profile.username = entry.at("basics").at("username").get<std::string>();
        profile.public_key =
            entry.at("public_keys").at("primary").at("bundle").get<std::string>();
        for (const auto& item : entry.at("proofs_summary").at("all")) {
            Proof proof;
            std::string type_name = item.at("proof_type").get<std::string>();
            proof.type = proof_type_from_name(type_name);
            if (proof.type == ProofType::Other) proof.other_name = type_name;
            proof.handle = item.at("nametag").get<std::string>();
            proof.state = proof_state_from_wire(item.at("state").get<int>());
            profile.proofs.push_back(std::move(proof));
        }
        return profile;
    } catch (const nlohmann::json::exception& e) {
        throw ProviderError(ProviderError::Kind::Protocol,
                            std::string("lookup response missing fields: ") + e.what());
    }
}

}  // namespace chainpki
