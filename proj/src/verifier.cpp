#include "chainpki/verifier.hpp"

#include <stdexcept>

namespace chainpki {

std::string_view to_string(Verdict verdict) {
    switch (verdict) {
        case Verdict::Trusted: return "Trusted";
        case Verdict::RejectedNoBlock: return "RejectedNoBlock";
        case Verdict::RejectedUnknownUser: return "RejectedUnknownUser";
        case Verdict::RejectedBadSignature: return "RejectedBadSignature";
        case Verdict::RejectedInsufficientProofs: return "RejectedInsufficientProofs";
    }
    return "unknown";
}

Verdict verdict_from_string(std::string_view name) {
    if (name == "Trusted") return Verdict::Trusted;
    if (name == "RejectedNoBlock") return Verdict::RejectedNoBlock;
    if (name == "RejectedUnknownUser") return Verdict::RejectedUnknownUser;
    if (name == "RejectedBadSignature") return Verdict::RejectedBadSignature;
    if (name == "RejectedInsufficientProofs") return Verdict::RejectedInsufficientProofs;
    throw std::invalid_argument("unknown verdict: " + std::string(name));
}

int verdict_exit_code(Verdict verdict) {
    switch (verdict) {
        case Verdict::Trusted: return 0;
        case Verdict::RejectedNoBlock: return 10;
        case Verdict::RejectedUnknownUser: return 11;
        case Verdict::RejectedBadSignature: return 12;
        case Verdict::RejectedInsufficientProofs: return 13;
    }
    return 1;
}

nlohmann::json VerificationOutcome::to_json() const {
    nlohmann::json steps = nlohmann::json::array();
    for (const TraceStep& step : trace) {
        steps.push_back({{"step", step.step}, {"ok", step.ok}, {"detail", step.detail}});
    }
    return {{"verdict", std::string(to_string(verdict))}, {"trace", std::move(steps)}};
}

VerificationOutcome verify_device(const Blockchain& chain, IdentityProvider& provider,
                                  const TrustPolicy& policy, std::string_view node_id) {
    VerificationOutcome outcome;

    const Block* block = chain.find_device(node_id);
    if (block == nullptr) {
        outcome.trace.push_back(
            {"block_lookup", false, "no block for node \"" + std::string(node_id) + "\""});
        outcome.verdict = Verdict::RejectedNoBlock;
        return outcome;
    }
    outcome.trace.push_back(
        {"block_lookup", true, "block #" + std::to_string(block->meta.index)});

    const std::string& owner = block->data->owner_username;
    std::optional<IdentityProfile> profile = provider.lookup_user(owner);
    if (!profile.has_value()) {
        outcome.trace.push_back({"owner_lookup", false, "user \"" + owner + "\" not found"});
        outcome.verdict = Verdict::RejectedUnknownUser;
        return outcome;
    }
    outcome.trace.push_back({"owner_lookup", true, "found \"" + owner + "\""});

    bool signature_ok = false;
    try {
        PublicKey owner_pk = PublicKey::from_base64(profile->public_key);
        signature_ok = verify(owner_pk, canonical_bytes(*block->data), *block->signature);
    } catch (const CryptoError&) {
        signature_ok = false;  // unparseable owner key cannot validate anything
    }
    if (!signature_ok) {
        outcome.trace.push_back(
            {"signature_check", false, "owner key does not validate block signature"});
        outcome.verdict = Verdict::RejectedBadSignature;
        return outcome;
    }
    outcome.trace.push_back({"signature_check", true, "signature verifies under owner key"});

    int valid = count_valid_proofs(*profile);
    bool proofs_ok = valid >= policy.min_valid_proofs;
    for (ProofType required : policy.required_proof_types) {
        bool present = false;
        for (const Proof& proof : profile->proofs) {
            if (proof.type == required && proof.state == ProofState::Valid) {
                present = true;
                break;
            }
        }
        if (!present) proofs_ok = false;
    }
    outcome.trace.push_back({"proof_check", proofs_ok,
                             std::to_string(valid) + " valid proofs, policy requires " +
                                 std::to_string(policy.min_valid_proofs)});
    outcome.verdict = proofs_ok ? Verdict::Trusted : Verdict::RejectedInsufficientProofs;
    return outcome;
}

Blockchain register_device(Blockchain chain, const PrivateKey& owner_key,
                           const DeviceRecord& record, std::int64_t timestamp) {
    Signature signature = sign(owner_key, canonical_bytes(record));
    Block block = chain.make_block(record, signature, timestamp);
    chain.append(block);
    return chain;
}

}  // namespace chainpki
