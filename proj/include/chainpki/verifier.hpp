#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "chainpki/identity.hpp"
#include "chainpki/ledger.hpp"

namespace chainpki {

struct TrustPolicy {
    int min_valid_proofs = 2;
    std::set<ProofType> required_proof_types;
};

enum class Verdict {
    Trusted,
    RejectedNoBlock,
    RejectedUnknownUser,
    RejectedBadSignature,
    RejectedInsufficientProofs,
};

std::string_view to_string(Verdict verdict);
Verdict verdict_from_string(std::string_view name);

/// Exit-code contract: 0 trusted, 10-13 the four rejections.
int verdict_exit_code(Verdict verdict);

struct TraceStep {
    std::string step;  // block_lookup | owner_lookup | signature_check | proof_check
    bool ok = false;
    std::string detail;

    bool operator==(const TraceStep&) const = default;
};

struct VerificationOutcome {
    Verdict verdict = Verdict::RejectedNoBlock;
    std::vector<TraceStep> trace;

    bool trusted() const { return verdict == Verdict::Trusted; }
    nlohmann::json to_json() const;
};

/// The ownership-verification state machine: block lookup, owner lookup,
/// signature check, proof-policy check. Stops at the first failing stage.
/// Provider transport/protocol errors propagate as ProviderError so callers
/// can retry; they are never folded into a verdict.
VerificationOutcome verify_device(const Blockchain& chain, IdentityProvider& provider,
                                  const TrustPolicy& policy, std::string_view node_id);

/// Signs the record with the owner's key, builds and appends the block.
/// Throws AppendError on duplicate node_id or linkage/timestamp failures.
Blockchain register_device(Blockchain chain, const PrivateKey& owner_key,
                           const DeviceRecord& record, std::int64_t timestamp);

}  // namespace chainpki
