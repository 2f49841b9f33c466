#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace chainpki {

enum class ProofType { Twitter, Github, Reddit, Facebook, Hackernews, Dns, Website, Other };
enum class ProofState { Valid, Pending, Broken };

struct Proof {
    ProofType type = ProofType::Other;
    std::string other_name;  // set when type == Other
    std::string handle;
    ProofState state = ProofState::Broken;

    bool operator==(const Proof&) const = default;
};

struct IdentityProfile {
    std::string username;
    std::string public_key;  // base64 text form
    std::vector<Proof> proofs;

    bool operator==(const IdentityProfile&) const = default;
};

int count_valid_proofs(const IdentityProfile& profile);

std::string proof_type_name(const Proof& proof);
ProofType proof_type_from_name(std::string_view name);

/// Numeric proof states from the wire map onto the three-way enum;
/// unknown numbers map to Broken (fail closed).
ProofState proof_state_from_wire(int state);
int proof_state_to_wire(ProofState state);

class ProviderError : public std::runtime_error {
public:
    enum class Kind { Transport, Protocol };

    ProviderError(Kind kind, std::string message)
        : std::runtime_error(std::move(message)), kind_(kind) {}
    Kind kind() const { return kind_; }

private:
    Kind kind_;
};

/// Identity-provider boundary. Lookup of a nonexistent user is a
/// distinguishable "not found" (nullopt); transport and protocol failures
/// throw ProviderError.
class IdentityProvider {
public:
    virtual ~IdentityProvider() = default;
    virtual std::optional<IdentityProfile> lookup_user(std::string_view username) = 0;
};

// Keybase-shaped lookup wire format:
//   GET /_/api/1.0/user/lookup.json?usernames=<u>
//   {"status":{"code":0},"them":[{"basics":{"username":...},
//     "public_keys":{"primary":{"bundle":...}},
//     "proofs_summary":{"all":[{"proof_type":...,"nametag":...,"state":<int>}]}}]}
inline constexpr std::string_view kLookupPath = "/_/api/1.0/user/lookup.json";

nlohmann::json profile_to_wire(const IdentityProfile& profile);
nlohmann::json lookup_response_to_wire(const std::vector<IdentityProfile>& found);
/// Throws ProviderError{Protocol} on a malformed document.
std::optional<IdentityProfile> parse_lookup_response(const std::string& body);

}  // namespace chainpki
