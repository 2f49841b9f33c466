#pragma once

#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>

#include "chainpki/identity.hpp"

namespace chainpki {

/// In-memory identity provider seeded by tests and the simulator. Safe for
/// concurrent lookups; registration is serialized.
class MockProvider : public IdentityProvider {
public:
    /// First registration of a username wins; re-registering requires
    /// replace=true (used to model key rotation).
    void register_profile(const IdentityProfile& profile, bool replace = false);

    std::optional<IdentityProfile> lookup_user(std::string_view username) override;

private:
    mutable std::mutex mutex_;
    std::map<std::string, IdentityProfile, std::less<>> profiles_;
};

}  // namespace chainpki
