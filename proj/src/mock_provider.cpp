#include "chainpki/mock_provider.hpp"

#include <stdexcept>

namespace chainpki {

void MockProvider::register_profile(const IdentityProfile& profile, bool replace) {
    std::lock_guard lock(mutex_);
    auto it = profiles_.find(profile.username);
    if (it != profiles_.end() && !replace) {
        throw std::invalid_argument("user \"" + profile.username + "\" already registered");
    }
    profiles_[profile.username] = profile;
}

std::optional<IdentityProfile> MockProvider::lookup_user(std::string_view username) {
    std::lock_guard lock(mutex_);
    auto it = profiles_.find(username);
    if (it == profiles_.end()) return std::nullopt;
    return it->second;
}

}  // namespace chainpki
