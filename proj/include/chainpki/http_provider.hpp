#pragma once

#include <chrono>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>

#include "chainpki/identity.hpp"

namespace chainpki {

/// HTTP adapter for a Keybase-shaped lookup endpoint (the real API or the
/// mock server). Connection failures throw ProviderError{Transport};
/// malformed bodies throw ProviderError{Protocol}. A small TTL cache sits
/// in front of lookups; ttl zero disables it.
class HttpProvider : public IdentityProvider {
public:
    explicit HttpProvider(std::string base_url,
                          std::chrono::milliseconds timeout = std::chrono::milliseconds(5000),
                          std::chrono::seconds cache_ttl = std::chrono::seconds(60));

    std::optional<IdentityProfile> lookup_user(std::string_view username) override;

private:
    struct CacheEntry {
        std::optional<IdentityProfile> profile;
        std::chrono::steady_clock::time_point expires;
    };

    std::string base_url_;
    std::string host_;
    int port_ = 80;
    std::chrono::milliseconds timeout_;
    std::chrono::seconds cache_ttl_;
    std::mutex cache_mutex_;
    std::map<std::string, CacheEntry, std::less<>> cache_;
};

}  // namespace chainpki
