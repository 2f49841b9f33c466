#include "chainpki/http_provider.hpp"

#include <httplib.h>

namespace chainpki {

HttpProvider::HttpProvider(std::string base_url, std::chrono::milliseconds timeout,
                           std::chrono::seconds cache_ttl)
    : base_url_(std::move(base_url)), timeout_(timeout), cache_ttl_(cache_ttl) {}

std::optional<IdentityProfile> HttpProvider::lookup_user(std::string_view username) {
    if (username.empty()) {
        throw ProviderError(ProviderError::Kind::Protocol, "username must be non-empty");
    }

    if (cache_ttl_.count() > 0) {
        std::lock_guard lock(cache_mutex_);
        auto it = cache_.find(username);
        if (it != cache_.end() && it->second.expires > std::chrono::steady_clock::now()) {
            return it->second.profile;
        }
    }

    httplib::Client client(base_url_);
    client.set_connection_timeout(timeout_);
    client.set_read_timeout(timeout_);

    httplib::Params params{{"usernames", std::string(username)}};
    auto res = client.Get(std::string(kLookupPath), params, httplib::Headers{});
    if (!res) {
        throw ProviderError(ProviderError::Kind::Transport,
                            "lookup failed: " + httplib::to_string(res.error()));
    }
    if (res->status != 200) {
        throw ProviderError(ProviderError::Kind::Protocol,
                            "lookup returned HTTP " + std::to_string(res->status));
    }

    std::optional<IdentityProfile> profile = parse_lookup_response(res->body);

    if (cache_ttl_.count() > 0) {
        std::lock_guard lock(cache_mutex_);
        cache_[std::string(username)] =
            CacheEntry{profile, std::chrono::steady_clock::now() + cache_ttl_};
    }
    return profile;
}

}  // namespace chainpki
