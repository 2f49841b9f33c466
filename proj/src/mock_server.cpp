#include "chainpki/mock_server.hpp"

#include <stdexcept>

#include <httplib.h>

#include "chainpki/record.hpp"

namespace chainpki {

MockIdentityServer::MockIdentityServer(MockProvider& provider)
    : provider_(provider), server_(std::make_unique<httplib::Server>()) {
    server_->Get(std::string(kLookupPath),
                 [this](const httplib::Request& req, httplib::Response& res) {
                     if (!req.has_param("usernames")) {
                         res.status = 400;
                         res.set_content(R"({"error":"missing usernames parameter"})",
                                         "application/json");
                         return;
                     }
                     std::string username = req.get_param_value("usernames");
                     std::vector<IdentityProfile> found;
                     if (auto profile = provider_.lookup_user(username)) {
                         found.push_back(std::move(*profile));
                     }
                     std::string body = canonical_dump(lookup_response_to_wire(found));
                     if (fault_.load() == Fault::TruncateBody) {
                         body = body.substr(0, body.size() / 2);
                     }
                     res.status = 200;
                     res.set_content(body, "application/json");
                 });
}

MockIdentityServer::~MockIdentityServer() { stop(); }

void MockIdentityServer::start(const std::string& host, int port) {
    host_ = host;
    if (port == 0) {
        port_ = server_->bind_to_any_port(host);
        if (port_ < 0) {
            throw std::runtime_error("mock server: cannot bind to " + host);
        }
    } else {
        if (!server_->bind_to_port(host, port)) {
            throw std::runtime_error("mock server: cannot bind to " + host + ":" +
                                     std::to_string(port));
        }
        port_ = port;
    }
    thread_ = std::thread([this] { server_->listen_after_bind(); });
    server_->wait_until_ready();
}

void MockIdentityServer::stop() {
    if (server_ && server_->is_running()) {
        server_->stop();
    }
    if (thread_.joinable()) {
        thread_.join();
    }
}

void MockIdentityServer::request_stop() {
    if (server_) {
        server_->stop();
    }
}

void MockIdentityServer::wait() {
    if (thread_.joinable()) {
        thread_.join();
    }
}

std::string MockIdentityServer::base_url() const {
    return "http://" + host_ + ":" + std::to_string(port_);
}

}  // namespace chainpki
