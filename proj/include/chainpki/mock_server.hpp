#pragma once

#include <atomic>
#include <memory>
#include <string>
#include <thread>

#include "chainpki/mock_provider.hpp"

namespace httplib {
class Server;
}

namespace chainpki {

/// HTTP frontend for a MockProvider, serving the Keybase-shaped lookup
/// endpoint. start() binds and spawns a serving thread; stop() is clean
/// and idempotent.
class MockIdentityServer {
public:
    enum class Fault { None, TruncateBody };

    explicit MockIdentityServer(MockProvider& provider);
    ~MockIdentityServer();

    MockIdentityServer(const MockIdentityServer&) = delete;
    MockIdentityServer& operator=(const MockIdentityServer&) = delete;

    /// Binds to host:port (port 0 picks a free port) and serves in the
    /// background. Throws std::runtime_error on bind failure.
    void start(const std::string& host, int port);
    void stop();
    /// Signal-handler-safe stop request; does not join the serving thread.
    void request_stop();
    /// Blocks until the serving thread exits (after stop()).
    void wait();

    int port() const { return port_; }
    std::string base_url() const;

    void set_fault(Fault fault) { fault_ = fault; }

private:
    MockProvider& provider_;
    std::unique_ptr<httplib::Server> server_;
    std::thread thread_;
    std::string host_;
    int port_ = 0;
    std::atomic<Fault> fault_{Fault::None};
};

}  // namespace chainpki
