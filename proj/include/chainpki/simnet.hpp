#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "chainpki/mock_provider.hpp"
#include "chainpki/verifier.hpp"

namespace chainpki {

/// The ping carries only the sender's node id; it is plain and unencrypted.
struct PingMessage {
    std::string sender_node_id;
};

struct SimConfig {
    int node_count = 10;
    int gossip_rounds_per_tick = 1;
    std::uint64_t rng_seed = 42;
    std::string scenario;
};

struct Decision {
    int tick = 0;
    std::string peer_node_id;
    VerificationOutcome outcome;
};

struct SimNode {
    std::string node_id;
    KeyPair keypair;
    Blockchain local_chain = Blockchain::new_chain(0);
    TrustPolicy policy;
    std::vector<Decision> decision_log;
};

/// Both sides apply the longest-valid-chain rule against the other's chain.
void gossip_exchange(SimNode& a, SimNode& b);

/// Discrete-tick, in-process network: all nodes share one identity
/// provider; ping delivery and gossip happen inside step(). Transcripts
/// are a pure function of the configuration and script.
class Simulation {
public:
    Simulation(SimConfig config, std::shared_ptr<MockProvider> provider);

    SimNode& add_node(std::string node_id, TrustPolicy policy = {});
    SimNode& node(std::string_view node_id);
    const std::vector<SimNode>& nodes() const { return nodes_; }
    MockProvider& provider() { return *provider_; }

    /// Broadcast: at the given tick every other node receives the ping and
    /// verifies the sender.
    void schedule_ping(int tick, PingMessage ping);

    /// A standing peer presenting this chain every gossip phase; never a
    /// recipient.
    void set_adversary_chain(Blockchain chain);

    void step();
    int tick() const { return tick_; }

    /// Per-node decision logs and chain tips, stable field order.
    nlohmann::json transcript() const;

private:
    SimConfig config_;
    std::shared_ptr<MockProvider> provider_;
    std::vector<SimNode> nodes_;
    std::map<int, std::vector<PingMessage>> scheduled_pings_;
    std::optional<Blockchain> adversary_chain_;
    std::mt19937_64 rng_;
    int tick_ = 0;
};

struct ScenarioReport {
    std::string scenario;
    bool passed = false;
    int ticks = 0;
    std::vector<std::string> notes;
    nlohmann::json detail;  // per-node decision logs plus expectations

    nlohmann::json to_json() const;
};

inline const std::vector<std::string> kScenarioIds = {
    "uc1_signature_verification",
    "uc2_unreliable_proofs",
    "uc3_key_rotation",
    "convergence",
};

/// Throws std::invalid_argument on an unknown scenario id.
ScenarioReport run_scenario(const std::string& scenario_id, const SimConfig& config);

}  // namespace chainpki
