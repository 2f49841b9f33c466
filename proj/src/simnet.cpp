#include "chainpki/simnet.hpp"

#include <algorithm>
#include <stdexcept>

#include "chainpki/record.hpp"

namespace chainpki {

void gossip_exchange(SimNode& a, SimNode& b) {
    Blockchain next_a = choose_chain(a.local_chain, b.local_chain);
    Blockchain next_b = choose_chain(b.local_chain, a.local_chain);
    a.local_chain = std::move(next_a);
    b.local_chain = std::move(next_b);
}

Simulation::Simulation(SimConfig config, std::shared_ptr<MockProvider> provider)
    : config_(std::move(config)), provider_(std::move(provider)), rng_(config_.rng_seed) {}

SimNode& Simulation::add_node(std::string node_id, TrustPolicy policy) {
    SimNode node;
    node.node_id = std::move(node_id);
    node.policy = policy;
    std::vector<std::uint8_t> seed(kSeedSize,
                                   static_cast<std::uint8_t>(0x40 + nodes_.size()));
    node.keypair = generate_keypair(std::span<const std::uint8_t>(seed));
    nodes_.push_back(std::move(node));
    return nodes_.back();
}

SimNode& Simulation::node(std::string_view node_id) {
    auto it = std::find_if(nodes_.begin(), nodes_.end(),
                           [&](const SimNode& n) { return n.node_id == node_id; });
    if (it == nodes_.end()) {
        throw std::invalid_argument("no such node: " + std::string(node_id));
    }
    return *it;
}

void Simulation::schedule_ping(int tick, PingMessage ping) {
    scheduled_pings_[tick].push_back(std::move(ping));
}

void Simulation::set_adversary_chain(Blockchain chain) {
    adversary_chain_ = std::move(chain);
}

void Simulation::step() {
    // Ping phase: broadcast, every other node verifies the sender.
    auto it = scheduled_pings_.find(tick_);
    if (it != scheduled_pings_.end()) {
        for (const PingMessage& ping : it->second) {
            for (SimNode& receiver : nodes_) {
                if (receiver.node_id == ping.sender_node_id) continue;
                VerificationOutcome outcome = verify_device(
                    receiver.local_chain, *provider_, receiver.policy, ping.sender_node_id);
                receiver.decision_log.push_back({tick_, ping.sender_node_id, std::move(outcome)});
            }
        }
    }

    // Gossip phase: ring neighbor plus one random peer per node per round.
    const std::size_t n = nodes_.size();
    for (int round = 0; round < config_.gossip_rounds_per_tick; ++round) {
        for (std::size_t i = 0; i < n; ++i) {
            if (n > 1) {
                gossip_exchange(nodes_[i], nodes_[(i + 1) % n]);
                std::size_t j = rng_() % n;
                if (j != i) gossip_exchange(nodes_[i], nodes_[j]);
            }
            if (adversary_chain_.has_value()) {
                nodes_[i].local_chain =
                    choose_chain(nodes_[i].local_chain, *adversary_chain_);
            }
        }
    }
    ++tick_;
}

nlohmann::json Simulation::transcript() const {
    nlohmann::json node_entries = nlohmann::json::array();
    for (const SimNode& node : nodes_) {
        nlohmann::json decisions = nlohmann::json::array();
        for (const Decision& decision : node.decision_log) {
            decisions.push_back({
                {"tick", decision.tick},
                {"peer", decision.peer_node_id},
                {"verdict", std::string(to_string(decision.outcome.verdict))},
                {"trace", decision.outcome.to_json().at("trace")},
            });
        }
        node_entries.push_back({
            {"node_id", node.node_id},
            {"chain_length", node.local_chain.size()},
            {"tip_hash", node.local_chain.tip().hash},
            {"decisions", std::move(decisions)},
        });
    }
    return {{"tick", tick_}, {"nodes", std::move(node_entries)}};
}

nlohmann::json ScenarioReport::to_json() const {
    return {
        {"scenario", scenario},
        {"passed", passed},
        {"ticks", ticks},
        {"notes", notes},
        {"detail", detail},
    };
}

namespace {

std::vector<std::uint8_t> owner_seed(std::uint8_t tag) {
    return std::vector<std::uint8_t>(kSeedSize, tag);
}

IdentityProfile make_profile(std::string username, std::string public_key,
                             int valid_proofs, int pending_proofs = 0,
                             int broken_proofs = 0) {
    IdentityProfile profile;
    profile.username = std::move(username);
    profile.public_key = std::move(public_key);
    static const ProofType platforms[] = {ProofType::Twitter, ProofType::Github,
                                          ProofType::Reddit, ProofType::Facebook,
                                          ProofType::Hackernews};
    int slot = 0;
    auto add = [&](ProofState state, int count) {
        for (int i = 0; i < count; ++i) {
            Proof proof;
            proof.type = platforms[slot % 5];
            proof.handle = profile.username + "-proof-" + std::to_string(slot);
            proof.state = state;
            profile.proofs.push_back(std::move(proof));
            ++slot;
        }
    };
    add(ProofState::Valid, valid_proofs);
    add(ProofState::Pending, pending_proofs);
    add(ProofState::Broken, broken_proofs);
    return profile;
}

std::vector<std::string> receiver_verdicts(const SimNode& receiver) {
    std::vector<std::string> verdicts;
    for (const Decision& decision : receiver.decision_log) {
        verdicts.push_back(std::string(to_string(decision.outcome.verdict)));
    }
    return verdicts;
}

ScenarioReport run_uc1(const SimConfig& config) {
    auto provider = std::make_shared<MockProvider>();

    KeyPair alice = generate_keypair(std::span<const std::uint8_t>(owner_seed(0x01)));
    KeyPair bob = generate_keypair(std::span<const std::uint8_t>(owner_seed(0x02)));
    KeyPair mallory_signing = generate_keypair(std::span<const std::uint8_t>(owner_seed(0x03)));
    KeyPair mallory_served = generate_keypair(std::span<const std::uint8_t>(owner_seed(0x04)));

    provider->register_profile(make_profile("alice", alice.public_key.to_base64(), 3));
    provider->register_profile(make_profile("bob", bob.public_key.to_base64(), 1));
    // Mallory's account serves a key that never signed the block.
    provider->register_profile(
        make_profile("mallory", mallory_served.public_key.to_base64(), 3));

    Simulation sim(config, provider);
    sim.add_node("receiver");
    sim.add_node("dev-bad-sig");
    sim.add_node("dev-few-proofs");
    sim.add_node("dev-good");

    Blockchain chain = Blockchain::new_chain(0);
    auto register_sender = [&](const std::string& node_id, const std::string& owner,
                               const PrivateKey& key, std::int64_t ts) {
        DeviceRecord record{node_id, owner, sim.node(node_id).keypair.public_key.to_base64()};
        chain = register_device(std::move(chain), key, record, ts);
    };
    register_sender("dev-bad-sig", "mallory", mallory_signing.private_key, 1);
    register_sender("dev-few-proofs", "bob", bob.private_key, 2);
    register_sender("dev-good", "alice", alice.private_key, 3);

    for (const SimNode& node : sim.nodes()) {
        sim.node(node.node_id).local_chain = chain;
    }

    sim.schedule_ping(1, {"dev-bad-sig"});
    sim.schedule_ping(1, {"dev-few-proofs"});
    sim.schedule_ping(1, {"dev-good"});
    sim.step();
    sim.step();

    const std::vector<std::string> expected = {"RejectedBadSignature",
                                               "RejectedInsufficientProofs", "Trusted"};
    std::vector<std::string> got = receiver_verdicts(sim.node("receiver"));

    ScenarioReport report;
    report.scenario = "uc1_signature_verification";
    report.ticks = sim.tick();
    report.passed = (got == expected);
    report.notes.push_back("three sender profiles exercise each terminal verification state");
    report.detail = {{"expected_verdicts", expected},
                     {"transcript", sim.transcript()}};
    return report;
}

ScenarioReport run_uc2(const SimConfig& config) {
    auto provider = std::make_shared<MockProvider>();

    KeyPair spammer = generate_keypair(std::span<const std::uint8_t>(owner_seed(0x11)));
    // Only self-asserted proofs: nothing in Valid state.
    provider->register_profile(
        make_profile("spammer", spammer.public_key.to_base64(), 0, 2, 1));

    Simulation sim(config, provider);
    sim.add_node("receiver");
    sim.add_node("dev-spam");

    Blockchain chain = Blockchain::new_chain(0);
    DeviceRecord record{"dev-spam", "spammer",
                        sim.node("dev-spam").keypair.public_key.to_base64()};
    chain = register_device(std::move(chain), spammer.private_key, record, 1);
    sim.node("receiver").local_chain = chain;
    sim.node("dev-spam").local_chain = chain;

    sim.schedule_ping(1, {"dev-spam"});
    sim.step();
    sim.step();

    std::vector<std::string> got = receiver_verdicts(sim.node("receiver"));
    ScenarioReport report;
    report.scenario = "uc2_unreliable_proofs";
    report.ticks = sim.tick();
    report.passed = (got == std::vector<std::string>{"RejectedInsufficientProofs"});
    report.notes.push_back(
        "follower counts are not exposed by the identity API; the decision rests on "
        "valid-proof counts alone");
    report.detail = {{"expected_verdicts", {"RejectedInsufficientProofs"}},
                     {"transcript", sim.transcript()}};
    return report;
}

ScenarioReport run_uc3(const SimConfig& config) {
    auto provider = std::make_shared<MockProvider>();

    KeyPair carol_old = generate_keypair(std::span<const std::uint8_t>(owner_seed(0x21)));
    KeyPair carol_new = generate_keypair(std::span<const std::uint8_t>(owner_seed(0x22)));
    provider->register_profile(make_profile("carol", carol_old.public_key.to_base64(), 3));

    Simulation sim(config, provider);
    sim.add_node("receiver");
    sim.add_node("dev-rotate");

    Blockchain chain = Blockchain::new_chain(0);
    DeviceRecord record{"dev-rotate", "carol",
                        sim.node("dev-rotate").keypair.public_key.to_base64()};
    chain = register_device(std::move(chain), carol_old.private_key, record, 1);
    sim.node("receiver").local_chain = chain;
    sim.node("dev-rotate").local_chain = chain;

    const int rotation_tick = 3;
    const int last_tick = 5;
    for (int t = 1; t <= last_tick; ++t) {
        sim.schedule_ping(t, {"dev-rotate"});
    }
    for (int t = 0; t <= last_tick; ++t) {
        if (t == rotation_tick) {
            provider->register_profile(
                make_profile("carol", carol_new.public_key.to_base64(), 3),
                /*replace=*/true);
        }
        sim.step();
    }

    const SimNode& receiver = sim.node("receiver");
    bool passed = !receiver.decision_log.empty();
    for (const Decision& decision : receiver.decision_log) {
        Verdict expected = decision.tick < rotation_tick ? Verdict::Trusted
                                                         : Verdict::RejectedBadSignature;
        if (decision.outcome.verdict != expected) passed = false;
    }

    ScenarioReport report;
    report.scenario = "uc3_key_rotation";
    report.ticks = sim.tick();
    report.passed = passed;
    report.notes.push_back("owner key replaced at tick " + std::to_string(rotation_tick) +
                           "; every later verification fails the signature check");
    report.detail = {{"rotation_tick", rotation_tick}, {"transcript", sim.transcript()}};
    return report;
}

ScenarioReport run_convergence(const SimConfig& config) {
    auto provider = std::make_shared<MockProvider>();

    KeyPair alice = generate_keypair(std::span<const std::uint8_t>(owner_seed(0x01)));
    provider->register_profile(make_profile("alice", alice.public_key.to_base64(), 3));

    const int n = config.node_count;
    if (n < 2) {
        throw std::invalid_argument("convergence scenario needs at least 2 nodes");
    }

    // One master chain; node i starts with the prefix of length i+1.
    Blockchain master = Blockchain::new_chain(0);
    std::vector<Blockchain> prefixes;
    prefixes.push_back(master);
    for (int i = 1; i < n; ++i) {
        KeyPair device = generate_keypair(std::span<const std::uint8_t>(
            owner_seed(static_cast<std::uint8_t>(0x80 + i))));
        DeviceRecord record{"dev-" + std::to_string(i), "alice",
                            device.public_key.to_base64()};
        master = register_device(std::move(master), alice.private_key, record, i);
        prefixes.push_back(master);
    }

    // Strictly longer than the master but tampered mid-chain, so the
    // validity gate must keep every node from adopting it.
    Blockchain adversary_base = master;
    for (int i = 0; i < 2; ++i) {
        KeyPair device = generate_keypair(std::span<const std::uint8_t>(
            owner_seed(static_cast<std::uint8_t>(0xF0 + i))));
        DeviceRecord record{"dev-adv-" + std::to_string(i), "alice",
                            device.public_key.to_base64()};
        adversary_base =
            register_device(std::move(adversary_base), alice.private_key, record, n + i);
    }
    nlohmann::json adversary_doc = adversary_base.to_json();
    adversary_doc["blocks"][2]["data"]["owner_username"] = "mallory";
    Blockchain adversary = Blockchain::from_json(adversary_doc);

    Simulation sim(config, provider);
    for (int i = 0; i < n; ++i) {
        sim.add_node("node-" + std::to_string(i));
        sim.node("node-" + std::to_string(i)).local_chain = prefixes[i];
    }
    sim.set_adversary_chain(adversary);

    const std::string target_tip = master.tip().hash;
    int converged_at = -1;
    for (int t = 0; t < 2 * n; ++t) {
        sim.step();
        bool all_equal = true;
        for (const SimNode& node : sim.nodes()) {
            if (node.local_chain.tip().hash != target_tip) all_equal = false;
        }
        if (all_equal) {
            converged_at = sim.tick();
            break;
        }
    }

    int adversary_adoptions = 0;
    for (const SimNode& node : sim.nodes()) {
        if (node.local_chain.tip().hash == adversary.tip().hash) ++adversary_adoptions;
    }

    ScenarioReport report;
    report.scenario = "convergence";
    report.ticks = sim.tick();
    report.passed = (converged_at > 0 && converged_at <= n && adversary_adoptions == 0);
    report.notes.push_back("longer-but-invalid adversary chain offered every tick");
    report.detail = {{"converged_at_tick", converged_at},
                     {"adversary_chain_length", adversary.size()},
                     {"adversary_adoptions", adversary_adoptions},
                     {"transcript", sim.transcript()}};
    return report;
}

}  // namespace

ScenarioReport run_scenario(const std::string& scenario_id, const SimConfig& config) {
    if (scenario_id == "uc1_signature_verification") return run_uc1(config);
    if (scenario_id == "uc2_unreliable_proofs") return run_uc2(config);
    if (scenario_id == "uc3_key_rotation") return run_uc3(config);
    if (scenario_id == "convergence") return run_convergence(config);
    throw std::invalid_argument("unknown scenario: " + scenario_id);
}

}  // namespace chainpki
