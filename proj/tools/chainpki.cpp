#include <csignal>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>

#include <fcntl.h>
#include <unistd.h>

#include <CLI11.hpp>
#include <json.hpp>

#include "chainpki/http_provider.hpp"
#include "chainpki/ledger.hpp"
#include "chainpki/mock_provider.hpp"
#include "chainpki/mock_server.hpp"
#include "chainpki/simnet.hpp"
#include "chainpki/verifier.hpp"

namespace {

using namespace chainpki;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitTransport = 20;

// Coarse single-writer lock on a chain file.
class ChainLock {
public:
    explicit ChainLock(const std::filesystem::path& chain_path)
        : lock_path_(chain_path.string() + ".lock") {
        int fd = ::open(lock_path_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
        if (fd < 0) {
            throw std::runtime_error("chain is locked by another process (" + lock_path_ +
                                     " exists)");
        }
        ::close(fd);
    }
    ~ChainLock() { ::unlink(lock_path_.c_str()); }

private:
    std::string lock_path_;
};

std::vector<std::uint8_t> parse_seed_hex(const std::string& hex) {
    if (hex.size() != 2 * kSeedSize) {
        throw std::runtime_error("seed must be 64 hex characters");
    }
    std::vector<std::uint8_t> seed(kSeedSize);
    for (std::size_t i = 0; i < kSeedSize; ++i) {
        seed[i] = static_cast<std::uint8_t>(std::stoi(hex.substr(2 * i, 2), nullptr, 16));
    }
    return seed;
}

void load_fixtures(const std::filesystem::path& path, MockProvider& provider) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot read fixtures file: " + path.string());
    }
    nlohmann::json doc = nlohmann::json::parse(in);
    for (const auto& entry : doc.at("profiles")) {
        IdentityProfile profile;
        profile.username = entry.at("username").get<std::string>();
        profile.public_key = entry.at("public_key").get<std::string>();
        for (const auto& item : entry.value("proofs", nlohmann::json::array())) {
            Proof proof;
            std::string type_name = item.at("proof_type").get<std::string>();
            proof.type = proof_type_from_name(type_name);
            if (proof.type == ProofType::Other) proof.other_name = type_name;
            proof.handle = item.value("nametag", "");
            proof.state = proof_state_from_wire(item.at("state").get<int>());
            profile.proofs.push_back(std::move(proof));
        }
        provider.register_profile(profile);
    }
}

struct ProviderOptions {
    std::string provider = "mock";
    std::string provider_url;
    std::string fixtures_path;
    int timeout_ms = 5000;
    int cache_ttl_s = 60;

    std::unique_ptr<IdentityProvider> build() const {
        if (!provider_url.empty()) {
            return std::make_unique<HttpProvider>(provider_url,
                                                  std::chrono::milliseconds(timeout_ms),
                                                  std::chrono::seconds(cache_ttl_s));
        }
        if (provider == "keybase") {
            return std::make_unique<HttpProvider>("https://keybase.io",
                                                  std::chrono::milliseconds(timeout_ms),
                                                  std::chrono::seconds(cache_ttl_s));
        }
        if (!fixtures_path.empty()) {
            auto mock = std::make_unique<MockProvider>();
            load_fixtures(fixtures_path, *mock);
            return mock;
        }
        throw std::runtime_error(
            "mock provider needs --fixtures <file> or --provider-url <url>");
    }
};

void add_provider_options(CLI::App* cmd, ProviderOptions& opts) {
    cmd->add_option("--provider", opts.provider, "Identity provider: mock or keybase")
        ->check(CLI::IsMember({"mock", "keybase"}));
    cmd->add_option("--provider-url", opts.provider_url, "Lookup endpoint base URL");
    cmd->add_option("--fixtures", opts.fixtures_path, "Profile fixtures for the mock provider");
    cmd->add_option("--timeout-ms", opts.timeout_ms, "Lookup timeout in milliseconds");
    cmd->add_option("--cache-ttl", opts.cache_ttl_s, "Lookup cache TTL in seconds (0 disables)");
}

TrustPolicy make_policy(int min_valid_proofs, const std::string& required_types) {
    TrustPolicy policy;
    policy.min_valid_proofs = min_valid_proofs;
    std::size_t start = 0;
    while (start < required_types.size()) {
        std::size_t comma = required_types.find(',', start);
        if (comma == std::string::npos) comma = required_types.size();
        std::string name = required_types.substr(start, comma - start);
        if (!name.empty()) {
            policy.required_proof_types.insert(proof_type_from_name(name));
        }
        start = comma + 1;
    }
    return policy;
}

// Flags override config file; config file overrides defaults.
void apply_config_file(CLI::App& app) {
    const char* config_path = std::getenv("CHAINPKI_CONFIG");
    if (config_path != nullptr) {
        app.set_config("--config", config_path, "Configuration file", false);
    } else {
        app.set_config("--config", "", "Configuration file", false);
    }
}

int cmd_keygen(const std::string& out_prefix, const std::string& seed_hex, bool force) {
    std::filesystem::path pub = out_prefix + ".pub";
    std::filesystem::path key = out_prefix + ".key";
    if (!force && (std::filesystem::exists(pub) || std::filesystem::exists(key))) {
        std::cerr << "error: key files exist; use --force to overwrite\n";
        return kExitUsage;
    }
    KeyPair pair;
    if (!seed_hex.empty()) {
        auto seed = parse_seed_hex(seed_hex);
        pair = generate_keypair(std::span<const std::uint8_t>(seed));
    } else {
        pair = generate_keypair();
    }
    write_public_key_file(pub, pair.public_key);
    write_private_key_file(key, pair.private_key);
    std::cout << "wrote " << pub.string() << " and " << key.string() << "\n"
              << "fingerprint: " << pair.key_fingerprint << "\n";
    return kExitOk;
}

int cmd_register(const std::string& chain_path, const std::string& key_path,
                 const std::string& node_id, const std::string& owner, bool create,
                 std::optional<std::int64_t> timestamp) {
    PrivateKey key = load_private_key_file(key_path);
    KeyPair pair = generate_keypair(std::span<const std::uint8_t>(key.seed));

    ChainLock lock{chain_path};
    Blockchain chain = [&] {
        if (std::filesystem::exists(chain_path)) return Blockchain::load(chain_path);
        if (!create) {
            throw std::runtime_error("chain file missing: " + chain_path +
                                     " (pass --create to start a new chain)");
        }
        return Blockchain::new_chain(0);
    }();

    std::int64_t ts = timestamp.value_or(static_cast<std::int64_t>(std::time(nullptr)));
    DeviceRecord record{node_id, owner, pair.public_key.to_base64()};
    chain = register_device(std::move(chain), key, record, ts);
    chain.save(chain_path);
    std::cout << "registered " << node_id << " (owner " << owner << ") as block #"
              << chain.tip().meta.index << "\n";
    return kExitOk;
}

int cmd_verify(const std::string& chain_path, const std::string& node_id,
               const ProviderOptions& provider_opts, const TrustPolicy& policy,
               const std::string& output) {
    Blockchain chain = Blockchain::load(chain_path);
    auto provider = provider_opts.build();

    VerificationOutcome outcome;
    try {
        outcome = verify_device(chain, *provider, policy, node_id);
    } catch (const ProviderError& e) {
        std::cerr << "error: provider "
                  << (e.kind() == ProviderError::Kind::Transport ? "transport" : "protocol")
                  << " failure: " << e.what() << "\n";
        return kExitTransport;
    }

    if (output == "json") {
        std::cout << outcome.to_json().dump(2) << "\n";
    } else {
        std::cout << to_string(outcome.verdict) << "\n";
        for (const TraceStep& step : outcome.trace) {
            std::cout << "  " << (step.ok ? "ok  " : "FAIL") << " " << step.step << ": "
                      << step.detail << "\n";
        }
    }
    return verdict_exit_code(outcome.verdict);
}

int cmd_chain(const std::string& action, const std::string& chain_path) {
    Blockchain chain = Blockchain::load(chain_path);
    if (action == "validate") {
        ValidationResult result = validate_chain(chain);
        if (!result) {
            std::cerr << "invalid chain: block #" << result.block_index << " ("
                      << to_string(result.cause) << "): " << result.message << "\n";
            return kExitUsage;
        }
        std::cout << "chain valid: " << chain.size() << " blocks\n";
        return kExitOk;
    }
    // inspect
    for (const Block& block : chain.blocks()) {
        std::cout << "#" << block.meta.index << "  ";
        if (block.is_genesis()) {
            std::cout << "<genesis>";
        } else {
            std::cout << block.data->node_id << "  owner=" << block.data->owner_username;
        }
        std::cout << "  hash=" << block.hash.substr(0, 12) << "…\n";
    }
    return kExitOk;
}

int cmd_mock_serve(const std::string& bind_host, int port, const std::string& fixtures_path) {
    static MockProvider provider;
    load_fixtures(fixtures_path, provider);
    static MockIdentityServer server{provider};
    server.start(bind_host, port);
    std::cout << "mock identity provider listening on " << server.base_url() << kLookupPath
              << "\n";
    std::signal(SIGINT, [](int) { server.request_stop(); });
    std::signal(SIGTERM, [](int) { server.request_stop(); });
    // start() serves in the background; block until stop() runs.
    server.wait();
    return kExitOk;
}

int cmd_sim(const std::string& scenario, int nodes, int gossip_rounds, std::uint64_t seed,
            const std::string& report_path) {
    SimConfig config;
    config.node_count = nodes;
    config.gossip_rounds_per_tick = gossip_rounds;
    config.rng_seed = seed;
    config.scenario = scenario;

    ScenarioReport report = run_scenario(scenario, config);
    std::string doc = report.to_json().dump(2);
    if (!report_path.empty()) {
        std::ofstream out(report_path, std::ios::trunc);
        out << doc << "\n";
        std::cout << "report written to " << report_path << "\n";
    } else {
        std::cout << doc << "\n";
    }
    std::cout << "scenario " << scenario << ": " << (report.passed ? "pass" : "FAIL")
              << " (" << report.ticks << " ticks)\n";
    return report.passed ? kExitOk : kExitUsage;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Blockchain-backed device ownership registry"};
    app.require_subcommand(1);
    apply_config_file(app);

    std::string chain_path = "chain.json";
    app.add_option("--chain", chain_path, "Chain file path")->envname("CHAINPKI_CHAIN");

    // keygen
    auto* keygen = app.add_subcommand("keygen", "Generate a key pair");
    std::string out_prefix;
    std::string seed_hex;
    bool force = false;
    keygen->add_option("--out", out_prefix, "Output prefix (<prefix>.pub, <prefix>.key)")
        ->required();
    keygen->add_option("--seed", seed_hex, "Deterministic 64-hex-char seed");
    keygen->add_flag("--force", force, "Overwrite existing key files");

    // register
    auto* reg = app.add_subcommand("register", "Sign and append a device record");
    std::string key_path;
    std::string node_id;
    std::string owner;
    bool create = false;
    std::int64_t reg_timestamp = -1;
    reg->add_option("--key", key_path, "Owner private key file")->required();
    reg->add_option("--node-id", node_id, "Device identifier")->required();
    reg->add_option("--owner", owner, "Owner username")->required();
    reg->add_flag("--create", create, "Create the chain with a genesis block if missing");
    reg->add_option("--timestamp", reg_timestamp, "Block timestamp (default: now)");

    // verify
    auto* verify_cmd = app.add_subcommand("verify", "Run ownership verification for a device");
    std::string verify_node_id;
    ProviderOptions provider_opts;
    int min_valid_proofs = 2;
    std::string required_types;
    std::string output = "text";
    verify_cmd->add_option("--node-id", verify_node_id, "Device identifier")->required();
    add_provider_options(verify_cmd, provider_opts);
    verify_cmd->add_option("--min-valid-proofs", min_valid_proofs,
                           "Minimum count of valid identity proofs");
    verify_cmd->add_option("--required-proof-types", required_types,
                           "Comma-separated proof types that must be valid");
    verify_cmd->add_option("--output", output, "Output format")
        ->check(CLI::IsMember({"text", "json"}));

    // chain inspect|validate
    auto* chain_cmd = app.add_subcommand("chain", "Inspect or validate a chain file");
    std::string chain_action;
    chain_cmd->add_option("action", chain_action, "inspect or validate")
        ->required()
        ->check(CLI::IsMember({"inspect", "validate"}));

    // mock-serve
    auto* serve = app.add_subcommand("mock-serve", "Serve the mock identity provider");
    std::string bind_host = "127.0.0.1";
    int bind_port = 8700;
    std::string fixtures_path;
    serve->add_option("--bind", bind_host, "Bind address");
    serve->add_option("--port", bind_port, "Port (0 picks a free port)");
    serve->add_option("--fixtures", fixtures_path, "Profile fixtures file")->required();

    // sim
    auto* sim = app.add_subcommand("sim", "Run a simulated-network scenario");
    std::string scenario;
    int sim_nodes = 10;
    int sim_gossip = 1;
    std::uint64_t sim_seed = 42;
    std::string report_path;
    sim->add_option("scenario", scenario, "Scenario id")
        ->required()
        ->check(CLI::IsMember(kScenarioIds));
    sim->add_option("--nodes", sim_nodes, "Node count");
    sim->add_option("--gossip-rounds", sim_gossip, "Gossip rounds per tick");
    sim->add_option("--seed", sim_seed, "RNG seed");
    sim->add_option("--report", report_path, "Write the scenario report here");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*keygen) return cmd_keygen(out_prefix, seed_hex, force);
        if (*reg) {
            std::optional<std::int64_t> ts;
            if (reg_timestamp >= 0) ts = reg_timestamp;
            return cmd_register(chain_path, key_path, node_id, owner, create, ts);
        }
        if (*verify_cmd) {
            return cmd_verify(chain_path, verify_node_id, provider_opts,
                              make_policy(min_valid_proofs, required_types), output);
        }
        if (*chain_cmd) return cmd_chain(chain_action, chain_path);
        if (*serve) return cmd_mock_serve(bind_host, bind_port, fixtures_path);
        if (*sim) return cmd_sim(scenario, sim_nodes, sim_gossip, sim_seed, report_path);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    return kExitUsage;
}
