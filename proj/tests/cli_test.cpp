#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <sys/wait.h>
#include <unistd.h>

#include <json.hpp>

#include "chainpki/ledger.hpp"

namespace fs = std::filesystem;

namespace {

const std::string kBin = CHAINPKI_BIN;

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() / ("chainpki_cli_" + std::to_string(::getpid()) +
                                            "_" + std::to_string(counter()++));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    static int& counter() {
        static int n = 0;
        return n;
    }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

int run(const std::string& args) {
    int status = std::system((kBin + " " + args + " >/dev/null 2>&1").c_str());
    return WEXITSTATUS(status);
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

const std::string kSeedA(64, '1');
const std::string kSeedB(64, '2');

void write_fixtures(const fs::path& path, const std::string& owner_pub_b64,
                    int valid_proofs) {
    nlohmann::json proofs = nlohmann::json::array();
    for (int i = 0; i < valid_proofs; ++i) {
        proofs.push_back({{"proof_type", "twitter"},
                          {"nametag", "alice" + std::to_string(i)},
                          {"state", 1}});
    }
    nlohmann::json profile = {{"username", "alice"},
                              {"public_key", owner_pub_b64},
                              {"proofs", proofs}};
    nlohmann::json doc;
    doc["profiles"] = nlohmann::json::array({profile});
    std::ofstream out(path);
    out << doc.dump(2);
}

std::string pub_key_b64(const fs::path& pub_file) {
    return chainpki::load_public_key_file(pub_file).to_base64();
}

}  // namespace

TEST_CASE("keygen writes both files and refuses to clobber") {
    TempDir dir;
    CHECK(run("keygen --out " + dir.file("id")) == 0);
    CHECK(fs::exists(dir.file("id.pub")));
    CHECK(fs::exists(dir.file("id.key")));

    std::string before = slurp(dir.file("id.pub"));
    CHECK(run("keygen --out " + dir.file("id")) != 0);
    CHECK(slurp(dir.file("id.pub")) == before);
    CHECK(run("keygen --force --out " + dir.file("id")) == 0);
}

TEST_CASE("seeded keygen is reproducible") {
    TempDir dir;
    CHECK(run("keygen --seed " + kSeedA + " --out " + dir.file("a")) == 0);
    CHECK(run("keygen --seed " + kSeedA + " --out " + dir.file("b")) == 0);
    CHECK(run("keygen --seed " + kSeedB + " --out " + dir.file("c")) == 0);
    CHECK(slurp(dir.file("a.pub")) == slurp(dir.file("b.pub")));
    CHECK(slurp(dir.file("a.pub")) != slurp(dir.file("c.pub")));
}

TEST_CASE("register appends to the chain and enforces first claim") {
    TempDir dir;
    REQUIRE(run("keygen --seed " + kSeedA + " --out " + dir.file("owner")) == 0);
    std::string chain_arg = "--chain " + dir.file("chain.json");

    CHECK(run(chain_arg + " register --create --key " + dir.file("owner.key") +
              " --node-id dev-01 --owner alice --timestamp 100") == 0);
    chainpki::Blockchain chain = chainpki::Blockchain::load(dir.file("chain.json"));
    CHECK(chain.size() == 2);

    std::string before = slurp(dir.file("chain.json"));
    CHECK(run(chain_arg + " register --key " + dir.file("owner.key") +
              " --node-id dev-01 --owner alice --timestamp 101") != 0);
    CHECK(slurp(dir.file("chain.json")) == before);
}

TEST_CASE("a stale lock file blocks a second writer") {
    TempDir dir;
    REQUIRE(run("keygen --seed " + kSeedA + " --out " + dir.file("owner")) == 0);
    std::ofstream(dir.file("chain.json.lock")) << "";
    CHECK(run("--chain " + dir.file("chain.json") + " register --create --key " +
              dir.file("owner.key") + " --node-id dev-01 --owner alice") != 0);
    CHECK_FALSE(fs::exists(dir.file("chain.json")));
}

TEST_CASE("chain validate and inspect") {
    TempDir dir;
    REQUIRE(run("keygen --seed " + kSeedA + " --out " + dir.file("owner")) == 0);
    std::string chain_arg = "--chain " + dir.file("chain.json");
    REQUIRE(run(chain_arg + " register --create --key " + dir.file("owner.key") +
                " --node-id dev-01 --owner alice --timestamp 100") == 0);

    CHECK(run(chain_arg + " chain validate") == 0);
    CHECK(run(chain_arg + " chain inspect") == 0);

    // Tamper with a record field; validation must name the failure.
    nlohmann::json doc = nlohmann::json::parse(slurp(dir.file("chain.json")));
    doc["blocks"][1]["data"]["owner_username"] = "mallory";
    std::ofstream(dir.file("chain.json")) << doc.dump();
    CHECK(run(chain_arg + " chain validate") != 0);
}

TEST_CASE("verify against fixtures honors the exit-code contract") {
    TempDir dir;
    REQUIRE(run("keygen --seed " + kSeedA + " --out " + dir.file("owner")) == 0);
    std::string chain_arg = "--chain " + dir.file("chain.json");
    REQUIRE(run(chain_arg + " register --create --key " + dir.file("owner.key") +
                " --node-id dev-01 --owner alice --timestamp 100") == 0);

    write_fixtures(dir.file("fixtures.json"), pub_key_b64(dir.file("owner.pub")), 3);
    std::string provider = " --fixtures " + dir.file("fixtures.json");

    CHECK(run(chain_arg + " verify --node-id dev-01" + provider) == 0);
    CHECK(run(chain_arg + " verify --node-id dev-01 --output json" + provider) == 0);
    CHECK(run(chain_arg + " verify --node-id dev-ghost" + provider) == 10);

    SUBCASE("insufficient proofs is exit 13") {
        write_fixtures(dir.file("fixtures.json"), pub_key_b64(dir.file("owner.pub")), 1);
        CHECK(run(chain_arg + " verify --node-id dev-01" + provider) == 13);
    }
    SUBCASE("wrong owner key is exit 12") {
        REQUIRE(run("keygen --seed " + kSeedB + " --out " + dir.file("other")) == 0);
        write_fixtures(dir.file("fixtures.json"), pub_key_b64(dir.file("other.pub")), 3);
        CHECK(run(chain_arg + " verify --node-id dev-01" + provider) == 12);
    }
    SUBCASE("provider down is exit 20") {
        CHECK(run(chain_arg +
                  " verify --node-id dev-01 --provider-url http://127.0.0.1:1 "
                  "--timeout-ms 300") == 20);
    }
}

TEST_CASE("mock-serve answers lookups and shuts down on SIGTERM") {
    TempDir dir;
    REQUIRE(run("keygen --seed " + kSeedA + " --out " + dir.file("owner")) == 0);
    write_fixtures(dir.file("fixtures.json"), pub_key_b64(dir.file("owner.pub")), 3);

    std::string script =
        kBin + " mock-serve --port 18731 --fixtures " + dir.file("fixtures.json") +
        " >/dev/null 2>&1 & pid=$!; sleep 0.5; "
        "curl -s -o " + dir.file("lookup.json") +
        " 'http://127.0.0.1:18731/_/api/1.0/user/lookup.json?usernames=alice'; "
        "kill -TERM $pid; wait $pid";
    int status = std::system(script.c_str());
    CHECK(WEXITSTATUS(status) == 0);

    nlohmann::json body = nlohmann::json::parse(slurp(dir.file("lookup.json")));
    CHECK(body["them"][0]["basics"]["username"] == "alice");

    // Missing fixtures file fails at startup.
    CHECK(run("mock-serve --port 18732 --fixtures " + dir.file("nope.json")) != 0);
}

TEST_CASE("sim runs scenarios and writes reports") {
    TempDir dir;
    CHECK(run("sim uc1_signature_verification --report " + dir.file("r1.json")) == 0);
    CHECK(run("sim uc3_key_rotation --report " + dir.file("r3.json")) == 0);
    CHECK(run("sim no_such_scenario") != 0);

    nlohmann::json report = nlohmann::json::parse(slurp(dir.file("r1.json")));
    CHECK(report["passed"] == true);
    CHECK(report["scenario"] == "uc1_signature_verification");
    report = nlohmann::json::parse(slurp(dir.file("r3.json")));
    CHECK(report["passed"] == true);
}
