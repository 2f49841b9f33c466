#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "chainpki/mock_provider.hpp"
#include "chainpki/verifier.hpp"

using namespace chainpki;

namespace {

KeyPair seeded_pair(std::uint8_t tag) {
    std::vector<std::uint8_t> seed(kSeedSize, tag);
    return generate_keypair(std::span<const std::uint8_t>(seed));
}

IdentityProfile profile_with(const std::string& username, const PublicKey& key,
                             int valid_proofs) {
    IdentityProfile profile;
    profile.username = username;
    profile.public_key = key.to_base64();
    static const ProofType platforms[] = {ProofType::Twitter, ProofType::Github,
                                          ProofType::Reddit};
    for (int i = 0; i < valid_proofs; ++i) {
        profile.proofs.push_back({platforms[i % 3], "", username, ProofState::Valid});
    }
    return profile;
}

struct Fixture {
    KeyPair alice = seeded_pair(0x01);
    KeyPair device = seeded_pair(0x02);
    MockProvider provider;
    Blockchain chain = Blockchain::new_chain(0);

    Fixture() {
        provider.register_profile(profile_with("alice", alice.public_key, 3));
        DeviceRecord record{"dev-01", "alice", device.public_key.to_base64()};
        chain = register_device(std::move(chain), alice.private_key, record, 1);
    }
};

std::vector<std::string> step_names(const VerificationOutcome& outcome) {
    std::vector<std::string> names;
    for (const TraceStep& step : outcome.trace) names.push_back(step.step);
    return names;
}

}  // namespace

TEST_CASE("registered device with matching profile is trusted") {
    Fixture f;
    VerificationOutcome outcome = verify_device(f.chain, f.provider, {}, "dev-01");
    CHECK(outcome.verdict == Verdict::Trusted);
    CHECK(step_names(outcome) == std::vector<std::string>{"block_lookup", "owner_lookup",
                                                          "signature_check", "proof_check"});
    for (const TraceStep& step : outcome.trace) CHECK(step.ok);
}

TEST_CASE("unknown node id stops at the block lookup") {
    Fixture f;
    VerificationOutcome outcome = verify_device(f.chain, f.provider, {}, "dev-ghost");
    CHECK(outcome.verdict == Verdict::RejectedNoBlock);
    CHECK(step_names(outcome) == std::vector<std::string>{"block_lookup"});
}

TEST_CASE("unknown owner stops at the owner lookup") {
    Fixture f;
    DeviceRecord record{"dev-02", "nobody", f.device.public_key.to_base64()};
    f.chain = register_device(std::move(f.chain), f.alice.private_key, record, 2);
    VerificationOutcome outcome = verify_device(f.chain, f.provider, {}, "dev-02");
    CHECK(outcome.verdict == Verdict::RejectedUnknownUser);
    CHECK(step_names(outcome) ==
          std::vector<std::string>{"block_lookup", "owner_lookup"});
}

TEST_CASE("rotated owner key yields a bad-signature rejection") {
    Fixture f;
    KeyPair rotated = seeded_pair(0x09);
    f.provider.register_profile(profile_with("alice", rotated.public_key, 3),
                                /*replace=*/true);
    VerificationOutcome outcome = verify_device(f.chain, f.provider, {}, "dev-01");
    CHECK(outcome.verdict == Verdict::RejectedBadSignature);
    CHECK(step_names(outcome) ==
          std::vector<std::string>{"block_lookup", "owner_lookup", "signature_check"});
}

TEST_CASE("unparseable owner key bundle counts as a bad signature") {
    Fixture f;
    IdentityProfile garbled = profile_with("alice", f.alice.public_key, 3);
    garbled.public_key = "not base64 at all";
    f.provider.register_profile(garbled, /*replace=*/true);
    VerificationOutcome outcome = verify_device(f.chain, f.provider, {}, "dev-01");
    CHECK(outcome.verdict == Verdict::RejectedBadSignature);
}

TEST_CASE("proof threshold separates trusted from insufficient") {
    Fixture f;
    f.provider.register_profile(profile_with("alice", f.alice.public_key, 1),
                                /*replace=*/true);
    TrustPolicy policy;  // default min_valid_proofs = 2
    VerificationOutcome outcome = verify_device(f.chain, f.provider, policy, "dev-01");
    CHECK(outcome.verdict == Verdict::RejectedInsufficientProofs);

    policy.min_valid_proofs = 1;
    CHECK(verify_device(f.chain, f.provider, policy, "dev-01").verdict == Verdict::Trusted);

    policy.min_valid_proofs = 0;
    CHECK(verify_device(f.chain, f.provider, policy, "dev-01").verdict == Verdict::Trusted);
}

TEST_CASE("required proof types must be present and valid") {
    Fixture f;  // alice has twitter, github, reddit proofs, all valid
    TrustPolicy policy;
    policy.min_valid_proofs = 0;
    policy.required_proof_types = {ProofType::Twitter};
    CHECK(verify_device(f.chain, f.provider, policy, "dev-01").verdict == Verdict::Trusted);

    policy.required_proof_types = {ProofType::Dns};
    CHECK(verify_device(f.chain, f.provider, policy, "dev-01").verdict ==
          Verdict::RejectedInsufficientProofs);
}

TEST_CASE("policy monotonicity: raising the threshold never trusts more") {
    Fixture f;
    Verdict previous = Verdict::Trusted;
    for (int min = 0; min <= 6; ++min) {
        TrustPolicy policy;
        policy.min_valid_proofs = min;
        Verdict verdict = verify_device(f.chain, f.provider, policy, "dev-01").verdict;
        if (previous != Verdict::Trusted) {
            CHECK(verdict != Verdict::Trusted);
        }
        previous = verdict;
    }
}

TEST_CASE("determinism: identical inputs give identical verdict and trace") {
    Fixture f;
    VerificationOutcome a = verify_device(f.chain, f.provider, {}, "dev-01");
    VerificationOutcome b = verify_device(f.chain, f.provider, {}, "dev-01");
    CHECK(a.verdict == b.verdict);
    CHECK(a.trace == b.trace);
}

TEST_CASE("provider errors propagate instead of becoming verdicts") {
    struct FailingProvider : IdentityProvider {
        std::optional<IdentityProfile> lookup_user(std::string_view) override {
            throw ProviderError(ProviderError::Kind::Transport, "down");
        }
    } provider;
    Fixture f;
    CHECK_THROWS_AS(verify_device(f.chain, provider, {}, "dev-01"), ProviderError);
}

TEST_CASE("the verdict always names the earliest failing stage") {
    // All 16 combinations of per-stage success, scripted through fixtures.
    for (int mask = 0; mask < 16; ++mask) {
        bool block_ok = mask & 1;
        bool user_ok = mask & 2;
        bool sig_ok = mask & 4;
        bool proofs_ok = mask & 8;

        KeyPair owner = seeded_pair(0x01);
        KeyPair impostor = seeded_pair(0x07);
        KeyPair device = seeded_pair(0x02);
        MockProvider provider;
        if (user_ok) {
            provider.register_profile(profile_with(
                "alice", sig_ok ? owner.public_key : impostor.public_key,
                proofs_ok ? 3 : 0));
        }
        Blockchain chain = Blockchain::new_chain(0);
        DeviceRecord record{"dev-01", "alice", device.public_key.to_base64()};
        chain = register_device(std::move(chain), owner.private_key, record, 1);

        std::string queried = block_ok ? "dev-01" : "dev-unregistered";
        Verdict verdict = verify_device(chain, provider, {}, queried).verdict;

        Verdict expected = Verdict::Trusted;
        if (!block_ok) expected = Verdict::RejectedNoBlock;
        else if (!user_ok) expected = Verdict::RejectedUnknownUser;
        else if (!sig_ok) expected = Verdict::RejectedBadSignature;
        else if (!proofs_ok) expected = Verdict::RejectedInsufficientProofs;

        INFO("mask=", mask);
        CHECK(verdict == expected);
    }
}

TEST_CASE("register_device end-to-end and error paths") {
    Fixture f;

    SUBCASE("cross-wired keys rejected") {
        KeyPair other_signer = seeded_pair(0x0A);
        DeviceRecord record{"dev-x", "alice", f.device.public_key.to_base64()};
        f.chain = register_device(std::move(f.chain), other_signer.private_key, record, 2);
        CHECK(verify_device(f.chain, f.provider, {}, "dev-x").verdict ==
              Verdict::RejectedBadSignature);
    }
    SUBCASE("duplicate registration") {
        DeviceRecord record{"dev-01", "alice", f.device.public_key.to_base64()};
        CHECK_THROWS_AS(
            f.chain = register_device(std::move(f.chain), f.alice.private_key, record, 2),
            AppendError);
    }
}

TEST_CASE("verdict names and exit codes are stable") {
    CHECK(to_string(Verdict::Trusted) == "Trusted");
    CHECK(verdict_from_string("RejectedNoBlock") == Verdict::RejectedNoBlock);
    CHECK(verdict_exit_code(Verdict::Trusted) == 0);
    CHECK(verdict_exit_code(Verdict::RejectedNoBlock) == 10);
    CHECK(verdict_exit_code(Verdict::RejectedUnknownUser) == 11);
    CHECK(verdict_exit_code(Verdict::RejectedBadSignature) == 12);
    CHECK(verdict_exit_code(Verdict::RejectedInsufficientProofs) == 13);
}
