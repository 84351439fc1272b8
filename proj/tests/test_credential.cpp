#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "ehrdeleg/actors.hpp"
#include "ehrdeleg/credential.hpp"
#include "ehrdeleg/encoding.hpp"

using namespace ehrdeleg;
using namespace ehrdeleg::credential;
namespace enc = ehrdeleg::encoding;

namespace {

struct Fixture {
    Rng rng{101};
    ledger::Ledger chain;
    identity::Wallet owner, dr, dr2, notary1, notary2, dc;
    crypto::KeyPair ephemeral;
    DelegationClaims claims;

    Fixture() {
        auto reg = [&](identity::Wallet& w) {
            auto [wallet, doc] = identity::create_identity(0, rng);
            w = wallet;
            identity::register_did(doc, chain);
        };
        reg(owner);
        reg(dr);
        reg(dr2);
        reg(notary1);
        reg(notary2);
        reg(dc);

        ephemeral = crypto::generate_signing_keypair(rng);

        claims.issuer_did = owner.did.to_string();
        claims.subject_dr_did = dr.did.to_string();
        claims.notary_dids = {notary1.did.to_string(), notary2.did.to_string()};
        claims.dc_did = dc.did.to_string();
        claims.pseudo_id = crypto::hash32(ephemeral.public_key);
        claims.ehr_id = rng.bytes(16);
        claims.cipher_key.nonce_r = rng.bytes(32);
        claims.cipher_key.masked_key = rng.bytes(32);
        claims.cipher_key.params = {3, 2};
        claims.cipher_key.mode = threshold::CombineMode::xor_mode;
        claims.expiry = 100;
        claims.authorized_dr_dids = {dr.did.to_string(), dr2.did.to_string()};
    }

    // posts the authorization record so revocations can validate
    void post_authorization() {
        ledger::AuthorizationRecord record;
        record.pseudo_id = claims.pseudo_id;
        record.ephemeral_public_key = ephemeral.public_key;
        record.ehr_id = claims.ehr_id;
        record.mode = threshold::CombineMode::xor_mode;
        record.params = {3, 2};
        record.blinded_shares[ledger::recipient_tag(dc.did.to_string(),
                                                    claims.pseudo_id)] =
            crypto::pk_encrypt(Bytes{1}, dc.encryption_public(), rng);
        record.posting_signature = crypto::sign(record.signing_bytes(), ephemeral);
        chain.append(ledger::RecordKind::authorization, record.to_payload());
    }

    std::set<std::string> all_claims(const DelegationCredential& c) {
        std::set<std::string> names;
        for (const auto& [n, v] : c.claims) names.insert(n);
        return names;
    }
};

}  // namespace

TEST_CASE("issue then verify full disclosure") {
    Fixture fx;
    DelegationCredential vc = issue(fx.owner, fx.claims, fx.chain, 0, fx.rng);

    Bytes challenge = fx.rng.bytes(32);
    Presentation p = present(vc, fx.dr, fx.all_claims(vc), challenge);
    Verdict v = verify_presentation(p, challenge, fx.chain, 10);
    CHECK(v.accepted);

    // serialization round trip preserves acceptance
    DelegationCredential back = DelegationCredential::deserialize(vc.serialize());
    Presentation p2 = present(back, fx.dr, fx.all_claims(back), challenge);
    CHECK(verify_presentation(p2, challenge, fx.chain, 10).accepted);
}

TEST_CASE("fresh salts give fresh vc ids") {
    Fixture fx;
    DelegationCredential a = issue(fx.owner, fx.claims, fx.chain, 0, fx.rng);
    DelegationCredential b = issue(fx.owner, fx.claims, fx.chain, 0, fx.rng);
    CHECK(a.vc_id != b.vc_id);
}

TEST_CASE("issue validates inputs") {
    Fixture fx;
    DelegationClaims missing = fx.claims;
    missing.ehr_id.clear();
    CHECK_THROWS_AS(issue(fx.owner, missing, fx.chain, 0, fx.rng), ParameterError);

    DelegationClaims stale = fx.claims;
    stale.expiry = 0;
    CHECK_THROWS_AS(issue(fx.owner, stale, fx.chain, 0, fx.rng), ParameterError);

    Rng other_rng(999);
    auto [stranger, stranger_doc] = identity::create_identity(0, other_rng);
    DelegationClaims dangling = fx.claims;
    dangling.subject_dr_did = stranger.did.to_string();  // unregistered
    CHECK_THROWS_AS(issue(fx.owner, dangling, fx.chain, 0, fx.rng), NotFoundError);
}

TEST_CASE("presentation discloses exactly the requested claims") {
    Fixture fx;
    DelegationCredential vc = issue(fx.owner, fx.claims, fx.chain, 0, fx.rng);
    Bytes challenge = fx.rng.bytes(32);

    Presentation p = present(vc, fx.dr, actors::notary_disclosure(), challenge);
    std::string text = p.serialize();

    // undisclosed claim bytes and their salts stay out of the serialization
    CHECK(text.find(enc::hex_encode(vc.claims.at(kClaimMaskedKey))) ==
          std::string::npos);
    CHECK(text.find(enc::hex_encode(vc.salts.at(kClaimMaskedKey))) ==
          std::string::npos);
    CHECK(text.find(enc::hex_encode(vc.claims.at(kClaimCustodian))) ==
          std::string::npos);
    // disclosed ones are present
    CHECK(text.find(enc::hex_encode(vc.claims.at(kClaimPseudoId))) !=
          std::string::npos);

    CHECK(verify_presentation(p, challenge, fx.chain, 10).accepted);
}

TEST_CASE("empty disclosure is well-formed but fails the expiry requirement") {
    Fixture fx;
    DelegationCredential vc = issue(fx.owner, fx.claims, fx.chain, 0, fx.rng);
    Bytes challenge = fx.rng.bytes(32);
    Presentation p = present(vc, fx.dr, {}, challenge);
    CHECK(p.disclosed.empty());
    Verdict v = verify_presentation(p, challenge, fx.chain, 10);
    CHECK_FALSE(v.accepted);
    CHECK(v.reason == RejectReason::expiry_not_disclosed);
}

TEST_CASE("non-subject wallets cannot present") {
    Fixture fx;
    DelegationCredential vc = issue(fx.owner, fx.claims, fx.chain, 0, fx.rng);
    CHECK_THROWS_AS(present(vc, fx.dr2, {}, fx.rng.bytes(32)), BindingError);
}

TEST_CASE("verification reject reasons") {
    Fixture fx;
    DelegationCredential vc = issue(fx.owner, fx.claims, fx.chain, 0, fx.rng);
    Bytes challenge = fx.rng.bytes(32);
    auto disclosure = fx.all_claims(vc);

    SUBCASE("tampered disclosed claim") {
        Presentation p = present(vc, fx.dr, disclosure, challenge);
        p.disclosed[kClaimEhrId].second[0] ^= 0x01;
        Verdict v = verify_presentation(p, challenge, fx.chain, 10);
        CHECK(v.reason == RejectReason::commitment_mismatch);
    }
    SUBCASE("tampered salt") {
        Presentation p = present(vc, fx.dr, disclosure, challenge);
        p.disclosed[kClaimEhrId].first[0] ^= 0x01;
        Verdict v = verify_presentation(p, challenge, fx.chain, 10);
        CHECK(v.reason == RejectReason::commitment_mismatch);
    }
    SUBCASE("tampered issuer signature") {
        Presentation p = present(vc, fx.dr, disclosure, challenge);
        p.issuer_signature[10] ^= 0x01;
        Verdict v = verify_presentation(p, challenge, fx.chain, 10);
        CHECK(v.reason == RejectReason::bad_signature);
    }
    SUBCASE("replay under a new challenge") {
        Presentation p = present(vc, fx.dr, disclosure, challenge);
        CHECK(verify_presentation(p, challenge, fx.chain, 10).accepted);
        Verdict v = verify_presentation(p, fx.rng.bytes(32), fx.chain, 10);
        CHECK(v.reason == RejectReason::bad_binding);
    }
    SUBCASE("stolen presentation rebound to a different holder") {
        Presentation p = present(vc, fx.dr, disclosure, challenge);
        p.holder_did = fx.dr2.did.to_string();
        Bytes binding = challenge;
        binding.insert(binding.end(), vc.vc_id.begin(), vc.vc_id.end());
        p.holder_challenge_signature =
            crypto::sign(binding, fx.dr2.signing_keypair);
        Verdict v = verify_presentation(p, challenge, fx.chain, 10);
        CHECK(v.reason == RejectReason::bad_binding);
    }
    SUBCASE("expired") {
        Presentation p = present(vc, fx.dr, disclosure, challenge);
        Verdict v = verify_presentation(p, challenge, fx.chain, fx.claims.expiry);
        CHECK(v.reason == RejectReason::expired);
    }
}

TEST_CASE("revocation lifecycle") {
    Fixture fx;
    fx.post_authorization();
    DelegationCredential vc = issue(fx.owner, fx.claims, fx.chain, 0, fx.rng);
    Bytes challenge = fx.rng.bytes(32);
    auto disclosure = fx.all_claims(vc);

    Presentation p = present(vc, fx.dr, disclosure, challenge);
    CHECK(verify_presentation(p, challenge, fx.chain, 10).accepted);

    revoke(fx.ephemeral, vc.vc_id, fx.chain);
    Verdict v = verify_presentation(p, challenge, fx.chain, 10);
    CHECK(v.reason == RejectReason::revoked);

    // idempotent: one effective entry
    revoke(fx.ephemeral, vc.vc_id, fx.chain);
    CHECK(fx.chain.revocations().size() == 1);

    crypto::KeyPair unrelated = crypto::generate_signing_keypair(fx.rng);
    CHECK_THROWS_AS(revoke(unrelated, vc.vc_id, fx.chain), AuthorizationError);
}

TEST_CASE("single-byte flips over the serialization never verify (sampled)") {
    Fixture fx;
    fx.post_authorization();
    DelegationCredential vc = issue(fx.owner, fx.claims, fx.chain, 0, fx.rng);
    std::string serialized = vc.serialize();
    Bytes challenge = fx.rng.bytes(32);
    auto disclosure = fx.all_claims(vc);

    int rejected_parse = 0, rejected_verify = 0;
    for (size_t i = 0; i < serialized.size(); i += 11) {
        std::string mutated = serialized;
        mutated[i] = static_cast<char>(mutated[i] ^ 0x01);
        if (mutated[i] == serialized[i]) continue;
        try {
            DelegationCredential bad = DelegationCredential::deserialize(mutated);
            Presentation p = present(bad, fx.dr, fx.all_claims(bad), challenge);
            Verdict v = verify_presentation(p, challenge, fx.chain, 10);
            REQUIRE_FALSE(v.accepted);
            ++rejected_verify;
        } catch (const Error&) {
            ++rejected_parse;
        }
    }
    CHECK(rejected_parse > 0);
    CHECK(rejected_verify > 0);
}
