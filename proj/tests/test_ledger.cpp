#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <thread>

#include "ehrdeleg/encoding.hpp"
#include "ehrdeleg/identity.hpp"
#include "ehrdeleg/ledger.hpp"

using namespace ehrdeleg;
using namespace ehrdeleg::ledger;
namespace enc = ehrdeleg::encoding;

namespace {

AccessEvent sample_event(uint8_t tag) {
    AccessEvent e;
    e.pseudo_id = Bytes(32, tag);
    e.ehr_id = Bytes(16, tag);
    e.actor_tag = Bytes(32, static_cast<uint8_t>(tag + 1));
    e.event = AccessEventType::notary_verified;
    e.timestamp = tag;
    return e;
}

struct AuthFixture {
    crypto::KeyPair ephemeral;
    AuthorizationRecord record;
    identity::Wallet notary_wallet;
    threshold::KeyShareSet shares;
};

AuthFixture make_authorization(Rng& rng, ledger::Ledger& chain, const Bytes& ehr_id) {
    AuthFixture fx;
    fx.ephemeral = crypto::generate_signing_keypair(rng);

    auto [notary_wallet, notary_doc] = identity::create_identity(0, rng);
    identity::register_did(notary_doc, chain);
    fx.notary_wallet = notary_wallet;

    fx.shares = threshold::generate_key_shares({3, 2},
                                               crypto::CipherProfile::production(),
                                               rng);
    threshold::PartyShares notary_shares;
    notary_shares.party_index = 1;
    for (const auto& b : fx.shares.holdings_of(1)) {
        notary_shares.keys[b] = fx.shares.keys.at(b);
    }

    fx.record.pseudo_id = crypto::hash32(fx.ephemeral.public_key);
    fx.record.ephemeral_public_key = fx.ephemeral.public_key;
    fx.record.ehr_id = ehr_id;
    fx.record.mode = threshold::CombineMode::xor_mode;
    fx.record.params = {3, 2};
    Bytes tag = recipient_tag(notary_wallet.did.to_string(), fx.record.pseudo_id);
    fx.record.blinded_shares[tag] =
        crypto::pk_encrypt(notary_shares.serialize(),
                           notary_wallet.encryption_public(), rng);
    fx.record.posting_signature =
        crypto::sign(fx.record.signing_bytes(), fx.ephemeral);
    return fx;
}

}  // namespace

TEST_CASE("genesis and chaining") {
    Ledger chain;
    uint64_t s0 = chain.append(RecordKind::access_event, sample_event(1).to_payload());
    CHECK(s0 == 0);
    auto records = chain.records();
    CHECK(records[0].prev_hash == Bytes(32, 0));

    uint64_t s1 = chain.append(RecordKind::access_event, sample_event(2).to_payload());
    CHECK(s1 == 1);
    records = chain.records();
    CHECK(records[1].prev_hash == records[0].record_hash);
    CHECK(chain.verify_chain());
}

TEST_CASE("export/import round trip; tampering and deletion are caught") {
    Ledger chain;
    for (uint8_t i = 1; i <= 4; ++i) {
        chain.append(RecordKind::access_event, sample_event(i).to_payload());
    }
    std::string text = chain.export_text();

    Ledger loaded;
    loaded.load_text(text);
    CHECK(loaded.verify_chain());
    CHECK(loaded.export_text() == text);

    // flip one payload hex digit
    size_t pos = text.find("\"payload\":\"");
    REQUIRE(pos != std::string::npos);
    pos += std::string("\"payload\":\"").size();
    std::string tampered = text;
    tampered[pos] = tampered[pos] == '0' ? '1' : '0';
    Ledger bad;
    CHECK_THROWS_AS(bad.load_text(tampered), ValidationError);

    // delete a middle record
    std::istringstream is(text);
    std::string line, truncated;
    int lineno = 0;
    while (std::getline(is, line)) {
        if (lineno++ == 1) continue;
        truncated += line + "\n";
    }
    Ledger gap;
    CHECK_THROWS_AS(gap.load_text(truncated), ValidationError);
}

TEST_CASE("authorization payload validation") {
    Rng rng(5);
    Ledger chain;
    AuthFixture fx = make_authorization(rng, chain, Bytes(16, 9));

    CHECK_NOTHROW(chain.append(RecordKind::authorization, fx.record.to_payload()));

    AuthorizationRecord bad = fx.record;
    bad.pseudo_id[0] ^= 0x01;  // no longer hash(ephemeral key)
    CHECK_THROWS_AS(chain.append(RecordKind::authorization, bad.to_payload()),
                    ValidationError);

    AuthorizationRecord unsigned_rec = fx.record;
    unsigned_rec.ehr_id[0] ^= 0x01;  // signature no longer covers the payload
    CHECK_THROWS_AS(chain.append(RecordKind::authorization, unsigned_rec.to_payload()),
                    ValidationError);
}

TEST_CASE("find_authorization returns the latest match per (pseudo, ehr)") {
    Rng rng(6);
    Ledger chain;
    Bytes ehr_a(16, 1), ehr_b(16, 2);
    AuthFixture fx_a = make_authorization(rng, chain, ehr_a);
    chain.append(RecordKind::authorization, fx_a.record.to_payload());

    AuthorizationRecord second = fx_a.record;
    second.ehr_id = ehr_b;
    second.posting_signature = crypto::sign(second.signing_bytes(), fx_a.ephemeral);
    chain.append(RecordKind::authorization, second.to_payload());

    CHECK(chain.find_authorization(fx_a.record.pseudo_id, ehr_a).has_value());
    CHECK(chain.find_authorization(fx_a.record.pseudo_id, ehr_b).has_value());
    CHECK_FALSE(chain.find_authorization(fx_a.record.pseudo_id, Bytes(16, 3))
                    .has_value());
    CHECK_FALSE(chain.find_authorization(Bytes(32, 0xee), ehr_a).has_value());
}

TEST_CASE("fetch_shares_for recovers exactly the recipient's holdings") {
    Rng rng(7);
    Ledger chain;
    AuthFixture fx = make_authorization(rng, chain, Bytes(16, 4));

    threshold::PartyShares shares = fetch_shares_for(
        fx.notary_wallet.did.to_string(), fx.notary_wallet.encryption_keypair,
        fx.record);
    CHECK(shares.party_index == 1);
    CHECK(shares.keys.size() == 2);  // party 1 of (3,2) holds {1,2} and {1,3}
    CHECK(shares.keys.count({1, 2}) == 1);
    CHECK(shares.keys.count({1, 3}) == 1);
    CHECK(shares.keys.at({1, 2}).key_bytes == fx.shares.keys.at({1, 2}).key_bytes);

    auto [outsider, outsider_doc] = identity::create_identity(0, rng);
    CHECK_THROWS_AS(fetch_shares_for(outsider.did.to_string(),
                                     outsider.encryption_keypair, fx.record),
                    NotFoundError);

    AuthorizationRecord tampered = fx.record;
    tampered.blinded_shares.begin()->second[40] ^= 0x01;
    CHECK_THROWS_AS(fetch_shares_for(fx.notary_wallet.did.to_string(),
                                     fx.notary_wallet.encryption_keypair, tampered),
                    AuthenticityError);
}

TEST_CASE("revocation must be signed by a registered pseudo identity") {
    Rng rng(8);
    Ledger chain;
    AuthFixture fx = make_authorization(rng, chain, Bytes(16, 5));
    chain.append(RecordKind::authorization, fx.record.to_payload());

    RevocationEntry entry;
    entry.vc_id = Bytes(32, 0xaa);
    entry.revoked_by = fx.record.pseudo_id;
    entry.revocation_signature = crypto::sign(entry.signing_bytes(), fx.ephemeral);
    CHECK_NOTHROW(chain.append(RecordKind::revocation, entry.to_payload()));
    CHECK(chain.is_revoked(entry.vc_id));
    CHECK_FALSE(chain.is_revoked(Bytes(32, 0xbb)));

    crypto::KeyPair unrelated = crypto::generate_signing_keypair(rng);
    RevocationEntry forged;
    forged.vc_id = Bytes(32, 0xcc);
    forged.revoked_by = fx.record.pseudo_id;  // claims the same pseudo
    forged.revocation_signature = crypto::sign(forged.signing_bytes(), unrelated);
    CHECK_THROWS_AS(chain.append(RecordKind::revocation, forged.to_payload()),
                    ValidationError);
}

TEST_CASE("did registration payload must match the key hash") {
    Rng rng(9);
    Ledger chain;
    auto [wallet, doc] = identity::create_identity(0, rng);

    DidRegistration reg;
    reg.did = doc.did.to_string();
    reg.signing_public = doc.signing_public_key;
    reg.encryption_public = doc.encryption_public_key;
    CHECK_NOTHROW(chain.append(RecordKind::did_registration, reg.to_payload()));

    DidRegistration bad = reg;
    bad.signing_public[0] ^= 0x01;
    CHECK_THROWS_AS(chain.append(RecordKind::did_registration, bad.to_payload()),
                    ValidationError);
}

TEST_CASE("concurrent appends form a single verified order") {
    Ledger chain;
    auto worker = [&](uint8_t base) {
        for (int i = 0; i < 50; ++i) {
            chain.append(RecordKind::access_event,
                         sample_event(static_cast<uint8_t>(base + i % 5)).to_payload());
        }
    };
    std::thread t1(worker, 1), t2(worker, 10);
    t1.join();
    t2.join();
    CHECK(chain.size() == 100);
    CHECK(chain.verify_chain());
}
