#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "ehrdeleg/ehr_store.hpp"
#include "ehrdeleg/encoding.hpp"

using namespace ehrdeleg;
using namespace ehrdeleg::store;
namespace enc = ehrdeleg::encoding;

TEST_CASE("upload assigns fresh 16-byte ids and round-trips") {
    Rng rng(1);
    ledger::Ledger chain;
    Store s(chain);

    Bytes payload = rng.bytes(1024);
    Bytes id = s.upload(payload, "did:sim:aa", rng);
    CHECK(id.size() == 16);

    Bytes id2 = s.upload(payload, "did:sim:aa", rng);
    CHECK(id2 != id);

    CHECK_THROWS_AS(s.upload({}, "did:sim:aa", rng), ParameterError);

    AccessLink link = s.grant_link(id, "did:sim:bb", Bytes(32, 1), 10, 0, rng);
    CHECK(s.download(link.token, 5) == payload);
}

TEST_CASE("links expire and never come back") {
    Rng rng(2);
    ledger::Ledger chain;
    Store s(chain);
    Bytes id = s.upload(rng.bytes(64), "did:sim:aa", rng);
    AccessLink link = s.grant_link(id, "did:sim:bb", Bytes(32, 1), 10, 100, rng);

    CHECK(s.download(link.token, 109) == s.download(link.token, 101));
    CHECK_THROWS_AS(s.download(link.token, 110), ParameterError);  // at expires_at
    CHECK_THROWS_AS(s.download(link.token, 111), ParameterError);
    CHECK_THROWS_AS(s.download(link.token, 5000), ParameterError);
}

TEST_CASE("unknown ids and forged tokens") {
    Rng rng(3);
    ledger::Ledger chain;
    Store s(chain);
    CHECK_THROWS_AS(s.grant_link(Bytes(16, 9), "did:sim:bb", Bytes(32, 1), 10, 0, rng),
                    NotFoundError);
    s.upload(rng.bytes(64), "did:sim:aa", rng);
    CHECK_THROWS_AS(s.download(rng.bytes(32), 0), NotFoundError);
}

TEST_CASE("a link is confined to its blob") {
    Rng rng(4);
    ledger::Ledger chain;
    Store s(chain);
    Bytes blob_x = rng.bytes(100);
    Bytes blob_y = rng.bytes(100);
    Bytes id_x = s.upload(blob_x, "did:sim:aa", rng);
    Bytes id_y = s.upload(blob_y, "did:sim:aa", rng);

    AccessLink link_x = s.grant_link(id_x, "did:sim:bb", Bytes(32, 1), 10, 0, rng);
    AccessLink link_y = s.grant_link(id_y, "did:sim:bb", Bytes(32, 1), 10, 0, rng);
    CHECK(s.download(link_x.token, 1) == blob_x);
    CHECK(s.download(link_y.token, 1) == blob_y);
}

TEST_CASE("downloads append download_completed events") {
    Rng rng(5);
    ledger::Ledger chain;
    Store s(chain);
    Bytes id = s.upload(rng.bytes(64), "did:sim:aa", rng);
    Bytes pseudo(32, 7);
    AccessLink link = s.grant_link(id, "did:sim:bb", pseudo, 10, 0, rng);
    s.download(link.token, 1);

    auto events = chain.access_events();
    REQUIRE(events.size() == 1);
    CHECK(events[0].event == ledger::AccessEventType::download_completed);
    CHECK(events[0].pseudo_id == pseudo);
    CHECK(events[0].ehr_id == id);
    CHECK(events[0].actor_tag == ledger::actor_tag("did:sim:bb", pseudo));
}

TEST_CASE("custodian state holds neither sk nor plaintext") {
    Rng rng(6);
    ledger::Ledger chain;
    Store s(chain);

    Bytes sk = rng.bytes(32);
    Bytes plaintext = enc::str_bytes("highly sensitive medical narrative text");
    Bytes ciphertext = crypto::sym_encrypt(plaintext, crypto::BlockCipherKey{sk}, rng);
    Bytes id = s.upload(ciphertext, "did:sim:aa", rng);
    s.grant_link(id, "did:sim:bb", Bytes(32, 1), 10, 0, rng);

    std::string state = s.export_json();
    CHECK(state.find(enc::hex_encode(sk)) == std::string::npos);
    CHECK(state.find(enc::hex_encode(plaintext)) == std::string::npos);
    CHECK(state.find("sensitive") == std::string::npos);
    // the ciphertext itself is there
    CHECK(state.find(enc::hex_encode(ciphertext)) != std::string::npos);
}

TEST_CASE("test hooks mutate state visibly") {
    Rng rng(7);
    ledger::Ledger chain;
    Store s(chain);
    Bytes id = s.upload(rng.bytes(64), "did:sim:aa", rng);

    s.inject_state_for_tests("leak", Bytes{0xde, 0xad});
    CHECK(s.export_json().find("dead") != std::string::npos);

    Bytes before = s.export_json().find("tampered") == std::string::npos
                       ? Bytes{}
                       : Bytes{1};
    s.tamper_blob_for_tests(id, 3);
    AccessLink link = s.grant_link(id, "did:sim:bb", Bytes(32, 1), 10, 0, rng);
    Bytes blob = s.download(link.token, 1);
    s.tamper_blob_for_tests(id, 3);  // restore
    Bytes restored = s.download(link.token, 2);
    CHECK(blob != restored);
}
