#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "ehrdeleg/crypto.hpp"
#include "ehrdeleg/ledger.hpp"

namespace ehrdeleg::identity {

// did:sim:<hex of hash(signing public key)>
struct Did {
    std::string method;
    std::string method_specific_id;

    std::string to_string() const;
    static Did parse(const std::string& s);
    bool operator==(const Did&) const = default;
};

struct DidDocument {
    Did did;
    Bytes signing_public_key;
    Bytes encryption_public_key;
    uint64_t created_at = 0;
};

struct Wallet {
    Did did;
    crypto::KeyPair signing_keypair;
    crypto::KeyPair encryption_keypair;
    std::vector<std::string> stored_credentials;  // serialized credentials
    std::map<std::string, Bytes> stored_secrets;

    crypto::PublicKey signing_public() const {
        return {crypto::KeyPurpose::signing, signing_keypair.public_key};
    }
    crypto::PublicKey encryption_public() const {
        return {crypto::KeyPurpose::encryption, encryption_keypair.public_key};
    }

    std::string export_json() const;
    static Wallet import_json(const std::string& text);
};

std::pair<Wallet, DidDocument> create_identity(uint64_t now, Rng& rng);

void register_did(const DidDocument& doc, ledger::Ledger& ledger);

// Earliest registration wins; no key rotation.
DidDocument resolve(const Did& did, const ledger::Ledger& ledger);
DidDocument resolve(const std::string& did, const ledger::Ledger& ledger);

}  // namespace ehrdeleg::identity
