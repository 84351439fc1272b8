#include "ehrdeleg/identity.hpp"

#include "ehrdeleg/encoding.hpp"
#include "json.hpp"

namespace ehrdeleg::identity {

namespace encoding = ehrdeleg::encoding;
using nlohmann::json;

namespace {
constexpr const char* kMethod = "sim";
}

std::string Did::to_string() const {
    return "did:" + method + ":" + method_specific_id;
}

Did Did::parse(const std::string& s) {
    if (s.rfind("did:", 0) != 0) {
        throw FormatError("did string must start with did:");
    }
    auto second = s.find(':', 4);
    if (second == std::string::npos) {
        throw FormatError("did string missing method-specific id");
    }
    Did did;
    did.method = s.substr(4, second - 4);
    did.method_specific_id = s.substr(second + 1);
    if (did.method.empty() || did.method_specific_id.empty()) {
        throw FormatError("empty did component");
    }
    encoding::hex_decode(did.method_specific_id);  // strict lowercase hex
    return did;
}

std::pair<Wallet, DidDocument> create_identity(uint64_t now, Rng& rng) {
    Wallet wallet;
    wallet.signing_keypair = crypto::generate_signing_keypair(rng);
    wallet.encryption_keypair = crypto::generate_encryption_keypair(rng);
    wallet.did.method = kMethod;
    wallet.did.method_specific_id =
        encoding::hex_encode(crypto::hash32(wallet.signing_keypair.public_key));

    DidDocument doc;
    doc.did = wallet.did;
    doc.signing_public_key = wallet.signing_keypair.public_key;
    doc.encryption_public_key = wallet.encryption_keypair.public_key;
    doc.created_at = now;
    return {std::move(wallet), std::move(doc)};
}

void register_did(const DidDocument& doc, ledger::Ledger& ledger) {
    ledger::DidRegistration reg;
    reg.did = doc.did.to_string();
    reg.signing_public = doc.signing_public_key;
    reg.encryption_public = doc.encryption_public_key;
    reg.created_at = doc.created_at;
    ledger.append(ledger::RecordKind::did_registration, reg.to_payload());
}

DidDocument resolve(const Did& did, const ledger::Ledger& ledger) {
    auto reg = ledger.find_registration(did.to_string());
    if (!reg) {
        throw NotFoundError("did not registered: " + did.to_string());
    }
    DidDocument doc;
    doc.did = did;
    doc.signing_public_key = reg->signing_public;
    doc.encryption_public_key = reg->encryption_public;
    doc.created_at = reg->created_at;
    return doc;
}

DidDocument resolve(const std::string& did, const ledger::Ledger& ledger) {
    return resolve(Did::parse(did), ledger);
}

std::string Wallet::export_json() const {
    json secrets_json = json::object();
    for (const auto& [label, value] : stored_secrets) {
        secrets_json[label] = encoding::hex_encode(value);
    }
    json j = {
        {"did", did.to_string()},
        {"signing_public", encoding::hex_encode(signing_keypair.public_key)},
        {"signing_private", encoding::hex_encode(signing_keypair.private_key)},
        {"encryption_public", encoding::hex_encode(encryption_keypair.public_key)},
        {"encryption_private", encoding::hex_encode(encryption_keypair.private_key)},
        {"credentials", stored_credentials},
        {"secrets", secrets_json},
    };
    return j.dump(2);
}

Wallet Wallet::import_json(const std::string& text) {
    json j = json::parse(text);
    Wallet wallet;
    wallet.did = Did::parse(j.at("did").get<std::string>());
    wallet.signing_keypair = {
        crypto::KeyPurpose::signing,
        encoding::hex_decode(j.at("signing_public").get<std::string>()),
        encoding::hex_decode(j.at("signing_private").get<std::string>())};
    wallet.encryption_keypair = {
        crypto::KeyPurpose::encryption,
        encoding::hex_decode(j.at("encryption_public").get<std::string>()),
        encoding::hex_decode(j.at("encryption_private").get<std::string>())};
    wallet.stored_credentials =
        j.at("credentials").get<std::vector<std::string>>();
    for (const auto& [label, value] : j.at("secrets").items()) {
        wallet.stored_secrets[label] =
            encoding::hex_decode(value.get<std::string>());
    }
    return wallet;
}

}  // namespace ehrdeleg::identity
