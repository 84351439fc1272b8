#include "ehrdeleg/ehr_store.hpp"

#include "ehrdeleg/encoding.hpp"
#include "json.hpp"

namespace ehrdeleg::store {

namespace encoding = ehrdeleg::encoding;
using nlohmann::json;

Bytes Store::upload(const Bytes& ciphertext, const std::string& uploader_did,
                    Rng& rng) {
    if (ciphertext.empty()) {
        throw ParameterError("refusing to store an empty blob");
    }
    Bytes ehr_id = rng.bytes(16);
    while (blobs_.count(ehr_id)) {
        ehr_id = rng.bytes(16);
    }
    blobs_[ehr_id] = ciphertext;
    uploaders_[ehr_id] = uploader_did;
    return ehr_id;
}

AccessLink Store::grant_link(const Bytes& ehr_id, const std::string& dr_did,
                             const Bytes& pseudo_id, uint64_t ttl, uint64_t now,
                             Rng& rng) {
    if (!blobs_.count(ehr_id)) {
        throw NotFoundError("unknown ehr_id");
    }
    Bytes token = rng.bytes(32);
    Bytes tag_input = encoding::str_bytes(dr_did);
    tag_input.insert(tag_input.end(), token.begin(), token.end());

    LinkRecord rec;
    rec.ehr_id = ehr_id;
    rec.expires_at = now + ttl;
    rec.issued_to_tag = crypto::hash32(tag_input);
    rec.pseudo_id = pseudo_id;
    rec.actor_tag = ledger::actor_tag(dr_did, pseudo_id);
    links_[token] = rec;

    return AccessLink{token, ehr_id, rec.expires_at, rec.issued_to_tag};
}

Bytes Store::download(const Bytes& token, uint64_t now) {
    auto it = links_.find(token);
    if (it == links_.end()) {
        throw NotFoundError("unknown access token");
    }
    const LinkRecord& rec = it->second;
    if (now >= rec.expires_at) {
        throw ParameterError("access link expired");
    }
    ledger::AccessEvent event;
    event.pseudo_id = rec.pseudo_id;
    event.ehr_id = rec.ehr_id;
    event.actor_tag = rec.actor_tag;
    event.event = ledger::AccessEventType::download_completed;
    event.timestamp = now;
    ledger_.append(ledger::RecordKind::access_event, event.to_payload());
    return blobs_.at(rec.ehr_id);
}

bool Store::has_blob(const Bytes& ehr_id) const { return blobs_.count(ehr_id) > 0; }

std::string Store::export_json() const {
    json blobs_json = json::object();
    for (const auto& [id, ct] : blobs_) {
        blobs_json[encoding::hex_encode(id)] = encoding::hex_encode(ct);
    }
    json links_json = json::array();
    for (const auto& [token, rec] : links_) {
        links_json.push_back({
            {"actor_tag", encoding::hex_encode(rec.actor_tag)},
            {"ehr_id", encoding::hex_encode(rec.ehr_id)},
            {"expires_at", rec.expires_at},
            {"issued_to_tag", encoding::hex_encode(rec.issued_to_tag)},
            {"pseudo_id", encoding::hex_encode(rec.pseudo_id)},
            {"token", encoding::hex_encode(token)},
        });
    }
    json uploaders_json = json::object();
    for (const auto& [id, did] : uploaders_) {
        uploaders_json[encoding::hex_encode(id)] = did;
    }
    json j = {
        {"blobs", blobs_json},
        {"links", links_json},
        {"uploaders", uploaders_json},
    };
    for (const auto& [label, data] : injected_) {
        j[label] = encoding::hex_encode(data);
    }
    return j.dump(2);
}

void Store::inject_state_for_tests(const std::string& label, const Bytes& data) {
    injected_[label] = data;
}

void Store::tamper_blob_for_tests(const Bytes& ehr_id, size_t index) {
    auto it = blobs_.find(ehr_id);
    if (it == blobs_.end()) {
        throw NotFoundError("unknown ehr_id");
    }
    it->second.at(index) ^= 0x01;
}

}  // namespace ehrdeleg::store
