#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "ehrdeleg/actors.hpp"
#include "ehrdeleg/encoding.hpp"
#include "ehrdeleg/scenario.hpp"

namespace py = pybind11;
using namespace ehrdeleg;

namespace {

py::bytes to_py(const Bytes& b) {
    return py::bytes(reinterpret_cast<const char*>(b.data()), b.size());
}

Bytes from_py(const py::bytes& b) {
    std::string s = b;
    return Bytes(s.begin(), s.end());
}

threshold::CombineMode mode_arg(const std::string& mode) {
    return threshold::mode_from_name(mode);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "pre-delegated multi-party EHR access protocol simulator";

    py::register_exception<Error>(m, "ProtocolError");

    // ---- scenario entry points ----
    m.def("run_scenario", &scenario::run, py::arg("config_path"), py::arg("out_dir"),
          py::arg("seed") = std::nullopt, py::arg("profile") = std::nullopt,
          "execute a scenario config; returns the process exit code");
    m.def("audit", &scenario::audit_cli, py::arg("out_dir"),
          "recompute the who-knows-what audit for a run directory");
    m.def(
        "replay",
        [](const std::string& dir) {
            scenario::ReplayVerdict v = scenario::replay_dir(dir);
            return py::make_tuple(v.identical, v.detail);
        },
        py::arg("out_dir"), "re-execute a run; returns (identical, detail)");

    // ---- threshold primitives ----
    py::class_<threshold::KeyShareSet>(m, "KeyShareSet")
        .def_property_readonly("key_count",
                               [](const threshold::KeyShareSet& s) {
                                   return s.keys.size();
                               })
        .def("holdings_of", [](const threshold::KeyShareSet& s, int party) {
            std::vector<std::string> names;
            for (const auto& b : s.holdings_of(party)) {
                names.push_back(threshold::index_set_name(b));
            }
            return names;
        });

    py::class_<threshold::CipherKey>(m, "CipherKey")
        .def_property_readonly(
            "nonce_r", [](const threshold::CipherKey& c) { return to_py(c.nonce_r); })
        .def_property_readonly(
            "masked_key",
            [](const threshold::CipherKey& c) { return to_py(c.masked_key); })
        .def_property_readonly("mode", [](const threshold::CipherKey& c) {
            return threshold::mode_name(c.mode);
        });

    m.def(
        "generate_key_shares",
        [](int n, int t, const std::string& profile, uint64_t seed) {
            Rng rng(seed);
            return threshold::generate_key_shares(
                {n, t}, crypto::CipherProfile::by_name(profile), rng);
        },
        py::arg("n"), py::arg("t"), py::arg("profile") = "production",
        py::arg("seed") = 0);

    m.def(
        "derive_cipher_key",
        [](const py::bytes& sk, const threshold::KeyShareSet& shares,
           const std::string& mode, const std::string& profile, uint64_t seed) {
            Rng rng(seed);
            return threshold::derive_cipher_key(
                from_py(sk), shares, mode_arg(mode),
                crypto::CipherProfile::by_name(profile), rng);
        },
        py::arg("sk"), py::arg("shares"), py::arg("mode") = "xor",
        py::arg("profile") = "production", py::arg("seed") = 0);

    m.def(
        "reconstruct",
        [](const threshold::CipherKey& cipher_key,
           const threshold::KeyShareSet& shares, const std::vector<int>& parties,
           const std::string& profile) {
            const crypto::CipherProfile& p = crypto::CipherProfile::by_name(profile);
            size_t blocks = cipher_key.masked_key.size() / p.block_width;
            std::vector<threshold::PartialContribution> contributions;
            for (int party : parties) {
                threshold::PartyShares ps;
                ps.party_index = party;
                for (const auto& b : shares.holdings_of(party)) {
                    ps.keys[b] = shares.keys.at(b);
                }
                contributions.push_back(threshold::compute_partial(
                    ps, cipher_key.nonce_r, p, blocks));
            }
            return to_py(threshold::combine_xor(cipher_key, contributions, p));
        },
        py::arg("cipher_key"), py::arg("shares"), py::arg("parties"),
        py::arg("profile") = "production",
        "compute partial contributions for the given parties and combine them");

    m.def(
        "secrecy_verdict",
        [](int n, int t, const std::vector<int>& coalition, uint64_t seed) {
            Rng rng(seed);
            auto v = threshold::secrecy_oracle({n, t}, coalition,
                                               crypto::CipherProfile::toy(), rng);
            return v == threshold::SecrecyVerdict::reconstructs ? "reconstructs"
                                                                : "hidden";
        },
        py::arg("n"), py::arg("t"), py::arg("coalition"), py::arg("seed") = 0,
        "toy-profile information-theoretic verdict for a coalition");

    // ---- one-call protocol demo ----
    m.def(
        "demo_access",
        [](uint64_t seed, const std::string& profile, const std::string& mode,
           int notaries, int n, int t) {
            actors::System sys(crypto::CipherProfile::by_name(profile), seed);
            sys.create_actors(notaries, 1);
            Bytes ehr = encoding::str_bytes("{\"demo\":true}");
            Bytes ehr_id = sys.flow1_store_ehr(ehr);
            sys.flow2_delegate(ehr_id, {n, t}, 100, mode_arg(mode));
            std::vector<int> use;
            for (int k = 0; k + 1 < t; ++k) use.push_back(k);
            actors::AccessOutcome outcome = sys.flow3_access(0, 0, use);
            py::dict out;
            out["granted"] = outcome.granted;
            out["plaintext"] = to_py(outcome.plaintext);
            out["matches"] = outcome.granted && outcome.plaintext == ehr;
            out["ledger_records"] = sys.ledger().size();
            return out;
        },
        py::arg("seed") = 0, py::arg("profile") = "production",
        py::arg("mode") = "xor", py::arg("notaries") = 2, py::arg("n") = 3,
        py::arg("t") = 2,
        "store, delegate and access one record end to end; returns a summary");

    m.attr("__version__") = "0.1.0";
}
