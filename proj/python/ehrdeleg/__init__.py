from ehrdeleg._core import (
    CipherKey,
    KeyShareSet,
    ProtocolError,
    audit,
    demo_access,
    derive_cipher_key,
    generate_key_shares,
    reconstruct,
    replay,
    run_scenario,
    secrecy_verdict,
    __version__,
)

__all__ = [
    "CipherKey",
    "KeyShareSet",
    "ProtocolError",
    "audit",
    "demo_access",
    "derive_cipher_key",
    "generate_key_shares",
    "reconstruct",
    "replay",
    "run_scenario",
    "secrecy_verdict",
    "__version__",
]
