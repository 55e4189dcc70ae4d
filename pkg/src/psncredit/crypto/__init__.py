"""Number-theoretic primitives: RSA blind signatures, a partially blind
variant with a derived public exponent, full-domain hashing, and a hybrid
cipher for report payloads.

All values are plain Python ints; nothing here depends on wall-clock time
or process-global randomness.  Callers supply a ``random.Random`` wherever
entropy is needed, which is what makes the simulator reproducible.
"""

from .primes import is_probable_prime, gen_prime, gen_safe_prime
from .keys import RsaKeyPair, PbsKeyPair, keygen_rsa, keygen_pbs
from .hashing import digest, fdh, derive_exponent
from .blindsig import (
    BlindingFactor,
    rsa_sign,
    rsa_verify,
    blind,
    blind_sign_ts,
    unblind,
    verify_ts,
)
from .pbs import pbs_sign, pbs_verify
from .hybrid import ReportCiphertext, encrypt_report, decrypt_report

__all__ = [
    "is_probable_prime",
    "gen_prime",
    "gen_safe_prime",
    "RsaKeyPair",
    "PbsKeyPair",
    "keygen_rsa",
    "keygen_pbs",
    "digest",
    "fdh",
    "derive_exponent",
    "BlindingFactor",
    "rsa_sign",
    "rsa_verify",
    "blind",
    "blind_sign_ts",
    "unblind",
    "verify_ts",
    "pbs_sign",
    "pbs_verify",
    "ReportCiphertext",
    "encrypt_report",
    "decrypt_report",
]
