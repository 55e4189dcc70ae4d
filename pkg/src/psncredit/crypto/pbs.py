"""Partially blind signing: the exponent pair is derived from info both
sides agreed on, so the signature is bound to that info even though the
signer never sees the message.

Blinding and unblinding reuse the plain operations from ``blindsig`` with
e set to the derived exponent.
"""

from __future__ import annotations

import math

from ..errors import DerivedExponentCollision
from .hashing import derive_exponent, fdh
from .keys import PbsKeyPair
from .primes import powmod


def pbs_sign(key: PbsKeyPair, common_info: bytes, blinded: int) -> int:
    if not 0 < blinded < key.n:
        raise ValueError("blinded value out of range")
    e_a = derive_exponent(common_info, key.exponent_bits)
    if math.gcd(e_a, key.phi) != 1:
        raise DerivedExponentCollision(
            f"derived exponent {e_a} divides the group order; "
            "use a larger modulus or different agreed info"
        )
    d_a = pow(e_a, -1, key.phi)
    return powmod(blinded, d_a, key.n)


def pbs_verify(n: int, exponent_bits: int, common_info: bytes, message: bytes, sig: int) -> bool:
    if not 0 < sig < n:
        return False
    e_a = derive_exponent(common_info, exponent_bits)
    return powmod(sig, e_a, n) == fdh(message, n)
