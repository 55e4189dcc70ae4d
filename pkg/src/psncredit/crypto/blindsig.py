"""Blind RSA signatures with multiplicative timestamp binding.

The holder blinds mu = fdh(m) * z^e mod n, the signer raises to d, and
unblinding divides out z.  Timestamped signing multiplies fdh(ticks) into
the base before exponentiation, so the finished signature satisfies

    sig^e = fdh(m) * fdh(encode_ticks(T))   (mod n)

and verification recomputes both factors.  The signer never sees m, and
because it contributes the timestamp factor itself the holder cannot bind
a different T after the fact.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass

from ..encoding import encode_ticks
from .hashing import fdh
from .primes import powmod
from .keys import RsaKeyPair


@dataclass(frozen=True)
class BlindingFactor:
    value: int
    inverse: int

    @classmethod
    def from_value(cls, z: int, n: int) -> "BlindingFactor":
        if not 1 <= z < n or math.gcd(z, n) != 1:
            raise ValueError("blinding factor must be a unit of Z_n")
        return cls(value=z, inverse=pow(z, -1, n))

    @classmethod
    def random(cls, n: int, rng: random.Random) -> "BlindingFactor":
        while True:
            z = rng.randrange(2, n)
            if math.gcd(z, n) == 1:
                return cls.from_value(z, n)


def rsa_sign(key: RsaKeyPair, data: bytes) -> int:
    return powmod(fdh(data, key.n), key.d, key.n)


def rsa_verify(n: int, e: int, data: bytes, sig: int) -> bool:
    if not 0 < sig < n:
        return False
    return powmod(sig, e, n) == fdh(data, n)


def blind(message: bytes, z: BlindingFactor, n: int, e: int) -> int:
    return fdh(message, n) * powmod(z.value, e, n) % n


def blind_sign_ts(key: RsaKeyPair, blinded: int, ticks: int) -> int:
    if not 0 < blinded < key.n:
        raise ValueError("blinded value out of range")
    base = blinded * fdh(encode_ticks(ticks), key.n) % key.n
    return powmod(base, key.d, key.n)


def unblind(sig_blinded: int, z: BlindingFactor, n: int) -> int:
    if not 0 < sig_blinded < n:
        raise ValueError("signature out of range")
    return sig_blinded * z.inverse % n


def verify_ts(n: int, e: int, message: bytes, ticks: int, sig: int) -> bool:
    if not 0 < sig < n:
        return False
    expect = fdh(message, n) * fdh(encode_ticks(ticks), n) % n
    return powmod(sig, e, n) == expect
