"""Key material for the two signature families.

``RsaKeyPair`` is a textbook RSA pair with a fixed public exponent, used for
identity signatures, blind credit signatures, and the report cipher.

``PbsKeyPair`` uses a modulus built from two safe primes so that signing
exponents derived per agreed-info stay invertible: a derived exponent is an
odd prime below 2^(exponent_bits + 1), and generation rejects moduli whose
Sophie Germain factors are that small.  Toy moduli built directly through
``from_primes`` skip that guarantee, so signing with them can still raise
``DerivedExponentCollision``.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass

from ..errors import KeyGenError
from .primes import gen_prime, gen_safe_prime, is_probable_prime

DEFAULT_RSA_EXPONENT = 65537
DEFAULT_EXPONENT_BITS = 32

MIN_RSA_BITS = 32
MIN_PBS_BITS = 48


@dataclass(frozen=True)
class RsaKeyPair:
    n: int
    e: int
    d: int

    @classmethod
    def from_primes(cls, p: int, q: int, e: int) -> "RsaKeyPair":
        if p == q:
            raise KeyGenError("prime factors must differ")
        if not (is_probable_prime(p) and is_probable_prime(q)):
            raise KeyGenError("factors must be prime")
        phi = (p - 1) * (q - 1)
        if e < 3 or math.gcd(e, phi) != 1:
            raise KeyGenError(f"public exponent {e} shares a factor with phi")
        return cls(n=p * q, e=e, d=pow(e, -1, phi))


@dataclass(frozen=True)
class PbsKeyPair:
    n: int
    phi: int
    exponent_bits: int

    @classmethod
    def from_primes(cls, p: int, q: int, exponent_bits: int = DEFAULT_EXPONENT_BITS) -> "PbsKeyPair":
        if p == q:
            raise KeyGenError("prime factors must differ")
        for f in (p, q):
            if not is_probable_prime(f):
                raise KeyGenError("factors must be prime")
            if f < 7 or not is_probable_prime((f - 1) // 2):
                raise KeyGenError(f"{f} is not a safe prime")
        if exponent_bits < 2:
            raise KeyGenError("exponent size below 2 bits leaves no primes to derive")
        return cls(n=p * q, phi=(p - 1) * (q - 1), exponent_bits=exponent_bits)


def keygen_rsa(bits: int, rng: random.Random, e: int = DEFAULT_RSA_EXPONENT) -> RsaKeyPair:
    if bits < MIN_RSA_BITS or bits % 2:
        raise KeyGenError(f"modulus size must be even and at least {MIN_RSA_BITS} bits")
    while True:
        p = gen_prime(bits // 2, rng)
        q = gen_prime(bits // 2, rng)
        if p == q:
            continue
        phi = (p - 1) * (q - 1)
        if math.gcd(e, phi) != 1:
            continue
        return RsaKeyPair(n=p * q, e=e, d=pow(e, -1, phi))


def keygen_pbs(
    bits: int,
    rng: random.Random,
    exponent_bits: int = DEFAULT_EXPONENT_BITS,
) -> PbsKeyPair:
    if bits < MIN_PBS_BITS or bits % 2:
        raise KeyGenError(f"modulus size must be even and at least {MIN_PBS_BITS} bits")
    # Sophie Germain factors must dominate any derivable exponent, which is
    # an odd prime below 2^(exponent_bits + 1); this makes every derived
    # exponent coprime to phi = 4 p' q'.
    if bits // 2 - 1 <= exponent_bits + 1:
        raise KeyGenError(
            f"{bits}-bit modulus is too small for {exponent_bits}-bit exponents"
        )
    while True:
        p = gen_safe_prime(bits // 2, rng)
        q = gen_safe_prime(bits // 2, rng)
        if p != q:
            return PbsKeyPair(n=p * q, phi=(p - 1) * (q - 1), exponent_bits=exponent_bits)
