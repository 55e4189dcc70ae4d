"""Hashing helpers: SHA-256, a full-domain hash onto the units of Z_n, and
prime exponent derivation from agreed info.
"""

from __future__ import annotations

import hashlib
import math

from .primes import is_probable_prime


def digest(data: bytes) -> bytes:
    return hashlib.sha256(data).digest()


def fdh(data: bytes, n: int) -> int:
    """Hash ``data`` to a unit of Z_n.

    Expands SHA-256 in counter mode to the byte length of n, truncates to
    the bit length of n, and rejects values outside [1, n) or sharing a
    factor with n.  Rejection resampling keeps the output close to uniform
    over the units.
    """
    if n < 3:
        raise ValueError("modulus too small to hash into")
    nbits = n.bit_length()
    nbytes = (nbits + 7) // 8
    shift = 8 * nbytes - nbits
    for attempt in range(2**32):
        buf = bytearray()
        block = 0
        while len(buf) < nbytes:
            h = hashlib.sha256()
            h.update(attempt.to_bytes(4, "big"))
            h.update(block.to_bytes(4, "big"))
            h.update(data)
            buf.extend(h.digest())
            block += 1
        x = int.from_bytes(buf[:nbytes], "big") >> shift
        if 1 <= x < n and math.gcd(x, n) == 1:
            return x
    raise RuntimeError("unreachable: rejection sampling exhausted")


def derive_exponent(common_info: bytes, bits: int) -> int:
    """Smallest prime at or above the top ``bits`` bits of SHA-256(info),
    forced odd.  Always lands strictly below 2^(bits + 1)."""
    if not 2 <= bits <= 256:
        raise ValueError("exponent size must be between 2 and 256 bits")
    x = int.from_bytes(digest(common_info), "big") >> (256 - bits)
    x |= 1
    if x < 3:
        x = 3
    while not is_probable_prime(x):
        x += 2
    return x
