"""Prime generation.

Safe primes (p = 2q + 1 with q prime) dominate key generation cost, so the
search sieves an interval of candidates against small primes before running
any probabilistic test: a single small prime r eliminates candidates where
either q or 2q + 1 has r as a factor.  gmpy2 provides the Miller-Rabin /
Lucas machinery for the big numbers; a fixed-base deterministic Miller-Rabin
covers everything below 3.3e24 without an external dependency in the hot
path of exponent derivation.
"""

from __future__ import annotations

import random

import gmpy2

_SIEVE_BOUND = 100_000


def _small_primes(bound: int) -> list[int]:
    mark = bytearray([1]) * (bound + 1)
    mark[0] = mark[1] = 0
    for i in range(2, int(bound**0.5) + 1):
        if mark[i]:
            mark[i * i :: i] = bytearray(len(mark[i * i :: i]))
    return [i for i in range(2, bound + 1) if mark[i]]

SMALL_PRIMES = _small_primes(_SIEVE_BOUND)

# Deterministic for all n < 3,317,044,064,679,887,385,961,981.
_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


def _miller_rabin(n: int, bases: tuple[int, ...]) -> bool:
    d = n - 1
    r = 0
    while d % 2 == 0:
        d //= 2
        r += 1
    for a in bases:
        a %= n
        if a == 0:
            continue
        x = pow(a, d, n)
        if x == 1 or x == n - 1:
            continue
        for _ in range(r - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def is_probable_prime(n: int) -> bool:
    if n < 2:
        return False
    for p in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        if n == p:
            return True
        if n % p == 0:
            return False
    if n < 3_317_044_064_679_887_385_961_981:
        return _miller_rabin(n, _MR_BASES)
    return bool(gmpy2.is_prime(n, 25))


def gen_prime(bits: int, rng: random.Random) -> int:
    """Uniform-ish prime with the top two bits set (so products of two such
    primes always reach the target modulus size)."""
    if bits < 8:
        raise ValueError("prime size below 8 bits is not useful here")
    while True:
        cand = rng.getrandbits(bits) | (1 << (bits - 1)) | (1 << (bits - 2)) | 1
        if is_probable_prime(cand):
            return cand


def gen_safe_prime(bits: int, rng: random.Random) -> int:
    """Prime p = 2q + 1 of exactly ``bits`` bits with q prime.

    Sieves a window of consecutive odd q-candidates against the small-prime
    table, then tests survivors; q and p are checked together so a window
    miss just draws a fresh window.
    """
    if bits < 8:
        raise ValueError("safe prime size below 8 bits is not useful here")
    qbits = bits - 1
    window = 65536
    while True:
        base = rng.getrandbits(qbits) | (1 << (qbits - 1)) | (1 << (qbits - 2)) | 1
        # alive[i] tracks q = base + 2i
        alive = bytearray([1]) * window
        for r in SMALL_PRIMES:
            if r == 2:
                continue
            if r >= base:
                # tiny toy sizes only: q itself may equal r
                break
            # knock out q = 0 (mod r)
            off = (-base) * pow(2, -1, r) % r
            alive[off::r] = bytearray(len(alive[off::r]))
            # knock out 2q + 1 = 0 (mod r), i.e. q = -(r+1)/2 (mod r)
            off = (-(base + (r + 1) // 2)) * pow(2, -1, r) % r
            alive[off::r] = bytearray(len(alive[off::r]))
        for i in range(window):
            if not alive[i]:
                continue
            q = base + 2 * i
            if q.bit_length() != qbits:
                break
            # cheap Fermat base-2 filter first; survivors are rare enough
            # that the full test's cost stops mattering
            if gmpy2.powmod(2, q - 1, q) != 1:
                continue
            p = 2 * q + 1
            if p.bit_length() != bits or gmpy2.powmod(2, p - 1, p) != 1:
                continue
            if is_probable_prime(q) and is_probable_prime(p):
                return p


def powmod(base: int, exp: int, mod: int) -> int:
    return int(gmpy2.powmod(base, exp, mod))
