"""Hybrid cipher for report payloads: RSA key transport plus a SHA-256
counter keystream and an HMAC tag.  Only the holder of the RSA private key
can recover the session key, and the tag covers the transported key so a
swapped c1 fails closed.
"""

from __future__ import annotations

import hashlib
import hmac
import random
from dataclasses import dataclass

from ..encoding import ByteReader, encode_bytes, encode_int
from ..errors import DecryptionFailure
from .keys import RsaKeyPair
from .primes import powmod

NONCE_BYTES = 16


@dataclass(frozen=True)
class ReportCiphertext:
    c1: int
    nonce: bytes
    body: bytes
    tag: bytes

    def to_bytes(self) -> bytes:
        return (
            encode_int(self.c1)
            + encode_bytes(self.nonce)
            + encode_bytes(self.body)
            + encode_bytes(self.tag)
        )

    @classmethod
    def from_bytes(cls, raw: bytes) -> "ReportCiphertext":
        r = ByteReader(raw)
        ct = cls(
            c1=r.read_int(),
            nonce=r.read_bytes(),
            body=r.read_bytes(),
            tag=r.read_bytes(),
        )
        r.expect_end()
        return ct


def _keystream(key: bytes, nonce: bytes, length: int) -> bytes:
    out = bytearray()
    counter = 0
    while len(out) < length:
        h = hashlib.sha256()
        h.update(key)
        h.update(nonce)
        h.update(counter.to_bytes(4, "big"))
        out.extend(h.digest())
        counter += 1
    return bytes(out[:length])


def _derive(k: int) -> tuple[bytes, bytes]:
    ke = hashlib.sha256(b"enc" + encode_int(k)).digest()
    km = hashlib.sha256(b"mac" + encode_int(k)).digest()
    return ke, km


def encrypt_report(n: int, e: int, plaintext: bytes, rng: random.Random) -> ReportCiphertext:
    k = rng.randrange(2, n)
    c1 = powmod(k, e, n)
    ke, km = _derive(k)
    nonce = rng.getrandbits(8 * NONCE_BYTES).to_bytes(NONCE_BYTES, "big")
    body = bytes(a ^ b for a, b in zip(plaintext, _keystream(ke, nonce, len(plaintext))))
    tag = hmac.new(km, nonce + body + encode_int(c1), hashlib.sha256).digest()
    return ReportCiphertext(c1=c1, nonce=nonce, body=body, tag=tag)


def decrypt_report(key: RsaKeyPair, ct: ReportCiphertext) -> bytes:
    if not 0 < ct.c1 < key.n:
        raise DecryptionFailure("transported key out of range")
    k = powmod(ct.c1, key.d, key.n)
    ke, km = _derive(k)
    want = hmac.new(km, ct.nonce + ct.body + encode_int(ct.c1), hashlib.sha256).digest()
    if not hmac.compare_digest(want, ct.tag):
        raise DecryptionFailure("tag mismatch")
    return bytes(a ^ b for a, b in zip(ct.body, _keystream(ke, ct.nonce, len(ct.body))))
