"""Token types and their wire form.

Three tokens flow through the protocol, all carrying a signature over a
preimage the signer never saw in the clear:

* ``RequestToken``: admits one task request.  Its identifier commits to the
  task index and a participant secret, so the server can count spends
  without learning who spent.
* ``ReportToken``: admits one report for a task.  Its identifier commits to
  the whole batch of blinded credit preimages, the task index, and the
  batch size, which stops mixing and matching across reports.
* ``CreditToken``: one unit of credit, carrying the preimage itself, the
  timestamp it was bound to, and a signature over both.

Wire form is a one-byte kind tag followed by length-prefixed fields; every
decoder consumes the input exactly or rejects.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .encoding import ByteReader, encode_bytes, encode_int, encode_ticks
from .errors import FramingError, MalformedPreimage, MalformedToken
from .crypto import BlindingFactor, digest, fdh

KIND_REQUEST = 0x01
KIND_REPORT = 0x02
KIND_CREDIT = 0x03

DIGEST_BYTES = 32
PSEUDONYM_BYTES = 16


def new_pseudonym(rng: random.Random) -> bytes:
    return rng.getrandbits(8 * PSEUDONYM_BYTES).to_bytes(PSEUDONYM_BYTES, "big")


def request_identifier(task_index: int, r1: bytes) -> bytes:
    return digest(encode_int(task_index) + digest(r1))


def batch_identifier(blinded: list[int], task_index: int, c_max: int) -> bytes:
    parts = [encode_int(mu) for mu in blinded]
    parts.append(encode_int(task_index))
    parts.append(encode_int(c_max))
    return digest(b"".join(parts))


def credit_preimage(task_index: int, j: int, r2: bytes, rid_sig: int) -> bytes:
    return digest(encode_int(task_index) + encode_int(j) + digest(r2)) + encode_int(rid_sig)


def parse_credit_preimage(preimage: bytes) -> tuple[bytes, int]:
    """Split a credit preimage into its digest half and the identity
    signature, rejecting anything that does not parse back exactly."""
    if len(preimage) < DIGEST_BYTES + 4:
        raise MalformedPreimage("credit preimage too short")
    head = preimage[:DIGEST_BYTES]
    r = ByteReader(preimage[DIGEST_BYTES:])
    try:
        rid_sig = r.read_int()
        r.expect_end()
    except FramingError as exc:
        raise MalformedPreimage(str(exc)) from exc
    return head, rid_sig


def derive_blinding(task_index: int, j: int, r3: bytes, n: int) -> BlindingFactor:
    """Deterministic per-credit blinding factor: hashing into the units of
    Z_n guarantees invertibility, and deriving from a secret keeps the
    sequence reproducible for its owner alone."""
    z = fdh(encode_int(task_index) + encode_int(j) + digest(r3), n)
    return BlindingFactor.from_value(z, n)


@dataclass(frozen=True)
class RequestToken:
    task_index: int
    tau: bytes
    sig: int

    def to_bytes(self) -> bytes:
        return (
            bytes([KIND_REQUEST])
            + encode_int(self.task_index)
            + encode_bytes(self.tau)
            + encode_int(self.sig)
        )


@dataclass(frozen=True)
class ReportToken:
    task_index: int
    batch_id: bytes
    sig: int

    def to_bytes(self) -> bytes:
        return (
            bytes([KIND_REPORT])
            + encode_int(self.task_index)
            + encode_bytes(self.batch_id)
            + encode_int(self.sig)
        )


@dataclass(frozen=True)
class CreditToken:
    preimage: bytes
    ticks: int
    sig: int

    def to_bytes(self) -> bytes:
        return (
            bytes([KIND_CREDIT])
            + encode_bytes(self.preimage)
            + encode_ticks(self.ticks)
            + encode_int(self.sig)
        )


Token = RequestToken | ReportToken | CreditToken


def token_from_bytes(raw: bytes) -> Token:
    if not raw:
        raise MalformedToken("empty token")
    kind = raw[0]
    if kind not in (KIND_REQUEST, KIND_REPORT, KIND_CREDIT):
        raise MalformedToken(f"unknown token kind 0x{kind:02x}")
    r = ByteReader(raw[1:])
    try:
        if kind == KIND_REQUEST:
            tok: Token = RequestToken(
                task_index=r.read_int(),
                tau=r.read_bytes(),
                sig=r.read_int(),
            )
        elif kind == KIND_REPORT:
            tok = ReportToken(
                task_index=r.read_int(),
                batch_id=r.read_bytes(),
                sig=r.read_int(),
            )
        else:
            tok = CreditToken(
                preimage=r.read_bytes(),
                ticks=r.read_ticks(),
                sig=r.read_int(),
            )
        r.expect_end()
    except FramingError as exc:
        raise MalformedToken(str(exc)) from exc
    if isinstance(tok, (RequestToken, ReportToken)):
        ident = tok.tau if isinstance(tok, RequestToken) else tok.batch_id
        if len(ident) != DIGEST_BYTES:
            raise MalformedToken("identifier must be a digest")
    elif len(tok.preimage) < DIGEST_BYTES + 4:
        raise MalformedToken("credit preimage too short")
    return tok
