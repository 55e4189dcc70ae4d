"""Canonical byte encodings used by every serialization in the repository.

Integers: 4-byte big-endian length prefix followed by the minimal-length
big-endian magnitude (zero encodes as length 0). Byte strings: 4-byte
big-endian length prefix followed by the raw bytes. Timestamps: exactly
8 bytes, big-endian tick count.
"""

from __future__ import annotations

from .errors import FramingError

TICK_BYTES = 8
MAX_TICK = 2**64 - 1


def encode_int(value: int) -> bytes:
    if value < 0:
        raise ValueError("canonical encoding covers unsigned integers only")
    body = value.to_bytes((value.bit_length() + 7) // 8, "big")
    return len(body).to_bytes(4, "big") + body


def encode_bytes(data: bytes) -> bytes:
    return len(data).to_bytes(4, "big") + data


def encode_ticks(tick: int) -> bytes:
    if not 0 <= tick <= MAX_TICK:
        raise ValueError(f"tick out of range: {tick}")
    return tick.to_bytes(TICK_BYTES, "big")


class ByteReader:
    """Strict sequential reader for the canonical framing.

    Raises :class:`FramingError` on truncation, non-minimal integer bodies,
    or (via :meth:`expect_end`) trailing bytes.
    """

    def __init__(self, data: bytes):
        self._data = data
        self._pos = 0

    @property
    def remaining(self) -> int:
        return len(self._data) - self._pos

    def take(self, n: int) -> bytes:
        if n < 0 or self.remaining < n:
            raise FramingError(f"need {n} bytes, have {self.remaining}")
        out = self._data[self._pos : self._pos + n]
        self._pos += n
        return out

    def read_bytes(self) -> bytes:
        length = int.from_bytes(self.take(4), "big")
        return self.take(length)

    def read_int(self) -> int:
        body = self.read_bytes()
        if body and body[0] == 0:
            raise FramingError("non-minimal integer encoding")
        return int.from_bytes(body, "big")

    def read_ticks(self) -> int:
        return int.from_bytes(self.take(TICK_BYTES), "big")

    def expect_end(self) -> None:
        if self.remaining:
            raise FramingError(f"{self.remaining} trailing bytes")
