"""In-process transport that still round-trips canonical bytes.

Every exchange is encoded, dispatched, and decoded exactly as it would be
over a real link, so byte counts and transcripts match what a network
observer would see, and framing bugs cannot hide behind object passing.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ..messages import Message, message_from_bytes
from ..server import PublicParams, SensingServer


@dataclass(frozen=True)
class Envelope:
    tick: int
    sender: str
    payload: bytes
    response: bytes


@dataclass
class TrafficLog:
    envelopes: list[Envelope] = field(default_factory=list)
    to_server_bytes: int = 0
    from_server_bytes: int = 0

    def record(self, tick: int, sender: str, payload: bytes, response: bytes) -> None:
        self.envelopes.append(Envelope(tick, sender, payload, response))
        self.to_server_bytes += len(payload)
        self.from_server_bytes += len(response)

    @property
    def message_count(self) -> int:
        return len(self.envelopes)

    def lines(self) -> list[str]:
        return [
            f"{e.tick} {e.sender} {e.payload.hex()} {e.response.hex()}"
            for e in self.envelopes
        ]


class LocalLink:
    """ServerLink over a direct server reference."""

    def __init__(self, server: SensingServer, sender: str = "sp", log: TrafficLog | None = None):
        self.server = server
        self.sender = sender
        self.log = log

    def _dispatch(self, payload: bytes) -> bytes:
        return self.server.dispatch_bytes(payload)

    def send(self, msg: Message) -> Message:
        return self.send_bytes(msg.to_bytes())

    def send_bytes(self, payload: bytes) -> Message:
        """Send pre-encoded bytes verbatim (adversaries replay through
        this; honest sends reduce to it)."""
        raw = self._dispatch(payload)
        if self.log is not None:
            self.log.record(self.server.clock.now, self.sender, payload, raw)
        return message_from_bytes(raw)

    def params(self) -> PublicParams:
        return self.server.public_params()

    def now(self) -> int:
        return self.server.clock.now
