"""Deterministic multi-actor simulation: seeded participants exchange
canonical message bytes with a server over logged in-process links, a tick
clock orders every event, and the whole run reduces to a transcript hash
that is stable for a given scenario and seed.
"""

from .bus import Envelope, LocalLink, TrafficLog
from .scenario import Scenario
from .run import TranscriptBundle, run

__all__ = ["Envelope", "LocalLink", "TrafficLog", "Scenario", "TranscriptBundle", "run"]
