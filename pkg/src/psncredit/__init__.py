"""Privacy-preserving credit tokens for participatory sensing networks.

Participants earn per-task credits through three one-time tokens (request,
report, credit) built from blind RSA and partially blind signatures, so the
coordinating server can pay out credits without being able to link tasks,
reports, or credits to the identity that earned them.

The package ships the protocol core (``crypto``, ``tokens``, ``server``,
``participant``), a deterministic discrete-event simulator with adversary
models (``sim``), measurement tooling (``harness``), a FastAPI service
front end (``service``), and a thin-client CLI (``cli``).
"""

__version__ = "0.1.0"

from .server import PublicParams, SensingServer, ServerConfig
from .participant import Participant
from .sim import Scenario, TranscriptBundle, run

__all__ = [
    "PublicParams",
    "SensingServer",
    "ServerConfig",
    "Participant",
    "Scenario",
    "TranscriptBundle",
    "run",
]
