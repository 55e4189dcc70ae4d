"""HTTP face of the sensing server: protocol endpoints for participants
plus harness endpoints (simulate, attack-suite, bench, storage) so a thin
client can drive everything remotely."""

from .app import app, create_app
from .client import HttpServerLink

__all__ = ["app", "create_app", "HttpServerLink"]
