"""Line-protocol server exposing causal language models as logprob oracles."""

from .backends import HFBackend, ToyBackend, load_backend
from .conformance import ConformanceReport, conformance_check
from .server import BridgeServer, handle_message, serve_stdio

__version__ = "0.1.0"

__all__ = [
    "HFBackend",
    "ToyBackend",
    "load_backend",
    "ConformanceReport",
    "conformance_check",
    "BridgeServer",
    "handle_message",
    "serve_stdio",
]
