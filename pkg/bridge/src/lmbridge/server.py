"""The serving loop: answer protocol messages from a socket or stdio.

One session per connection, one request in flight at a time (requests are
answered strictly in arrival order). Backend errors become error replies
carrying the request id; the session survives them.
"""

from __future__ import annotations

import socketserver
import sys
import threading

from . import protocol
from .protocol import ProtocolViolation


def handle_message(backend, line: str) -> str:
    """One request line in, one reply line out. Never raises."""
    try:
        msg = protocol.parse_message(line)
    except ProtocolViolation as exc:
        return protocol.error_reply(0, str(exc))
    req_id = msg.get("id", 0)
    req_id = int(req_id) if isinstance(req_id, (int, float)) else 0
    try:
        kind = msg["type"]
        if kind == "hello":
            if msg.get("proto") != protocol.PROTOCOL_VERSION:
                return protocol.error_reply(
                    req_id, f"unsupported protocol version {msg.get('proto')!r}"
                )
            return protocol.hello_reply(
                backend.vocab_size, backend.bos_id, backend.eos_id, backend.unk_id
            )
        if kind == "next_logprobs":
            values = backend.next_logprobs(msg.get("context", []))
            if len(values) != backend.vocab_size:
                return protocol.error_reply(req_id, "backend returned wrong vector length")
            return protocol.logprobs_reply(req_id, values)
        if kind == "encode":
            return protocol.ids_reply(req_id, backend.encode(str(msg.get("text", ""))))
        if kind == "decode":
            return protocol.text_reply(req_id, backend.decode(msg.get("ids", [])))
        return protocol.error_reply(req_id, f"unknown message type {kind!r}")
    except Exception as exc:  # backend failure: report, keep the session alive
        return protocol.error_reply(req_id, f"{type(exc).__name__}: {exc}")


class _Handler(socketserver.StreamRequestHandler):
    def handle(self) -> None:
        backend = self.server.backend  # type: ignore[attr-defined]
        for raw in self.rfile:
            try:
                line = raw.decode("utf-8").rstrip("\r\n")
            except UnicodeDecodeError:
                reply = protocol.error_reply(0, "message is not valid UTF-8")
            else:
                if not line:
                    continue
                reply = handle_message(backend, line)
            self.wfile.write((reply + "\n").encode("utf-8"))
            self.wfile.flush()


class BridgeServer(socketserver.ThreadingTCPServer):
    """TCP server with one independent session per connection."""

    allow_reuse_address = True
    daemon_threads = True

    def __init__(self, backend, host: str = "127.0.0.1", port: int = 0):
        super().__init__((host, port), _Handler)
        self.backend = backend

    @property
    def endpoint(self) -> str:
        host, port = self.server_address[:2]
        return f"{host}:{port}"

    def serve_in_background(self) -> threading.Thread:
        thread = threading.Thread(target=self.serve_forever, daemon=True)
        thread.start()
        return thread


def serve_stdio(backend, stdin=None, stdout=None) -> None:
    """Answer requests over standard streams until EOF (child-process mode)."""
    stdin = stdin if stdin is not None else sys.stdin.buffer
    stdout = stdout if stdout is not None else sys.stdout.buffer
    for raw in stdin:
        line = raw.decode("utf-8").rstrip("\r\n")
        if not line:
            continue
        reply = handle_message(backend, line)
        stdout.write((reply + "\n").encode("utf-8"))
        stdout.flush()
