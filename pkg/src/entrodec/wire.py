"""Newline-delimited JSON protocol for talking to external model servers.

One UTF-8 JSON object per line. The client opens with a hello carrying the
protocol version; the server answers with the same version plus vocabulary
info. Floating-point values are serialized with 17 significant digits so
IEEE-754 doubles round-trip exactly.
"""

from __future__ import annotations

import json
import shlex
import socket
import subprocess
from dataclasses import dataclass

from .errors import ProviderIOError, WireProtocolError

PROTOCOL_VERSION = 1

DEFAULT_TIMEOUT = 30.0


def format_double(x: float) -> str:
    return format(float(x), ".17g")


def hello_request() -> str:
    return '{"type":"hello","proto":%d}' % PROTOCOL_VERSION


def hello_reply(vocab_size: int, bos: int, eos: int, unk: int) -> str:
    return (
        '{"type":"hello","proto":%d,"vocab_size":%d,"bos":%d,"eos":%d,"unk":%d}'
        % (PROTOCOL_VERSION, vocab_size, bos, eos, unk)
    )


def next_logprobs_request(req_id: int, context) -> str:
    ctx = ",".join(str(int(i)) for i in context)
    return '{"id":%d,"type":"next_logprobs","context":[%s]}' % (req_id, ctx)


def logprobs_reply(req_id: int, values) -> str:
    vals = ",".join(format_double(v) for v in values)
    return '{"id":%d,"type":"logprobs","values":[%s]}' % (req_id, vals)


def encode_request(req_id: int, text: str) -> str:
    return json.dumps(
        {"id": req_id, "type": "encode", "text": text}, separators=(",", ":")
    )


def ids_reply(req_id: int, ids) -> str:
    vals = ",".join(str(int(i)) for i in ids)
    return '{"id":%d,"type":"ids","values":[%s]}' % (req_id, vals)


def decode_request(req_id: int, ids) -> str:
    vals = ",".join(str(int(i)) for i in ids)
    return '{"id":%d,"type":"decode","ids":[%s]}' % (req_id, vals)


def text_reply(req_id: int, value: str) -> str:
    return json.dumps(
        {"id": req_id, "type": "text", "value": value}, separators=(",", ":")
    )


def error_reply(req_id: int, message: str) -> str:
    return json.dumps(
        {"id": req_id, "type": "error", "message": message}, separators=(",", ":")
    )


def parse_message(line: str) -> dict:
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as exc:
        raise WireProtocolError(f"malformed message: {exc}") from exc
    if not isinstance(obj, dict) or "type" not in obj:
        raise WireProtocolError("message is not an object with a type field")
    return obj


class LineChannel:
    """A request/reply line stream over a socket or a child process's pipes.

    One request in flight at a time; callers serialize access themselves.
    """

    def __init__(self, reader, writer, closer=None) -> None:
        self._reader = reader
        self._writer = writer
        self._closer = closer

    def send_line(self, line: str) -> None:
        try:
            self._writer.write((line + "\n").encode("utf-8"))
            self._writer.flush()
        except (OSError, ValueError) as exc:
            raise ProviderIOError(f"failed to send: {exc}") from exc

    def recv_line(self) -> str:
        try:
            raw = self._reader.readline()
        except (OSError, ValueError) as exc:
            raise ProviderIOError(f"failed to receive: {exc}") from exc
        except socket.timeout as exc:  # pragma: no cover - platform specific
            raise ProviderIOError("receive timed out") from exc
        if not raw:
            raise ProviderIOError("connection closed by peer")
        return raw.decode("utf-8").rstrip("\n")

    def round_trip(self, line: str) -> dict:
        self.send_line(line)
        return parse_message(self.recv_line())

    def close(self) -> None:
        if self._closer is not None:
            self._closer()


@dataclass(frozen=True)
class Endpoint:
    """Parsed endpoint: either a TCP address or a child-process command line."""

    kind: str  # "tcp" | "stdio"
    host: str = ""
    port: int = 0
    command: tuple[str, ...] = ()

    @staticmethod
    def parse(text: str) -> "Endpoint":
        if text.startswith("stdio:"):
            argv = tuple(shlex.split(text[len("stdio:") :]))
            if not argv:
                raise ProviderIOError("empty stdio command")
            return Endpoint(kind="stdio", command=argv)
        addr = text[len("tcp:") :] if text.startswith("tcp:") else text
        host, sep, port = addr.rpartition(":")
        if not sep or not port.isdigit():
            raise ProviderIOError(f"cannot parse endpoint {text!r}")
        return Endpoint(kind="tcp", host=host or "127.0.0.1", port=int(port))


def open_channel(endpoint: str | Endpoint, timeout: float = DEFAULT_TIMEOUT) -> LineChannel:
    """Connect to a TCP endpoint or spawn a stdio child and wrap its pipes."""
    ep = Endpoint.parse(endpoint) if isinstance(endpoint, str) else endpoint
    if ep.kind == "tcp":
        try:
            sock = socket.create_connection((ep.host, ep.port), timeout=timeout)
            sock.settimeout(timeout)
        except OSError as exc:
            raise ProviderIOError(f"cannot connect to {ep.host}:{ep.port}: {exc}") from exc
        reader = sock.makefile("rb")
        writer = sock.makefile("wb")

        def close() -> None:
            reader.close()
            writer.close()
            sock.close()

        return LineChannel(reader, writer, close)
    try:
        proc = subprocess.Popen(
            list(ep.command), stdin=subprocess.PIPE, stdout=subprocess.PIPE
        )
    except OSError as exc:
        raise ProviderIOError(f"cannot spawn {ep.command!r}: {exc}") from exc

    def close_proc() -> None:
        if proc.stdin:
            proc.stdin.close()
        if proc.stdout:
            proc.stdout.close()
        proc.terminate()
        proc.wait(timeout=5)

    return LineChannel(proc.stdout, proc.stdin, close_proc)
