"""The model-provider contract and the remote (wire-protocol) implementation.

A provider supplies deterministic full-support next-token distributions
for arbitrary contexts, plus encode/decode between text and ids. The local
n-gram model satisfies the contract directly; RemoteProvider adapts any
server speaking the line protocol.
"""

from __future__ import annotations

import hashlib
from typing import Protocol, runtime_checkable

import numpy as np

from .dist import ConditionalDistribution
from .errors import ProviderIOError, WireProtocolError
from .vocab import TokenSequence
from . import wire

# Probabilities below this are floored before taking logs of remote replies.
REMOTE_PROB_FLOOR = 1e-12


@runtime_checkable
class ModelProvider(Protocol):
    """What every model backend must offer."""

    @property
    def model_hash(self) -> str: ...

    def vocab_info(self) -> tuple[int, dict[str, int]]: ...

    def next_distribution(self, context) -> ConditionalDistribution: ...

    def encode(self, text: str) -> TokenSequence: ...

    def decode(self, seq: TokenSequence) -> str: ...


class RemoteProvider:
    """Client for a model server speaking the newline-delimited logits protocol.

    One request is in flight per connection; open several providers for
    parallelism. Replies are renormalized once and floored before logs, so
    the resulting distributions satisfy the engine's normalization bounds.
    """

    def __init__(self, channel: wire.LineChannel) -> None:
        self._channel = channel
        self._next_id = 0
        reply = channel.round_trip(wire.hello_request())
        if reply.get("type") != "hello":
            raise WireProtocolError(f"expected hello reply, got {reply.get('type')!r}")
        if reply.get("proto") != wire.PROTOCOL_VERSION:
            raise WireProtocolError(
                f"protocol version mismatch: {reply.get('proto')!r} != {wire.PROTOCOL_VERSION}"
            )
        try:
            self._vocab_size = int(reply["vocab_size"])
            self._specials = {
                "bos": int(reply["bos"]),
                "eos": int(reply["eos"]),
                "unk": int(reply["unk"]),
            }
        except (KeyError, TypeError, ValueError) as exc:
            raise WireProtocolError(f"bad hello reply: {exc}") from exc
        ident = f"{self._vocab_size}:{self._specials['bos']}:{self._specials['eos']}:{self._specials['unk']}"
        self._hash = "remote:" + hashlib.sha256(ident.encode()).hexdigest()[:12]

    @property
    def model_hash(self) -> str:
        return self._hash

    def vocab_info(self) -> tuple[int, dict[str, int]]:
        return self._vocab_size, dict(self._specials)

    def _request(self, line: str, expect: str) -> dict:
        reply = self._channel.round_trip(line)
        if reply.get("type") == "error":
            raise WireProtocolError(f"server error: {reply.get('message')}")
        if reply.get("type") != expect:
            raise WireProtocolError(f"expected {expect} reply, got {reply.get('type')!r}")
        if reply.get("id") != self._next_id:
            raise WireProtocolError(
                f"reply id {reply.get('id')!r} does not match request id {self._next_id}"
            )
        return reply

    def next_distribution(self, context) -> ConditionalDistribution:
        ids = tuple(context.ids if isinstance(context, TokenSequence) else context)
        self._next_id += 1
        reply = self._request(wire.next_logprobs_request(self._next_id, ids), "logprobs")
        values = np.asarray(reply.get("values", ()), dtype=np.float64)
        if values.shape != (self._vocab_size,):
            raise WireProtocolError(
                f"logprobs length {values.shape} != vocab size {self._vocab_size}"
            )
        if np.isnan(values).any() or (values == np.inf).any():
            raise WireProtocolError("logprobs contain nan or +inf")
        p = np.exp(values)
        total = p.sum()
        if not np.isfinite(total) or total <= 0:
            raise WireProtocolError(f"logprobs exp-sum to {total!r}")
        p /= total
        logprobs = np.log(np.maximum(p, REMOTE_PROB_FLOOR))
        logprobs.flags.writeable = False
        return ConditionalDistribution(logprobs=logprobs, step=len(ids))

    def encode(self, text: str) -> TokenSequence:
        self._next_id += 1
        reply = self._request(wire.encode_request(self._next_id, text), "ids")
        return TokenSequence(
            ids=tuple(int(i) for i in reply.get("values", ())), origin="corpus-target"
        )

    def decode(self, seq: TokenSequence) -> str:
        self._next_id += 1
        reply = self._request(wire.decode_request(self._next_id, seq.ids), "text")
        value = reply.get("value")
        if not isinstance(value, str):
            raise WireProtocolError("decode reply carries no text")
        return value

    def close(self) -> None:
        self._channel.close()


def connect_remote_provider(
    endpoint: str, timeout: float = wire.DEFAULT_TIMEOUT
) -> RemoteProvider:
    """Open a channel to `endpoint` and perform the handshake.

    Endpoints are "host:port" (or "tcp:host:port") for stream sockets and
    "stdio:<command line>" for a child process bridged over its pipes.
    """
    channel = wire.open_channel(endpoint, timeout)
    try:
        return RemoteProvider(channel)
    except ProviderIOError:
        channel.close()
        raise
    except WireProtocolError:
        channel.close()
        raise


def serve_check(
    endpoint: str, timeout: float = wire.DEFAULT_TIMEOUT
) -> tuple[bool, list[str]]:
    """Probe a model server: handshake, normalization, determinism, latency.

    Works on raw wire replies (no client-side renormalization), so it
    reports what the server actually serves. Returns (all passed, report
    lines).
    """
    import time

    report: list[str] = []
    ok = True

    def check(name: str, passed: bool, detail: str = "") -> None:
        nonlocal ok
        ok = ok and passed
        status = "ok" if passed else "FAIL"
        report.append(f"{name}: {status}" + (f" ({detail})" if detail else ""))

    try:
        channel = wire.open_channel(endpoint, timeout)
    except ProviderIOError as exc:
        return False, [f"connect: FAIL ({exc})"]
    try:
        reply = channel.round_trip(wire.hello_request())
        check(
            "handshake",
            reply.get("type") == "hello" and reply.get("proto") == wire.PROTOCOL_VERSION,
            f"proto={reply.get('proto')!r}",
        )
        vocab_size = int(reply.get("vocab_size", 0))
        bos = int(reply.get("bos", -1))
        check("vocab", vocab_size > 0, f"vocab_size={vocab_size}")
        context = (bos,) if 0 <= bos < vocab_size else ()

        t0 = time.perf_counter()
        first = channel.round_trip(wire.next_logprobs_request(1, context))
        latency = time.perf_counter() - t0
        values = first.get("values", ())
        check(
            "logprobs-length",
            first.get("type") == "logprobs" and len(values) == vocab_size,
            f"len={len(values)}",
        )
        finite = all(np.isfinite(v) for v in values)
        check("logprobs-finite", finite)
        total = float(np.exp(np.asarray(values, dtype=np.float64)).sum()) if values else 0.0
        check("normalization", abs(total - 1.0) <= 1e-6, f"exp-sum={total:.9f}")

        second = channel.round_trip(wire.next_logprobs_request(2, context))
        check(
            "determinism",
            list(second.get("values", ())) == list(values),
            "identical replies for identical context",
        )
        report.append(f"latency: {latency * 1000.0:.1f} ms per request")
    except (ProviderIOError, WireProtocolError) as exc:
        check("protocol", False, str(exc))
    finally:
        channel.close()
    return ok, report
