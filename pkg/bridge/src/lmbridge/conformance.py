"""Client-side conformance probes for any server speaking the line protocol."""

from __future__ import annotations

import socket
import time
from dataclasses import dataclass, field

import numpy as np

from . import protocol


@dataclass
class ConformanceReport:
    passed: bool = True
    lines: list[str] = field(default_factory=list)
    latency_ms: float = 0.0

    def check(self, name: str, ok: bool, detail: str = "") -> None:
        self.passed = self.passed and ok
        status = "ok" if ok else "FAIL"
        self.lines.append(f"{name}: {status}" + (f" ({detail})" if detail else ""))


def _round_trip(rfile, wfile, line: str) -> str:
    wfile.write((line + "\n").encode("utf-8"))
    wfile.flush()
    raw = rfile.readline()
    if not raw:
        raise ConnectionError("server closed the connection")
    return raw.decode("utf-8").rstrip("\n")


def conformance_check(endpoint: str, timeout: float = 10.0) -> ConformanceReport:
    """Golden handshake, vector length/normalization, determinism, latency.

    The determinism probe demands bitwise-identical reply lines for
    identical contexts within one session.
    """
    report = ConformanceReport()
    host, _, port = endpoint.rpartition(":")
    try:
        sock = socket.create_connection((host or "127.0.0.1", int(port)), timeout=timeout)
    except OSError as exc:
        report.check("connect", False, str(exc))
        return report
    sock.settimeout(timeout)
    rfile = sock.makefile("rb")
    wfile = sock.makefile("wb")
    try:
        hello_raw = _round_trip(rfile, wfile, protocol.hello_request())
        hello = protocol.parse_message(hello_raw)
        report.check(
            "handshake",
            hello.get("type") == "hello" and hello.get("proto") == protocol.PROTOCOL_VERSION,
            hello_raw[:80],
        )
        vocab_size = int(hello.get("vocab_size", 0))
        report.check("vocab-size", vocab_size > 0, str(vocab_size))
        bos = int(hello.get("bos", 0))
        context = [bos]

        t0 = time.perf_counter()
        first_raw = _round_trip(rfile, wfile, protocol.next_logprobs_request(1, context))
        report.latency_ms = (time.perf_counter() - t0) * 1000.0
        first = protocol.parse_message(first_raw)
        values = np.asarray(first.get("values", ()), dtype=np.float64)
        report.check("reply-id", first.get("id") == 1)
        report.check(
            "vector-length",
            first.get("type") == "logprobs" and values.shape == (vocab_size,),
            f"len={values.shape[0] if values.ndim else 0}",
        )
        report.check("finite", bool(np.isfinite(values).all()) if values.size else False)
        total = float(np.exp(values).sum()) if values.size else 0.0
        report.check("normalization", abs(total - 1.0) <= 1e-6, f"exp-sum={total:.9f}")

        second_raw = _round_trip(rfile, wfile, protocol.next_logprobs_request(2, context))
        identical = second_raw.replace('"id":2', '"id":1') == first_raw
        report.check("determinism", identical, "bitwise-identical replies required")
        report.lines.append(f"latency: {report.latency_ms:.1f} ms per request")
    except (ConnectionError, OSError, protocol.ProtocolViolation) as exc:
        report.check("protocol", False, str(exc))
    finally:
        rfile.close()
        wfile.close()
        sock.close()
    return report
