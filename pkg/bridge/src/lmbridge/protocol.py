"""Newline-delimited JSON protocol: one UTF-8 object per line.

The server side of the contract: a hello handshake advertising vocabulary
info, then id-tagged requests answered in order. Floating-point values are
written with 17 significant digits so doubles survive the round trip.
"""

from __future__ import annotations

import json

PROTOCOL_VERSION = 1


class ProtocolViolation(Exception):
    """Peer sent something the protocol does not allow."""


def format_double(x: float) -> str:
    return format(float(x), ".17g")


def hello_reply(vocab_size: int, bos: int, eos: int, unk: int) -> str:
    return (
        '{"type":"hello","proto":%d,"vocab_size":%d,"bos":%d,"eos":%d,"unk":%d}'
        % (PROTOCOL_VERSION, vocab_size, bos, eos, unk)
    )


def logprobs_reply(req_id: int, values) -> str:
    body = ",".join(format_double(v) for v in values)
    return '{"id":%d,"type":"logprobs","values":[%s]}' % (req_id, body)


def ids_reply(req_id: int, ids) -> str:
    body = ",".join(str(int(i)) for i in ids)
    return '{"id":%d,"type":"ids","values":[%s]}' % (req_id, body)


def text_reply(req_id: int, value: str) -> str:
    return json.dumps(
        {"id": req_id, "type": "text", "value": value}, separators=(",", ":")
    )


def error_reply(req_id: int, message: str) -> str:
    return json.dumps(
        {"id": req_id, "type": "error", "message": message}, separators=(",", ":")
    )


def hello_request() -> str:
    return '{"type":"hello","proto":%d}' % PROTOCOL_VERSION


def next_logprobs_request(req_id: int, context) -> str:
    body = ",".join(str(int(i)) for i in context)
    return '{"id":%d,"type":"next_logprobs","context":[%s]}' % (req_id, body)


def parse_message(line: str) -> dict:
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as exc:
        raise ProtocolViolation(f"malformed message: {exc}") from exc
    if not isinstance(obj, dict) or "type" not in obj:
        raise ProtocolViolation("message is not an object with a type field")
    return obj
