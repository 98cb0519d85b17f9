"""Wire codec: one JSON object per newline-terminated UTF-8 line.

Every message is ``{"type": <str>, "payload": <object>}``. Numbers are
serialized with full round-trip precision (Python's shortest-repr floats), and
NaN/Infinity are refused so any conforming JSON parser reads the exact values
back. Requests and replies alternate strictly; the reply type is a function of
the request type:

    init  -> ready          (payload: task, action_space, observation_space)
    reset -> observation    (payload: observation)
    step  -> step_result    (payload: observation, reward, done, info)
    spaces -> spaces        (payload: as in ready)
    close -> bye

Any failure produces an ``error`` reply with a ``code`` (parse, order, config,
action, type, internal) and a human-readable ``message``; the session survives
everything except transport failure.
"""

from __future__ import annotations

import json
from typing import Any

MESSAGE_TYPES = (
    "init", "ready", "reset", "observation", "step", "step_result",
    "spaces", "error", "close", "bye",
)

Message = dict[str, Any]


class WireError(ValueError):
    """Bytes on the wire did not parse into a valid message."""


def make_message(msg_type: str, payload: Any = None) -> Message:
    return {"type": msg_type, "payload": {} if payload is None else payload}


def make_error(code: str, message: str, **detail: Any) -> Message:
    payload = {"code": code, "message": message}
    payload.update(detail)
    return {"type": "error", "payload": payload}


def encode_message(msg: Message) -> bytes:
    """Serialize a message to one newline-terminated UTF-8 JSON line."""
    line = json.dumps(msg, allow_nan=False, separators=(",", ":"))
    return line.encode("utf-8") + b"\n"


def decode_line(line: bytes | str) -> Message:
    """Parse one line into a message; raise WireError on malformed input."""
    if isinstance(line, bytes):
        try:
            line = line.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise WireError(f"line is not valid UTF-8: {exc}") from None
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as exc:
        raise WireError(f"line is not valid JSON: {exc}") from None
    if not isinstance(obj, dict):
        raise WireError("message must be a JSON object")
    msg_type = obj.get("type")
    if not isinstance(msg_type, str):
        raise WireError('message must carry a string "type" field')
    obj.setdefault("payload", {})
    return obj


def read_message(stream) -> Message | None:
    """Read one message from a buffered binary stream; None on EOF."""
    line = stream.readline()
    if not line:
        return None
    return decode_line(line)
