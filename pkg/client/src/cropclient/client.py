"""Gym-style client for the crop-management environment service.

A :class:`RemoteEnv` owns one socket connection and mirrors the server's
session state machine, so illegal call orderings raise locally instead of
going on the wire. The transport is newline-delimited JSON; this module
contains no simulation logic whatsoever, the wire protocol is the entire
boundary.

Typical loop::

    from cropclient import RemoteEnv

    with RemoteEnv("127.0.0.1:5757", task="fertilization") as env:
        observation = env.reset(seed=7)
        done = False
        while not done:
            observation, reward, done, info = env.step(env.action_space.sample())
"""

from __future__ import annotations

import json
import random
import socket
from dataclasses import dataclass
from typing import Any, Mapping


class RemoteEnvError(Exception):
    """Base class for client errors."""


class EnvConnectionError(RemoteEnvError):
    """Could not reach the server, or the transport died mid-session."""


class WireFormatError(RemoteEnvError):
    """The server sent bytes this client could not interpret."""


class ServerError(RemoteEnvError):
    """The server answered with an error reply."""

    def __init__(self, message: str, code: str, payload: dict | None = None):
        super().__init__(message)
        self.code = code
        self.payload = payload or {}


class ActionBoundError(ServerError):
    """An action component was rejected: out of range or not in the task."""

    def __init__(self, message: str, payload: dict):
        super().__init__(message, "action", payload)
        self.component = payload.get("component")
        self.low = payload.get("low")
        self.high = payload.get("high")


class OrderingError(ServerError):
    """Calls were made in an order the session state machine forbids."""

    def __init__(self, message: str, payload: dict | None = None):
        super().__init__(message, "order", payload)


@dataclass(frozen=True)
class BoundedScalar:
    """One continuous action component with inclusive bounds."""

    name: str
    low: float
    high: float

    def sample(self, rng: random.Random) -> float:
        return rng.uniform(self.low, self.high)

    def contains(self, value: float) -> bool:
        return self.low <= value <= self.high


class ActionSpace:
    """Bounded-box action space: a named set of bounded scalars."""

    def __init__(self, components: Mapping[str, Mapping[str, float]]):
        self.components = {
            name: BoundedScalar(name, float(spec["low"]), float(spec["high"]))
            for name, spec in components.items()
        }
        self._rng = random.Random()

    def __iter__(self):
        return iter(self.components.values())

    def __getitem__(self, name: str) -> BoundedScalar:
        return self.components[name]

    def __len__(self) -> int:
        return len(self.components)

    def seed(self, seed: int) -> None:
        self._rng = random.Random(seed)

    def sample(self, rng: random.Random | None = None) -> dict[str, float]:
        rng = rng or self._rng
        return {c.name: c.sample(rng) for c in self.components.values()}

    def __repr__(self) -> str:
        inner = ", ".join(f"{c.name}:[{c.low}, {c.high}]" for c in self)
        return f"ActionSpace({inner})"


@dataclass(frozen=True)
class VariableSpec:
    """One observation variable: kind, shape and (optional) range."""

    name: str
    kind: str
    shape: tuple[int, ...]
    low: float | None
    high: float | None


class ObservationSpace:
    """Ordered list of observation variable descriptors."""

    def __init__(self, variables: list[Mapping[str, Any]]):
        self.variables = [
            VariableSpec(
                name=str(v["name"]),
                kind=str(v["kind"]),
                shape=tuple(v.get("shape") or ()),
                low=v.get("low"),
                high=v.get("high"),
            )
            for v in variables
        ]

    @property
    def names(self) -> list[str]:
        return [v.name for v in self.variables]

    def __iter__(self):
        return iter(self.variables)

    def __len__(self) -> int:
        return len(self.variables)

    def __repr__(self) -> str:
        return f"ObservationSpace({', '.join(self.names)})"


def _parse_endpoint(endpoint: str):
    if endpoint.startswith("unix:"):
        return "unix", endpoint[len("unix:"):]
    host, sep, port = endpoint.rpartition(":")
    if not sep or not port.isdigit():
        raise ValueError(f"endpoint {endpoint!r} is not host:port or unix:/path")
    return "tcp", (host or "127.0.0.1", int(port))


class RemoteEnv:
    """One environment session over one connection.

    Connecting performs the init/ready handshake and caches the space
    descriptors. Not thread-safe: one RemoteEnv per thread; open as many
    instances as you need for parallel environments.
    """

    def __init__(self, endpoint: str = "127.0.0.1:5757", *,
                 task: str | None = None,
                 config: Mapping[str, Any] | None = None,
                 seed: int | None = None,
                 timeout: float = 30.0):
        self.endpoint = endpoint
        self.task: str | None = None
        self.action_space: ActionSpace | None = None
        self.observation_space: ObservationSpace | None = None
        self._episode_open = False
        self._closed = False

        family, address = _parse_endpoint(endpoint)
        try:
            if family == "unix":
                self._sock = socket.socket(socket.AF_UNIX, socket.SOCK_STREAM)
                self._sock.settimeout(timeout)
                self._sock.connect(address)
            else:
                self._sock = socket.create_connection(address, timeout=timeout)
        except OSError as exc:
            raise EnvConnectionError(f"cannot connect to {endpoint}: {exc}") from None
        self._reader = self._sock.makefile("rb")

        init_payload: dict[str, Any] = {}
        if task is not None:
            init_payload["task"] = task
        if config is not None:
            init_payload["config"] = dict(config)
        if seed is not None:
            init_payload["seed"] = int(seed)
        ready = self._request("init", init_payload)
        if ready["type"] != "ready":
            raise WireFormatError(f"expected ready, got {ready['type']!r}")
        spaces = ready["payload"]
        self.task = spaces["task"]
        self.action_space = ActionSpace(spaces["action_space"])
        self.observation_space = ObservationSpace(spaces["observation_space"])

    # -- the standard loop ---------------------------------------------------

    def reset(self, seed: int | None = None) -> dict[str, Any]:
        """Start a new episode; returns the initial observation map."""
        if self._closed:
            raise OrderingError("reset on a closed environment")
        payload = {} if seed is None else {"seed": int(seed)}
        reply = self._request("reset", payload, expect="observation")
        self._episode_open = True
        return reply["payload"]["observation"]

    def step(self, action: Mapping[str, float] | None = None):
        """Submit one day's action; returns (observation, reward, done, info).

        The reward is a float, or a length-2 list for the mixed task.
        """
        if self._closed:
            raise OrderingError("step on a closed environment")
        if not self._episode_open:
            raise OrderingError("step outside an open episode; call reset first")
        reply = self._request("step", {"action": dict(action or {})},
                              expect="step_result")
        payload = reply["payload"]
        if payload["done"]:
            self._episode_open = False
        return (payload["observation"], payload["reward"],
                payload["done"], payload["info"])

    def close(self) -> None:
        """End the session gracefully; idempotent."""
        if self._closed:
            return
        try:
            self._request("close", expect="bye")
        except (EnvConnectionError, ServerError, WireFormatError):
            pass
        finally:
            self._closed = True
            self._episode_open = False
            try:
                self._reader.close()
            finally:
                self._sock.close()

    @property
    def episode_open(self) -> bool:
        return self._episode_open

    def __enter__(self) -> "RemoteEnv":
        return self

    def __exit__(self, *exc) -> None:
        self.close()

    # -- transport -------------------------------------------------------------

    def _request(self, msg_type: str, payload: Mapping[str, Any] | None = None,
                 expect: str | None = None) -> dict[str, Any]:
        line = json.dumps({"type": msg_type, "payload": dict(payload or {})},
                          allow_nan=False)
        try:
            self._sock.sendall(line.encode("utf-8") + b"\n")
            raw = self._reader.readline()
        except OSError as exc:
            raise EnvConnectionError(f"transport failure: {exc}") from None
        if not raw:
            raise EnvConnectionError("server closed the connection")
        try:
            reply = json.loads(raw.decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError) as exc:
            raise WireFormatError(f"unreadable reply: {exc}") from None
        if not isinstance(reply, dict) or "type" not in reply:
            raise WireFormatError("reply is not a typed message object")
        if reply["type"] == "error":
            raise self._error_from(reply.get("payload") or {})
        if expect is not None and reply["type"] != expect:
            raise WireFormatError(f"expected {expect!r}, got {reply['type']!r}")
        return reply

    @staticmethod
    def _error_from(payload: dict) -> ServerError:
        code = str(payload.get("code", "internal"))
        message = str(payload.get("message", "server error"))
        if code == "action":
            return ActionBoundError(message, payload)
        if code == "order":
            return OrderingError(message, payload)
        return ServerError(message, code, payload)
