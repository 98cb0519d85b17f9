"""Network-facing environment service.

One stream-socket connection hosts one session, one session owns one
environment, and every transaction blocks: the simulation sits between a
state reply and the next action request, exactly like the in-process loop.
Sessions share nothing and may run concurrently; within a session processing
is strictly sequential.

The session state machine lives in :class:`Session`, independent of any
socket, so ordering rules are unit-testable; :class:`EnvServer` adds the
transport (TCP host:port or a local unix socket path), a thread per
connection, and structured JSON-lines logging of session events.
"""

from __future__ import annotations

import json
import logging
import os
import socket
import threading
import time
from typing import Any, Callable

from .config import TaskConfig, default_config, load_config
from .errors import ActionError, ConfigError, CropEnvError, ProtocolError
from .protocol import Message, WireError, encode_message, make_error, make_message, read_message
from .tasks import CropEnv, StepResult

log = logging.getLogger("cropenv.server")

DEFAULT_ENDPOINT = "127.0.0.1:5757"
ENDPOINT_ENV_VAR = "CROPENV_ENDPOINT"

AWAITING_INIT = "awaiting_init"
IDLE = "idle"
EPISODE_OPEN = "episode_open"
CLOSED = "closed"


def parse_endpoint(endpoint: str) -> tuple[str, Any]:
    """Parse 'host:port' or 'unix:/path' into an address family and address."""
    if endpoint.startswith("unix:"):
        return "unix", endpoint[len("unix:"):]
    host, sep, port = endpoint.rpartition(":")
    if not sep or not port.isdigit():
        raise ValueError(f"endpoint {endpoint!r} is not host:port or unix:/path")
    return "tcp", (host or "127.0.0.1", int(port))


class Session:
    """Request/reply state machine for one connection.

    ``seed_provider`` and ``observer`` are evaluation-harness hooks: the
    former pins per-episode reset seeds server-side, the latter watches every
    reset/step so trajectories can be logged without a second transport.
    ``episode_budget`` limits how many episodes the client may run.
    """

    def __init__(self, base_config: TaskConfig | None = None, *,
                 fixed_config: bool = False,
                 seed_provider: Callable[[int], int] | None = None,
                 observer: Callable[[str, Any], None] | None = None,
                 episode_budget: int | None = None):
        self.base_config = base_config
        self.fixed_config = fixed_config
        self.seed_provider = seed_provider
        self.observer = observer
        self.episode_budget = episode_budget
        self.state = AWAITING_INIT
        self.env: CropEnv | None = None
        self.episodes_started = 0

    def handle(self, msg: Message) -> Message:
        """Produce exactly one reply for one request."""
        msg_type = msg.get("type")
        payload = msg.get("payload") or {}
        if self.state == CLOSED:
            return make_error("order", "session is closed")
        try:
            if msg_type == "init":
                return self._handle_init(payload)
            if msg_type == "reset":
                return self._handle_reset(payload)
            if msg_type == "step":
                return self._handle_step(payload)
            if msg_type == "spaces":
                return self._handle_spaces()
            if msg_type == "close":
                self.state = CLOSED
                return make_message("bye")
            return make_error("type", f"unknown message type {msg_type!r}")
        except ActionError as exc:
            detail = {}
            if exc.low is not None:
                detail["low"] = exc.low
                detail["high"] = exc.high
            if exc.name is not None:
                detail["component"] = exc.name
            return make_error("action", str(exc), **detail)
        except ProtocolError as exc:
            return make_error("order", str(exc))
        except ConfigError as exc:
            return make_error("config", str(exc))
        except CropEnvError as exc:
            return make_error("internal", str(exc))
        except Exception as exc:  # noqa: BLE001 - a reply is owed no matter what
            log.exception("unhandled error while handling %r", msg_type)
            return make_error("internal", f"{type(exc).__name__}: {exc}")

    def _handle_init(self, payload: dict) -> Message:
        if self.state != AWAITING_INIT:
            raise ProtocolError("init is only legal as the first message")
        if self.fixed_config:
            config = self.base_config
        else:
            overrides = payload.get("config") or {}
            task = payload.get("task")
            if self.base_config is not None and not overrides and task is None:
                config = self.base_config
            else:
                config = load_config(None, task=task, overrides=overrides)
        self.env = CropEnv(config)
        seed = payload.get("seed")
        if seed is not None and not self.fixed_config:
            self.env.seed_base(int(seed))
        self.state = IDLE
        return make_message("ready", self._spaces_payload())

    def _handle_reset(self, payload: dict) -> Message:
        if self.env is None:
            raise ProtocolError("reset before init")
        if self.episode_budget is not None and self.episodes_started >= self.episode_budget:
            return make_error(
                "complete",
                f"episode budget of {self.episode_budget} exhausted",
            )
        seed = payload.get("seed")
        if self.seed_provider is not None:
            seed = self.seed_provider(self.episodes_started)
        observation = self.env.reset(None if seed is None else int(seed))
        self.episodes_started += 1
        self.state = EPISODE_OPEN
        if self.observer is not None:
            self.observer("reset", observation)
        return make_message("observation", {"observation": observation})

    def _handle_step(self, payload: dict) -> Message:
        if self.env is None:
            raise ProtocolError("step before init")
        if self.state != EPISODE_OPEN:
            raise ProtocolError("step outside an open episode")
        action = payload.get("action") or {}
        if not isinstance(action, dict):
            raise ActionError("action must be a map of component name to amount")
        result = self.env.step(action)
        if result.done:
            self.state = IDLE
        if self.observer is not None:
            self.observer("step", result)
        return make_message("step_result", _step_payload(result))

    def _handle_spaces(self) -> Message:
        if self.env is None:
            raise ProtocolError("spaces before init")
        return make_message("spaces", self._spaces_payload())

    def _spaces_payload(self) -> dict:
        return {
            "task": self.env.config.task,
            "action_space": self.env.action_space,
            "observation_space": self.env.observation_space,
        }


def _step_payload(result: StepResult) -> dict:
    reward = list(result.reward) if isinstance(result.reward, tuple) else result.reward
    return {
        "observation": result.observation,
        "reward": reward,
        "done": result.done,
        "info": result.info,
    }


class EnvServer:
    """Accepts connections and serves one session per connection."""

    def __init__(self, endpoint: str = DEFAULT_ENDPOINT,
                 config: TaskConfig | None = None, *,
                 fixed_config: bool = False,
                 seed_provider: Callable[[int], int] | None = None,
                 observer: Callable[[str, Any], None] | None = None,
                 episode_budget: int | None = None,
                 max_connections: int | None = None):
        self.endpoint = endpoint
        self.config = config
        self.fixed_config = fixed_config
        self.seed_provider = seed_provider
        self.observer = observer
        self.episode_budget = episode_budget
        self.max_connections = max_connections
        self._listener: socket.socket | None = None
        self._thread: threading.Thread | None = None
        self._stopping = threading.Event()
        self._sessions_served = 0
        self._session_threads: list[threading.Thread] = []
        self._unix_path: str | None = None

    # -- lifecycle ---------------------------------------------------------

    def start(self) -> "EnvServer":
        family, address = parse_endpoint(self.endpoint)
        if family == "unix":
            listener = socket.socket(socket.AF_UNIX, socket.SOCK_STREAM)
            if os.path.exists(address):
                os.unlink(address)
            listener.bind(address)
            self._unix_path = address
        else:
            listener = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
            listener.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
            listener.bind(address)
        listener.listen(16)
        listener.settimeout(0.2)
        self._listener = listener
        self._log_event(event="listen", endpoint=str(self.address))
        self._thread = threading.Thread(target=self._accept_loop, daemon=True)
        self._thread.start()
        return self

    def stop(self) -> None:
        self._stopping.set()
        if self._thread is not None:
            self._thread.join(timeout=5.0)
        if self._listener is not None:
            self._listener.close()
        if self._unix_path and os.path.exists(self._unix_path):
            os.unlink(self._unix_path)
        for thread in self._session_threads:
            thread.join(timeout=5.0)
        self._log_event(event="shutdown")

    def wait_for_sessions(self, timeout: float) -> bool:
        """Wait until all connection handlers finish; True if they did."""
        deadline = time.monotonic() + timeout
        for thread in list(self._session_threads):
            remaining = deadline - time.monotonic()
            if remaining <= 0:
                return False
            thread.join(timeout=remaining)
        return not any(t.is_alive() for t in self._session_threads)

    def serve_forever(self) -> None:
        """Run the accept loop in the calling thread until interrupted."""
        self.start()
        try:
            while not self._stopping.is_set():
                self._stopping.wait(0.5)
        except KeyboardInterrupt:
            pass
        finally:
            self.stop()

    @property
    def address(self):
        """Bound address; for TCP a (host, port) tuple with the real port."""
        if self._listener is None:
            return None
        if self._unix_path is not None:
            return self._unix_path
        return self._listener.getsockname()

    # -- internals ----------------------------------------------------------

    def _accept_loop(self) -> None:
        session_id = 0
        while not self._stopping.is_set():
            try:
                conn, _ = self._listener.accept()
            except socket.timeout:
                continue
            except OSError:
                break
            session_id += 1
            thread = threading.Thread(
                target=self._serve_connection, args=(conn, session_id), daemon=True)
            thread.start()
            self._session_threads.append(thread)
            self._sessions_served += 1
            if self.max_connections is not None and self._sessions_served >= self.max_connections:
                break

    def _serve_connection(self, conn: socket.socket, session_id: int) -> None:
        session = Session(
            self.config,
            fixed_config=self.fixed_config,
            seed_provider=self.seed_provider,
            observer=self.observer,
            episode_budget=self.episode_budget,
        )
        self._log_event(event="connect", session=session_id)
        # Short read timeout so an idle session notices a server shutdown;
        # between requests no bytes are in flight, so timeouts are harmless.
        conn.settimeout(0.5)
        try:
            with conn, conn.makefile("rb") as reader:
                while session.state != CLOSED and not self._stopping.is_set():
                    try:
                        msg = read_message(reader)
                    except socket.timeout:
                        continue
                    except WireError as exc:
                        reply = make_error("parse", str(exc))
                        self._log_event(event="reply", session=session_id,
                                        type="error", payload=reply["payload"])
                        conn.sendall(encode_message(reply))
                        continue
                    if msg is None:
                        break
                    self._log_event(event="request", session=session_id,
                                    type=msg.get("type"))
                    reply = session.handle(msg)
                    self._log_event(event="reply", session=session_id,
                                    type=reply["type"], payload=reply["payload"])
                    conn.sendall(encode_message(reply))
                if self._stopping.is_set() and session.state != CLOSED:
                    # Server-initiated shutdown: say goodbye before hanging up.
                    conn.sendall(encode_message(make_message("bye")))
                    self._log_event(event="reply", session=session_id,
                                    type="bye", payload={})
        except OSError as exc:
            self._log_event(event="session_error", session=session_id, error=str(exc))
        finally:
            session.state = CLOSED
            self._log_event(event="disconnect", session=session_id)

    def _log_event(self, **event: Any) -> None:
        log.info("%s", json.dumps(event, allow_nan=False, sort_keys=True))


def serve(endpoint: str | None = None, config_path: str | None = None,
          log_path: str | None = None, task: str | None = None) -> EnvServer:
    """CLI entry: bind, log session events, and serve until interrupted."""
    if endpoint is None:
        endpoint = os.environ.get(ENDPOINT_ENV_VAR, DEFAULT_ENDPOINT)
    if log_path:
        handler = logging.FileHandler(log_path, encoding="utf-8")
        handler.setFormatter(logging.Formatter("%(message)s"))
        log.addHandler(handler)
        log.setLevel(logging.INFO)
    config = load_config(config_path, task=task) if (config_path or task) else default_config()
    server = EnvServer(endpoint, config)
    server.serve_forever()
    return server
