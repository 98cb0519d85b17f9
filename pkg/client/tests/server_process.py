"""Helpers to run a real `cropenv serve` subprocess for the client tests."""

import contextlib
import json
import socket
import subprocess
import sys
import time


def free_port() -> int:
    with socket.socket() as sock:
        sock.bind(("127.0.0.1", 0))
        return sock.getsockname()[1]


@contextlib.contextmanager
def spawn_server(log_path=None, task=None):
    """Run `cropenv serve` as a subprocess; yield its endpoint."""
    port = free_port()
    endpoint = f"127.0.0.1:{port}"
    cmd = [sys.executable, "-m", "cropenv.cli", "serve", "--endpoint", endpoint]
    if log_path is not None:
        cmd += ["--log", str(log_path)]
    if task is not None:
        cmd += ["--task", task]
    proc = subprocess.Popen(cmd, stdout=subprocess.PIPE, stderr=subprocess.PIPE)
    try:
        deadline = time.time() + 15.0
        while time.time() < deadline:
            try:
                with socket.create_connection(("127.0.0.1", port), timeout=1.0):
                    break
            except OSError:
                if proc.poll() is not None:
                    raise RuntimeError(
                        f"server exited early: {proc.stderr.read().decode()}")
                time.sleep(0.05)
        else:
            raise RuntimeError("server never bound its endpoint")
        yield endpoint
    finally:
        proc.terminate()
        proc.wait(timeout=10)



def read_log_events(log_path):
    return [json.loads(line) for line in log_path.read_text().splitlines()]
