"""Serve the environment on a socket and drive it as an external agent would.

The service speaks newline-delimited JSON over a stream socket: the client
sends init, then alternates reset/step requests with the simulator blocked
in between, and finishes with close. This demo runs both ends in one process
for convenience; real agents connect from anywhere (see the client package).
"""

import json
import socket

from cropenv import default_config
from cropenv.server import EnvServer

server = EnvServer("127.0.0.1:0", default_config("irrigation")).start()
host, port = server.address
print(f"serving on {host}:{port}")


def request(sock, reader, msg_type, payload=None):
    line = json.dumps({"type": msg_type, "payload": payload or {}})
    sock.sendall(line.encode("utf-8") + b"\n")
    return json.loads(reader.readline())


try:
    sock = socket.create_connection((host, port))
    reader = sock.makefile("rb")

    ready = request(sock, reader, "init", {"seed": 3})
    print("ready:", ready["payload"]["task"],
          "action space", ready["payload"]["action_space"])

    obs = request(sock, reader, "reset", {"seed": 12})["payload"]["observation"]
    print("day-0 observation keys:", list(obs))

    # Out-of-range actions are rejected, not clamped; the session survives.
    bad = request(sock, reader, "step", {"action": {"amir": 400}})
    print("oversized action reply:", bad["payload"]["code"], "-", bad["payload"]["message"])

    # A lazy agent: irrigate a little whenever the topsoil looks dry.
    steps, watered = 0, 0.0
    done = False
    while not done:
        action = {"amir": 10.0} if obs["sw"][0] < 0.08 else {}
        reply = request(sock, reader, "step", {"action": action})
        payload = reply["payload"]
        obs, done = payload["observation"], payload["done"]
        watered += action.get("amir", 0.0)
        steps += 1

    info = payload["info"]
    print(f"episode over after {steps} days: {info['terminal_cause']}, "
          f"yield {info['grnwt']:.0f} kg/ha, irrigated {watered:.0f} L/m2")

    print("close:", request(sock, reader, "close")["type"])
    sock.close()
finally:
    server.stop()
