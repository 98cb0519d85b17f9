"""Run one full random-policy episode against a live environment server.

Start the server first, e.g.:

    cropenv serve --endpoint 127.0.0.1:5757

then:

    python random_episode.py --endpoint 127.0.0.1:5757 --task fertilization
"""

import argparse
import random

from cropclient import RemoteEnv


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--endpoint", default="127.0.0.1:5757")
    parser.add_argument("--task", default="fertilization",
                        choices=("fertilization", "irrigation", "mixed"))
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    rng = random.Random(args.seed)
    with RemoteEnv(args.endpoint, task=args.task) as env:
        print(f"connected: task={env.task}")
        print(f"  actions: {env.action_space}")
        print(f"  observations: {env.observation_space.names}")

        observation = env.reset(seed=args.seed)
        total = None
        steps = 0
        done = False
        while not done:
            # act rarely; a random amount every day drowns the field
            action = env.action_space.sample(rng) if rng.random() < 0.1 else {}
            observation, reward, done, info = env.step(action)
            steps += 1
            if total is None:
                total = list(reward) if isinstance(reward, list) else reward
            elif isinstance(reward, list):
                total = [t + r for t, r in zip(total, reward)]
            else:
                total += reward

        print(f"episode finished after {steps} days: {info['terminal_cause']}")
        print(f"  grain yield {info['grnwt']:.0f} kg/ha, "
              f"fertilizer {info['cumsumfert']:.0f} kg/ha, "
              f"irrigation {info['totir']:.0f} L/m2")
        print(f"  undiscounted return: {total}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
