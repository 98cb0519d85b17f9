"""Client binding: handshake, loop, typed errors, server-log cross-check."""

import random

import pytest

from server_process import read_log_events, spawn_server
from cropclient import (
    ActionBoundError,
    EnvConnectionError,
    OrderingError,
    RemoteEnv,
)


class TestConnect:
    def test_handshake_populates_spaces(self, server_endpoint):
        with RemoteEnv(server_endpoint, task="fertilization") as env:
            assert env.task == "fertilization"
            assert env.observation_space.names == [
                "istage", "vstage", "topwt", "grnwt", "swfac", "nstres",
                "xlai", "dtt", "dap", "cumsumfert", "rain", "ep",
            ]
            assert list(env.action_space.components) == ["anfer"]
            assert env.action_space["anfer"].low == 0.0
            assert env.action_space["anfer"].high == 200.0

    def test_dead_endpoint_raises_connection_error(self):
        with pytest.raises(EnvConnectionError):
            RemoteEnv("127.0.0.1:1", timeout=2.0)

    def test_bad_endpoint_string_rejected(self):
        with pytest.raises(ValueError):
            RemoteEnv("not-an-endpoint")


class TestEpisodeLoop:
    def test_random_policy_episode_terminates(self, server_endpoint):
        rng = random.Random(3)
        with RemoteEnv(server_endpoint, task="fertilization") as env:
            env.reset(seed=3)
            done = False
            steps = 0
            while not done:
                action = env.action_space.sample(rng) if rng.random() < 0.1 else {}
                observation, reward, done, info = env.step(action)
                assert isinstance(reward, float)
                steps += 1
                assert steps <= 365, "episode failed to terminate"
            assert info["terminal_cause"] in ("maturity", "failure", "max_days")
            assert steps == info["day"]

    def test_out_of_range_action_raises_bound_error(self, server_endpoint):
        with RemoteEnv(server_endpoint, task="fertilization") as env:
            env.reset(seed=1)
            with pytest.raises(ActionBoundError) as err:
                env.step({"anfer": 250})
            assert err.value.low == 0.0
            assert err.value.high == 200.0
            assert err.value.component == "anfer"
            assert "[0.0, 200.0]" in str(err.value)
            # the session survives, and the rejected action consumed no day
            observation, reward, done, info = env.step({"anfer": 100})
            assert info["day"] == 1

    def test_step_before_reset_raises_locally(self, server_endpoint):
        env = RemoteEnv(server_endpoint, task="fertilization")
        try:
            with pytest.raises(OrderingError):
                env.step({})
        finally:
            env.close()

    def test_step_after_done_raises_locally(self, server_endpoint):
        with RemoteEnv(server_endpoint, task="fertilization",
                       config={"max_episode_days": 4}) as env:
            env.reset(seed=2)
            done = False
            while not done:
                *_, done, info = env.step({})
            assert info["terminal_cause"] == "max_days"
            with pytest.raises(OrderingError):
                env.step({})

    def test_use_after_close_raises(self, server_endpoint):
        env = RemoteEnv(server_endpoint, task="fertilization")
        env.close()
        with pytest.raises(OrderingError):
            env.reset()
        env.close()  # idempotent

    def test_mixed_reward_is_length_two(self, server_endpoint):
        with RemoteEnv(server_endpoint, task="mixed") as env:
            env.reset(seed=5)
            observation, reward, done, info = env.step({"anfer": 5.0, "amir": 1.0})
            assert isinstance(reward, list) and len(reward) == 2

    def test_seeded_episodes_reproduce_across_connections(self, server_endpoint):
        def run():
            rng = random.Random(17)
            with RemoteEnv(server_endpoint, task="fertilization") as env:
                env.reset(seed=17)
                trajectory = []
                done = False
                while not done:
                    action = {"anfer": round(rng.uniform(0, 50), 3)} \
                        if rng.random() < 0.1 else {}
                    observation, reward, done, info = env.step(action)
                    trajectory.append((observation, reward, done, info))
                return trajectory

        assert run() == run()

    def test_action_space_sampling_respects_bounds(self, server_endpoint):
        rng = random.Random(0)
        with RemoteEnv(server_endpoint, task="mixed") as env:
            for _ in range(200):
                action = env.action_space.sample(rng)
                assert set(action) == {"anfer", "amir"}
                assert 0.0 <= action["anfer"] <= 200.0
                assert 0.0 <= action["amir"] <= 50.0


class TestServerLogCrossCheck:
    def test_client_trajectory_matches_server_log(self, tmp_path):
        """What the client saw must equal what the server logged, value for value."""
        log_path = tmp_path / "session.log"
        seen = []
        with spawn_server(log_path=log_path) as endpoint:
            with RemoteEnv(endpoint, task="fertilization") as env:
                first = env.reset(seed=99)
                done = False
                while not done:
                    observation, reward, done, info = env.step({"anfer": 2.0})
                    seen.append({"observation": observation, "reward": reward,
                                 "done": done, "info": info})

        events = read_log_events(log_path)
        logged_reset = [e["payload"]["observation"] for e in events
                        if e.get("event") == "reply" and e.get("type") == "observation"]
        logged_steps = [e["payload"] for e in events
                        if e.get("event") == "reply" and e.get("type") == "step_result"]

        assert logged_reset == [first]
        assert len(logged_steps) == len(seen)
        for logged, observed in zip(logged_steps, seen):
            assert logged == observed
