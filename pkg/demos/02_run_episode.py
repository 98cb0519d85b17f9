"""Drive one fertilization episode through the in-process interaction loop.

An episode is one growing season: it starts about a month before planting
(the field evolves on its own; planting is automatic when soil conditions
look right), and ends at crop maturity, at crop failure, or at the length
guard. Each step is one day; the reward is the day's plant nitrogen uptake
minus half the fertilizer applied.
"""

from cropenv import default_config, make_env
from cropenv.policies import expert_fert_policy

env = make_env(default_config("fertilization"))

print("action components:", env.action_space)
print("observation variables:", [spec["name"] for spec in env.observation_space])

observation = env.reset(seed=7)
total_reward = 0.0
applications = []

while True:
    action = expert_fert_policy(observation)
    result = env.step(action)
    observation = result.observation
    total_reward += result.reward
    if action:
        applications.append((result.info["day"], action["anfer"]))
    if result.done:
        break

info = result.info
print(f"\nepisode ended on day {info['day']} with cause {info['terminal_cause']!r}")
print(f"planting happened around day {info['day'] - info['dap']}")
print(f"fertilizer applications (day, kg/ha): {applications}")
print(f"grain yield: {info['grnwt']:.0f} kg/ha   grain N fraction: {info['pcngrn']:.4f}")
print(f"nitrate leached: {info['cleach']:.1f} kg/ha   runoff: {info['runoff']:.1f} L/m2")
print(f"undiscounted return: {total_reward:.1f}")
