"""Evaluate the built-in baseline policies and compute agronomic metrics.

The null policy never applies anything (the agronomic control); the expert
policy replays the original field experiment's schedule. Both batches use the
same per-episode seeds, so the nitrogen-use-efficiency metric divides each
expert episode's yield gain over the null mean by the fertilizer it spent.
"""

from cropenv import default_config
from cropenv.evaluate import (
    compute_ane,
    objective_total,
    run_episodes,
    summarize,
    write_applications_csv,
    write_summary_csv,
    write_trajectories_csv,
)
from cropenv.policies import expert_fert_policy, null_policy

config = default_config("fertilization")
episodes = 100
seed = 11

null_logs = run_episodes(config, null_policy, episodes, seed)
expert_logs = run_episodes(config, expert_fert_policy, episodes, seed)

for name, logs in (("null", null_logs), ("expert", expert_logs)):
    summary = summarize(logs)
    returns = [objective_total(log) for log in logs]
    print(f"{name} policy ({summary.episodes} episodes):")
    for indicator, (mean, std) in summary.indicators.items():
        print(f"  {indicator:>20}: {mean:10.2f} ({std:.2f})")
    print(f"  {'mean return':>20}: {sum(returns) / len(returns):10.2f}")

ane = compute_ane(expert_logs, null_logs)
print(f"\nnitrogen use efficiency of the expert policy: "
      f"{ane.mean:.1f} ({ane.std:.1f}) kg grain per kg N")
print(f"(ratio-of-means form: {ane.ratio_of_means:.1f})")

write_trajectories_csv(expert_logs, "expert_trajectories.csv")
write_summary_csv(summarize(expert_logs), "expert_summary.csv", [ane])
write_applications_csv(expert_logs, "expert_applications.csv")
print("\nCSVs written: expert_trajectories.csv, expert_summary.csv, "
      "expert_applications.csv")
