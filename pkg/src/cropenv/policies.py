"""Baseline crop-management policies.

The expert schedules replicate the field experiment the default scenario is
modeled on: a handful of fixed applications keyed on days after planting.
Policies are callables taking the current observation map and returning a raw
action map (empty map = do nothing).
"""

from __future__ import annotations

from typing import Callable, Mapping

Action = dict[str, float]
Policy = Callable[[Mapping[str, object]], Action]

# (days after planting, kg N/ha)
EXPERT_FERT_TABLE: tuple[tuple[int, float], ...] = (
    (40, 27.0),
    (45, 35.0),
    (80, 54.0),
)

# (days after planting, L/m2)
EXPERT_IRR_TABLE: tuple[tuple[int, float], ...] = (
    (6, 13.0),
    (20, 10.0),
    (37, 10.0),
    (50, 13.0),
    (54, 18.0),
    (65, 25.0),
    (69, 25.0),
    (72, 13.0),
    (75, 15.0),
    (77, 19.0),
    (80, 20.0),
    (84, 20.0),
    (91, 15.0),
    (101, 19.0),
    (104, 4.0),
    (105, 25.0),
)


def expert_fert_action(dap: int) -> Action:
    """Expert fertilization amount for a given day after planting."""
    for day, amount in EXPERT_FERT_TABLE:
        if day == dap:
            return {"anfer": amount}
    return {}


def expert_irr_action(dap: int) -> Action:
    """Expert irrigation amount for a given day after planting."""
    for day, amount in EXPERT_IRR_TABLE:
        if day == dap:
            return {"amir": amount}
    return {}


def null_policy(observation: Mapping[str, object]) -> Action:
    """Never applies anything; the agronomic control baseline."""
    return {}


class TablePolicy:
    """Applies a fixed (dap, amount) schedule for one resource."""

    def __init__(self, table: tuple[tuple[int, float], ...], component: str):
        for (a, _), (b, _) in zip(table, table[1:]):
            if b <= a:
                raise ValueError("schedule days must be strictly increasing")
        self.table = dict(table)
        self.component = component

    def __call__(self, observation: Mapping[str, object]) -> Action:
        dap = int(observation["dap"])
        amount = self.table.get(dap)
        return {self.component: amount} if amount is not None else {}


expert_fert_policy = TablePolicy(EXPERT_FERT_TABLE, "anfer")
expert_irr_policy = TablePolicy(EXPERT_IRR_TABLE, "amir")


class MixedPolicy:
    """Merge several policies' action maps (later ones win on key clashes)."""

    def __init__(self, *policies: Policy):
        self.policies = policies

    def __call__(self, observation: Mapping[str, object]) -> Action:
        action: Action = {}
        for policy in self.policies:
            action.update(policy(observation))
        return action


def get_policy(name: str, task: str) -> Policy:
    """Look up a named baseline policy appropriate for ``task``."""
    if name == "null":
        return null_policy
    if name == "expert":
        if task == "fertilization":
            return expert_fert_policy
        if task == "irrigation":
            return expert_irr_policy
        if task == "mixed":
            return MixedPolicy(expert_fert_policy, expert_irr_policy)
    raise ValueError(f"unknown policy {name!r} for task {task!r}")
