"""Rule-based simulated users.

Each scenario is a fixed daily schedule of appliance run hours. Replaying a
schedule through the environment yields the user-generated cumulative reward
vector, which doubles as the demonstration fed to the inference model.
"""
from __future__ import annotations

from dataclasses import dataclass

from .datahub import HOURS_PER_DAY, DataWindow
from .env import ACTION_IDLE, ACTION_RUN, EnvConfig, RewardVector, reset, step
from .errors import UnknownScenario, WindowMismatch

ALWAYS_MAX_COMFORT = "always_max_comfort"
ALWAYS_SAVE_COST = "always_save_cost"
MIXTURE = "mixture"

SCENARIO_ORDER = (ALWAYS_MAX_COMFORT, ALWAYS_SAVE_COST, MIXTURE)

_BUILTIN_RUN_HOURS = {
    ALWAYS_MAX_COMFORT: frozenset({2, 3}),   # 2am-4am, inside the comfort window
    ALWAYS_SAVE_COST: frozenset({10, 14}),   # cheapest net-cost daytime slots
    MIXTURE: frozenset({6, 10}),             # one comfortable hour, one cheap hour
}


@dataclass(frozen=True)
class Schedule:
    name: str
    run_hours: frozenset[int]

    def __post_init__(self):
        if any(not 0 <= h < HOURS_PER_DAY for h in self.run_hours):
            raise ValueError(f"run hours {sorted(self.run_hours)} outside 0..23")


def builtin_schedule(name: str) -> Schedule:
    try:
        return Schedule(name, _BUILTIN_RUN_HOURS[name])
    except KeyError:
        raise UnknownScenario(
            f"{name!r}; known scenarios: {', '.join(SCENARIO_ORDER)}"
        ) from None


def custom_schedule(run_hours: frozenset[int] | set[int]) -> Schedule:
    return Schedule("custom", frozenset(run_hours))


def run_schedule(schedule: Schedule, window: DataWindow,
                 config: EnvConfig) -> RewardVector:
    """Replay the schedule day by day, accumulating the vector reward."""
    total_cost = 0.0
    total_comfort = 0.0
    for day in range(window.days):
        state = reset(window, day, config)
        for _ in range(HOURS_PER_DAY):
            action = ACTION_RUN if state.hour_of_day in schedule.run_hours else ACTION_IDLE
            state, reward, _ = step(state, action, window, day, config)
            total_cost += reward.cost
            total_comfort += reward.comfort
    return RewardVector(total_cost, total_comfort)


def demo_features(schedule: Schedule, window: DataWindow,
                  config: EnvConfig) -> RewardVector:
    """Demonstration summary on the 1-day window the inference model was
    trained against."""
    if window.days != 1:
        raise WindowMismatch(
            f"demonstrations are single-day; got a {window.days}-day window"
        )
    return run_schedule(schedule, window, config)
