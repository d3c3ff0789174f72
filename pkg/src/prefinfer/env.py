"""Residential energy-consumption MOMDP.

Episodes are 24 hourly steps over one day of a DataWindow. The agent decides
each hour whether to run a single shiftable appliance. The reward is a
two-component vector: negated electricity expenditure (scaled) and a comfort
term that pays only for runs inside the night-time comfort window while task
hours remain. A linear utility with a preference weight pair scalarizes the
vector when a scalar signal is needed.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .datahub import HOURS_PER_DAY, DataWindow
from .errors import IndexOutOfRange, NegativeInput, SteppedAfterTerminal, ZeroMax

ACTION_IDLE = 0
ACTION_RUN = 1
NUM_ACTIONS = 2


class RewardVector(NamedTuple):
    cost: float      # <= 0, negated expenditure
    comfort: float   # >= 0


class PreferenceWeights(NamedTuple):
    w_cost: float
    w_comf: float


class EnvState(NamedTuple):
    """Observation tuple; hour_of_day == 24 marks the post-terminal state."""

    price: float
    renewable_power: float
    background_power: float
    task_remaining: int
    hour_of_day: int


@dataclass(frozen=True)
class EnvConfig:
    appliance_power: float = 1.0
    task_hours_per_day: int = 2
    comfort_window: frozenset[int] = field(default_factory=lambda: frozenset(range(7)))
    cost_scale: float = 10.0

    def __post_init__(self):
        if self.appliance_power <= 0:
            raise ValueError("appliance_power must be > 0")
        if self.task_hours_per_day < 1:
            raise ValueError("task_hours_per_day must be >= 1")
        if self.cost_scale <= 0:
            raise ValueError("cost_scale must be > 0")

    def to_dict(self) -> dict:
        return {
            "appliance_power": self.appliance_power,
            "task_hours_per_day": self.task_hours_per_day,
            "comfort_window": sorted(self.comfort_window),
            "cost_scale": self.cost_scale,
        }

    @staticmethod
    def from_dict(payload: dict) -> "EnvConfig":
        return EnvConfig(
            appliance_power=float(payload["appliance_power"]),
            task_hours_per_day=int(payload["task_hours_per_day"]),
            comfort_window=frozenset(int(h) for h in payload["comfort_window"]),
            cost_scale=float(payload["cost_scale"]),
        )


def reward_cost(price: float, shiftable_power: float, background_power: float,
                renewable_power: float, cost_scale: float) -> float:
    """Negated, scaled grid expenditure: -scale * price * max(net draw, 0)."""
    if min(price, shiftable_power, background_power, renewable_power) < 0:
        raise NegativeInput("power and price inputs must be >= 0")
    net = shiftable_power + background_power - renewable_power
    return -cost_scale * price * max(net, 0.0)


def reward_comfort(task_remaining: int, run: bool, hour_of_day: int,
                   comfort_window: frozenset[int]) -> float:
    """Remaining task hours, paid only when running inside the window."""
    if run and hour_of_day in comfort_window:
        return float(task_remaining)
    return 0.0


def scalarize(reward: RewardVector, weights: PreferenceWeights) -> float:
    """Linear utility: dot product of the reward vector and the weights."""
    return reward.cost * weights.w_cost + reward.comfort * weights.w_comf


def _signal_index(window: DataWindow, day_index: int, hour: int) -> int:
    return day_index * HOURS_PER_DAY + hour


def reset(window: DataWindow, day_index: int, config: EnvConfig) -> EnvState:
    """State at hour 0 of the selected day with a full task budget."""
    if not 0 <= day_index < window.days:
        raise IndexOutOfRange(f"day {day_index} outside window of {window.days} days")
    i = _signal_index(window, day_index, 0)
    return EnvState(
        price=window.price.values[i],
        renewable_power=window.renewable.values[i],
        background_power=window.background.values[i],
        task_remaining=config.task_hours_per_day,
        hour_of_day=0,
    )


def step(state: EnvState, action: int, window: DataWindow, day_index: int,
         config: EnvConfig) -> tuple[EnvState, RewardVector, bool]:
    """Advance one hour.

    A run request with no task hours left is coerced to idle (no power draw,
    no comfort). The reward uses the pre-decrement task_remaining. The
    episode terminates after hour 23's transition; the returned post-terminal
    state carries hour_of_day == 24 and must not be stepped again.
    """
    if state.hour_of_day >= HOURS_PER_DAY:
        raise SteppedAfterTerminal("episode already finished")
    effective_run = action == ACTION_RUN and state.task_remaining > 0
    shiftable = config.appliance_power if effective_run else 0.0
    reward = RewardVector(
        cost=reward_cost(state.price, shiftable, state.background_power,
                         state.renewable_power, config.cost_scale),
        comfort=reward_comfort(state.task_remaining, effective_run,
                               state.hour_of_day, config.comfort_window),
    )
    next_hour = state.hour_of_day + 1
    terminal = next_hour == HOURS_PER_DAY
    i = _signal_index(window, day_index, next_hour % HOURS_PER_DAY)
    next_state = EnvState(
        price=window.price.values[i],
        renewable_power=window.renewable.values[i],
        background_power=window.background.values[i],
        task_remaining=state.task_remaining - (1 if effective_run else 0),
        hour_of_day=next_hour,
    )
    return next_state, reward, terminal


@dataclass(frozen=True)
class WindowStats:
    """Per-series maxima used to scale observations into [0, 1]."""

    max_price: float
    max_renewable: float
    max_background: float

    @staticmethod
    def from_window(window: DataWindow) -> "WindowStats":
        return WindowStats(
            max_price=max(window.price.values),
            max_renewable=max(window.renewable.values),
            max_background=max(window.background.values),
        )

    def to_dict(self) -> dict:
        return {
            "max_price": self.max_price,
            "max_renewable": self.max_renewable,
            "max_background": self.max_background,
        }

    @staticmethod
    def from_dict(payload: dict) -> "WindowStats":
        return WindowStats(
            max_price=float(payload["max_price"]),
            max_renewable=float(payload["max_renewable"]),
            max_background=float(payload["max_background"]),
        )


def normalize_state(state: EnvState, stats: WindowStats,
                    config: EnvConfig) -> np.ndarray:
    """Scale the observation tuple to a length-5 vector in [0, 1]."""
    if min(stats.max_price, stats.max_renewable, stats.max_background) <= 0:
        raise ZeroMax("window maxima must all be > 0")
    return np.array(
        [
            state.price / stats.max_price,
            state.renewable_power / stats.max_renewable,
            state.background_power / stats.max_background,
            state.task_remaining / config.task_hours_per_day,
            state.hour_of_day / HOURS_PER_DAY,
        ],
        dtype=np.float64,
    )
