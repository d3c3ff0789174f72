"""Dynamic-weight DQN for the energy MOMDP.

The Q-network sees the normalized 5-component observation with the two
preference weights appended (input length 7) and outputs one Q-value per
action. Rewards are scalarized through the weights before learning, so a
single conditioned policy covers the whole preference simplex; holding the
weight input constant turns the same trainer into a fixed-preference agent.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple

import numpy as np

from . import nn
from .datahub import HOURS_PER_DAY, DataWindow
from .env import (
    NUM_ACTIONS,
    EnvConfig,
    EnvState,
    PreferenceWeights,
    RewardVector,
    WindowStats,
    normalize_state,
    reset,
    scalarize,
    step,
)
from .errors import InsufficientData

STATE_DIM = 5
EXTENDED_DIM = STATE_DIM + 2


@dataclass(frozen=True)
class AgentHyper:
    episodes: int = 20000
    replay_capacity: int = 1000
    epsilon_start: float = 1.0
    epsilon_end: float = 0.01
    start_training_after: int = 10
    target_copy_period: int = 50
    batch_size: int = 64
    gamma: float = 1.0
    learning_rate: float = 0.001
    hidden: tuple[int, ...] = (32, 32, 16)
    # literal reciprocal reading of the decay; "multiplicative" (0.98/episode
    # compounding) kept for sensitivity checks
    epsilon_schedule: str = "reciprocal"

    def __post_init__(self):
        if self.epsilon_end > self.epsilon_start:
            raise ValueError("epsilon_end must be <= epsilon_start")
        if min(self.episodes, self.replay_capacity, self.batch_size) < 1:
            raise ValueError("episodes, capacity and batch size must be >= 1")
        if self.epsilon_schedule not in ("reciprocal", "multiplicative"):
            raise ValueError(f"unknown epsilon schedule {self.epsilon_schedule!r}")

    def to_dict(self) -> dict:
        return {
            "episodes": self.episodes,
            "replay_capacity": self.replay_capacity,
            "epsilon_start": self.epsilon_start,
            "epsilon_end": self.epsilon_end,
            "start_training_after": self.start_training_after,
            "target_copy_period": self.target_copy_period,
            "batch_size": self.batch_size,
            "gamma": self.gamma,
            "learning_rate": self.learning_rate,
            "hidden": list(self.hidden),
            "epsilon_schedule": self.epsilon_schedule,
        }

    @staticmethod
    def from_dict(payload: dict) -> "AgentHyper":
        return AgentHyper(
            episodes=int(payload["episodes"]),
            replay_capacity=int(payload["replay_capacity"]),
            epsilon_start=float(payload["epsilon_start"]),
            epsilon_end=float(payload["epsilon_end"]),
            start_training_after=int(payload["start_training_after"]),
            target_copy_period=int(payload["target_copy_period"]),
            batch_size=int(payload["batch_size"]),
            gamma=float(payload["gamma"]),
            learning_rate=float(payload["learning_rate"]),
            hidden=tuple(int(h) for h in payload["hidden"]),
            epsilon_schedule=str(payload["epsilon_schedule"]),
        )


def epsilon(episode: int, hyper: AgentHyper) -> float:
    """Exploration rate for a 1-based episode index, clamped to
    [epsilon_end, epsilon_start]."""
    if episode < 1:
        raise ValueError("episode is 1-based")
    if hyper.epsilon_schedule == "multiplicative":
        raw = hyper.epsilon_start * 0.98 ** (episode - 1)
    else:
        raw = 1.0 / (0.98 * episode)
    return min(hyper.epsilon_start, max(hyper.epsilon_end, raw))


def sample_weights(rng: np.random.Generator) -> PreferenceWeights:
    """Uniform draw of the cost weight; the pair always sums to 1."""
    w_cost = float(rng.random())
    return PreferenceWeights(w_cost, 1.0 - w_cost)


def extend_state(norm_state: np.ndarray, weights: PreferenceWeights) -> np.ndarray:
    """Append the weight pair to a normalized observation vector."""
    out = np.empty(EXTENDED_DIM, dtype=np.float64)
    out[:STATE_DIM] = norm_state
    out[STATE_DIM] = weights.w_cost
    out[STATE_DIM + 1] = weights.w_comf
    return out


def select_action(q_net: nn.Mlp, extended_state: np.ndarray, eps: float,
                  rng: np.random.Generator) -> int:
    """Epsilon-greedy over the two Q-outputs; ties go to action 0 (idle)."""
    if eps > 0.0 and rng.random() < eps:
        return int(rng.integers(NUM_ACTIONS))
    q = nn.forward(q_net, extended_state)
    return int(np.argmax(q))


class Transition(NamedTuple):
    state: np.ndarray
    action: int
    reward: float
    next_state: np.ndarray
    terminal: bool


class ReplayMemory:
    """Fixed-capacity ring buffer over flat transition arrays; oldest
    entries are overwritten first."""

    def __init__(self, capacity: int, state_dim: int = EXTENDED_DIM):
        self.capacity = capacity
        self._states = np.zeros((capacity, state_dim))
        self._actions = np.zeros(capacity, dtype=np.int64)
        self._rewards = np.zeros(capacity)
        self._next_states = np.zeros((capacity, state_dim))
        self._terminals = np.zeros(capacity)
        self._next = 0
        self._size = 0

    def __len__(self) -> int:
        return self._size

    def push(self, state: np.ndarray, action: int, reward: float,
             next_state: np.ndarray, terminal: bool) -> None:
        i = self._next
        self._states[i] = state
        self._actions[i] = action
        self._rewards[i] = reward
        self._next_states[i] = next_state
        self._terminals[i] = 1.0 if terminal else 0.0
        self._next = (i + 1) % self.capacity
        self._size = min(self._size + 1, self.capacity)

    def sample(self, batch_size: int, rng: np.random.Generator):
        idx = rng.choice(self._size, size=batch_size, replace=False)
        return (
            self._states[idx],
            self._actions[idx],
            self._rewards[idx],
            self._next_states[idx],
            self._terminals[idx],
        )

    def snapshot(self) -> list[Transition]:
        """Transitions oldest-first (test hook)."""
        if self._size < self.capacity:
            order = range(self._size)
        else:
            order = [(self._next + k) % self.capacity for k in range(self.capacity)]
        return [
            Transition(
                self._states[i].copy(),
                int(self._actions[i]),
                float(self._rewards[i]),
                self._next_states[i].copy(),
                bool(self._terminals[i]),
            )
            for i in order
        ]


def _episode_base(window: DataWindow, stats: WindowStats, config: EnvConfig,
                  day_index: int) -> np.ndarray:
    """Per-hour extended-state rows with task and weight columns left to the
    caller to fill (columns 3, 5, 6)."""
    lo = day_index * HOURS_PER_DAY
    hi = lo + HOURS_PER_DAY
    base = np.zeros((HOURS_PER_DAY, EXTENDED_DIM))
    base[:, 0] = np.asarray(window.price.values[lo:hi]) / stats.max_price
    base[:, 1] = np.asarray(window.renewable.values[lo:hi]) / stats.max_renewable
    base[:, 2] = np.asarray(window.background.values[lo:hi]) / stats.max_background
    base[:, 4] = np.arange(HOURS_PER_DAY) / HOURS_PER_DAY
    return base


def _row_for(base: np.ndarray, state: EnvState, config: EnvConfig) -> np.ndarray:
    row = base[state.hour_of_day % HOURS_PER_DAY].copy()
    row[3] = state.task_remaining / config.task_hours_per_day
    row[4] = state.hour_of_day / HOURS_PER_DAY
    return row


def _train(window: DataWindow, config: EnvConfig, hyper: AgentHyper, seed: int,
           fixed_weights: PreferenceWeights | None) -> nn.Mlp:
    if window.days != 1:
        raise InsufficientData(
            f"training expects a 1-day window, got {window.days} days"
        )
    init_ss, loop_ss = np.random.SeedSequence(seed).spawn(2)
    rng = np.random.default_rng(loop_ss)
    sizes = [EXTENDED_DIM, *hyper.hidden, NUM_ACTIONS]
    net = nn.Mlp.initialize(sizes, output_activation="identity", seed=init_ss)
    target = net.copy()
    optimizer = nn.Adam(net, hyper.learning_rate)

    stats = WindowStats.from_window(window)
    base = _episode_base(window, stats, config, day_index=0)
    memory = ReplayMemory(hyper.replay_capacity)
    batch_rows = np.arange(hyper.batch_size)

    for episode in range(1, hyper.episodes + 1):
        weights = fixed_weights if fixed_weights is not None else sample_weights(rng)
        base[:, 5] = weights.w_cost
        base[:, 6] = weights.w_comf
        eps = epsilon(episode, hyper)
        learning = episode > hyper.start_training_after

        state = reset(window, 0, config)
        row = _row_for(base, state, config)
        for _ in range(HOURS_PER_DAY):
            action = select_action(net, row, eps, rng)
            next_state, reward, terminal = step(state, action, window, 0, config)
            next_row = _row_for(base, next_state, config)
            memory.push(row, action, scalarize(reward, weights), next_row, terminal)
            state, row = next_state, next_row

            if learning and len(memory) >= hyper.batch_size:
                s, a, r, s2, t = memory.sample(hyper.batch_size, rng)
                q_next = nn.forward_batch(target, s2).max(axis=1)
                y = r + hyper.gamma * q_next * (1.0 - t)
                target_mat = nn.forward_batch(net, s)
                target_mat[batch_rows, a] = y
                grads = nn.backward(net, s, target_mat)
                optimizer.step(net, grads)

        if episode % hyper.target_copy_period == 0:
            target = net.copy()
    return net


def train_dwmorl(window: DataWindow, config: EnvConfig, hyper: AgentHyper,
                 seed: int) -> nn.Mlp:
    """Train the dynamic-weight agent: fresh preference weights every
    episode, scalarized-reward DQN updates against a periodic target copy."""
    return _train(window, config, hyper, seed, fixed_weights=None)


def train_fixed(window: DataWindow, config: EnvConfig, hyper: AgentHyper,
                weights: PreferenceWeights, seed: int) -> nn.Mlp:
    """Same trainer with the weight input pinned to one preference pair."""
    return _train(window, config, hyper, seed, fixed_weights=weights)


def rollout(q_net: nn.Mlp, weights: PreferenceWeights, window: DataWindow,
            config: EnvConfig, stats: WindowStats, greedy: bool = True,
            eps: float = 0.0, seed: int = 0) -> tuple[list[int], RewardVector]:
    """Run one episode per day of the window, accumulating the unscalarized
    reward vector. `stats` must be the scaling used at training time."""
    rng = np.random.default_rng(seed)
    effective_eps = 0.0 if greedy else eps
    actions: list[int] = []
    total_cost = 0.0
    total_comfort = 0.0
    for day in range(window.days):
        state = reset(window, day, config)
        for _ in range(HOURS_PER_DAY):
            ext = extend_state(normalize_state(state, stats, config), weights)
            action = select_action(q_net, ext, effective_eps, rng)
            state, reward, _ = step(state, action, window, day, config)
            actions.append(action)
            total_cost += reward.cost
            total_comfort += reward.comfort
    return actions, RewardVector(total_cost, total_comfort)


def save_policy(path: str | Path, net: nn.Mlp, hyper: AgentHyper,
                seed: int) -> None:
    """Model JSON plus a .meta.json sidecar with hyper and training seed."""
    path = Path(path)
    nn.save(net, path)
    meta = {"hyper": hyper.to_dict(), "seed": seed}
    _meta_path(path).write_text(
        json.dumps(meta, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )


def load_policy(path: str | Path) -> tuple[nn.Mlp, AgentHyper, int]:
    path = Path(path)
    net = nn.load(path)
    meta = json.loads(_meta_path(path).read_text(encoding="utf-8"))
    return net, AgentHyper.from_dict(meta["hyper"]), int(meta["seed"])


def _meta_path(path: Path) -> Path:
    return path.with_name(path.stem + ".meta.json")
