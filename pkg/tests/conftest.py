"""Shared fixtures. Full-scale trainings are cached per master seed for the
whole session so the acceptance criteria and trained-policy checks reuse the
same pipelines instead of retraining."""
import time

import numpy as np
import pytest

from prefinfer import agent, datahub, dwpi
from prefinfer.dwpi import DwpiHyper
from prefinfer.env import EnvConfig, WindowStats

DATA_TRAIN_SEED = 7
DATA_EVAL_SEED = 19
MASTER_SEEDS = (42, 43, 44)


@pytest.fixture(scope="session")
def config():
    return EnvConfig()


@pytest.fixture(scope="session")
def train_window():
    return datahub.synthesize(DATA_TRAIN_SEED, days=1)


@pytest.fixture(scope="session")
def eval_window():
    return datahub.synthesize(DATA_EVAL_SEED, days=7)


@pytest.fixture(scope="session")
def pipeline(train_window, config):
    """Lazily train one full pipeline (agent, demo grid, inference model)
    per master seed and cache it for every test that needs it."""
    cache = {}

    def get(master_seed):
        if master_seed not in cache:
            agent_seed, dwpi_seed, compare_seed = (
                int(s) for s in np.random.SeedSequence(master_seed).generate_state(3)
            )
            started = time.perf_counter()
            net = agent.train_dwmorl(
                train_window, config, agent.AgentHyper(), agent_seed
            )
            train_seconds = time.perf_counter() - started
            stats = WindowStats.from_window(train_window)
            records = dwpi.build_dataset(
                net, train_window, config, dwpi.weight_grid(0.01), stats
            )
            model, scaler = dwpi.train_dwpi(records, DwpiHyper(), dwpi_seed)
            cache[master_seed] = {
                "net": net,
                "stats": stats,
                "records": records,
                "model": model,
                "scaler": scaler,
                "compare_seed": compare_seed,
                "train_seconds": train_seconds,
            }
        return cache[master_seed]

    return get
