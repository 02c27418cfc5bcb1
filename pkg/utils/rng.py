"""Seed resolution and per-cell random streams"""
import logging
import os
from typing import Iterable, Optional, Sequence

import numpy as np

logger = logging.getLogger(__name__)

# Stage ids of the spawn key (replicate, stage, scheme, mechanism, epsilon index)
STAGE_DATA = 0
STAGE_TUNE = 1
STAGE_NOISE = 2
STAGE_BASELINE = 3


def resolve_seed(seed: Optional[int] = None) -> int:
    """Explicit seed, else DP2ERM_SEED, else fresh system entropy (logged so the run can be repeated)"""
    if seed is None:
        env_seed = os.getenv('DP2ERM_SEED')
        if env_seed not in (None, ''):
            seed = int(env_seed)
    if seed is None:
        seed = int(np.random.SeedSequence().entropy % (2 ** 63))
        logger.info(f"No seed given, drew seed={seed} from system entropy")
    if seed < 0:
        raise ValueError(f"seed must be >= 0, got {seed}")
    return int(seed)


def cell_key(replicate: int, stage: int, scheme: int = 0, mechanism: int = 0, epsilon: int = 0) -> tuple:
    return (int(replicate), int(stage), int(scheme), int(mechanism), int(epsilon))


def cell_stream(seed: int, key: Sequence[int]) -> np.random.Generator:
    """Philox generator for one cell; distinct keys give distinct seed sequences"""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=tuple(key))))


def stream_fingerprints(seed: int, keys: Iterable[Sequence[int]]) -> dict:
    """Map of key -> first 4 words of the derived state, used to check stream separation"""
    return {
        tuple(key): tuple(np.random.SeedSequence(seed, spawn_key=tuple(key)).generate_state(4).tolist())
        for key in keys
    }
