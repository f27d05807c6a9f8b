"""Pure-Python trial kernels, used when the compiled extension is missing.

Same signatures and outputs as ``_kernel.pyx``; runs the reference
strategies from :mod:`sarbandits.algorithms` one trial at a time.
"""

from __future__ import annotations

import numpy as np

from .algorithms import SAR, GapE, MultiSAR, SuccessiveRejects, Uniform, drive, random_priority
from .model import Bernoulli, PointMass
from .rng import RngStream

UNIFORM, SR, SAR_CODE, GAP_E = 0, 1, 2, 3


def _arms(kinds, params):
    return [Bernoulli(float(p)) if k == 0 else PointMass(float(p)) for k, p in zip(kinds, params)]


def _strategy(code, K, m, n, c, h1, priority):
    if code == SAR_CODE:
        return SAR(K, m, n, priority)
    if code == SR:
        return SuccessiveRejects(K, m, n, priority)
    if code == UNIFORM:
        return Uniform(K, m, n, priority)
    return GapE(K, m, n, c, h1, priority)


def _start(master_seed, trial, size, random_ties):
    rng = RngStream(int(master_seed), int(trial))
    return rng, (random_priority(size, rng) if random_ties else None)


def run_trials(code, kinds, params, m, n, schedule, c, h1, master_seed, first_trial, count,
               random_ties=False):
    arms = _arms(kinds, params)
    K = len(arms)
    out = np.zeros((count, K), dtype=np.uint8)
    for t in range(count):
        rng, priority = _start(master_seed, first_trial + t, K, random_ties)
        result = drive(_strategy(code, K, m, int(n), c, h1, priority), arms, rng)
        out[t, [j - 1 for j in result.selected]] = 1
    return out


def run_trials_multi(kinds, params, M, K, n, schedule, master_seed, first_trial, count,
                     random_ties=False):
    arms = _arms(kinds, params)
    out = np.zeros((count, M), dtype=np.int32)
    for t in range(count):
        rng, priority = _start(master_seed, first_trial + t, M * K, random_ties)
        out[t] = drive(MultiSAR(M, K, int(n), priority), arms, rng).selected
    return out

