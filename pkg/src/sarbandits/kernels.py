"""Backend selection for the Monte Carlo trial kernels.

The compiled Cython extension is used when it imports; otherwise the
pure-Python fallback runs the reference strategies.  Both return identical
arrays for identical arguments.
"""

from __future__ import annotations

import numpy as np

from . import _pykernel
from .algorithms import sar_schedule, sr_schedule
from .model import BanditInstance, MultiBanditInstance

try:
    from . import _kernel as _compiled
except ImportError:  # extension not built
    _compiled = None

STRATEGY_CODES = {"uniform": 0, "sr": 1, "sar": 2, "gap_e": 3}

_backends = {"python": _pykernel}
if _compiled is not None:
    _backends["cython"] = _compiled

_active = "cython" if _compiled is not None else "python"


def available_backends() -> list[str]:
    return sorted(_backends)


def backend() -> str:
    return _active


def use_backend(name: str) -> None:
    global _active
    if name not in _backends:
        raise ValueError(f"backend {name!r} unavailable; have {available_backends()}")
    _active = name


def encode_arms(arms) -> tuple[np.ndarray, np.ndarray]:
    kinds = np.array([a.kind for a in arms], dtype=np.int8)
    params = np.array([a.param for a in arms], dtype=np.float64)
    return kinds, params


def schedule_for(strategy: str, n: int, K: int, m: int) -> np.ndarray:
    if strategy == "sar":
        n_k = sar_schedule(n, K).n_k
    elif strategy == "sr":
        n_k = sr_schedule(n, K, m).n_k
    else:
        n_k = (0,)
    return np.array(n_k, dtype=np.int64)


def run_trials(
    instance: BanditInstance,
    strategy: str,
    m: int,
    n: int,
    master_seed: int,
    first_trial: int,
    count: int,
    c: float = 0.0,
    h1: float = 0.0,
    random_ties: bool = False,
    backend_name: str | None = None,
) -> np.ndarray:
    """Selection masks, shape ``(count, K)``, for a block of trials."""
    impl = _backends[backend_name or _active]
    kinds, params = encode_arms(instance.arms)
    schedule = schedule_for(strategy, n, instance.K, m)
    return impl.run_trials(
        STRATEGY_CODES[strategy], kinds, params, m, n, schedule,
        float(c), float(h1), master_seed, first_trial, count, bool(random_ties),
    )


def run_trials_multi(
    multi: MultiBanditInstance,
    n: int,
    master_seed: int,
    first_trial: int,
    count: int,
    random_ties: bool = False,
    backend_name: str | None = None,
) -> np.ndarray:
    """1-based chosen arm per problem, shape ``(count, M)``."""
    impl = _backends[backend_name or _active]
    kinds, params = encode_arms([a for p in multi.problems for a in p.arms])
    schedule = np.array(sar_schedule(n, multi.M * multi.K).n_k, dtype=np.int64)
    return impl.run_trials_multi(
        kinds, params, multi.M, multi.K, n, schedule, master_seed, first_trial, count,
        bool(random_ties),
    )
