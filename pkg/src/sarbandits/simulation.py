"""Monte Carlo and exact estimates of the misidentification probability."""

from __future__ import annotations

import itertools
import math
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence, Union

import numpy as np

from . import kernels
from .algorithms import SAR, GapE, MultiSAR, SuccessiveRejects, Uniform, flat_arms
from .complexity import (
    InfeasibleComplexity,
    bound_theorem1,
    bound_theorem2,
    complexity_m_best,
    complexity_multibandit,
)
from .model import (
    BERNOULLI,
    BanditInstance,
    MultiBanditInstance,
    PreconditionError,
    is_correct_multibandit,
    is_correct_selection,
    true_means,
)
from .rng import MASK64, derive_seed

Z95 = 1.959963984540054
MAX_ENUMERATION_BUDGET = 22
# means like 0.6 - 0.4 carry ~1e-16 relative error; don't let it bump a ceiling
CEIL_RTOL = 1e-9
DEFAULT_TRIALS = 10_000
# "index": ties go to the lowest arm index; "random": each trial breaks ties
# by a fresh random arm priority drawn first from its own stream
TIES = ("index", "random")
DEFAULT_TIES = "index"
MAX_TIE_PERMUTATIONS = 720


class EnumerationTooLarge(ValueError):
    pass


@dataclass(frozen=True)
class StrategySpec:
    """Which strategy to run: ``sar``, ``sr``, ``uniform`` or ``gap_e``."""

    name: str
    c: float = 2.0

    def __post_init__(self):
        if self.name not in kernels.STRATEGY_CODES:
            raise ValueError(f"unknown strategy {self.name!r}")
        if self.name == "gap_e" and not self.c > 0:
            raise ValueError("gap_e needs c > 0")

    @property
    def params(self) -> str:
        return f"c={self.c:g}" if self.name == "gap_e" else ""

    def __str__(self) -> str:
        return f"gap_e(c={self.c:g})" if self.name == "gap_e" else self.name

    @classmethod
    def parse(cls, text: str) -> "StrategySpec":
        text = text.strip()
        match = re.fullmatch(r"gap_e\s*(?:\(\s*c\s*=\s*([^)\s]+)\s*\))?", text)
        if match:
            return cls("gap_e", float(match.group(1)) if match.group(1) else 2.0)
        return cls(text)


@dataclass(frozen=True)
class ErrorEstimate:
    p_hat: float
    trials: int
    errors: int
    ci_low: float
    ci_high: float
    master_seed: int

    @property
    def std_error(self) -> float:
        return math.sqrt(self.p_hat * (1.0 - self.p_hat) / self.trials)

    @classmethod
    def from_counts(cls, errors: int, trials: int, master_seed: int) -> "ErrorEstimate":
        p_hat = errors / trials
        low, high = wilson_interval(errors, trials)
        return cls(p_hat, trials, errors, min(low, p_hat), max(high, p_hat), master_seed)


def wilson_interval(errors: int, trials: int, z: float = Z95) -> tuple[float, float]:
    p = errors / trials
    z2n = z * z / trials
    center = (p + z2n / 2) / (1 + z2n)
    half = z / (1 + z2n) * math.sqrt(p * (1 - p) / trials + z2n / (4 * trials))
    return max(0.0, center - half), min(1.0, center + half)


def _make_strategy(spec: StrategySpec, K: int, m: int, n: int, h1: float, priority=None):
    if spec.name == "sar":
        return SAR(K, m, n, priority)
    if spec.name == "sr":
        return SuccessiveRejects(K, m, n, priority)
    if spec.name == "uniform":
        return Uniform(K, m, n, priority)
    return GapE(K, m, n, spec.c, h1, priority)


def _check_ties(ties: str) -> bool:
    if ties not in TIES:
        raise PreconditionError(f"ties must be one of {TIES}, got {ties!r}")
    return ties == "random"


def gap_e_complexity(instance: BanditInstance, m: int) -> float:
    """H1 handed to Gap-E.  If every arm ties, any selection is correct and
    the index only needs a positive scale, so 1.0 is used."""
    try:
        return complexity_m_best(true_means(instance), m).H1
    except InfeasibleComplexity:
        return 1.0


def correct_rows(instance: BanditInstance, m: int, masks: np.ndarray) -> np.ndarray:
    """Vectorised tie-tolerant check over ``(trials, K)`` selection masks.

    A selection is optimal iff it contains every arm strictly above the
    m-th largest mean and no arm strictly below it.
    """
    mu = np.array(true_means(instance))
    boundary = np.sort(mu)[::-1][m - 1]
    above, below = mu > boundary, mu < boundary
    sel = masks.astype(bool)
    return sel[:, above].all(axis=1) & ~sel[:, below].any(axis=1)


def correct_rows_multi(multi: MultiBanditInstance, chosen: np.ndarray) -> np.ndarray:
    mu = np.array([true_means(p) for p in multi.problems])
    picked = np.take_along_axis(mu[None, :, :], (chosen - 1)[:, :, None], axis=2)[:, :, 0]
    return (picked == mu.max(axis=1)[None, :]).all(axis=1)


def _chunks(trials: int, workers: int) -> list[tuple[int, int]]:
    workers = max(1, min(workers, trials))
    size = -(-trials // workers)
    return [(s, min(size, trials - s)) for s in range(0, trials, size)]


def estimate_error(
    instance: Union[BanditInstance, MultiBanditInstance],
    strategy: Union[StrategySpec, str],
    m: Optional[int],
    n: int,
    trials: int,
    master_seed: int,
    workers: int = 1,
    h1: Optional[float] = None,
    ties: str = DEFAULT_TIES,
) -> ErrorEstimate:
    """Monte Carlo frequency of misidentification over ``trials`` runs.

    Trial ``t`` always draws from the stream ``(master_seed, t)``, so the
    result does not depend on ``workers``.
    """
    random_ties = _check_ties(ties)
    if trials < 1:
        raise PreconditionError("trials must be >= 1")
    master_seed &= MASK64
    chunks = _chunks(trials, workers)

    if isinstance(instance, MultiBanditInstance):
        MultiSAR(instance.M, instance.K, n)  # raises on bad preconditions

        def block(chunk):
            return kernels.run_trials_multi(
                instance, n, master_seed, *chunk, random_ties=random_ties
            )

        ok = lambda out: correct_rows_multi(instance, out)
    else:
        spec = StrategySpec.parse(strategy) if isinstance(strategy, str) else strategy
        if h1 is None:
            h1 = gap_e_complexity(instance, m) if spec.name == "gap_e" else 0.0
        _make_strategy(spec, instance.K, m, n, h1 or 1.0)  # raises on bad preconditions

        def block(chunk):
            return kernels.run_trials(
                instance, spec.name, m, n, master_seed, *chunk, c=spec.c, h1=h1,
                random_ties=random_ties,
            )

        ok = lambda out: correct_rows(instance, m, out)

    if len(chunks) == 1:
        outputs = [block(chunks[0])]
    else:
        with ThreadPoolExecutor(max_workers=len(chunks)) as pool:
            outputs = list(pool.map(block, chunks))
    errors = int(sum((~ok(out)).sum() for out in outputs))
    return ErrorEstimate.from_counts(errors, trials, master_seed)


def exact_error_enumeration(
    instance: Union[BanditInstance, MultiBanditInstance],
    strategy: Union[StrategySpec, str],
    m: Optional[int],
    n: int,
    h1: Optional[float] = None,
    ties: str = DEFAULT_TIES,
) -> float:
    """Exact misidentification probability by walking the outcome tree.

    Each Bernoulli pull with 0 < p < 1 splits the run in two; every other
    pull is deterministic.  Leaves are weighted by their path probability.
    With random ties the result is averaged over every arm priority.
    """
    random_ties = _check_ties(ties)
    if n > MAX_ENUMERATION_BUDGET:
        raise EnumerationTooLarge(
            f"n={n} exceeds {MAX_ENUMERATION_BUDGET}; the outcome tree would have 2^{n} leaves"
        )
    if isinstance(instance, MultiBanditInstance):
        arms = flat_arms(instance)
        make = lambda priority: MultiSAR(instance.M, instance.K, n, priority)
        wrong = lambda r: not is_correct_multibandit(instance, r.selected)
    else:
        spec = StrategySpec.parse(strategy) if isinstance(strategy, str) else strategy
        if h1 is None:
            h1 = gap_e_complexity(instance, m) if spec.name == "gap_e" else 1.0
        arms = instance.arms
        make = lambda priority: _make_strategy(spec, instance.K, m, n, h1, priority)
        wrong = lambda r: not is_correct_selection(instance, m, r.selected)

    size = len(arms)
    if not random_ties:
        priorities = [None]
    elif math.factorial(size) > MAX_TIE_PERMUTATIONS:
        raise EnumerationTooLarge(
            f"{size}! arm priorities exceed {MAX_TIE_PERMUTATIONS}; use ties='index'"
        )
    else:
        priorities = list(itertools.permutations(range(size)))

    def explore(strategy, weight: float) -> float:
        total = 0.0
        while (arm := strategy.next_pull()) is not None:
            dist = arms[arm - 1]
            if dist.kind == BERNOULLI and 0.0 < dist.p < 1.0:
                branch = strategy.clone()
                branch.observe(1.0)
                total += explore(branch, weight * dist.p)
                strategy.observe(0.0)
                weight *= 1.0 - dist.p
            elif dist.kind == BERNOULLI:
                strategy.observe(dist.p)
            else:
                strategy.observe(dist.v)
        return total + (weight if wrong(strategy.finish()) else 0.0)

    return math.fsum(explore(make(p), 1.0) for p in priorities) / len(priorities)


def _ceil(x: float) -> int:
    return math.ceil(x * (1.0 - CEIL_RTOL))


def suggest_budget(instance: Union[BanditInstance, Sequence[float]], m_range: Iterable[int]) -> int:
    """Ceiling of the largest H1 over the feasible m in ``m_range``."""
    means = true_means(instance) if isinstance(instance, BanditInstance) else tuple(instance)
    values = []
    for m in m_range:
        try:
            values.append(complexity_m_best(means, m).H1)
        except InfeasibleComplexity:
            continue
    if not values:
        raise InfeasibleComplexity("no m in the range has a finite complexity")
    return _ceil(max(values))


def suggest_budget_multibandit(multi: MultiBanditInstance) -> int:
    return _ceil(complexity_multibandit(multi).H1)


@dataclass(frozen=True)
class SweepRow:
    experiment: str
    strategy: StrategySpec
    m: Optional[int]
    n: int
    estimate: ErrorEstimate
    bound: Optional[float] = None


@dataclass
class SweepResult:
    rows: list[SweepRow] = field(default_factory=list)

    def cell(self, strategy: str, m: Optional[int]) -> SweepRow:
        for row in self.rows:
            if str(row.strategy) == strategy and row.m == m:
                return row
        raise KeyError((strategy, m))


def cell_seed(master_seed: int, ordinal: int, m: int) -> int:
    return derive_seed(master_seed, ordinal, m)


def sar_bound(instance: BanditInstance, m: int, n: int) -> Optional[float]:
    try:
        H2 = complexity_m_best(true_means(instance), m).H2
    except InfeasibleComplexity:
        return None
    return bound_theorem1(n, instance.K, H2)


def sweep_over_m(
    instance: BanditInstance,
    strategies: Sequence[Union[StrategySpec, str]],
    m_values: Sequence[int],
    n: int,
    trials: int,
    master_seed: int,
    workers: int = 1,
    experiment: str = "",
    ties: str = DEFAULT_TIES,
) -> SweepResult:
    """One estimate per (strategy, m); cell seeds depend only on
    ``(master_seed, strategy ordinal, m)``."""
    specs = [StrategySpec.parse(s) if isinstance(s, str) else s for s in strategies]
    for m in m_values:
        if not 1 <= m <= instance.K - 1:
            raise PreconditionError(f"m={m} outside 1..{instance.K - 1}")
    result = SweepResult()
    for ordinal, spec in enumerate(specs):
        for m in m_values:
            seed = cell_seed(master_seed, ordinal, m)
            est = estimate_error(instance, spec, m, n, trials, seed, workers=workers, ties=ties)
            bound = sar_bound(instance, m, n) if spec.name == "sar" else None
            result.rows.append(SweepRow(experiment, spec, m, n, est, bound))
    return result


def run_multibandit(
    multi: MultiBanditInstance,
    n: int,
    trials: int,
    master_seed: int,
    workers: int = 1,
    experiment: str = "",
    ties: str = DEFAULT_TIES,
) -> SweepResult:
    seed = cell_seed(master_seed, 0, 0)
    est = estimate_error(multi, "sar", None, n, trials, seed, workers=workers, ties=ties)
    try:
        bound = bound_theorem2(n, multi.M, multi.K, complexity_multibandit(multi).H2)
    except InfeasibleComplexity:
        bound = None
    return SweepResult([SweepRow(experiment, StrategySpec("sar"), None, n, est, bound)])
