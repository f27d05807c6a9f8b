"""Fixed-budget pure-exploration strategies (pure-Python reference).

Each strategy is a small state machine speaking the pull/observe protocol::

    s = SAR(K, m, n)
    while (arm := s.next_pull()) is not None:
        s.observe(reward_of(arm))
    result = s.finish()

Strategies never see true means.  Gap-E is the exception only in that it
takes the scalar ``H1`` of the task as a constructor argument.

Ties are broken by a fixed arm priority: ``priority[i]`` is the tie rank of
arm ``i`` (0-based, lower wins).  The default is the arm index itself, i.e.
lowest index (lexicographic ``(problem, arm)`` for multi-bandit runs); the
Monte Carlo harness can pass a per-trial random permutation instead.  Either
way a run is a deterministic function of the reward sequence.

The compiled kernel in ``_kernel.pyx`` mirrors these classes operation for
operation; ``tests/test_kernels.py`` holds the two to identical output.
"""

from __future__ import annotations

import copy
import math
from collections import deque
from dataclasses import dataclass
from typing import Optional, Sequence, Union

from .complexity import overline_log
from .model import BanditInstance, MultiBanditInstance, PreconditionError, sample
from .rng import RngStream

ACCEPT = "accept"
REJECT = "reject"


class BudgetTooSmall(ValueError):
    pass


@dataclass(frozen=True)
class PhaseSchedule:
    """Cumulative per-arm pull counts ``n_1 <= ... <= n_L`` (``n_0 = 0``)."""

    n_k: tuple[int, ...]
    normalizer: float

    @property
    def phase_count(self) -> int:
        return len(self.n_k)

    def increments(self) -> list[int]:
        prev = (0,) + self.n_k[:-1]
        return [b - a for a, b in zip(prev, self.n_k)]

    def total_pulls(self, K: int) -> int:
        """Pulls used when one arm is deactivated after each phase."""
        return sum((K - k) * d for k, d in enumerate(self.increments()))


Arm = Union[int, tuple[int, int]]


@dataclass(frozen=True)
class Event:
    phase: int
    arm: Arm  # 1-based arm, or (arm, problem) for multi-bandit runs
    action: str


@dataclass(frozen=True)
class SelectionResult:
    selected: tuple[int, ...]
    pulls: tuple
    events: tuple[Event, ...]
    total_pulls: int

    @property
    def accepts(self) -> int:
        return sum(e.action == ACCEPT for e in self.events)

    @property
    def rejects(self) -> int:
        return sum(e.action == REJECT for e in self.events)


def _phased_schedule(n: int, K: int, phases: int, normalizer: float) -> PhaseSchedule:
    if K < 2:
        raise PreconditionError(f"need K >= 2 arms, got {K}")
    if n < K + 1:
        raise BudgetTooSmall(f"budget n={n} must exceed the number of arms K={K}")
    n_k = tuple(
        math.ceil((n - K) / (normalizer * (K + 1 - k))) for k in range(1, phases + 1)
    )
    return PhaseSchedule(n_k, normalizer)


def sar_schedule(n: int, K: int) -> PhaseSchedule:
    return _phased_schedule(n, K, K - 1, overline_log(K) if K >= 2 else 0.0)


def sr_normalizer(K: int, m: int) -> float:
    """``1 + sum_{i=m+2}^K 1/i``; equals ``overline_log(K)`` at m=1."""
    total = 1.0
    for i in range(m + 2, K + 1):
        total += 1.0 / i
    return total


def sr_schedule(n: int, K: int, m: int) -> PhaseSchedule:
    if not 1 <= m <= K - 1:
        raise PreconditionError(f"m={m} outside 1..{K - 1}")
    return _phased_schedule(n, K, K - m, sr_normalizer(K, m))


Priority = Optional[Sequence[int]]


def rank_desc(values: Sequence[float], tie: Priority = None) -> list[int]:
    """Positions sorted by decreasing value, ties by increasing ``tie`` rank."""
    if tie is None:
        return sorted(range(len(values)), key=lambda i: -values[i])
    return sorted(range(len(values)), key=lambda i: (-values[i], tie[i]))


def empirical_gaps(
    empirical_means: Sequence[float], m_active: int, tie: Priority = None
) -> list[float]:
    """Distance of each arm to the empirical selection boundary.

    Arms ranked in the top ``m_active`` are measured against the
    ``(m_active+1)``-th best; the rest against the ``m_active``-th best.
    """
    if not 1 <= m_active < len(empirical_means):
        raise PreconditionError(
            f"m_active={m_active} outside 1..{len(empirical_means) - 1}"
        )
    order = rank_desc(empirical_means, tie)
    inside = empirical_means[order[m_active]]
    outside = empirical_means[order[m_active - 1]]
    gaps = [0.0] * len(empirical_means)
    for r, i in enumerate(order):
        gaps[i] = empirical_means[i] - inside if r < m_active else outside - empirical_means[i]
    return gaps


def _argmax(values: Sequence[float], tie: Sequence[int]) -> int:
    best = 0
    for i in range(1, len(values)):
        if values[i] > values[best] or (values[i] == values[best] and tie[i] < tie[best]):
            best = i
    return best


def _argmin(values: Sequence[float], tie: Sequence[int]) -> int:
    best = 0
    for i in range(1, len(values)):
        if values[i] < values[best] or (values[i] == values[best] and tie[i] < tie[best]):
            best = i
    return best


def top_m(means: Sequence[float], m: int, tie: Priority = None) -> list[int]:
    return sorted(rank_desc(means, tie)[:m])


def random_priority(size: int, rng: RngStream) -> list[int]:
    """Uniform random tie ranks (Fisher-Yates driven by ``rng``)."""
    perm = list(range(size))
    for i in range(size - 1, 0, -1):
        j = int(rng.random() * (i + 1))
        perm[i], perm[j] = perm[j], perm[i]
    rank = [0] * size
    for pos, arm in enumerate(perm):
        rank[arm] = pos
    return rank


class Strategy:
    """Shared bookkeeping: per-arm sums/counts and a queue of planned pulls."""

    def __init__(self, K: int, n: int, priority: Priority = None):
        self.K = K
        self.n = n
        self.priority = list(range(K)) if priority is None else list(priority)
        if sorted(self.priority) != list(range(K)):
            raise PreconditionError("priority must be a permutation of 0..K-1")
        self.sums = [0.0] * K
        self.counts = [0] * K
        self.t = 0
        self.events: list[Event] = []
        self.selected: Optional[list[int]] = None
        self._queue: deque[int] = deque()
        self._done = False

    def next_pull(self) -> Optional[int]:
        """Return the next arm (1-based) to pull, or ``None`` when finished."""
        while not self._queue:
            if self._done:
                return None
            self._advance()
        return self._queue[0] + 1

    def observe(self, reward: float) -> None:
        arm = self._queue.popleft()
        self.sums[arm] += reward
        self.counts[arm] += 1
        self.t += 1

    def finish(self) -> SelectionResult:
        if self.next_pull() is not None:
            raise RuntimeError("finish() called before the strategy stopped pulling")
        return SelectionResult(
            selected=tuple(a + 1 for a in self.selected),
            pulls=tuple(self.counts),
            events=tuple(self.events),
            total_pulls=self.t,
        )

    def mean(self, arm: int) -> float:
        return self.sums[arm] / self.counts[arm]

    def clone(self):
        new = copy.copy(self)
        new.sums = list(self.sums)
        new.counts = list(self.counts)
        new.events = list(self.events)
        new._queue = deque(self._queue)
        if self.selected is not None:
            new.selected = list(self.selected)
        for name in self._extra_state:
            setattr(new, name, list(getattr(self, name)))
        return new

    _extra_state: tuple[str, ...] = ()

    def _advance(self) -> None:
        raise NotImplementedError

    def _log(self, phase: int, arm: Arm, action: str) -> None:
        self.events.append(Event(phase, arm, action))


class _Phased(Strategy):
    """Strategies that pull every active arm up to a cumulative count per phase."""

    _extra_state = ("active",)

    def __init__(self, K: int, n: int, schedule: PhaseSchedule, priority: Priority = None):
        super().__init__(K, n, priority)
        self.schedule = schedule
        self.active = list(range(K))
        self.phase = 0
        self._closing = False

    def _advance(self) -> None:
        if self._closing:
            self._closing = False
            self._close_phase(self.phase)
            if self._done:
                return
        if self._before_phase(self.phase + 1):
            self._done = True
            return
        self.phase += 1
        n_k = self.schedule.n_k
        delta = n_k[self.phase - 1] - (n_k[self.phase - 2] if self.phase > 1 else 0)
        for arm in self.active:
            self._queue.extend([arm] * delta)
        self._closing = True

    def _before_phase(self, k: int) -> bool:
        """Handle stop conditions before phase ``k``; True means stop."""
        raise NotImplementedError

    def _close_phase(self, k: int) -> None:
        raise NotImplementedError


class SAR(_Phased):
    """Successive Accepts and Rejects for m-best identification."""

    _extra_state = ("active", "accepted")

    def __init__(self, K: int, m: int, n: int, priority: Priority = None):
        if not 1 <= m <= K - 1:
            raise PreconditionError(f"m={m} outside 1..{K - 1}")
        super().__init__(K, n, sar_schedule(n, K), priority)
        self.m = m
        self.m_left = m
        self.accepted: list[int] = []

    def _before_phase(self, k: int) -> bool:
        if self.m_left == 0:
            self.selected = sorted(self.accepted)
            return True
        if self.m_left == len(self.active):
            for arm in self.active:
                self._accept(k, arm)
            self.active = []
            self.selected = sorted(self.accepted)
            return True
        return False

    def _accept(self, k: int, arm: int) -> None:
        self.accepted.append(arm)
        self.m_left -= 1
        self._log(k, arm + 1, ACCEPT)

    def _close_phase(self, k: int) -> None:
        means = [self.mean(a) for a in self.active]
        tie = [self.priority[a] for a in self.active]
        gaps = empirical_gaps(means, self.m_left, tie)
        pos = _argmax(gaps, tie)
        arm = self.active.pop(pos)
        boundary = means[rank_desc(means, tie)[self.m_left]]
        if means[pos] > boundary:
            self._accept(k, arm)
        else:
            self._log(k, arm + 1, REJECT)


class SuccessiveRejects(_Phased):
    """SR adapted to m-best: K-m phases, the m survivors are returned."""

    def __init__(self, K: int, m: int, n: int, priority: Priority = None):
        super().__init__(K, n, sr_schedule(n, K, m), priority)
        self.m = m

    def _before_phase(self, k: int) -> bool:
        if k > self.schedule.phase_count:
            self.selected = list(self.active)
            return True
        return False

    def _close_phase(self, k: int) -> None:
        means = [self.mean(a) for a in self.active]
        pos = _argmin(means, [self.priority[a] for a in self.active])
        arm = self.active.pop(pos)
        self._log(k, arm + 1, REJECT)


class Uniform(Strategy):
    """Split the budget evenly, extra pulls to the lowest-indexed arms."""

    def __init__(self, K: int, m: int, n: int, priority: Priority = None):
        if not 1 <= m <= K - 1:
            raise PreconditionError(f"m={m} outside 1..{K - 1}")
        if n < K:
            raise BudgetTooSmall(f"budget n={n} is smaller than K={K}")
        super().__init__(K, n, priority)
        self.m = m
        self._planned = False

    @staticmethod
    def allocation(n: int, K: int) -> list[int]:
        base, extra = divmod(n, K)
        return [base + (i < extra) for i in range(K)]

    def _advance(self) -> None:
        if not self._planned:
            self._planned = True
            for arm, count in enumerate(self.allocation(self.n, self.K)):
                self._queue.extend([arm] * count)
            return
        self.selected = top_m([self.mean(a) for a in range(self.K)], self.m, self.priority)
        self._done = True


class GapE(Strategy):
    """Gap-E with known complexity ``H1`` and exploration parameter ``c``."""

    def __init__(self, K: int, m: int, n: int, c: float, H1: float, priority: Priority = None):
        if not 1 <= m <= K - 1:
            raise PreconditionError(f"m={m} outside 1..{K - 1}")
        if n < K:
            raise BudgetTooSmall(f"budget n={n} is smaller than K={K}")
        if not c > 0 or not H1 > 0:
            raise PreconditionError("Gap-E needs c > 0 and H1 > 0")
        super().__init__(K, n, priority)
        self.m = m
        self.c = c
        self.H1 = H1
        self._scale = n / H1

    def index(self) -> list[float]:
        means = [self.mean(a) for a in range(self.K)]
        gaps = empirical_gaps(means, self.m, self.priority)
        return [
            -gaps[i] + self.c * math.sqrt(self._scale / self.counts[i])
            for i in range(self.K)
        ]

    def _advance(self) -> None:
        if self.t == self.n:
            self.selected = top_m([self.mean(a) for a in range(self.K)], self.m, self.priority)
            self._done = True
        elif self.t < self.K:
            self._queue.append(self.t)
        else:
            self._queue.append(_argmax(self.index(), self.priority))


class MultiSAR(_Phased):
    """SAR for best-arm identification in M bandit problems at once.

    Pairs ``(problem, arm)`` are flattened to ``problem * K + arm``; the
    default priority over flat ids is therefore lexicographic.
    """

    def __init__(self, M: int, K: int, n: int, priority: Priority = None):
        if M < 1 or K < 2:
            raise PreconditionError("multi-bandit SAR needs M >= 1 and K >= 2")
        super().__init__(M * K, n, sar_schedule(n, M * K), priority)
        self.M = M
        self.arms_per_problem = K
        self.choice = [0] * M

    _extra_state = ("active", "choice")

    def _pair(self, flat: int) -> tuple[int, int]:
        problem, arm = divmod(flat, self.arms_per_problem)
        return arm + 1, problem + 1

    def _accept(self, k: int, flat: int) -> None:
        self.active.remove(flat)
        problem, arm = divmod(flat, self.arms_per_problem)
        self.choice[problem] = arm
        self._log(k, self._pair(flat), ACCEPT)

    def _before_phase(self, k: int) -> bool:
        if k > self.schedule.phase_count:
            self._accept(k, self.active[0])
            self.selected = list(self.choice)
            return True
        return False

    def _close_phase(self, k: int) -> None:
        by_problem: dict[int, list[int]] = {}
        for flat in self.active:
            by_problem.setdefault(flat // self.arms_per_problem, []).append(flat)
        leader = {}
        for problem, flats in by_problem.items():
            if len(flats) == 1:
                self._accept(k, flats[0])
                return
            leader[problem] = max(flats, key=lambda f: (self.mean(f), -self.priority[f]))
        gaps = [
            self.mean(leader[flat // self.arms_per_problem]) - self.mean(flat)
            for flat in self.active
        ]
        worst = self.active[_argmax(gaps, [self.priority[f] for f in self.active])]
        self.active.remove(worst)
        self._log(k, self._pair(worst), REJECT)

    def finish(self) -> SelectionResult:
        result = super().finish()
        K = self.arms_per_problem
        pulls = tuple(tuple(self.counts[p * K:(p + 1) * K]) for p in range(self.M))
        return SelectionResult(result.selected, pulls, result.events, result.total_pulls)


def drive(strategy: Strategy, arms: Sequence, rng: RngStream) -> SelectionResult:
    while (arm := strategy.next_pull()) is not None:
        strategy.observe(sample(arms[arm - 1], rng))
    return strategy.finish()


def run_sar_m_best(
    instance: BanditInstance, m: int, n: int, rng: RngStream, priority: Priority = None
) -> SelectionResult:
    return drive(SAR(instance.K, m, n, priority), instance.arms, rng)


def run_sr_m_best(
    instance: BanditInstance, m: int, n: int, rng: RngStream, priority: Priority = None
) -> SelectionResult:
    return drive(SuccessiveRejects(instance.K, m, n, priority), instance.arms, rng)


def run_uniform(
    instance: BanditInstance, m: int, n: int, rng: RngStream, priority: Priority = None
) -> SelectionResult:
    return drive(Uniform(instance.K, m, n, priority), instance.arms, rng)


def run_gap_e(
    instance: BanditInstance,
    m: int,
    n: int,
    c: float,
    H1m: float,
    rng: RngStream,
    priority: Priority = None,
) -> SelectionResult:
    return drive(GapE(instance.K, m, n, c, H1m, priority), instance.arms, rng)


def flat_arms(multi: MultiBanditInstance) -> list:
    return [arm for problem in multi.problems for arm in problem.arms]


def run_sar_multibandit(
    multi: MultiBanditInstance, n: int, rng: RngStream, priority: Priority = None
) -> SelectionResult:
    return drive(MultiSAR(multi.M, multi.K, n, priority), flat_arms(multi), rng)
