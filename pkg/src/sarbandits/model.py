"""Bandit instances, reward distributions and the success criterion.

Arms are 1-indexed in every public function, as in the usual notation
``mu_1, ..., mu_K``.  Internally lists are 0-indexed; conversion happens at
the boundary.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Sequence, Union

from .rng import RngStream

BERNOULLI = 0
POINT_MASS = 1


class PreconditionError(ValueError):
    """An operation was called outside its documented domain."""


@dataclass(frozen=True)
class Bernoulli:
    p: float

    kind = BERNOULLI

    def __post_init__(self):
        if not 0.0 <= self.p <= 1.0:
            raise PreconditionError(f"Bernoulli parameter {self.p} not in [0,1]")

    @property
    def mean(self) -> float:
        return self.p

    @property
    def param(self) -> float:
        return self.p


@dataclass(frozen=True)
class PointMass:
    v: float

    kind = POINT_MASS

    def __post_init__(self):
        if not 0.0 <= self.v <= 1.0:
            raise PreconditionError(f"PointMass value {self.v} not in [0,1]")

    @property
    def mean(self) -> float:
        return self.v

    @property
    def param(self) -> float:
        return self.v


ArmDistribution = Union[Bernoulli, PointMass]


def sample(dist: ArmDistribution, rng: RngStream) -> float:
    """Draw one reward.  Both kinds consume exactly one uniform draw."""
    u = rng.random()
    if dist.kind == BERNOULLI:
        return 1.0 if u < dist.p else 0.0
    return dist.v


@dataclass(frozen=True)
class BanditInstance:
    arms: tuple[ArmDistribution, ...]

    def __init__(self, arms: Iterable[ArmDistribution]):
        arms = tuple(arms)
        if len(arms) < 2:
            raise PreconditionError("a bandit instance needs K >= 2 arms")
        object.__setattr__(self, "arms", arms)

    @classmethod
    def bernoulli(cls, means: Sequence[float]) -> "BanditInstance":
        return cls(Bernoulli(float(p)) for p in means)

    @classmethod
    def point_mass(cls, means: Sequence[float]) -> "BanditInstance":
        return cls(PointMass(float(v)) for v in means)

    @property
    def K(self) -> int:
        return len(self.arms)

    def __len__(self) -> int:
        return len(self.arms)


@dataclass(frozen=True)
class MultiBanditInstance:
    problems: tuple[BanditInstance, ...]

    def __init__(self, problems: Iterable[BanditInstance]):
        problems = tuple(problems)
        if not problems:
            raise PreconditionError("a multi-bandit instance needs M >= 1 problems")
        if len({p.K for p in problems}) != 1:
            raise PreconditionError("all problems must have the same number of arms")
        object.__setattr__(self, "problems", problems)

    @classmethod
    def bernoulli(cls, means: Sequence[Sequence[float]]) -> "MultiBanditInstance":
        return cls(BanditInstance.bernoulli(row) for row in means)

    @classmethod
    def point_mass(cls, means: Sequence[Sequence[float]]) -> "MultiBanditInstance":
        return cls(BanditInstance.point_mass(row) for row in means)

    @property
    def M(self) -> int:
        return len(self.problems)

    @property
    def K(self) -> int:
        return self.problems[0].K


def true_means(instance: BanditInstance) -> tuple[float, ...]:
    return tuple(arm.mean for arm in instance.arms)


def is_correct_selection(instance: BanditInstance, m: int, selected: Iterable[int]) -> bool:
    """Tie-tolerant check that ``selected`` (1-indexed) is an optimal m-subset.

    A selection is correct when the multiset of its true means equals the
    multiset of the ``m`` largest means, so any arm tied at the boundary may
    stand in for another.
    """
    means = true_means(instance)
    K = len(means)
    chosen = set(selected)
    if not 1 <= m <= K - 1:
        raise PreconditionError(f"m={m} outside 1..{K - 1}")
    if len(chosen) != m or not all(1 <= j <= K for j in chosen):
        raise PreconditionError(f"selection {sorted(chosen)} is not a set of {m} arms in 1..{K}")
    best = sorted(means, reverse=True)[:m]
    return Counter(means[j - 1] for j in chosen) == Counter(best)


def is_correct_multibandit(multi: MultiBanditInstance, selected: Sequence[int]) -> bool:
    if len(selected) != multi.M:
        raise PreconditionError(f"expected {multi.M} selected arms, got {len(selected)}")
    for problem, j in zip(multi.problems, selected):
        means = true_means(problem)
        if not 1 <= j <= len(means):
            raise PreconditionError(f"arm {j} outside 1..{len(means)}")
        if means[j - 1] != max(means):
            return False
    return True
