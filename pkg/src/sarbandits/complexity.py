"""Gap profiles, hardness measures H1/H2 and the SAR error bounds."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

from .model import MultiBanditInstance, PreconditionError, true_means


class InfeasibleComplexity(ValueError):
    """Every arm is interchangeable, so no gap contributes to H1/H2."""


def overline_log(N: int) -> float:
    """Half-harmonic normalizer ``1/2 + sum_{i=2}^N 1/i``."""
    if N < 2:
        raise PreconditionError(f"overline_log needs N >= 2, got {N}")
    total = 0.5
    for i in range(2, N + 1):
        total += 1.0 / i
    return total


@dataclass(frozen=True)
class GapProfile:
    """Per-arm gaps to the selection boundary.

    ``gaps[i]`` is ``None`` for an arm that is interchangeable: its mean
    equals a tied boundary value ``mu_(m) == mu_(m+1)``, so swapping it with
    another such arm never changes correctness.
    """

    gaps: tuple[Optional[float], ...]
    m: int
    boundary_means: tuple[float, float]

    @property
    def contributing(self) -> tuple[float, ...]:
        return tuple(g for g in self.gaps if g is not None)


@dataclass(frozen=True)
class ComplexityReport:
    H1: float
    H2: float
    sorted_gaps: tuple[float, ...]

    @property
    def count(self) -> int:
        return len(self.sorted_gaps)

    def sandwich(self) -> tuple[float, float]:
        """Endpoints ``(H2, log(2*count) * H2)`` that should bracket H1."""
        return self.H2, math.log(2 * self.count) * self.H2


def gaps_m_best(means: Sequence[float], m: int) -> GapProfile:
    K = len(means)
    if not 1 <= m <= K - 1:
        raise PreconditionError(f"m={m} outside 1..{K - 1}")
    ordered = sorted(means, reverse=True)
    upper, lower = ordered[m - 1], ordered[m]
    gaps: list[Optional[float]] = []
    if upper > lower:
        # Ranks are decided by value: anything at or above mu_(m) is in the top set.
        for mu in means:
            gaps.append(mu - lower if mu >= upper else upper - mu)
    else:
        tie = upper
        for mu in means:
            if mu == tie:
                gaps.append(None)
            elif mu > tie:
                gaps.append(mu - tie)
            else:
                gaps.append(tie - mu)
    return GapProfile(tuple(gaps), m, (upper, lower))


def _report(gaps: Sequence[float]) -> ComplexityReport:
    if not gaps:
        raise InfeasibleComplexity("all arms are interchangeable; H1/H2 undefined")
    ordered = tuple(sorted(gaps))
    # 1/g/g saturates to inf where g*g would underflow.  A correctly rounded
    # sum of the same terms keeps H2 <= H1 exact in floating point.
    terms = [1.0 / g / g for g in ordered]
    H1 = math.fsum(terms)
    H2 = max((i + 1) * t for i, t in enumerate(terms))
    return ComplexityReport(H1, H2, ordered)


def complexity_m_best(means: Sequence[float], m: int) -> ComplexityReport:
    return _report(gaps_m_best(means, m).contributing)


def complexity_multibandit(multi: MultiBanditInstance) -> ComplexityReport:
    """H1 is the sum of per-problem H1; H2 uses the pooled sorted gaps."""
    pooled: list[float] = []
    H1 = 0.0
    for problem in multi.problems:
        gaps = gaps_m_best(true_means(problem), 1).contributing
        H1 += _report(gaps).H1
        pooled.extend(gaps)
    return ComplexityReport(H1, _report(pooled).H2, tuple(sorted(pooled)))


def bound_theorem1(n: int, K: int, H2m: float) -> float:
    """``2 K^2 exp(-(n-K) / (8 logbar(K) H2m))``, unclamped."""
    if n < K + 1:
        raise PreconditionError(f"budget n={n} must be at least K+1={K + 1}")
    return 2.0 * K * K * math.exp(-(n - K) / (8.0 * overline_log(K) * H2m))


def bound_theorem2(n: int, M: int, K: int, H2M: float) -> float:
    MK = M * K
    if n < MK + 1:
        raise PreconditionError(f"budget n={n} must be at least MK+1={MK + 1}")
    return 2.0 * MK * MK * math.exp(-(n - MK) / (8.0 * overline_log(MK) * H2M))
