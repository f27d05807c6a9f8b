"""Independent reference computations used as test oracles.

Nothing here imports the package under test.  Each function restates a
definition in the most literal (and slowest) way available.
"""

from __future__ import annotations

import itertools
import math
from fractions import Fraction


def half_harmonic(N: int) -> Fraction:
    return Fraction(1, 2) + sum(Fraction(1, i) for i in range(2, N + 1))


def best_subsets(means, m):
    """All m-subsets (1-based) whose total mean is maximal."""
    subsets = list(itertools.combinations(range(1, len(means) + 1), m))
    totals = {s: sum(Fraction(means[i - 1]).limit_denominator(10**9) for i in s) for s in subsets}
    best = max(totals.values())
    return {frozenset(s) for s, t in totals.items() if t == best}


def gaps_by_definition(means, m):
    """Per-arm gap, ``None`` for arms tied with a tied boundary."""
    ordered = sorted(means, reverse=True)
    upper, lower = ordered[m - 1], ordered[m]
    out = []
    for mu in means:
        if upper == lower:
            out.append(None if mu == upper else abs(mu - upper))
        elif mu >= upper:
            out.append(mu - lower)
        else:
            out.append(upper - mu)
    return out


def h1_h2(gaps):
    live = sorted(g for g in gaps if g is not None)
    h1 = sum(1.0 / g**2 for g in live)
    h2 = max((i + 1) / g**2 for i, g in enumerate(live))
    return h1, h2


def binom_pmf(k: int, n: int, p: float) -> float:
    return math.comb(n, k) * p**k * (1 - p) ** (n - k)


def uniform_exact_error(means, m, n, random_ties=False):
    """Error of uniform allocation by enumerating per-arm success counts.

    Pull counts follow the remainder rule, the m highest empirical means
    are kept, ties go to the lower index (or, with ``random_ties``, every
    arm priority is equally likely).
    """
    K = len(means)
    counts = [n // K + (i < n % K) for i in range(K)]
    winners = best_subsets(means, m)
    priorities = list(itertools.permutations(range(K))) if random_ties else [tuple(range(K))]
    total = 0.0
    for successes in itertools.product(*(range(c + 1) for c in counts)):
        weight = 1.0
        for s, c, p in zip(successes, counts, means):
            weight *= binom_pmf(s, c, p)
        if weight == 0.0:
            continue
        emp = [Fraction(s, c) for s, c in zip(successes, counts)]
        wrong = 0
        for rank in priorities:
            order = sorted(range(K), key=lambda i: (-emp[i], rank[i]))
            chosen = frozenset(i + 1 for i in order[:m])
            wrong += chosen not in winners
        total += weight * wrong / len(priorities)
    return total


def wilson(errors: int, trials: int, z: float = 1.959963984540054):
    p = errors / trials
    denom = 1 + z * z / trials
    centre = p + z * z / (2 * trials)
    spread = z * math.sqrt(p * (1 - p) / trials + z * z / (4 * trials * trials))
    return (centre - spread) / denom, (centre + spread) / denom
