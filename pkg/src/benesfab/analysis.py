"""Boundedness measurement, closed-form counts, and brute-force oracles.

The closed form K!*(K+1)^(n-K) and the definition-based count of
permutations with max displacement <= K demonstrably differ (18 vs 14 at
n=4, K=2); both are implemented and CountReport surfaces the discrepancy
rather than choosing.  All arithmetic is exact (Python ints / Fraction).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .errors import FabricError
from .permutation import Permutation

ENUMERATION_LIMIT = 12  # factorial/backtracking budget


@dataclass(frozen=True)
class Boundedness:
    """k_exact = max |p[i] - i|; K = smallest power of two >= k_exact,
    with K = 1 when k_exact <= 1."""

    k_exact: int
    K: int


def boundedness(p: Permutation) -> Boundedness:
    k_exact = max((abs(v - i) for i, v in enumerate(p)), default=0)
    K = 1 if k_exact <= 1 else 1 << (k_exact - 1).bit_length()
    return Boundedness(k_exact, K)


def count_k_bounded_formula(n: int, K: int) -> int:
    """The closed form K!*(K+1)^(n-K) for K <= n/2 (K=0 allowed as a
    literal input).  See CountReport: this is not the exact class size."""
    if K != 0 and (K & (K - 1) or K < 0):
        raise FabricError(f"K must be 0 or a power of 2, got {K}")
    if K > n // 2:
        raise FabricError(f"closed form is defined for K <= n/2, got K={K}, n={n}")
    return math.factorial(K) * (K + 1) ** (n - K)


def count_k_bounded_exhaustive(n: int, k: int) -> int:
    """Exact number of permutations of n with max displacement <= k, by
    backtracking enumeration.  Budgeted to n <= 12."""
    if n > ENUMERATION_LIMIT:
        raise FabricError(f"exhaustive count budgeted to n <= {ENUMERATION_LIMIT}, got {n}")
    used = [False] * n

    def rec(i: int) -> int:
        if i == n:
            return 1
        if i - k >= 0 and not used[i - k]:
            cands = range(i - k, i - k + 1)  # forced: last chance for this value
        else:
            cands = range(max(0, i - k), min(n, i + k + 1))
        total = 0
        for v in cands:
            if not used[v]:
                used[v] = True
                total += rec(i + 1)
                used[v] = False
        return total

    return rec(0)


def count_strictly_k_bounded(n: int, K: int) -> int:
    """Closed-form count of K-bounded permutations that are not
    K/2-bounded: K!*(K+1)^(n-K) - (K/2)!*((K+2)/2)^(n-K/2)."""
    if K < 2 or K & (K - 1):
        raise FabricError(f"K must be a power of 2 >= 2, got {K}")
    if K > n // 2:
        raise FabricError(f"defined for K <= n/2, got K={K}, n={n}")
    half = K // 2
    return count_k_bounded_formula(n, K) - math.factorial(half) * ((K + 2) // 2) ** (n - half)


@dataclass(frozen=True)
class AverageComplexity:
    """The printed average-control-complexity expression evaluated exactly,
    plus the same value normalized by n! (the printed formula carries no
    explicit normalization)."""

    as_printed: int
    per_permutation: Fraction


def average_control_complexity(n: int) -> AverageComplexity:
    """1 + 2n*sum(P_K*log2(K) for K=2,4,..,n/4) + n*(2*log2(n)-1)*(n!-P_n),
    with P_K the strict closed-form count and P_n = (n/4)!*(n/4+1)^(3n/4)."""
    if n < 4 or n & (n - 1):
        raise FabricError(f"n must be a power of 2 >= 4, got {n}")
    ln = n.bit_length() - 1
    quarter = n // 4
    p_n = math.factorial(quarter) * (quarter + 1) ** (3 * n // 4)
    acc = 0
    K = 2
    while K <= quarter:
        acc += count_strictly_k_bounded(n, K) * (K.bit_length() - 1)
        K *= 2
    total = 1 + 2 * n * acc + n * (2 * ln - 1) * (math.factorial(n) - p_n)
    return AverageComplexity(total, Fraction(total, math.factorial(n)))


@dataclass(frozen=True)
class CountReport:
    n: int
    K: int
    formula_count: int
    exhaustive_count: Optional[int]
    agrees: Optional[bool]

    def to_json(self) -> str:
        return json.dumps(
            {
                "n": self.n,
                "K": self.K,
                "formula_count": self.formula_count,
                "exhaustive_count": self.exhaustive_count,
                "agrees": self.agrees,
            },
            indent=1,
        )


def count_report(n: int, K: int, exhaustive: bool = False) -> CountReport:
    formula = count_k_bounded_formula(n, K)
    oracle = count_k_bounded_exhaustive(n, K) if exhaustive else None
    agrees = None if oracle is None else (oracle == formula)
    return CountReport(n, K, formula, oracle, agrees)


@dataclass(frozen=True)
class CostGroup:
    k: Optional[int]
    count: int
    mean_visits: float
    max_visits: int
    mean_overhead: float


def control_cost_summary(plans) -> dict[Optional[int], CostGroup]:
    """Mean/max terminal visits of route plans, grouped by the plans' K."""
    groups: dict[Optional[int], list] = {}
    for plan in plans:
        groups.setdefault(plan.k_used, []).append(plan.cost)
    out: dict[Optional[int], CostGroup] = {}
    for k in sorted(groups, key=lambda v: (v is None, v)):
        costs = groups[k]
        visits = [c.terminal_visits for c in costs]
        out[k] = CostGroup(
            k,
            len(costs),
            sum(visits) / len(visits),
            max(visits),
            sum(c.overhead for c in costs) / len(costs),
        )
    return out


def cost_summary_csv(plans) -> str:
    rows = ["k,count,mean_visits,max_visits,mean_overhead"]
    for k, g in control_cost_summary(plans).items():
        rows.append(f"{'' if k is None else k},{g.count},{g.mean_visits},{g.max_visits},{g.mean_overhead}")
    return "\n".join(rows) + "\n"
