"""Independent plan verification and adversarial permutation generation.

``verify_plan`` re-simulates every input through the plan's switch states
and bypass choices without consulting the planner's paths, so a plan and
its verification never share a code path.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass

from .errors import FabricError, StructuralError
from .permutation import Permutation, identity
from .routing import CROSS, STRAIGHT, UNUSED, RoutePlan, plan_route_columns
from .topology import Network

ENUMERATION_LIMIT = 12


@dataclass(frozen=True)
class Violation:
    kind: str  # wrong-output | port-collision | inconsistent-switch
    location: str


@dataclass(frozen=True)
class VerifyReport:
    ok: bool
    delivered: tuple[int, ...]
    violations: tuple[Violation, ...]

    def to_json(self) -> str:
        return json.dumps(
            {
                "ok": self.ok,
                "delivered": list(self.delivered),
                "violations": [{"kind": v.kind, "location": v.location} for v in self.violations],
            },
            indent=1,
        )


def verify_plan(net: Network, plan: RoutePlan, p: Permutation) -> VerifyReport:
    """Simulate all n inputs through the plan simultaneously: no directed
    port edge may carry two inputs and every input must exit at p[i].

    Malformed plans (wrong network, invalid states) raise StructuralError;
    a well-formed plan that misroutes yields ok=False with violations.
    """
    if plan.net.key() != net.key() or plan.net.structure() != net.structure():
        raise StructuralError(f"plan belongs to {plan.net.key()}, not {net.key()}")
    if p.n != net.n:
        raise StructuralError(f"permutation size {p.n} != network size {net.n}")
    for (col, pos), state in plan.settings.items():
        if state not in (STRAIGHT, CROSS, UNUSED):
            raise StructuralError(f"invalid state {state!r} at ({col}, {pos})")
        if col >= net.depth or pos >= len(net.columns[col].switches):
            raise StructuralError(f"setting for nonexistent switch ({col}, {pos})")

    route_cols = plan_route_columns(plan)
    violations: list[Violation] = []
    in_use: dict[tuple[int, int], int] = {}
    out_use: dict[tuple[int, int], int] = {}
    delivered = []
    for i in range(net.n):
        line = i
        for col in route_cols:
            key = (col, line)
            in_use[key] = in_use.get(key, 0) + 1
            if in_use[key] == 2:
                violations.append(Violation("port-collision", f"column {col} in line {line}"))
            column = net.columns[col]
            pos = column.position_of(line)
            if pos is not None:
                state = plan.state_of(col, pos)
                if state == UNUSED:
                    violations.append(
                        Violation("inconsistent-switch", f"switch ({col}, {pos}) traversed while unused")
                    )
                elif state == CROSS:
                    line = column.partner(line)
            key = (col, line)
            out_use[key] = out_use.get(key, 0) + 1
            if out_use[key] == 2:
                violations.append(Violation("port-collision", f"column {col} out line {line}"))
        delivered.append(line)
        if line != p[i]:
            violations.append(Violation("wrong-output", f"input {i} delivered to {line}, wanted {p[i]}"))
    ok = not violations
    return VerifyReport(ok, tuple(delivered), tuple(violations))


# --- adversarial permutation families ----------------------------------------


def band_pair_swap(n: int, k: int) -> Permutation:
    """Every input of an even band trades places with the same offset of the
    next band: p[j] = j+k on even bands, j-k on odd bands."""
    _check_band(n, k)
    return Permutation(tuple(j + k if (j // k) % 2 == 0 else j - k for j in range(n)))


def interior_band_swap(n: int, k: int) -> Permutation:
    """Interior even bands move up: p[j] = j-k on even bands i not in
    {0, n/k - 1}, completed by swapping each such band with the one above;
    boundary bands stay fixed."""
    _check_band(n, k)
    out = list(range(n))
    bands = n // k
    for i in range(2, bands - 1, 2):
        for j in range(k):
            out[i * k + j] = (i - 1) * k + j
            out[(i - 1) * k + j] = i * k + j
    return Permutation(tuple(out))


def within_band(n: int, k: int, inner: Permutation, band: int) -> Permutation:
    """Embed an arbitrary k-permutation into one band, identity elsewhere."""
    _check_band(n, k)
    if inner.n != k:
        raise FabricError(f"inner permutation size {inner.n} != band width {k}")
    if not 0 <= band < n // k:
        raise FabricError(f"band {band} outside [0, {n // k})")
    out = list(range(n))
    for j in range(k):
        out[band * k + j] = band * k + inner[j]
    return Permutation(tuple(out))


def _check_band(n: int, k: int):
    if n < 4 or n & (n - 1):
        raise FabricError(f"n must be a power of 2 >= 4, got {n}")
    if k < 1 or k & (k - 1) or k > n // 4:
        raise FabricError(f"k must be a power of 2 in [1, {n // 4}], got {k}")


# --- samplers and enumerators -------------------------------------------------


def gen_random_k_bounded(n: int, k: int, seed: int) -> Permutation:
    """Sample a permutation with max displacement <= k by backtracking with
    seed-shuffled value order.  Deterministic per seed; not exactly uniform
    over the class, which property testing does not need."""
    if not 0 <= k < n:
        raise FabricError(f"k must be in [0, {n}), got {k}")
    rng = random.Random(seed)
    out = [-1] * n
    used = [False] * n

    def rec(i: int) -> bool:
        if i == n:
            return True
        if i - k >= 0 and not used[i - k]:
            cands = [i - k]  # last position that can still take this value
        else:
            cands = [v for v in range(max(0, i - k), min(n, i + k + 1)) if not used[v]]
            rng.shuffle(cands)
        for v in cands:
            used[v] = True
            out[i] = v
            if rec(i + 1):
                return True
            used[v] = False
        out[i] = -1
        return False

    if not rec(0):  # identity always qualifies, so this cannot happen
        raise FabricError("no k-bounded permutation found")
    return Permutation(tuple(out))


def enumerate_k_bounded(n: int, k: int):
    """Yield every permutation with max displacement <= k in lexicographic
    order; complete and duplicate-free.  Budgeted to n <= 12."""
    if n > ENUMERATION_LIMIT:
        raise FabricError(f"enumeration budgeted to n <= {ENUMERATION_LIMIT}, got {n}")
    out = [-1] * n
    used = [False] * n

    def rec(i: int):
        if i == n:
            yield Permutation(tuple(out))
            return
        if i - k >= 0 and not used[i - k]:
            cands = range(i - k, i - k + 1)  # forced: last chance for this value
        else:
            cands = range(max(0, i - k), min(n, i + k + 1))
        for v in cands:
            if not used[v]:
                used[v] = True
                out[i] = v
                yield from rec(i + 1)
                used[v] = False

    yield from rec(0)
