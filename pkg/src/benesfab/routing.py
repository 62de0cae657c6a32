"""Permutation routing and control-cost accounting.

Three control procedures:

* ``looping_route``: the classic looping algorithm on a Benes network.
  Companion inputs/outputs are alternately assigned to the top and bottom
  subnetworks, recursing on halves; cost n*(2*log2(n)-1) terminal visits.
* ``k_benes_route``: truncated looping sets the matching and routing
  columns, migration marks self-route the two band-exchange columns.
* ``kr_benes_route``: picks the band width from the permutation's measured
  bound, routes through the embedded K-Benes subgraph, or falls back to
  plain Benes looping on the frontplane when the bound is too large.

Routing is a pure function of (network, permutation); identical inputs
yield identical plans (each loop starts at the lowest-numbered unset input
and is routed to the top subnetwork).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .analysis import boundedness
from .errors import (
    CorruptPlanError,
    InvalidBandWidthError,
    NotKBoundedError,
    SizeMismatchError,
)
from .permutation import Permutation
from .topology import (
    KIND_BENES,
    KIND_K_BENES,
    KIND_KR_BENES,
    Network,
    PortRef,
    kr_layout,
)

STRAIGHT = "straight"
CROSS = "cross"
UNUSED = "unused"

UP = "U"
DOWN = "D"
STAY = "S"


@dataclass(frozen=True)
class ControlCost:
    terminal_visits: int
    overhead: int
    switches_set: int


@dataclass
class RoutePlan:
    net: Network
    perm: Permutation
    settings: dict[tuple[int, int], str]  # (column, position) -> state
    k_used: Optional[int]
    bypass: tuple[tuple[int, bool], ...]  # (band width of BE block, used?)
    cost: ControlCost
    paths: Optional[list[list[PortRef]]] = None

    def state_of(self, column: int, position: int) -> str:
        return self.settings.get((column, position), UNUSED)


@dataclass(frozen=True)
class BandDecomposition:
    """Per-band migrating-up/down/stationary input sets for (p, k)."""

    n: int
    k: int
    up: tuple[frozenset[int], ...]
    down: tuple[frozenset[int], ...]
    stationary: tuple[frozenset[int], ...]

    @property
    def bands(self) -> int:
        return self.n // self.k


def decompose_bands(p: Permutation, k: int) -> BandDecomposition:
    """Split each k-line band into up/down migrating and stationary inputs.

    Raises NotKBoundedError if some |p[i] - i| > k.  The number of inputs
    migrating into a band always equals the number migrating out of it.
    """
    n = p.n
    if k < 1 or k & (k - 1) or k > n:
        raise InvalidBandWidthError(f"band width must be a power of 2 in [1, {n}], got {k}")
    for i, v in enumerate(p):
        if abs(v - i) > k:
            raise NotKBoundedError(f"input {i} moves to {v}, displacement {abs(v - i)} > {k}")
    bands = n // k
    up = [set() for _ in range(bands)]
    down = [set() for _ in range(bands)]
    stay = [set() for _ in range(bands)]
    for i, v in enumerate(p):
        b, d = i // k, v // k
        if d == b - 1:
            up[b].add(i)
        elif d == b + 1:
            down[b].add(i)
        else:
            stay[b].add(i)
    assert not up[0] and not down[bands - 1]
    for b in range(1, bands):
        assert len(up[b]) == len(down[b - 1])
    return BandDecomposition(
        n,
        k,
        tuple(frozenset(s) for s in up),
        tuple(frozenset(s) for s in down),
        tuple(frozenset(s) for s in stay),
    )


# --- the looping chain engine ------------------------------------------------


@dataclass
class LevelRun:
    """Result of running paired recursion levels of the looping procedure.

    choices[m][f] is the subnetwork (0=top, 1=bottom) input f takes at
    level m; pos_hist[m][f] / dpos_hist[m][f] are f's input-side and
    output-side line numbers entering level m from either end.
    """

    n: int
    bits: tuple[int, ...]
    choices: list[list[int]]
    pos_hist: list[list[int]]
    dpos_hist: list[list[int]]
    visits: int


def _run_chain_levels(perm: Permutation, bits: list[int]) -> LevelRun:
    """Run one looping chain pass per level; bits[m] is the line-number bit
    that level m's companion switches toggle.

    Each loop starts at the lowest-numbered unset input line and routes it
    to the top subnetwork; two terminal visits are charged per constraint
    edge traversed, totalling exactly 2n per level.
    """
    n = perm.n
    pos = list(range(n))
    dpos = list(perm)
    pos_hist = [pos[:]]
    dpos_hist = [dpos[:]]
    choices: list[list[int]] = []
    visits = 0
    for bit_index in bits:
        bit = 1 << bit_index
        flow_at = [0] * n
        dflow_at = [0] * n
        for f in range(n):
            flow_at[pos[f]] = f
            dflow_at[dpos[f]] = f
        choice = [-1] * n
        for start_line in range(n):
            f0 = flow_at[start_line]
            if choice[f0] != -1:
                continue
            choice[f0] = 0
            cur = f0
            while True:
                mate = dflow_at[dpos[cur] ^ bit]  # shares cur's output switch
                visits += 2
                if choice[mate] != -1:
                    assert choice[mate] == 1 - choice[cur]
                    break
                choice[mate] = 1 - choice[cur]
                nxt = flow_at[pos[mate] ^ bit]  # shares mate's input switch
                visits += 2
                if choice[nxt] != -1:
                    assert choice[nxt] == 1 - choice[mate]
                    break
                choice[nxt] = 1 - choice[mate]
                cur = nxt
        for f in range(n):
            pos[f] = (pos[f] & ~bit) | (bit if choice[f] else 0)
            dpos[f] = (dpos[f] & ~bit) | (bit if choice[f] else 0)
        choices.append(choice)
        pos_hist.append(pos[:])
        dpos_hist.append(dpos[:])
    return LevelRun(n, tuple(bits), choices, pos_hist, dpos_hist, visits)


def _set_column(
    settings: dict[tuple[int, int], str],
    net: Network,
    col: int,
    in_lines: list[int],
    out_lines: list[int],
) -> None:
    """Record straight/cross per switch of a column from per-flow in/out lines."""
    column = net.columns[col]
    for f in range(len(in_lines)):
        x, y = in_lines[f], out_lines[f]
        pos = column.position_of(x)
        if pos is None:
            assert x == y, f"pass-through line moved at column {col}"
            continue
        state = STRAIGHT if x == y else CROSS
        prev = settings.get((col, pos))
        assert prev is None or prev == state, f"conflicting settings at {(col, pos)}"
        settings[(col, pos)] = state


def _count_set(settings: dict[tuple[int, int], str]) -> int:
    return sum(1 for s in settings.values() if s != UNUSED)


def _build_paths(columns_lines: list[tuple[int, list[int], list[int]]], n: int) -> list[list[PortRef]]:
    """columns_lines: (column, in_lines, out_lines) in traversal order."""
    paths: list[list[PortRef]] = [[] for _ in range(n)]
    for col, ins, outs in columns_lines:
        for f in range(n):
            paths[f].append(PortRef(col, ins[f], "in"))
            paths[f].append(PortRef(col, outs[f], "out"))
    return paths


# --- Benes looping -----------------------------------------------------------


def looping_route(net: Network, p: Permutation, build_paths: bool = True) -> RoutePlan:
    """Route an arbitrary permutation on a Benes network; the plan is
    edge-disjoint and costs exactly n*(2*log2(n)-1) terminal visits."""
    if net.kind != KIND_BENES:
        raise SizeMismatchError(f"looping_route needs a benes network, got {net.kind}")
    if net.n != p.n:
        raise SizeMismatchError(f"network size {net.n} != permutation size {p.n}")
    n = net.n
    ln = n.bit_length() - 1
    bits = list(range(ln - 1, 0, -1))  # canonical: level m toggles bit ln-1-m
    run = _run_chain_levels(p, bits)
    settings: dict[tuple[int, int], str] = {}
    seq: list[tuple[int, list[int], list[int]]] = []
    for m in range(ln - 1):
        seq.append((m, run.pos_hist[m], run.pos_hist[m + 1]))
    mid = ln - 1
    for f in range(n):
        assert run.pos_hist[-1][f] | 1 == run.dpos_hist[-1][f] | 1
    seq.append((mid, run.pos_hist[-1], run.dpos_hist[-1]))
    for m in range(ln - 2, -1, -1):
        seq.append((2 * ln - 2 - m, run.dpos_hist[m + 1], run.dpos_hist[m]))
    for col, ins, outs in seq:
        _set_column(settings, net, col, ins, outs)
    visits = run.visits + n  # middle column: one examination per line
    cost = ControlCost(visits, 0, _count_set(settings))
    paths = _build_paths(seq, n) if build_paths else None
    return RoutePlan(net, p, settings, None, (), cost, paths)


@dataclass
class TruncatedLoopingRun:
    """Outer-stage settings of a Benes looping run plus what remains.

    settings covers the first and last ``levels`` Benes columns; residuals
    are the per-subnetwork permutations (entry line -> required exit line)
    left to route in the middle.
    """

    n: int
    levels: int
    settings: dict[tuple[int, int], str]
    residuals: tuple[dict[int, int], ...]
    cost: ControlCost
    run: LevelRun = field(repr=False, default=None)


def looping_route_truncated(p: Permutation, levels: int) -> TruncatedLoopingRun:
    """Run only the outer ``levels`` recursion levels of the looping
    algorithm on a virtual Benes; identical to looping_route with interior
    settings discarded.  Costs 2*n*levels terminal visits."""
    n = p.n
    ln = n.bit_length() - 1
    if n < 2 or n & (n - 1):
        raise SizeMismatchError(f"permutation size must be a power of 2, got {n}")
    if not 1 <= levels <= ln - 1:
        raise SizeMismatchError(f"levels must be in [1, {ln - 1}], got {levels}")
    bits = [ln - 1 - m for m in range(levels)]
    run = _run_chain_levels(p, bits)
    settings: dict[tuple[int, int], str] = {}
    from .topology import build_benes

    net = build_benes(n)
    for m in range(levels):
        _set_column(settings, net, m, run.pos_hist[m], run.pos_hist[m + 1])
        _set_column(settings, net, 2 * ln - 2 - m, run.dpos_hist[m + 1], run.dpos_hist[m])
    classes: dict[tuple[int, ...], dict[int, int]] = {}
    for f in range(n):
        key = tuple(run.choices[m][f] for m in range(levels))
        classes.setdefault(key, {})[run.pos_hist[levels][f]] = run.dpos_hist[levels][f]
    residuals = tuple(classes[k] for k in sorted(classes, key=lambda k: min(classes[k])))
    cost = ControlCost(run.visits, 0, _count_set(settings))
    return TruncatedLoopingRun(n, levels, settings, residuals, cost, run)


# --- K-Benes -----------------------------------------------------------------


def _band_exchange_crossings(
    p: Permutation, k: int, matched_line: list[int], marks: list[str]
) -> tuple[set[int], set[int], list[int], list[int]]:
    """Self-route the two band-exchange columns from migration marks.

    matched_line[f] is f's line at the matching-stage outputs; returns the
    crossed lower lines of the even and odd columns plus each flow's line
    after each column.  Every migrating input must meet an opposite
    partner at its offset; a missing partner raises MatchingViolationError.
    """
    from .errors import MatchingViolationError

    n = p.n
    flow_at = [0] * n
    for f in range(n):
        flow_at[matched_line[f]] = f
    even_cross: set[int] = set()
    for a in range(n):
        if (a // k) % 2 == 0:  # lower line of an even band pair
            b = a + k
            fa, fb = flow_at[a], flow_at[b]
            if (marks[fa] == DOWN) != (marks[fb] == UP):
                raise MatchingViolationError(
                    f"unmatched migrating input at lines {a}/{b} (even exchange)"
                )
            if marks[fa] == DOWN:
                even_cross.add(a)
    after_even = matched_line[:]
    for a in even_cross:
        fa, fb = flow_at[a], flow_at[a + k]
        after_even[fa], after_even[fb] = a + k, a
    flow_at2 = [0] * n
    active = marks[:]
    for f in range(n):
        flow_at2[after_even[f]] = f
        if after_even[f] != matched_line[f]:
            active[f] = STAY  # exchanged inputs are in their home band now
    odd_cross: set[int] = set()
    bands = n // k
    for band in range(1, bands - 1, 2):
        for j in range(k):
            a = band * k + j
            b = a + k
            fa, fb = flow_at2[a], flow_at2[b]
            if (active[fa] == DOWN) != (active[fb] == UP):
                raise MatchingViolationError(
                    f"unmatched migrating input at lines {a}/{b} (odd exchange)"
                )
            if active[fa] == DOWN:
                odd_cross.add(a)
    after_odd = after_even[:]
    for a in odd_cross:
        fa, fb = flow_at2[a], flow_at2[a + k]
        after_odd[fa], after_odd[fb] = a + k, a
    return even_cross, odd_cross, after_even, after_odd


def migration_marks(p: Permutation, k: int) -> list[str]:
    """Per-input 'U'/'D'/'S' mark: destination band above, below or same."""
    marks = []
    for i, v in enumerate(p):
        b, d = i // k, v // k
        marks.append(UP if d < b else DOWN if d > b else STAY)
    return marks


def _k_route_core(p: Permutation, k: int) -> tuple[LevelRun, list, set[int], set[int], list[list[int]]]:
    """Shared K-Benes control: truncated looping in band coordinates plus
    self-routed band exchanges.  Returns the level run, the traversal line
    sequence [(in_lines, out_lines), ...] for matching/even/odd/routing
    columns in order, and the crossed switch lines of both BE columns."""
    decompose_bands(p, k)  # validates the bound
    n = p.n
    logk = k.bit_length() - 1
    run = _run_chain_levels(p, list(range(logk)))
    marks = migration_marks(p, k)
    matched_line = run.pos_hist[-1]
    even_cross, odd_cross, after_even, after_odd = _band_exchange_crossings(
        p, k, list(matched_line), marks
    )
    for f in range(n):
        assert after_odd[f] == run.dpos_hist[-1][f], "exchange did not meet routing stage"
    lines_seq: list[tuple[list[int], list[int]]] = []
    for m in range(logk):
        lines_seq.append((run.pos_hist[m], run.pos_hist[m + 1]))
    lines_seq.append((list(matched_line), after_even))
    lines_seq.append((after_even, after_odd))
    for m in range(logk - 1, -1, -1):
        lines_seq.append((run.dpos_hist[m + 1], run.dpos_hist[m]))
    return run, lines_seq, even_cross, odd_cross, marks


def k_benes_route(net: Network, p: Permutation, build_paths: bool = True) -> RoutePlan:
    """Route a k-bounded permutation on a K-Benes: truncated looping sets
    the matching and routing columns, migration marks set the band-exchange
    columns, and every migrating input swaps with an opposite-direction
    partner at its matching-network output offset."""
    if net.kind != KIND_K_BENES:
        raise SizeMismatchError(f"k_benes_route needs a k-benes network, got {net.kind}")
    if net.n != p.n:
        raise SizeMismatchError(f"network size {net.n} != permutation size {p.n}")
    k = net.k
    run, lines_seq, _, _, _ = _k_route_core(p, k)
    settings: dict[tuple[int, int], str] = {}
    seq = [(col, ins, outs) for col, (ins, outs) in enumerate(lines_seq)]
    for col, ins, outs in seq:
        _set_column(settings, net, col, ins, outs)
    cost = ControlCost(run.visits, p.n, _count_set(settings))
    paths = _build_paths(seq, p.n) if build_paths else None
    return RoutePlan(net, p, settings, k, (), cost, paths)


# --- KR-Benes ----------------------------------------------------------------


@dataclass(frozen=True)
class KSubgraph:
    """The K-Benes embedded in a KR-Benes: which columns carry traffic and
    which bypass jumps glue them together."""

    n: int
    k: int
    column_indices: tuple[int, ...]
    jumps: tuple[tuple[int, int], ...]  # (from column, to column) bypass hops

    def as_network(self) -> Network:
        from .topology import (
            ROLE_BE_EVEN,
            ROLE_BE_ODD,
            ROLE_MATCHING,
            ROLE_ROUTING,
            Column,
        )

        logk = self.k.bit_length() - 1
        roles = [ROLE_MATCHING] * logk + [ROLE_BE_EVEN, ROLE_BE_ODD] + [ROLE_ROUTING] * logk
        kr = build_kr_benes_cached(self.n)
        cols = tuple(
            Column(i, roles[i], kr.columns[ci].switches)
            for i, ci in enumerate(self.column_indices)
        )
        return Network(KIND_K_BENES, self.n, self.k, cols)


_KR_CACHE: dict[int, Network] = {}


def build_kr_benes_cached(n: int) -> Network:
    from .topology import build_kr_benes

    if n not in _KR_CACHE:
        _KR_CACHE[n] = build_kr_benes(n)
    return _KR_CACHE[n]


def select_k_subgraph(net: Network, k: int) -> KSubgraph:
    """Columns of the KR-Benes forming the embedded K-Benes for band width
    k: Benes stages 1..log2(k), both BE(n,k) columns, and stages
    2*log2(n)-log2(k)..2*log2(n)-1, joined by bypass jumps."""
    if net.kind != KIND_KR_BENES:
        raise SizeMismatchError(f"select_k_subgraph needs a kr-benes, got {net.kind}")
    n = net.n
    if k < 2 or k & (k - 1) or k > n // 4:
        raise InvalidBandWidthError(
            f"selectable band widths are powers of 2 in [2, {n // 4}], got {k}"
        )
    layout = kr_layout(n)
    ln = layout.log_n
    logk = k.bit_length() - 1
    head = [layout.stage_col[s] for s in range(1, logk + 1)]
    even_col, odd_col = layout.be_cols[k]
    tail = [layout.stage_col[s] for s in range(2 * ln - logk, 2 * ln)]
    jumps = [
        (layout.stage_col[s], layout.stage_col[s + 1]) for s in range(1, logk)
    ] + [(odd_col, layout.stage_col[2 * ln - logk])]
    return KSubgraph(n, k, tuple(head + [even_col, odd_col] + tail), tuple(jumps))


def kr_benes_route(net: Network, p: Permutation, build_paths: bool = True) -> RoutePlan:
    """Route any permutation on a KR-Benes at the cost of its own bound:
    band width K is measured from the permutation, the embedded K-Benes
    subgraph routes it when K <= n/4, and the plain Benes frontplane is
    used otherwise.  Terminal visits never exceed n*(2*log2(n)-1)."""
    if net.kind != KIND_KR_BENES:
        raise SizeMismatchError(f"kr_benes_route needs a kr-benes network, got {net.kind}")
    if net.n != p.n:
        raise SizeMismatchError(f"network size {net.n} != permutation size {p.n}")
    n = net.n
    layout = kr_layout(n)
    ln = layout.log_n
    bound = boundedness(p)
    k_used = bound.K
    k_route = max(k_used, 2)  # no BE(n,1) backplane exists; 1-bounded is 2-bounded
    be_widths = sorted(layout.be_cols)
    settings: dict[tuple[int, int], str] = {}
    if k_route > n // 4:
        bits = list(range(ln - 1))
        run = _run_chain_levels(p, bits)
        seq: list[tuple[int, list[int], list[int]]] = []
        for m in range(ln - 1):
            seq.append((layout.stage_col[m + 1], run.pos_hist[m], run.pos_hist[m + 1]))
        midmask = 1 << (ln - 1)
        for f in range(n):
            assert run.pos_hist[-1][f] | midmask == run.dpos_hist[-1][f] | midmask
        seq.append((layout.stage_col[ln], run.pos_hist[-1], run.dpos_hist[-1]))
        for m in range(ln - 2, -1, -1):
            seq.append((layout.stage_col[2 * ln - 1 - m], run.dpos_hist[m + 1], run.dpos_hist[m]))
        seq.sort(key=lambda t: t[0])
        visits = run.visits + n
        bypass = tuple((w, False) for w in be_widths)
    else:
        sub = select_k_subgraph(net, k_route)
        run, lines_seq, _, _, _ = _k_route_core(p, k_route)
        seq = [(col, ins, outs) for col, (ins, outs) in zip(sub.column_indices, lines_seq)]
        visits = run.visits
        bypass = tuple((w, w == k_route) for w in be_widths)
    for col, ins, outs in seq:
        _set_column(settings, net, col, ins, outs)
    for col, column in enumerate(net.columns):
        for pos in range(len(column.switches)):
            settings.setdefault((col, pos), UNUSED)
    cost = ControlCost(visits, n, _count_set(settings))
    paths = _build_paths(seq, n) if build_paths else None
    return RoutePlan(net, p, settings, k_used, bypass, cost, paths)


# --- plan traversal and serialization ----------------------------------------


def plan_route_columns(plan: RoutePlan) -> list[int]:
    """Ordered column indices a flow traverses under this plan."""
    net = plan.net
    if net.kind != KIND_KR_BENES:
        return list(range(net.depth))
    layout = kr_layout(net.n)
    used = [w for w, u in plan.bypass if u]
    if not used:
        return [layout.stage_col[s] for s in range(1, 2 * layout.log_n)]
    return list(select_k_subgraph(net, used[0]).column_indices)


def trace_path(plan: RoutePlan, input_line: int) -> list[PortRef]:
    """Replay switch settings and bypass choices from an input terminal;
    returns the full port path.  A traversed-but-unused switch means the
    plan is corrupt."""
    net = plan.net
    if not 0 <= input_line < net.n:
        raise SizeMismatchError(f"input line {input_line} outside [0, {net.n})")
    line = input_line
    ports: list[PortRef] = []
    for col in plan_route_columns(plan):
        column = net.columns[col]
        ports.append(PortRef(col, line, "in"))
        pos = column.position_of(line)
        if pos is not None:
            state = plan.state_of(col, pos)
            if state == UNUSED:
                raise CorruptPlanError(f"unused switch ({col}, {pos}) on the path of {input_line}")
            if state == CROSS:
                line = column.partner(line)
        ports.append(PortRef(col, line, "out"))
    return ports


def plan_to_json(plan: RoutePlan) -> str:
    import json

    net = plan.net
    rows = []
    for col, column in enumerate(net.columns):
        for pos in range(len(column.switches)):
            rows.append([col, pos, plan.state_of(col, pos)])
    doc = {
        "network": net.key(),
        "permutation": list(plan.perm),
        "k_used": plan.k_used,
        "settings": rows,
        "bypass": [{"k": w, "used": u} for w, u in plan.bypass],
        "cost": {
            "terminal_visits": plan.cost.terminal_visits,
            "overhead": plan.cost.overhead,
            "switches_set": plan.cost.switches_set,
        },
    }
    return json.dumps(doc, indent=1)


def plan_from_json(text: str, net: Network) -> RoutePlan:
    import json

    from .errors import StructuralError

    doc = json.loads(text)
    key = doc.get("network", {})
    if key != net.key():
        raise StructuralError(f"plan was made for {key}, network is {net.key()}")
    perm = Permutation(tuple(doc["permutation"]))
    if perm.n != net.n:
        raise StructuralError(f"plan permutation size {perm.n} != network size {net.n}")
    settings: dict[tuple[int, int], str] = {}
    for col, pos, state in doc["settings"]:
        if state not in (STRAIGHT, CROSS, UNUSED):
            raise StructuralError(f"unknown switch state {state!r}")
        if col >= net.depth or pos >= len(net.columns[col].switches):
            raise StructuralError(f"setting for nonexistent switch ({col}, {pos})")
        settings[(col, pos)] = state
    cost = doc.get("cost", {})
    return RoutePlan(
        net,
        perm,
        settings,
        doc.get("k_used"),
        tuple((b["k"], b["used"]) for b in doc.get("bypass", [])),
        ControlCost(
            cost.get("terminal_visits", 0),
            cost.get("overhead", 0),
            cost.get("switches_set", 0),
        ),
        None,
    )


def route(net: Network, p: Permutation, build_paths: bool = True) -> RoutePlan:
    """Dispatch to the routing procedure matching the network kind."""
    if net.kind == KIND_BENES:
        return looping_route(net, p, build_paths)
    if net.kind == KIND_K_BENES:
        return k_benes_route(net, p, build_paths)
    if net.kind == KIND_KR_BENES:
        return kr_benes_route(net, p, build_paths)
    raise SizeMismatchError(f"no routing procedure for network kind {net.kind!r}")
