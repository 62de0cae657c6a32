"""Switch-graph machinery for matching migrating inputs.

The permutation graph pairs adjacent lines into switch nodes and records
which output switches each input switch feeds.  For a two-band bounded
permutation, walks inside one band's switches pair up the migrating
inputs: an odd-length walk links a down migrant with an up migrant (a
*cross* pair), an even-length walk links two same-direction migrants (a
*straight* pair).  Cross pairs are steered to the same subnetwork by the
looping procedure and straight pairs to opposite ones; ``find_matching``
leans on exactly that to refine pairs level by level until both members
sit at the same matching-network output offset.

These functions are the independent oracle for the positional partner
rule used by the routers: they must always find a perfect matching, and a
``MatchingViolationError`` is a test failure, never an expected outcome.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import MatchingViolationError, UnsupportedBandWidthError
from .permutation import Permutation
from .routing import DOWN, STAY, UP, _run_chain_levels, decompose_bands, migration_marks


@dataclass(frozen=True)
class PermutationGraph:
    """Bipartite graph on input-side and output-side switches of adjacent
    lines; input switch t feeds the output switches of its two images."""

    n: int
    edges: tuple[tuple[int, int], ...]  # (input switch, output switch), deduplicated


def build_permutation_graph(p: Permutation) -> PermutationGraph:
    edges = set()
    for t in range(p.n // 2):
        edges.add((t, p[2 * t] // 2))
        edges.add((t, p[2 * t + 1] // 2))
    return PermutationGraph(p.n, tuple(sorted(edges)))


@dataclass(frozen=True)
class CompatEdge:
    kind: str  # "cross" | "straight"
    u: tuple[int, int]  # (input, image)
    v: tuple[int, int]
    labels: frozenset


@dataclass(frozen=True)
class CompatibilityGraph:
    n: int
    k: int
    v1: tuple[tuple[int, int], ...]  # down migrants of band 0
    v2: tuple[tuple[int, int], ...]  # up migrants of band 1
    edges: tuple[CompatEdge, ...]


def _side_walk_pairs(flows, pos, dest, bit, k, side, marks):
    """Pair migrants through walks confined to one band's switches.

    Switches pair positions (destinations) differing in ``bit``; the walk
    alternates input and output switches along stationary flows of band
    ``side`` and terminates at migrant endpoints.  Yields
    (kind, start flow, end flow, edge count) with kind "cross" when the
    endpoints are an input-side and an output-side terminal.
    """
    flow_at = {pos[f]: f for f in flows}
    flow_at_dest = {dest[f]: f for f in flows}
    starts = sorted(
        [(pos[f], "in", f) for f in flows if marks[f] != STAY and pos[f] // k == side]
        + [(dest[f], "out", f) for f in flows if marks[f] != STAY and dest[f] // k == side]
    )
    visited = set()
    for _, t0, f0 in starts:
        if (t0, f0) in visited:
            continue
        visited.add((t0, f0))
        length = 0
        t, cur = t0, f0
        while True:
            if t == "in":
                other = flow_at[pos[cur] ^ bit]
                if marks[other] != STAY:
                    end = ("in", other)
                    break
                t, cur = "out", other
            else:
                other = flow_at_dest[dest[cur] ^ bit]
                if marks[other] != STAY:
                    end = ("out", other)
                    break
                t, cur = "in", other
            length += 1
        visited.add(end)
        kind = "straight" if end[0] == t0 else "cross"
        yield kind, f0, end[1], length


def build_compatibility_graph(p: Permutation, k: int) -> CompatibilityGraph:
    """Cross/straight edges between the migrating inputs of a two-band
    (k = n/2) bounded permutation, labeled by the band whose switches the
    connecting walk uses.  Walks of both bands contribute, so parallel
    findings merge into one edge with both labels."""
    n = p.n
    if 2 * k != n:
        raise UnsupportedBandWidthError(
            f"compatibility graph is defined for the two-band case k = n/2, got k={k}, n={n}"
        )
    decompose_bands(p, k)
    marks = migration_marks(p, k)
    v1 = tuple((i, p[i]) for i in range(n) if marks[i] == DOWN)
    v2 = tuple((i, p[i]) for i in range(n) if marks[i] == UP)
    vert = {i: (i, p[i]) for i in range(n) if marks[i] != STAY}
    pos = list(range(n))
    dest = list(p)
    found: dict[tuple, set] = {}
    for side in (0, 1):
        for kind, a, b, _ in _side_walk_pairs(range(n), pos, dest, 1, k, side, marks):
            key = (kind, tuple(sorted((a, b))))
            found.setdefault(key, set()).add(side)
    edges = tuple(
        CompatEdge(kind, vert[u], vert[v], frozenset(labels))
        for (kind, (u, v)), labels in sorted(found.items(), key=lambda kv: kv[0])
    )
    return CompatibilityGraph(n, k, v1, v2, edges)


@dataclass(frozen=True)
class MatchingAssignment:
    """Pairs (down migrant of band i, up migrant of band i+1).  In the
    two-band case both members of a pair reach the same matching-network
    output offset."""

    n: int
    k: int
    pairs: tuple[tuple[int, int], ...]


def positional_matching(p: Permutation, k: int) -> MatchingAssignment:
    """Partners read off the truncated looping run: the down migrant at
    output offset j of band i pairs with the up migrant at offset j of
    band i+1.  This is the rule the routers use."""
    decompose_bands(p, k)
    n = p.n
    logk = k.bit_length() - 1
    run = _run_chain_levels(p, list(range(logk)))
    marks = migration_marks(p, k)
    line_of = run.pos_hist[-1]
    flow_at = [0] * n
    for f in range(n):
        flow_at[line_of[f]] = f
    pairs = []
    for a in range(n - k):
        fa, fb = flow_at[a], flow_at[a + k]
        down, up = marks[fa] == DOWN, marks[fb] == UP
        if down != up:
            raise MatchingViolationError(f"no partner at offset lines {a}/{a + k}")
        if down:
            pairs.append((fa, fb))
    return MatchingAssignment(n, k, tuple(sorted(pairs)))


def _match_two_band(p: Permutation, k: int) -> MatchingAssignment:
    """Refine migrant pairs level by level.  At each level the side walks
    must find cross pairs steered to the same subnetwork and straight pairs
    to opposite ones; the recursion bottoms out with one migrant pair per
    output offset."""
    n = p.n
    logk = k.bit_length() - 1
    run = _run_chain_levels(p, list(range(logk)))
    marks = migration_marks(p, k)
    pairs: list[tuple[int, int]] = []

    def rec(flows: list[int], level: int) -> None:
        v1 = [f for f in flows if marks[f] == DOWN]
        v2 = [f for f in flows if marks[f] == UP]
        if len(v1) != len(v2):
            raise MatchingViolationError(
                f"{len(v1)} down vs {len(v2)} up migrants in one subnetwork"
            )
        if not v1:
            return
        if level == logk:
            pairs.append((v1[0], v2[0]))
            return
        pos = run.pos_hist[level]
        dest = run.dpos_hist[level]
        choice = run.choices[level]
        for side in (0, 1):
            for kind, a, b, _ in _side_walk_pairs(flows, pos, dest, 1 << level, k, side, marks):
                if kind == "cross" and choice[a] != choice[b]:
                    raise MatchingViolationError(
                        f"cross pair ({a}, {b}) steered to different subnetworks"
                    )
                if kind == "straight" and choice[a] == choice[b]:
                    raise MatchingViolationError(
                        f"straight pair ({a}, {b}) steered to the same subnetwork"
                    )
        top = [f for f in flows if choice[f] == 0]
        bot = [f for f in flows if choice[f] == 1]
        if sum(1 for f in top if marks[f] == DOWN) != sum(1 for f in top if marks[f] == UP):
            raise MatchingViolationError("migrant counts diverged between subnetworks")
        rec(top, level + 1)
        rec(bot, level + 1)

    rec(list(range(n)), 0)
    return MatchingAssignment(n, k, tuple(sorted(pairs)))


def _match_boundary(p: Permutation, k: int) -> list[tuple[int, int]]:
    """Match the down migrants of band 0 with the up migrants of band 1
    using only walks inside band 0 (those never leave the first two bands).

    Cross pairs bind directly.  Straight groups are associated by walking
    the full permutation graph from an unmatched up migrant: an odd walk
    ending at an unmatched down migrant's image forces the association, an
    even walk ending at another up migrant leaves the two interchangeable.
    """
    n = p.n
    marks = migration_marks(p, k)
    pos = list(range(n))
    dest = list(p)
    flows = range(2 * k)
    bound: list[tuple[int, int]] = []
    left_v1: list[int] = []
    straight_v1: list[tuple[int, int]] = []
    straight_v2: list[tuple[int, int]] = []
    for kind, a, b, _ in _side_walk_pairs(flows, pos, dest, 1, k, 0, marks):
        if kind == "cross":
            d, u = (a, b) if marks[a] == DOWN else (b, a)
            bound.append((d, u))
        elif marks[a] == DOWN:
            straight_v1.append(tuple(sorted((a, b))))
        else:
            straight_v2.append(tuple(sorted((a, b))))
    if not straight_v2:
        return sorted(bound)

    unmatched_v1 = {y for pair in straight_v1 for y in pair}
    unmatched_v2 = {x for pair in straight_v2 for x in pair}
    v1_pair_of = {y: pair for pair in straight_v1 for y in pair}
    v2_pair_of = {x: pair for pair in straight_v2 for x in pair}
    inv = p.inverse()

    def full_walk(x1: int):
        """Walk S_x1 -> S_p[x1] -> ... in the whole permutation graph until
        an unmatched migrant's switch appears; None if the walk closes."""
        seen = set()
        line = x1
        while True:
            out_sw = p[line] // 2
            if out_sw in seen:
                return None
            seen.add(out_sw)
            for img in (2 * out_sw, 2 * out_sw + 1):
                y = inv[img]
                if y in unmatched_v1:
                    return ("case-one", y)
            line = inv[p[line] ^ 1]
            in_sw = line // 2
            if in_sw in seen:
                return None
            seen.add(in_sw)
            for cand in (2 * in_sw, 2 * in_sw + 1):
                if cand in unmatched_v2 and cand != x1:
                    return ("case-two", cand)

    def bind(x: int, y: int) -> None:
        bound.append((y, x))
        unmatched_v1.discard(y)
        unmatched_v2.discard(x)

    while unmatched_v2:
        x1 = min(unmatched_v2)
        x2 = next(v for v in v2_pair_of[x1] if v != x1)
        outcome = full_walk(x1)
        if outcome is not None and outcome[0] == "case-one" and x2 in unmatched_v2:
            y1 = outcome[1]
            y2 = next(v for v in v1_pair_of[y1] if v != y1)
            bind(x1, y1)
            if y2 in unmatched_v1:
                bind(x2, y2)
            continue
        # interchangeable: take the lowest unmatched down-migrant pair
        y1 = min(unmatched_v1)
        y2 = next((v for v in v1_pair_of[y1] if v != y1 and v in unmatched_v1), None)
        bind(x1, y1)
        if y2 is not None and x2 in unmatched_v2:
            bind(x2, y2)
    if unmatched_v1:
        raise MatchingViolationError(f"down migrants left unmatched: {sorted(unmatched_v1)}")
    return sorted(bound)


def find_matching(p: Permutation, k: int) -> MatchingAssignment:
    """Perfect matching between opposite-direction migrants of adjacent
    bands, built from permutation-graph walks.

    Two bands (k = n/2): the level recursion of ``_match_two_band`` yields
    pairs with equal output offsets.  More bands: the first boundary is
    matched with band-0 walks, band 0 is collapsed onto the matched
    partners, lines renumber down by k, and the rest recurses (each
    boundary gets a perfect matching; the equal-offset guarantee is a
    two-band property).
    """
    decompose_bands(p, k)
    n = p.n
    if 2 * k > n:
        raise UnsupportedBandWidthError(f"need at least two bands, got k={k}, n={n}")
    if 2 * k == n:
        return _match_two_band(p, k)
    first = _match_boundary(p, k)
    reduced = [0] * (n - k)
    for a in range(k, n):
        reduced[a - k] = p[a] - k
    for y, x in first:
        reduced[x - k] = p[y] - k
    rest = find_matching(Permutation(tuple(reduced)), k)
    pairs = list(first) + [(a + k, b + k) for a, b in rest.pairs]
    return MatchingAssignment(n, k, tuple(sorted(pairs)))


@dataclass(frozen=True)
class MigrationBalanceReport:
    """Per-stage counts of migrating inputs steered to the upper/lower
    subnetwork, per band, with the adjacent-band equalities checked."""

    n: int
    k: int
    ok: bool
    stages: tuple[tuple[dict, ...], ...]  # stages[l][band] -> counts


def check_migration_balance(p: Permutation, k: int) -> MigrationBalanceReport:
    """At every matching stage, the up migrants of band i steered to one
    subnetwork must equal in number the down migrants of band i-1 steered
    to the same side, and symmetrically for band i+1."""
    decompose_bands(p, k)
    n = p.n
    logk = k.bit_length() - 1
    run = _run_chain_levels(p, list(range(logk)))
    marks = migration_marks(p, k)
    bands = n // k
    stages = []
    ok = True
    for l in range(logk):
        choice = run.choices[l]
        rows = []
        for b in range(bands):
            lines = range(b * k, (b + 1) * k)
            rows.append(
                {
                    "up_top": sum(1 for f in lines if marks[f] == UP and choice[f] == 0),
                    "up_bottom": sum(1 for f in lines if marks[f] == UP and choice[f] == 1),
                    "down_top": sum(1 for f in lines if marks[f] == DOWN and choice[f] == 0),
                    "down_bottom": sum(1 for f in lines if marks[f] == DOWN and choice[f] == 1),
                }
            )
        for b in range(bands):
            above = rows[b - 1] if b > 0 else {"down_top": 0, "down_bottom": 0}
            below = rows[b + 1] if b < bands - 1 else {"up_top": 0, "up_bottom": 0}
            if rows[b]["up_top"] != above["down_top"]:
                ok = False
            if rows[b]["up_bottom"] != above["down_bottom"]:
                ok = False
            if rows[b]["down_top"] != below["up_top"]:
                ok = False
            if rows[b]["down_bottom"] != below["up_bottom"]:
                ok = False
        stages.append(tuple(rows))
    return MigrationBalanceReport(n, k, ok, tuple(stages))


# --- DOT rendering ------------------------------------------------------------


def permutation_graph_dot(g: PermutationGraph) -> str:
    out = ["digraph permutation_switches {", "  rankdir=LR;"]
    for t in range(g.n // 2):
        out.append(f'  i{t} [label="S{2 * t}{2 * t + 1}", shape=box];')
    for t in range(g.n // 2):
        out.append(f'  o{t} [label="S\'{2 * t}{2 * t + 1}", shape=box];')
    for a, b in g.edges:
        out.append(f"  i{a} -> o{b};")
    out.append("}")
    return "\n".join(out) + "\n"


def compatibility_graph_dot(g: CompatibilityGraph) -> str:
    def name(v):
        return f"v{v[0]}_{v[1]}"

    out = ["graph compatibility {"]
    for v in g.v1 + g.v2:
        out.append(f'  {name(v)} [label="({v[0]},{v[1]})"];')
    for e in g.edges:
        style = ", style=dashed" if e.kind == "cross" else ""
        label = "".join(str(s) for s in sorted(e.labels))
        out.append(f'  {name(e.u)} -- {name(e.v)} [label="{label}"{style}];')
    out.append("}")
    return "\n".join(out) + "\n"
