"""Benes-family networks as explicit columns of 2x2 switching elements.

A network is a list of columns; each column partitions the n lines into
switches of two lines (plus pass-through lines in the odd band-exchange
column).  Wiring between adjacent columns is the identity on line numbers:
all topology lives in which lines each column pairs.  Networks are
immutable after construction and safe to share across threads.

Canonical wiring: butterfly column c pairs lines differing in bit
log2(n)-1-c, inverse butterfly column c pairs lines differing in bit c.
The KR-Benes frontplane is a Benes laid out inverse-butterfly-first so
that its leading stages act inside contiguous bands; it is isomorphic to
``build_benes`` under a line relabeling that ``check_benes_embedding``
discovers by search.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

from .errors import InvalidBandWidthError, InvalidSizeError, UnsupportedBandWidthError

KIND_BUTTERFLY = "butterfly"
KIND_INVERSE_BUTTERFLY = "inverse-butterfly"
KIND_BENES = "benes"
KIND_BAND_EXCHANGE = "band-exchange"
KIND_K_BENES = "k-benes"
KIND_KR_BENES = "kr-benes"

ROLE_CORE = "benes-core"
ROLE_MATCHING = "matching"
ROLE_BE_EVEN = "band-exchange-even"
ROLE_BE_ODD = "band-exchange-odd"
ROLE_ROUTING = "routing"


class Switch(NamedTuple):
    """A 2x2 switching element on lines a < b (same lines on both sides)."""

    a: int
    b: int


class PortRef(NamedTuple):
    """One side of a line at a column: (column, line, 'in'|'out')."""

    column: int
    line: int
    side: str


class BypassEdge(NamedTuple):
    """Directed edge from (from_column, line) out-side to (to_column, line) in-side."""

    from_column: int
    to_column: int
    line: int


@dataclass
class Column:
    index: int
    role: str
    switches: tuple[Switch, ...]
    _pos_of: dict[int, int] = field(repr=False, default_factory=dict)

    def __post_init__(self):
        for pos, sw in enumerate(self.switches):
            if sw.a >= sw.b:
                raise ValueError(f"switch lines must be ordered, got {sw}")
            self._pos_of[sw.a] = pos
            self._pos_of[sw.b] = pos

    def position_of(self, line: int) -> Optional[int]:
        """Switch position owning the line, or None for a pass-through line."""
        return self._pos_of.get(line)

    def partner(self, line: int) -> Optional[int]:
        pos = self._pos_of.get(line)
        if pos is None:
            return None
        sw = self.switches[pos]
        return sw.b if line == sw.a else sw.a


@dataclass
class Network:
    kind: str
    n: int
    k: Optional[int]
    columns: tuple[Column, ...]
    bypass_edges: tuple[BypassEdge, ...] = ()

    @property
    def depth(self) -> int:
        return len(self.columns)

    def key(self) -> dict:
        return {"kind": self.kind, "n": self.n, "k": self.k}

    def structure(self) -> tuple:
        """Switch pairings only; the basis for equality across constructions."""
        return tuple(tuple(c.switches) for c in self.columns)


def _log2_exact(n: int, minimum: int, what: str, err=InvalidSizeError) -> int:
    if not isinstance(n, int) or n < minimum or n & (n - 1):
        raise err(f"{what} must be a power of 2 and at least {minimum}, got {n!r}")
    return n.bit_length() - 1


def _bit_column(n: int, bit: int) -> tuple[Switch, ...]:
    """Perfect matching pairing each line with the line differing in one bit."""
    mask = 1 << bit
    return tuple(Switch(x, x | mask) for x in range(n) if not x & mask)


def _column_seq(n: int, bits: list[int], roles: list[str]) -> tuple[Column, ...]:
    return tuple(
        Column(i, role, _bit_column(n, bit)) for i, (bit, role) in enumerate(zip(bits, roles))
    )


def build_butterfly(n: int) -> Network:
    """log2(n) columns; column c pairs lines differing in bit log2(n)-1-c.

    Every (input, output) pair is connected by exactly one port path.
    """
    ln = _log2_exact(n, 2, "n")
    bits = [ln - 1 - c for c in range(ln)]
    return Network(KIND_BUTTERFLY, n, None, _column_seq(n, bits, [ROLE_CORE] * ln))


def build_inverse_butterfly(n: int) -> Network:
    """Mirror image of the butterfly; column c pairs lines differing in bit c."""
    ln = _log2_exact(n, 2, "n")
    bits = list(range(ln))
    return Network(KIND_INVERSE_BUTTERFLY, n, None, _column_seq(n, bits, [ROLE_CORE] * ln))


def _benes_bits(n: int, flipped: bool = False) -> list[int]:
    ln = n.bit_length() - 1
    if flipped:
        return list(range(ln)) + list(range(ln - 2, -1, -1))
    return list(range(ln - 1, -1, -1)) + list(range(1, ln))


def build_benes(n: int) -> Network:
    """Butterfly followed by inverse butterfly with the shared middle column
    merged; depth 2*log2(n) - 1."""
    _log2_exact(n, 2, "n")
    bits = _benes_bits(n)
    return Network(KIND_BENES, n, None, _column_seq(n, bits, [ROLE_CORE] * len(bits)))


def _band_exchange_columns(n: int, k: int, start_index: int = 0) -> tuple[Column, Column]:
    logk = k.bit_length() - 1
    even = Column(start_index, ROLE_BE_EVEN, _bit_column(n, logk))
    odd_switches = []
    bands = n // k
    for b in range(1, bands - 1, 2):  # interior pairs (1,2), (3,4), ...
        for j in range(k):
            odd_switches.append(Switch(b * k + j, (b + 1) * k + j))
    odd = Column(start_index + 1, ROLE_BE_ODD, tuple(sorted(odd_switches)))
    return even, odd


def build_band_exchange(n: int, k: int) -> Network:
    """Two shuffle-exchange columns swapping same-offset lines of adjacent
    k-line bands: even band pairs (0,1),(2,3),... then odd pairs (1,2),(3,4),...
    Lines of the first and last band pass straight through the odd column.
    """
    _log2_exact(n, 2, "n")
    _log2_exact(k, 1, "k", InvalidBandWidthError)
    if k > n // 2:
        raise InvalidBandWidthError(f"band width {k} exceeds n/2 = {n // 2}")
    even, odd = _band_exchange_columns(n, k)
    return Network(KIND_BAND_EXCHANGE, n, k, (even, odd))


def build_k_benes(n: int, k: int) -> Network:
    """Stacked k x k inverse butterflies (matching), the two band-exchange
    columns, then stacked k x k butterflies (routing); depth 2*log2(k) + 2.

    Matching column c pairs lines differing in bit c, so each band's columns
    form an inverse butterfly on its k contiguous lines; routing columns
    mirror them.
    """
    _log2_exact(n, 4, "n")
    logk = _log2_exact(k, 1, "k", InvalidBandWidthError)
    if k > n // 4:
        raise UnsupportedBandWidthError(
            f"band width {k} exceeds n/4 = {n // 4}; use a full Benes instead"
        )
    columns: list[Column] = []
    for c in range(logk):
        columns.append(Column(len(columns), ROLE_MATCHING, _bit_column(n, c)))
    even, odd = _band_exchange_columns(n, k, start_index=len(columns))
    columns.extend([even, odd])
    for c in range(logk):
        columns.append(Column(len(columns), ROLE_ROUTING, _bit_column(n, logk - 1 - c)))
    return Network(KIND_K_BENES, n, k, tuple(columns))


@dataclass(frozen=True)
class KrLayout:
    """Column bookkeeping for a KR-Benes of a given n.

    stage_col[s] is the column index of 1-based Benes stage s;
    be_cols[k] is the (even, odd) column index pair of the BE(n, k) block.
    """

    n: int
    stage_col: tuple[int, ...]  # index 0 unused; stages are 1-based
    be_cols: dict[int, tuple[int, int]]
    stage_bits: tuple[int, ...]  # bit toggled by each 1-based stage

    @property
    def log_n(self) -> int:
        return self.n.bit_length() - 1


def kr_layout(n: int) -> KrLayout:
    ln = _log2_exact(n, 4, "n")
    bits = _benes_bits(n, flipped=True)
    stage_col = [0]
    be_cols: dict[int, tuple[int, int]] = {}
    col = 0
    for s in range(1, 2 * ln):
        stage_col.append(col)
        col += 1
        if 1 <= s <= ln - 2:
            be_cols[1 << s] = (col, col + 1)
            col += 2
    return KrLayout(n, tuple(stage_col), be_cols, tuple([0] + bits))


def build_kr_benes(n: int) -> Network:
    """Benes frontplane (inverse-butterfly-first) with a bypassable
    BE(n, 2^i) backplane after each stage i, 1 <= i <= log2(n)-2.

    Bypass edges: (a) from each BE(n, 2^i) output line to the same line at
    Benes stage 2*log2(n)-i, and (b) from each Benes stage output over the
    interposed BE columns to the next stage.  Depth is 4*log2(n) - 5.
    """
    layout = kr_layout(n)
    ln = layout.log_n
    columns: list[Column] = []
    for s in range(1, 2 * ln):
        columns.append(Column(len(columns), ROLE_CORE, _bit_column(n, layout.stage_bits[s])))
        if 1 <= s <= ln - 2:
            even, odd = _band_exchange_columns(n, 1 << s, start_index=len(columns))
            columns.extend([even, odd])
    edges: list[BypassEdge] = []
    for s in range(1, ln - 1):  # (b): skip the BE block between stages s and s+1
        for line in range(n):
            edges.append(BypassEdge(layout.stage_col[s], layout.stage_col[s + 1], line))
    for s in range(1, ln - 1):  # (a): from BE(n, 2^s) outputs to stage 2*log n - s
        _, odd_col = layout.be_cols[1 << s]
        target = layout.stage_col[2 * ln - s]
        for line in range(n):
            edges.append(BypassEdge(odd_col, target, line))
    edges.sort()
    return Network(KIND_KR_BENES, n, None, tuple(columns), tuple(edges))


# --- isomorphism search ----------------------------------------------------


def find_line_relabeling(
    cols_a: list[tuple[Switch, ...]], cols_b: list[tuple[Switch, ...]], n: int
) -> Optional[list[int]]:
    """Search for a line relabeling phi with phi(pair of cols_a[t]) a pair of
    cols_b[t] for every t, and pass-through lines mapping to pass-through
    lines.  Returns phi as a list (phi[a_line] = b_line) or None.

    The relabeling is discovered, not assumed: an anchor image is tried for
    each connected component of the column matchings and the rest follows by
    propagation.
    """
    if len(cols_a) != len(cols_b):
        return None
    depth = len(cols_a)

    def partners(cols):
        table = []
        for switches in cols:
            p: list[Optional[int]] = [None] * n
            for sw in switches:
                p[sw.a] = sw.b
                p[sw.b] = sw.a
            table.append(p)
        return table

    pa = partners(cols_a)
    pb = partners(cols_b)
    for t in range(depth):
        if sum(x is None for x in pa[t]) != sum(x is None for x in pb[t]):
            return None

    # connected components of cols_a under all column matchings
    comp_of = [-1] * n
    comps: list[list[int]] = []
    for start in range(n):
        if comp_of[start] != -1:
            continue
        comp = [start]
        comp_of[start] = len(comps)
        stack = [start]
        while stack:
            x = stack.pop()
            for t in range(depth):
                y = pa[t][x]
                if y is not None and comp_of[y] == -1:
                    comp_of[y] = len(comps)
                    comp.append(y)
                    stack.append(y)
        comps.append(sorted(comp))

    phi: list[Optional[int]] = [None] * n
    used = [False] * n

    def propagate(anchor: int, image: int) -> Optional[list[tuple[int, int]]]:
        """Force assignments from anchor->image; None on contradiction."""
        assigned: list[tuple[int, int]] = []
        stack = [(anchor, image)]
        local: dict[int, int] = {}
        local_used: set[int] = set()
        while stack:
            x, y = stack.pop()
            cur = phi[x] if phi[x] is not None else local.get(x)
            if cur is not None:
                if cur != y:
                    return None
                continue
            if used[y] or y in local_used:
                return None
            local[x] = y
            local_used.add(y)
            assigned.append((x, y))
            for t in range(depth):
                xp, yp = pa[t][x], pb[t][y]
                if (xp is None) != (yp is None):
                    return None
                if xp is not None:
                    stack.append((xp, yp))
        return assigned

    def solve(ci: int) -> bool:
        if ci == len(comps):
            return True
        anchor = comps[ci][0]
        for image in range(n):
            if used[image]:
                continue
            assigned = propagate(anchor, image)
            if assigned is None:
                continue
            for x, y in assigned:
                phi[x] = y
                used[y] = True
            if solve(ci + 1):
                return True
            for x, y in assigned:
                phi[x] = None
                used[y] = False
        return False

    if not solve(0):
        return None
    return [v for v in phi]  # type: ignore[misc]


@dataclass(frozen=True)
class EmbeddingReport:
    ok: bool
    line_map: Optional[tuple[int, ...]]  # k-benes line -> benes line
    inverse_map: Optional[tuple[int, ...]]


def check_benes_embedding(n: int, k: int) -> EmbeddingReport:
    """Check that the first log2(k)+1 and last log2(k) columns of
    ``build_benes(n)`` are isomorphic, under some line relabeling, to
    ``build_k_benes(n, k)`` with its odd band-exchange column deleted.

    Returns the relabeling found (and its inverse); ok=False on mismatch.
    """
    logk = _log2_exact(k, 2, "k", InvalidBandWidthError)
    if k > n // 4:
        raise InvalidBandWidthError(f"band width {k} exceeds n/4 = {n // 4}")
    benes = build_benes(n)
    kb = build_k_benes(n, k)
    outer = list(benes.columns[: logk + 1]) + list(benes.columns[-logk:])
    trimmed = [c for c in kb.columns if c.role != ROLE_BE_ODD]
    phi = find_line_relabeling(
        [c.switches for c in trimmed], [c.switches for c in outer], n
    )
    if phi is None:
        return EmbeddingReport(False, None, None)
    inv = [0] * n
    for x, y in enumerate(phi):
        inv[y] = x
    return EmbeddingReport(True, tuple(phi), tuple(inv))


# --- serialization ----------------------------------------------------------


def network_to_json(net: Network) -> str:
    doc = {
        "kind": net.kind,
        "n": net.n,
        "k": net.k,
        "columns": [
            {"role": c.role, "switches": [[sw.a, sw.b] for sw in c.switches]}
            for c in net.columns
        ],
        "bypass_edges": [
            [[e.from_column, e.line], [e.to_column, e.line]] for e in net.bypass_edges
        ],
    }
    return json.dumps(doc, sort_keys=True, indent=1)


def network_from_json(text: str) -> Network:
    doc = json.loads(text)
    columns = tuple(
        Column(i, c["role"], tuple(Switch(a, b) for a, b in c["switches"]))
        for i, c in enumerate(doc["columns"])
    )
    edges = tuple(
        BypassEdge(src[0], dst[0], src[1]) for src, dst in doc.get("bypass_edges", [])
    )
    return Network(doc["kind"], doc["n"], doc.get("k"), columns, edges)


# --- DOT export -------------------------------------------------------------


def _upstream_owner(net: Network, col: int, line: int) -> Optional[tuple[int, int]]:
    for c in range(col, -1, -1):
        pos = net.columns[c].position_of(line)
        if pos is not None:
            return c, pos
    return None


def export_dot(net: Network) -> str:
    """Deterministic DOT digraph: switches as nodes, wires and bypass edges
    as edges, columns as same-rank subgraphs.  Byte-identical across runs."""
    out: list[str] = []
    out.append("digraph fabric {")
    out.append("  rankdir=LR;")
    out.append('  node [shape=box, fontsize=10];')
    out.append('  { rank=same; ' + " ".join(f'in{i} [shape=plaintext];' for i in range(net.n)) + " }")
    for c in net.columns:
        names = " ".join(
            f'c{c.index}p{pos} [label="{c.index}.{pos}\\n({sw.a},{sw.b})"];'
            for pos, sw in enumerate(c.switches)
        )
        out.append("  { rank=same; " + names + " }")
    out.append('  { rank=same; ' + " ".join(f'out{i} [shape=plaintext];' for i in range(net.n)) + " }")

    edges: list[str] = []
    for line in range(net.n):
        owners = [
            (c.index, c.position_of(line))
            for c in net.columns
            if c.position_of(line) is not None
        ]
        prev = f"in{line}"
        for col, pos in owners:
            edges.append(f'  {prev} -> c{col}p{pos} [label="{line}"];')
            prev = f"c{col}p{pos}"
        edges.append(f'  {prev} -> out{line} [label="{line}"];')
    for e in net.bypass_edges:
        src = _upstream_owner(net, e.from_column, e.line)
        dst = net.columns[e.to_column].position_of(e.line)
        if src is None or dst is None:
            continue
        edges.append(
            f'  c{src[0]}p{src[1]} -> c{e.to_column}p{dst} '
            f'[style=dashed, class=bypass, label="{e.line}"];'
        )
    out.extend(sorted(edges))
    out.append("}")
    return "\n".join(out) + "\n"
