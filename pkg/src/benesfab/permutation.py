"""Validated permutations on [0, n) plus the text format used by the CLI."""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass(frozen=True)
class Permutation:
    """A bijection on [0, n); ``map[i]`` is the output line of input i."""

    map: tuple[int, ...]
    n: int = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "n", len(self.map))
        seen = [False] * self.n
        for i, v in enumerate(self.map):
            if not isinstance(v, int) or not 0 <= v < self.n:
                raise ValueError(f"image {v!r} of input {i} is outside [0, {self.n})")
            if seen[v]:
                raise ValueError(f"duplicate image {v} (input {i})")
            seen[v] = True
        # all values in range and distinct => bijection

    def __getitem__(self, i: int) -> int:
        return self.map[i]

    def __iter__(self):
        return iter(self.map)

    def __len__(self) -> int:
        return self.n

    def inverse(self) -> "Permutation":
        inv = [0] * self.n
        for i, v in enumerate(self.map):
            inv[v] = i
        return Permutation(tuple(inv))

    def to_text(self) -> str:
        return ",".join(str(v) for v in self.map)


def identity(n: int) -> Permutation:
    return Permutation(tuple(range(n)))


def reversal(n: int) -> Permutation:
    return Permutation(tuple(range(n - 1, -1, -1)))


def parse_permutation(text: str) -> Permutation:
    """Parse comma-separated images of 0..n-1, e.g. ``"4,5,0,6,1,2,7,3"``.

    Rejects non-bijections naming the offending duplicate or missing element.
    """
    parts = [p.strip() for p in text.split(",") if p.strip() != ""]
    if not parts:
        raise ValueError("empty permutation text")
    try:
        values = [int(p) for p in parts]
    except ValueError as exc:
        raise ValueError(f"permutation text is not a comma-separated integer list: {exc}") from None
    n = len(values)
    seen: set[int] = set()
    for v in values:
        if not 0 <= v < n:
            raise ValueError(f"element {v} is outside [0, {n})")
        if v in seen:
            raise ValueError(f"duplicate element {v}")
        seen.add(v)
    missing = [v for v in range(n) if v not in seen]
    if missing:  # unreachable given the range+duplicate checks, kept for clarity
        raise ValueError(f"missing element {missing[0]}")
    return Permutation(tuple(values))
