"""Maps between finite ordinals and the indexing functors built from them.

``[n]`` denotes ``{0, ..., n}``; an :class:`IndexMap` stores the sizes of
its source and target (so ``[n]`` has size ``n + 1``).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

__all__ = [
    "IndexMap",
    "sigma_star",
    "tau",
    "coface",
    "codegeneracy",
    "functor_G",
    "functor_G_shriek",
    "order_preserving_maps",
]


@dataclass(frozen=True)
class IndexMap:
    source: int
    target: int
    values: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(int(v) for v in self.values))
        if self.source < 0 or self.target < 0:
            raise ValueError("sizes must be nonnegative")
        if len(self.values) != self.source:
            raise ValueError(f"expected {self.source} values, got {len(self.values)}")
        if any(not 0 <= v < self.target for v in self.values):
            raise ValueError(f"values {self.values} leave range 0..{self.target - 1}")

    @classmethod
    def identity(cls, size: int) -> "IndexMap":
        return cls(size, size, tuple(range(size)))

    def __call__(self, i: int) -> int:
        return self.values[i]

    def __matmul__(self, other: "IndexMap") -> "IndexMap":
        """``self @ other`` applies ``other`` first."""
        if other.target != self.source:
            raise ValueError("maps are not composable")
        return IndexMap(other.source, self.target, tuple(self.values[v] for v in other.values))

    @property
    def order_preserving(self) -> bool:
        return all(a <= b for a, b in zip(self.values, self.values[1:]))

    @property
    def boundary_preserving(self) -> bool:
        if self.source == 0:
            return self.target == 0
        return self.values[0] == 0 and self.values[-1] == self.target - 1

    @property
    def injective(self) -> bool:
        return len(set(self.values)) == len(self.values)

    @property
    def surjective(self) -> bool:
        return set(self.values) == set(range(self.target))


def order_preserving_maps(source: int, target: int) -> Iterable[IndexMap]:
    """All order-preserving maps between ordinals of the given sizes, lexicographically."""

    def rec(prefix: list[int], lo: int):
        if len(prefix) == source:
            yield IndexMap(source, target, tuple(prefix))
            return
        for v in range(lo, target):
            prefix.append(v)
            yield from rec(prefix, v)
            prefix.pop()

    return rec([], 0)


def sigma_star(sigma: IndexMap) -> IndexMap:
    """For order-preserving ``sigma: [n] -> [m]``, the boundary-preserving map ``[m+1] -> [n+1]``.

    ``sigma_star(j)`` counts the ``i`` with ``sigma(i) > m - j``.
    """
    if not sigma.order_preserving:
        raise ValueError(f"{sigma.values} is not order-preserving")
    if sigma.target == 0:
        raise ValueError("target ordinal must be nonempty")
    m = sigma.target - 1
    vals = tuple(sum(1 for v in sigma.values if v > m - j) for j in range(m + 2))
    return IndexMap(m + 2, sigma.source + 1, vals)


def tau(i: int, n: int) -> IndexMap:
    """Order-preserving surjection ``[n+1] -> [n]`` sending ``i`` and ``i+1`` to ``i``."""
    if not 0 <= i <= n:
        raise ValueError(f"tau index {i} outside 0..{n}")
    return IndexMap(n + 2, n + 1, tuple(k if k <= i else k - 1 for k in range(n + 2)))


def coface(i: int, n: int) -> IndexMap:
    """Injection ``[n-1] -> [n]`` missing ``i``."""
    if not 0 <= i <= n:
        raise ValueError(f"coface index {i} outside 0..{n}")
    return IndexMap(n, n + 1, tuple(k if k < i else k + 1 for k in range(n)))


def codegeneracy(i: int, n: int) -> IndexMap:
    """Surjection ``[n+1] -> [n]`` hitting ``i`` twice (same underlying map as ``tau``)."""
    return tau(i, n)


def _check_subset(S: Iterable[int], upper: int, name: str) -> tuple[int, ...]:
    s = tuple(sorted(set(S)))
    if any(not 1 <= x <= upper for x in s):
        raise ValueError(f"{name}={set(S)} is not a subset of 1..{upper}")
    return s


def functor_G(n: int, S: Iterable[int], S2: Iterable[int]) -> IndexMap:
    """Image of ``S <= S2`` (subsets of ``1..n+1``) as ``[#S-1] = S -> S2 = [#S2-1]``."""
    s = _check_subset(S, n + 1, "S")
    s2 = _check_subset(S2, n + 1, "S'")
    if not s:
        raise ValueError("S must be nonempty")
    if not set(s) <= set(s2):
        raise ValueError("S must be contained in S'")
    pos = {x: k for k, x in enumerate(s2)}
    return IndexMap(len(s), len(s2), tuple(pos[x] for x in s))


def functor_G_shriek(n: int, S: Iterable[int], S2: Iterable[int]) -> IndexMap:
    """Image of ``S <= S2`` (subsets of ``1..n``) as ``[n-#S] = [n]-S -> [n]-S2 = [n-#S2]``.

    An element of ``[n] - S`` goes to the largest element of ``[n] - S2`` not exceeding it.
    """
    s = _check_subset(S, n, "S")
    s2 = _check_subset(S2, n, "S'")
    if not s:
        raise ValueError("S must be nonempty")
    if not set(s) <= set(s2):
        raise ValueError("S must be contained in S'")
    src = [x for x in range(n + 1) if x not in set(s)]
    dst = [x for x in range(n + 1) if x not in set(s2)]
    pos = {x: k for k, x in enumerate(dst)}
    vals = tuple(pos[max(y for y in dst if y <= x)] for x in src)
    return IndexMap(len(src), len(dst), vals)


def compose_all(maps: Sequence[IndexMap]) -> IndexMap:
    """``maps[-1] @ ... @ maps[0]``: apply the first map first."""
    out = maps[0]
    for f in maps[1:]:
        out = f @ out
    return out
