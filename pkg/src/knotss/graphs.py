"""Graph presentation of H^*(C'_p(R^{N+1})).

A monomial is a word of edges on vertices ``1..p``.  An edge ``(i, j)``
with ``i != j`` is the class ``a_ij``; a loop ``(i, i)`` is the tangential
class ``b_i``.  Every generator has degree N, so only the parity of N
enters the sign rules:

* reversing an edge multiplies by ``(-1)**(N+1)``;
* swapping two adjacent edges multiplies by ``(-1)**N``;
* squares vanish, and ``a_ij a_jk + a_jk a_ki + a_ki a_ij = 0``.

Admissible monomials (non-loop edges stored ``i < j``, pairwise distinct
larger endpoints, at most one loop per vertex, canonical edge order) form a
basis of the quotient, and :func:`normalize` rewrites any word into them.
"""

from __future__ import annotations

import enum
import re
from collections import defaultdict
from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations, product
from typing import Iterable, Iterator, Mapping, Sequence

from knotss.config import CapExceeded, limits
from knotss.indexmaps import IndexMap

Edge = tuple[int, int]
Key = tuple[Edge, ...]

__all__ = [
    "Parity",
    "GraphMonomial",
    "GraphVector",
    "normalize",
    "normalize_word",
    "basis",
    "basis_size",
    "is_admissible",
    "is_covered",
    "basis_keys",
    "contract_key",
    "codegeneracy_pullback",
    "coface_pullback",
    "push_vertices",
    "induced_pullback",
    "parse_monomial",
]


class Parity(enum.IntEnum):
    EVEN = 0
    ODD = 1

    @classmethod
    def coerce(cls, value) -> "Parity":
        if isinstance(value, Parity):
            return value
        if isinstance(value, str):
            try:
                return cls[value.strip().upper()]
            except KeyError:
                raise ValueError(f"parity must be 'even' or 'odd', got {value!r}") from None
        if value in (0, 1):
            return cls(int(value))
        raise ValueError(f"bad parity {value!r}")

    @classmethod
    def of(cls, N: int) -> "Parity":
        return cls(N % 2)

    @property
    def flip_sign(self) -> int:
        """Sign picked up by reversing one edge."""
        return 1 if self is Parity.ODD else -1

    @property
    def swap_sign(self) -> int:
        """Sign picked up by transposing two adjacent edges."""
        return -1 if self is Parity.ODD else 1

    def __str__(self) -> str:
        return self.name.lower()


def _edge_order(e: Edge) -> tuple[int, int, int]:
    # non-loop edges by (smaller, larger) endpoint, then loops by vertex
    return (e[0] == e[1], e[0], e[1])


def _sort_with_sign(word: Sequence[Edge], parity: Parity) -> tuple[Key, int]:
    order = sorted(range(len(word)), key=lambda k: _edge_order(word[k]))
    sign = 1
    if parity is Parity.ODD:
        seen = [False] * len(order)
        for start in range(len(order)):
            if seen[start]:
                continue
            k, length = start, 0
            while not seen[k]:
                seen[k] = True
                k = order[k]
                length += 1
            if length % 2 == 0:
                sign = -sign
    return tuple(word[k] for k in order), sign


def normalize_word(word: Iterable[Edge], parity, coeff: int = 1) -> dict[Key, int]:
    """Rewrite an edge word as ``{admissible key: coefficient}``."""
    parity = Parity.coerce(parity)
    sign = coeff
    oriented = []
    for i, j in word:
        if i > j:
            i, j = j, i
            sign *= parity.flip_sign
        oriented.append((i, j))
    if len(set(oriented)) != len(oriented) or sign == 0:
        return {}
    key, s = _sort_with_sign(oriented, parity)
    sign *= s
    return {k: sign * c for k, c in _reduce_sorted(key, parity).items()}


@lru_cache(maxsize=1 << 20)
def _reduce_sorted(key: Key, parity: Parity) -> dict[Key, int]:
    """Arnold rewriting of a sorted, duplicate-free word."""
    owners: dict[int, list[int]] = defaultdict(list)
    for pos, (i, j) in enumerate(key):
        if i != j:
            owners[j].append(pos)
    clash = min((j for j, ps in owners.items() if len(ps) > 1), default=None)
    if clash is None:
        return {key: 1}
    x, y = owners[clash][0], owners[clash][1]
    i, j = key[x]
    i2 = key[y][0]
    # bring a_{i2 j} next to a_{ij}, then a_ij a_i2j = a_ii2 a_i2j - a_ii2 a_ij
    sign = parity.swap_sign ** (y - x - 1)
    head = key[:x]
    tail = key[x + 1 : y] + key[y + 1 :]
    out: dict[Key, int] = defaultdict(int)
    for pair, c in ((((i, i2), (i2, j)), sign), (((i, i2), (i, j)), -sign)):
        for k, v in normalize_word(head + pair + tail, parity, c).items():
            out[k] += v
    return {k: v for k, v in out.items() if v}


def is_admissible(key: Key) -> bool:
    if list(key) != sorted(key, key=_edge_order) or len(set(key)) != len(key):
        return False
    tops = [j for i, j in key if i != j]
    return all(i <= j for i, j in key) and len(tops) == len(set(tops))


def is_covered(key: Key, p: int) -> bool:
    """True when every vertex of ``1..p`` meets an edge or carries a loop."""
    hit = set()
    for i, j in key:
        hit.add(i)
        hit.add(j)
    return len(hit) == p


@dataclass(frozen=True)
class GraphMonomial:
    """An edge word on ``p`` vertices with an integer coefficient (not necessarily admissible)."""

    p: int
    edges: Key
    coeff: int = 1

    def __post_init__(self):
        if self.p < 0:
            raise ValueError("vertex count must be nonnegative")
        object.__setattr__(self, "edges", tuple((int(i), int(j)) for i, j in self.edges))
        for i, j in self.edges:
            if not (1 <= i <= self.p and 1 <= j <= self.p):
                raise ValueError(f"edge ({i}, {j}) outside vertex range 1..{self.p}")

    @property
    def m(self) -> int:
        return len(self.edges)

    def text(self) -> str:
        return f"{self.coeff} {_key_text(self.edges)}".rstrip()

    def __str__(self) -> str:
        return self.text()


def _key_text(key: Key) -> str:
    return "".join(f"b({i})" if i == j else f"a({i},{j})" for i, j in key)


_TOKEN = re.compile(r"\s*(?:a\(\s*(\d+)\s*,\s*(\d+)\s*\)|b\(\s*(\d+)\s*\))")


def parse_monomial(text: str, p: int | None = None) -> GraphMonomial:
    """Parse ``"-3 a(1,2)b(2)"``; ``p`` defaults to the largest vertex mentioned."""
    s = text.strip()
    m = re.match(r"^([+-]?\d+)(?:\s+|$|(?=[ab]))", s)
    coeff = 1
    if m:
        coeff = int(m.group(1))
        s = s[m.end():]
    edges = []
    pos = 0
    while pos < len(s):
        t = _TOKEN.match(s, pos)
        if not t:
            if s[pos:].strip() == "":
                break
            raise ValueError(f"cannot parse monomial {text!r} near {s[pos:]!r}")
        if t.group(3) is not None:
            v = int(t.group(3))
            edges.append((v, v))
        else:
            edges.append((int(t.group(1)), int(t.group(2))))
        pos = t.end()
    if p is None:
        p = max((max(e) for e in edges), default=0)
    return GraphMonomial(p, tuple(edges), coeff)


@dataclass(frozen=True)
class GraphVector:
    """Integer combination of admissible monomials in one bidegree ``(p, m)``."""

    p: int
    m: int
    parity: Parity
    terms: tuple[tuple[Key, int], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "parity", Parity.coerce(self.parity))
        keys = [k for k, _ in self.terms]
        if len(set(keys)) != len(keys):
            raise ValueError("duplicate monomials")
        for k, c in self.terms:
            if c == 0:
                raise ValueError("zero coefficient")
            if len(k) != self.m:
                raise ValueError(f"monomial {_key_text(k)} has {len(k)} edges, expected {self.m}")
            if not is_admissible(k):
                raise ValueError(f"monomial {_key_text(k)} is not admissible")
            if any(not (1 <= v <= self.p) for e in k for v in e):
                raise ValueError(f"monomial {_key_text(k)} leaves vertex range 1..{self.p}")
        if keys != sorted(keys):
            raise ValueError("terms must be sorted")

    @classmethod
    def from_dict(cls, p: int, m: int, parity, data: Mapping[Key, int]) -> "GraphVector":
        return cls(p, m, parity, tuple(sorted((k, v) for k, v in data.items() if v)))

    @classmethod
    def zero(cls, p: int, m: int, parity) -> "GraphVector":
        return cls(p, m, parity, ())

    @classmethod
    def monomial(cls, p: int, key: Key, parity, coeff: int = 1) -> "GraphVector":
        return normalize(GraphMonomial(p, key, coeff), parity)

    def to_dict(self) -> dict[Key, int]:
        return dict(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def _check(self, other: "GraphVector") -> None:
        if (self.p, self.m, self.parity) != (other.p, other.m, other.parity):
            raise ValueError("bidegree or parity mismatch")

    def __add__(self, other: "GraphVector") -> "GraphVector":
        self._check(other)
        acc = defaultdict(int, self.to_dict())
        for k, v in other.terms:
            acc[k] += v
        return GraphVector.from_dict(self.p, self.m, self.parity, acc)

    def __neg__(self) -> "GraphVector":
        return GraphVector(self.p, self.m, self.parity, tuple((k, -v) for k, v in self.terms))

    def __sub__(self, other: "GraphVector") -> "GraphVector":
        return self + (-other)

    def __rmul__(self, c: int) -> "GraphVector":
        return GraphVector.from_dict(self.p, self.m, self.parity, {k: c * v for k, v in self.terms})

    def text(self) -> str:
        if not self.terms:
            return "0"
        return " + ".join(f"{c} {_key_text(k)}".rstrip() for k, c in self.terms)

    def to_json(self) -> dict:
        return {
            "p": self.p,
            "m": self.m,
            "parity": str(self.parity),
            "terms": [
                {
                    "coeff": str(c),
                    "edges": [[i, j] for i, j in k if i != j],
                    "loops": [i for i, j in k if i == j],
                }
                for k, c in self.terms
            ],
        }

    @classmethod
    def from_json(cls, obj: Mapping) -> "GraphVector":
        p, m, parity = int(obj["p"]), int(obj["m"]), Parity.coerce(obj["parity"])
        acc: dict[Key, int] = defaultdict(int)
        for t in obj["terms"]:
            word = [tuple(e) for e in t.get("edges", [])] + [(v, v) for v in t.get("loops", [])]
            for k, v in normalize(GraphMonomial(p, tuple(word), int(t["coeff"])), parity).terms:
                acc[k] += v
        vec = cls.from_dict(p, m, parity, acc)
        return vec


def normalize(mono: GraphMonomial, parity) -> GraphVector:
    """Normal form of a raw monomial as a :class:`GraphVector`."""
    parity = Parity.coerce(parity)
    return GraphVector.from_dict(mono.p, mono.m, parity, normalize_word(mono.edges, parity, mono.coeff))


def basis_size(p: int, m: int, normalized: bool = False) -> int:
    """Count of admissible monomials, without enumerating them."""
    from math import comb

    if p < 0 or m < 0:
        return 0
    # coefficient of t^m in prod_{j=1}^{p-1}(1 + j t) * (1+t)^p, or its covered part
    if not normalized:
        poly = [1]
        for j in range(1, p):
            poly = [a + j * b for a, b in zip(poly + [0], [0] + poly)]
        total = 0
        for k, c in enumerate(poly):
            if 0 <= m - k <= p:
                total += c * comb(p, m - k)
        return total
    # inclusion-exclusion over the set of vertices forced isolated
    return sum((-1) ** s * comb(p, s) * basis_size(p - s, m) for s in range(p + 1))


def _check_caps(p: int, m: int, normalized: bool) -> None:
    lim = limits()
    if p > lim.max_vertices:
        raise CapExceeded(f"p={p} exceeds vertex cap {lim.max_vertices}")
    size = basis_size(p, m, normalized)
    if size > lim.max_cells:
        raise CapExceeded(f"basis ({p}, {m}) has {size} elements (cap {lim.max_cells})")


def _iter_admissible(p: int, m: int) -> Iterator[Key]:
    for parents in product(*[range(j) for j in range(1, p + 1)]):
        arcs = tuple(sorted((i, j) for j, i in enumerate(parents, 1) if i))
        need = m - len(arcs)
        if not 0 <= need <= p:
            continue
        for loops in combinations(range(1, p + 1), need):
            yield arcs + tuple((v, v) for v in loops)


@lru_cache(maxsize=256)
def _basis_keys(p: int, m: int, normalized: bool) -> tuple[Key, ...]:
    keys = _iter_admissible(p, m)
    if normalized:
        keys = (k for k in keys if is_covered(k, p))
    return tuple(sorted(keys))


def basis(p: int, m: int, parity=Parity.ODD, normalized: bool = False) -> list[GraphMonomial]:
    """Admissible monomials with ``m`` edges on ``p`` vertices, in sorted order.

    The set does not depend on parity; only signs do.
    """
    Parity.coerce(parity)
    if p < 0 or m < 0:
        raise ValueError("p and m must be nonnegative")
    _check_caps(p, m, normalized)
    return [GraphMonomial(p, k) for k in _basis_keys(p, m, normalized)]


def basis_keys(p: int, m: int, normalized: bool = False) -> tuple[Key, ...]:
    if p < 0 or m < 0:
        raise ValueError("p and m must be nonnegative")
    _check_caps(p, m, normalized)
    return _basis_keys(p, m, normalized)


# --- pullbacks -----------------------------------------------------------


def _relabel_injective(key: Key, ell: int) -> Key:
    return tuple((i + (i >= ell), j + (j >= ell)) for i, j in key)


def codegeneracy_pullback(ell: int, v: GraphVector) -> GraphVector:
    """Pullback along the map forgetting point ``ell``: add an isolated vertex ``ell``."""
    p = v.p + 1
    if not 1 <= ell <= p:
        raise ValueError(f"position {ell} outside 1..{p}")
    return GraphVector(p, v.m, v.parity, tuple(sorted((_relabel_injective(k, ell), c) for k, c in v.terms)))


def contract_key(key: Key, ell: int, parity) -> dict[Key, int]:
    """``c_ell`` on one admissible monomial: identify vertices ``ell`` and ``ell+1``."""
    word = []
    for i, j in key:
        ti = i if i <= ell else i - 1
        tj = j if j <= ell else j - 1
        word.append((ti, tj))
    return normalize_word(word, parity)


def coface_pullback(ell: int, v: GraphVector) -> GraphVector:
    """The contraction ``c_ell`` from ``p`` to ``p - 1`` vertices."""
    if not 1 <= ell <= v.p - 1:
        raise ValueError(f"position {ell} outside 1..{v.p - 1}")
    acc: dict[Key, int] = defaultdict(int)
    for k, c in v.terms:
        for k2, c2 in contract_key(k, ell, v.parity).items():
            acc[k2] += c * c2
    return GraphVector.from_dict(v.p - 1, v.m, v.parity, acc)


def push_vertices(values: Sequence[int], v: GraphVector, target: int) -> GraphVector:
    """Relabel every edge through ``vertex k -> values[k-1]`` (order-preserving) in one step."""
    _check_monotone(values)
    if len(values) != v.p:
        raise ValueError("map source size does not match vertex count")
    acc: dict[Key, int] = defaultdict(int)
    for k, c in v.terms:
        word = [(values[i - 1], values[j - 1]) for i, j in k]
        for k2, c2 in normalize_word(word, v.parity, c).items():
            acc[k2] += c2
    return GraphVector.from_dict(target, v.m, v.parity, acc)


def _check_monotone(values: Sequence[int]) -> None:
    if any(b < a for a, b in zip(values, values[1:])):
        raise ValueError(f"map {list(values)} is not order-preserving")


def factor_surjection_injection(values: Sequence[int], target: int) -> tuple[list[int], list[int]]:
    """Epi-mono factorization of an order-preserving map on ``1..n``.

    Returns ``(merges, inserts)``: apply ``c_ell`` for each ``ell`` in
    ``merges`` in order, then ``codegeneracy_pullback`` for each position in
    ``inserts`` in order.
    """
    _check_monotone(values)
    merges = []
    # merge right-to-left so earlier indices stay valid
    for k in range(len(values) - 1, 0, -1):
        if values[k] == values[k - 1]:
            merges.append(k)
    image = sorted(set(values))
    inserts = [t for t in range(1, target + 1) if t not in set(image)]
    return merges, inserts


def induced_pullback(sigma: IndexMap):
    """Linear map between graph modules induced by an order-preserving vertex map.

    Vertex ``k`` corresponds to index ``k - 1`` of ``sigma``.  The map is
    assembled from contractions and codegeneracy pullbacks via the epi-mono
    factorization of ``sigma``.
    """
    if not sigma.order_preserving:
        raise ValueError(f"{sigma.values} is not order-preserving")
    values = [x + 1 for x in sigma.values]
    merges, inserts = factor_surjection_injection(values, sigma.target)

    def apply(v: GraphVector) -> GraphVector:
        if v.p != sigma.source:
            raise ValueError("vector vertex count does not match map source")
        for ell in merges:
            v = coface_pullback(ell, v)
        for pos in inserts:
            v = codegeneracy_pullback(pos, v)
        return v

    return apply
