"""Leaf-labelled rooted trees, their contraction posets and associated complexes.

A tree is stored as a nested tuple: the root is a tuple of children, each
child is either a leaf label (``int``) or another tuple.  Children are kept
sorted by the smallest leaf beneath them, which makes equality of the nested
tuples the same thing as label-respecting isomorphism.  The root may have a
single child; every other internal vertex has at least two.
"""

from __future__ import annotations

import json
from collections import defaultdict
from dataclasses import dataclass
from functools import lru_cache
from itertools import chain, combinations
from typing import Iterable, Iterator

from knotss.config import CapExceeded, limits
from knotss.indexmaps import order_preserving_maps

Node = "int | tuple"
Path = tuple[int, ...]

__all__ = [
    "FTree",
    "PosetView",
    "SimplicialComplex",
    "CofinalityError",
    "parse_tree",
    "contract",
    "enumerate_psi",
    "ex_triples",
    "functor_F",
    "check_F_terminal",
    "check_fiber_terminal",
    "comma_poset",
    "beat_point_core",
    "build_Y",
    "order_complex",
    "associahedron_f_vector",
]


class CofinalityError(AssertionError):
    """A terminal-object check failed."""


def _min_leaf(node) -> int:
    return node if isinstance(node, int) else _min_leaf(node[0])


def _canon(node):
    if isinstance(node, int):
        return node
    kids = tuple(sorted((_canon(c) for c in node), key=_min_leaf))
    return kids


def _leaves(node) -> list[int]:
    if isinstance(node, int):
        return [node]
    return list(chain.from_iterable(_leaves(c) for c in node))


def _text(node) -> str:
    if isinstance(node, int):
        return str(node)
    return "(" + " ".join(_text(c) for c in node) + ")"


@dataclass(frozen=True)
class FTree:
    """Rooted leaf-labelled tree with no bivalent internal vertex."""

    shape: tuple
    planar: bool = False

    def __post_init__(self):
        if not isinstance(self.shape, tuple) or not self.shape:
            raise ValueError("root must be a nonempty tuple of children")
        shape = _canon(self.shape)
        object.__setattr__(self, "shape", shape)
        leaves = _leaves(shape)
        if sorted(leaves) != list(range(1, len(leaves) + 1)):
            raise ValueError(f"leaf labels {sorted(leaves)} are not 1..{len(leaves)}")
        for path, node in self._internal():
            if path and len(node) < 2:
                raise ValueError(f"bivalent internal vertex at {path}")
        if self.planar:
            if len(shape) < 2:
                raise ValueError("half-planar trees need a root of valence at least two")
            for _, node in self._internal():
                ls = sorted(_leaves(node))
                if ls != list(range(ls[0], ls[-1] + 1)):
                    raise ValueError(f"leaves {ls} over a vertex are not consecutive")

    def _internal(self, node=None, path: Path = ()) -> Iterator[tuple[Path, tuple]]:
        node = self.shape if node is None else node
        yield path, node
        for k, c in enumerate(node):
            if isinstance(c, tuple):
                yield from self._internal(c, path + (k,))

    @property
    def n(self) -> int:
        return len(_leaves(self.shape))

    @property
    def univalent_root(self) -> bool:
        return len(self.shape) == 1

    def internal_edges(self) -> list[Path]:
        """Non-leaf edges, each named by the path of its lower endpoint."""
        return [p for p, _ in self._internal() if p]

    def internal_vertices(self) -> list[tuple]:
        return [node for _, node in self._internal()]

    def vertex_at(self, path: Path):
        node = self.shape
        for k in path:
            node = node[k]
        return node

    def leaves_over(self) -> list[frozenset[int]]:
        """Leaf sets over each internal vertex, root first."""
        return [frozenset(_leaves(node)) for node in self.internal_vertices()]

    def depth(self) -> int:
        """Largest number of edges between a leaf and the root."""

        def rec(node) -> int:
            if isinstance(node, int):
                return 0
            return 1 + max(rec(c) for c in node)

        return rec(self.shape)

    def dimension(self) -> int:
        """Dimension of the associahedral cell: sum of (children - 2) over internal vertices."""
        return sum(len(node) - 2 for node in self.internal_vertices())

    def text(self) -> str:
        return _text(self.shape)

    def __str__(self) -> str:
        return self.text()

    def as_planar(self) -> "FTree":
        return FTree(self.shape, planar=True)


def parse_tree(text: str, planar: bool = False) -> FTree:
    """Parse the nested-parenthesis form, e.g. ``"(1 (2 3) 4)"``."""
    tokens = text.replace("(", " ( ").replace(")", " ) ").split()
    pos = 0

    def read():
        nonlocal pos
        if pos >= len(tokens):
            raise ValueError(f"unexpected end of tree text {text!r}")
        tok = tokens[pos]
        pos += 1
        if tok == "(":
            kids = []
            while pos < len(tokens) and tokens[pos] != ")":
                kids.append(read())
            if pos >= len(tokens):
                raise ValueError(f"unbalanced parentheses in {text!r}")
            pos += 1
            return tuple(kids)
        if tok == ")":
            raise ValueError(f"unexpected ')' in {text!r}")
        try:
            return int(tok)
        except ValueError:
            raise ValueError(f"bad token {tok!r} in {text!r}") from None

    shape = read()
    if pos != len(tokens):
        raise ValueError(f"trailing text in {text!r}")
    if not isinstance(shape, tuple):
        raise ValueError("tree text must start with '('")
    return FTree(shape, planar)


def contract(T: FTree, E: Iterable[Path]) -> FTree:
    """Contract the non-leaf edges ``E`` (paths of lower endpoints) of ``T``."""
    E = {tuple(e) for e in E}
    valid = set(T.internal_edges())
    for e in E:
        if e not in valid:
            try:
                node = T.vertex_at(e)
            except (IndexError, TypeError):
                node = None
            kind = "a leaf edge" if isinstance(node, int) else "not an edge"
            raise ValueError(f"{e} is {kind} of {T}")

    def rebuild(node, path: Path):
        out = []
        for k, c in enumerate(node):
            p = path + (k,)
            if isinstance(c, int):
                out.append(c)
            elif p in E:
                out.extend(rebuild(c, p))
            else:
                out.append(tuple(rebuild(c, p)))
        return out

    return FTree(tuple(rebuild(T.shape, ())), T.planar)


def contractions(T: FTree) -> set[FTree]:
    """Every contraction of ``T``, including ``T`` itself."""
    edges = T.internal_edges()
    out = set()
    for r in range(len(edges) + 1):
        for E in combinations(edges, r):
            out.add(contract(T, E))
    return out


def ex_triples(T: FTree) -> frozenset[tuple[int, int, int]]:
    """Triples ``(i, j, k)`` with ``i != j`` over some vertex that ``k`` is not over."""
    n = T.n
    out = set()
    for over in T.leaves_over():
        rest = [k for k in range(1, n + 1) if k not in over]
        for i in over:
            for j in over:
                if i != j:
                    out.update((i, j, k) for k in rest)
    return frozenset(out)


# --- enumeration ---------------------------------------------------------


def _set_partitions(items: tuple[int, ...]) -> Iterator[list[tuple[int, ...]]]:
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in _set_partitions(rest):
        yield [(first,)] + part
        for k in range(len(part)):
            yield part[:k] + [(first,) + part[k]] + part[k + 1 :]


@lru_cache(maxsize=None)
def _subtrees(leaves: tuple[int, ...]) -> tuple:
    """All vertices (leaf or >= 2 children) carrying exactly ``leaves``."""
    if len(leaves) == 1:
        return (leaves[0],)
    out = []
    for part in _set_partitions(leaves):
        if len(part) < 2:
            continue
        blocks = sorted((tuple(sorted(b)) for b in part), key=lambda b: b[0])
        for kids in _product(*[_subtrees(b) for b in blocks]):
            out.append(tuple(kids))
    return tuple(out)


@lru_cache(maxsize=None)
def _planar_subtrees(lo: int, hi: int) -> tuple:
    if lo == hi:
        return (lo,)
    out = []
    size = hi - lo + 1
    # cut points between consecutive leaves; at least one cut
    for mask in range(1, 1 << (size - 1)):
        blocks, start = [], lo
        for b in range(size - 1):
            if mask >> b & 1:
                blocks.append((start, lo + b))
                start = lo + b + 1
        blocks.append((start, hi))
        for kids in _product(*[_planar_subtrees(a, b) for a, b in blocks]):
            out.append(tuple(kids))
    return tuple(out)


def _product(*pools):
    if not pools:
        yield ()
        return
    for x in pools[0]:
        for rest in _product(*pools[1:]):
            yield (x,) + rest


def _sort_key(T: FTree):
    return (-len(T.internal_vertices()), T.text())


@dataclass(frozen=True)
class PosetView:
    """Finite poset of trees; ``(a, b)`` in ``relation`` means a morphism ``objects[a] -> objects[b]``."""

    objects: tuple[FTree, ...]
    relation: frozenset[tuple[int, int]]

    def index(self, T: FTree) -> int:
        return self.objects.index(T)

    def leq(self, a: FTree, b: FTree) -> bool:
        return (self.index(a), self.index(b)) in self.relation

    def __len__(self) -> int:
        return len(self.objects)

    def is_partial_order(self) -> bool:
        n = len(self.objects)
        R = self.relation
        if any((i, i) not in R for i in range(n)):
            return False
        if any((j, i) in R for i, j in R if i != j):
            return False
        succ = defaultdict(set)
        for i, j in R:
            succ[i].add(j)
        return all((i, k) in R for i, j in R for k in succ[j])

    def to_json(self) -> dict:
        return {
            "objects": [T.text() for T in self.objects],
            "relation": [list(p) for p in sorted(self.relation)],
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json())

    @classmethod
    def from_json(cls, obj: dict, planar: bool = False) -> "PosetView":
        objs = tuple(parse_tree(t, planar) for t in obj["objects"])
        return cls(objs, frozenset((int(a), int(b)) for a, b in obj["relation"]))


def _enumerate_objects(n: int, planar: bool) -> list[FTree]:
    if planar:
        if n < 2:
            return []
        roots = [s for s in _planar_subtrees(1, n)]
        return [FTree(s, True) for s in roots]
    if n == 1:
        return [FTree((1,))]
    roots = list(_subtrees(tuple(range(1, n + 1))))
    return [FTree(s) for s in roots] + [FTree((s,)) for s in roots]


def enumerate_psi(n: int, planar: bool = False, with_relation: bool = True) -> PosetView:
    """All trees with ``n`` leaves up to isomorphism, ordered by contraction."""
    if n < 1:
        raise ValueError("n must be at least 1")
    lim = limits()
    cap = lim.max_planar_tree_leaves if planar else lim.max_tree_leaves
    if n > cap:
        raise CapExceeded(f"n={n} exceeds the {'planar' if planar else 'tree'} enumeration cap {cap}")
    objs = sorted(_enumerate_objects(n, planar), key=_sort_key)
    index = {T: k for k, T in enumerate(objs)}
    relation = set()
    if with_relation:
        for a, T in enumerate(objs):
            for T2 in contractions(T):
                relation.add((a, index[T2]))
    return PosetView(tuple(objs), frozenset(relation))


def functor_F(T: FTree) -> frozenset[int]:
    """Indices ``i`` whose leaves ``i`` and ``i+1`` meet only at the root."""
    if not T.planar:
        raise ValueError("functor_F needs a half-planar tree")
    branch = {}
    for k, child in enumerate(T.shape):
        for leaf in _leaves(child):
            branch[leaf] = k
    return frozenset(i for i in range(1, T.n) if branch[i] != branch[i + 1])


def _depth_two_tree(n: int, S: frozenset[int]) -> FTree:
    # cut leaves 1..n+1 between i and i+1 for every i in S
    blocks, start = [], 1
    for i in sorted(S):
        blocks.append(tuple(range(start, i + 1)))
        start = i + 1
    blocks.append(tuple(range(start, n + 2)))
    kids = tuple(b[0] if len(b) == 1 else b for b in blocks)
    return FTree(kids, planar=True)


def check_F_terminal(n: int, S: Iterable[int], poset: PosetView | None = None) -> FTree:
    """Terminal object of the comma category ``F_n | S``, checked by enumeration.

    Returns the unique tree of depth at most two with ``F(T) = S`` after
    verifying that every ``T`` with ``F(T) <= S`` maps to it.
    """
    S = _check_S(n, S)
    P = poset if poset is not None else enumerate_psi(n + 1, planar=True)
    F = [functor_F(T) for T in P.objects]
    candidates = [k for k, T in enumerate(P.objects) if F[k] == S and T.depth() <= 2]
    if len(candidates) != 1:
        raise CofinalityError(f"expected one depth-2 tree over S={sorted(S)}, found {len(candidates)}")
    top = candidates[0]
    for k, fk in enumerate(F):
        if fk <= S and (k, top) not in P.relation:
            raise CofinalityError(f"{P.objects[k]} lies over S={sorted(S)} but does not map to {P.objects[top]}")
    T = P.objects[top]
    if T != _depth_two_tree(n, S):
        raise CofinalityError(f"terminal object {T} differs from the expected {_depth_two_tree(n, S)}")
    return T


def _check_S(n: int, S: Iterable[int]) -> frozenset[int]:
    S = frozenset(S)
    if not S:
        raise ValueError("S must be nonempty")
    if not S <= set(range(1, n + 1)):
        raise ValueError(f"S={set(S)} is not a subset of 1..{n}")
    return S


def comma_poset(n: int, S: Iterable[int], poset: PosetView | None = None) -> PosetView:
    """The full subposet of trees ``T`` with ``F(T) <= S``."""
    S = _check_S(n, S)
    P = poset if poset is not None else enumerate_psi(n + 1, planar=True)
    keep = [k for k, T in enumerate(P.objects) if functor_F(T) <= S]
    pos = {k: i for i, k in enumerate(keep)}
    rel = frozenset((pos[a], pos[b]) for a, b in P.relation if a in pos and b in pos)
    return PosetView(tuple(P.objects[k] for k in keep), rel)


def check_fiber_terminal(n: int, S: Iterable[int], poset: PosetView | None = None) -> FTree:
    """Terminal object of the fiber ``F^{-1}(S)``; raises :class:`CofinalityError` otherwise."""
    S = _check_S(n, S)
    P = poset if poset is not None else enumerate_psi(n + 1, planar=True)
    fiber = [k for k, T in enumerate(P.objects) if functor_F(T) == S]
    tops = [t for t in fiber if all((k, t) in P.relation for k in fiber)]
    if len(tops) != 1:
        raise CofinalityError(f"fiber over S={sorted(S)} has {len(tops)} terminal objects")
    return P.objects[tops[0]]


def beat_point_core(P: PosetView) -> PosetView:
    """Strip beat points until none remain.

    An element with exactly one upper cover (or exactly one lower cover) can
    be removed without changing the homotopy type of the order complex, so a
    one-point core certifies contractibility.
    """
    alive = set(range(len(P.objects)))
    up = defaultdict(set)
    for a, b in P.relation:
        if a != b:
            up[a].add(b)
    down = defaultdict(set)
    for a, bs in up.items():
        for b in bs:
            down[b].add(a)

    def covers(x, rel):
        near = rel[x] & alive
        return [y for y in near if not any(y in rel[z] for z in near)]

    changed = True
    while changed and len(alive) > 1:
        changed = False
        for x in sorted(alive):
            if len(covers(x, up)) == 1 or len(covers(x, down)) == 1:
                alive.discard(x)
                changed = True
    keep = sorted(alive)
    pos = {k: i for i, k in enumerate(keep)}
    rel = frozenset((pos[a], pos[b]) for a, b in P.relation if a in pos and b in pos)
    return PosetView(tuple(P.objects[k] for k in keep), rel)


# --- simplicial complexes ------------------------------------------------


@dataclass(frozen=True)
class SimplicialComplex:
    """Abstract simplicial complex given by its facets."""

    vertex_count: int
    facets: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        facets = tuple(sorted(tuple(sorted(set(f))) for f in self.facets))
        object.__setattr__(self, "facets", facets)
        for f in facets:
            if not f:
                raise ValueError("empty facet")
            if f[0] < 0 or f[-1] >= self.vertex_count:
                raise ValueError(f"facet {f} uses a vertex outside 0..{self.vertex_count - 1}")
        if len(set(facets)) != len(facets):
            raise ValueError("repeated facet")
        sets = [frozenset(f) for f in facets]
        for x in sets:
            for y in sets:
                if len(x) < len(y) and x <= y:
                    raise ValueError(f"facet {sorted(x)} is contained in {sorted(y)}")

    @property
    def dimension(self) -> int:
        return max((len(f) - 1 for f in self.facets), default=-1)

    def faces(self, dim: int) -> list[tuple[int, ...]]:
        """All ``dim``-simplices, sorted."""
        out = set()
        for f in self.facets:
            if len(f) > dim:
                out.update(combinations(f, dim + 1))
        return sorted(out)

    def f_vector(self) -> tuple[int, ...]:
        return tuple(len(self.faces(d)) for d in range(self.dimension + 1))

    def euler_characteristic(self) -> int:
        return sum((-1) ** d * c for d, c in enumerate(self.f_vector()))

    def to_json(self) -> dict:
        return {"vertices": self.vertex_count, "facets": [list(f) for f in self.facets]}

    @classmethod
    def from_json(cls, obj: dict) -> "SimplicialComplex":
        return cls(int(obj["vertices"]), tuple(tuple(f) for f in obj["facets"]))


def build_Y(n: int, d: int) -> SimplicialComplex:
    """The complex whose simplices are order-preserving maps from subsets of ``[n]`` to ``[d]``.

    Vertex ``(i, j)`` (meaning ``i -> j``) has id ``i * (d + 1) + j``.
    """
    if n < 0 or d < 0:
        raise ValueError("n and d must be nonnegative")
    if d > n:
        raise ValueError(f"d={d} > n={n} is not supported")
    facets = tuple(
        tuple(i * (d + 1) + j for i, j in enumerate(f.values))
        for f in order_preserving_maps(n + 1, d + 1)
    )
    return SimplicialComplex((n + 1) * (d + 1), facets)


def order_complex(P: PosetView) -> SimplicialComplex:
    """Nerve of the poset: simplices are chains, facets are maximal chains."""
    n = len(P.objects)
    up = defaultdict(set)
    for a, b in P.relation:
        if a != b:
            up[a].add(b)
    covers = {a: sorted(b for b in up[a] if not any(c in up[a] and b in up[c] for c in up[a])) for a in range(n)}
    has_lower = {b for a, b in P.relation if a != b}
    facets = []

    def walk(chain_: list[int]):
        nxt = covers[chain_[-1]]
        if not nxt:
            facets.append(tuple(chain_))
            return
        for b in nxt:
            walk(chain_ + [b])

    for a in range(n):
        if a not in has_lower:
            walk([a])
    return SimplicialComplex(n, tuple(facets))


def associahedron_f_vector(n: int) -> tuple[int, ...]:
    """Face counts by dimension of the associahedron built from half-planar trees with ``n + 2`` leaves."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    P = enumerate_psi(n + 2, planar=True, with_relation=False)
    counts = [0] * (n + 1)
    for T in P.objects:
        counts[T.dimension()] += 1
    return tuple(counts)
