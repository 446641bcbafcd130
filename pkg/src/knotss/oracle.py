"""Brute-force reference computations.

Nothing here reuses the main code path: the relation oracle works in its own
presentation (square-free monomials in the generators ``a_ij`` (i < j) and
``b_i``, with the Arnold relations multiplied out in full), and the linear
algebra is plain Gaussian elimination over ``Fraction`` or ``Z/l``.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from itertools import combinations, permutations
from typing import Mapping, Sequence

__all__ = [
    "poincare_dimension",
    "relation_span_dimension",
    "in_relation_span",
    "dense_rank",
    "naive_homology",
    "complex_homology",
    "OracleCapExceeded",
    "CompositionError",
]

MAX_P = 5
MAX_M = 6


class OracleCapExceeded(RuntimeError):
    pass


class CompositionError(AssertionError):
    """Consecutive maps in a chain do not compose to zero."""


def poincare_dimension(p: int, m: int) -> int:
    """Coefficient of ``t**m`` in ``prod_{i=1}^{p-1} (1 + i t) * (1 + t)**p``."""
    if p < 0 or m < 0:
        return 0
    coeffs = [1]
    factors = [[1, i] for i in range(1, p)] + [[1, 1]] * p
    for f in factors:
        nxt = [0] * (len(coeffs) + 1)
        for k, c in enumerate(coeffs):
            nxt[k] += c * f[0]
            nxt[k + 1] += c * f[1]
        coeffs = nxt
    return coeffs[m] if m < len(coeffs) else 0


# --- relation span --------------------------------------------------------


@lru_cache(maxsize=None)
def _generators(p: int) -> dict:
    gens = [("a", i, j) for i in range(1, p + 1) for j in range(i + 1, p + 1)]
    gens += [("b", i, i) for i in range(1, p + 1)]
    return {g: k for k, g in enumerate(gens)}


def _word_to_monomial(word, p: int, odd: bool) -> tuple[tuple[int, ...], int]:
    """Map an edge word to (sorted generator indices, sign); sign 0 if it vanishes."""
    index = _generators(p)
    sign = 1
    idx = []
    for i, j in word:
        if i == j:
            idx.append(index[("b", i, i)])
        elif i < j:
            idx.append(index[("a", i, j)])
        else:
            idx.append(index[("a", j, i)])
            if not odd:
                sign = -sign
    if len(set(idx)) < len(idx):
        return (), 0
    if odd:
        # bubble count = number of inversions
        inv = sum(1 for x in range(len(idx)) for y in range(x + 1, len(idx)) if idx[x] > idx[y])
        if inv % 2:
            sign = -sign
    return tuple(sorted(idx)), sign


def _arnold_words(i: int, j: int, k: int):
    return [((i, j), (j, k)), ((j, k), (k, i)), ((k, i), (i, j))]


class _Echelon:
    """Reduced row echelon form over Q, built one row at a time."""

    def __init__(self):
        self.pivots: dict[int, dict[int, Fraction]] = {}

    def reduce(self, row: dict[int, Fraction]) -> dict[int, Fraction]:
        row = {k: Fraction(v) for k, v in row.items() if v}
        changed = True
        while changed:
            changed = False
            for c in sorted(row):
                if c in self.pivots:
                    f = row[c]
                    for k, v in self.pivots[c].items():
                        nv = row.get(k, 0) - f * v
                        if nv:
                            row[k] = nv
                        else:
                            row.pop(k, None)
                    changed = True
                    break
        return row

    def add(self, row) -> bool:
        row = self.reduce(row)
        if not row:
            return False
        c = min(row)
        lead = row[c]
        row = {k: v / lead for k, v in row.items()}
        for other in self.pivots.values():
            if c in other:
                f = other[c]
                for k, v in row.items():
                    nv = other.get(k, 0) - f * v
                    if nv:
                        other[k] = nv
                    else:
                        other.pop(k, None)
        self.pivots[c] = row
        return True

    @property
    def rank(self) -> int:
        return len(self.pivots)


def _check_cap(p: int, m: int) -> None:
    if p > MAX_P or m > MAX_M:
        raise OracleCapExceeded(f"relation oracle limited to p <= {MAX_P}, m <= {MAX_M}")


@lru_cache(maxsize=None)
def _relation_echelon(p: int, m: int, odd: bool) -> tuple[_Echelon, dict]:
    _check_cap(p, m)
    gens = _generators(p)
    cols = {mono: k for k, mono in enumerate(combinations(range(len(gens)), m))}
    ech = _Echelon()
    inverse = {v: g for g, v in gens.items()}
    if m >= 2:
        for tri in combinations(range(1, p + 1), 3):
            for i, j, k in permutations(tri):
                for rest in combinations(range(len(gens)), m - 2):
                    tail = [inverse[g][1:] for g in rest]
                    row: dict[int, int] = {}
                    for w in _arnold_words(i, j, k):
                        mono, s = _word_to_monomial(list(w) + tail, p, odd)
                        if s:
                            row[cols[mono]] = row.get(cols[mono], 0) + s
                    ech.add(row)
    return ech, cols


def relation_span_dimension(p: int, m: int, parity) -> int:
    """Dimension in bidegree ``(p, m)`` of square-free monomials modulo the Arnold span."""
    odd = _is_odd(parity)
    ech, cols = _relation_echelon(p, m, odd)
    return len(cols) - ech.rank


def in_relation_span(p: int, m: int, parity, combo: Sequence[tuple[Sequence[tuple[int, int]], int]]) -> bool:
    """True when ``sum(coeff * word)`` lies in the relation ideal."""
    odd = _is_odd(parity)
    ech, cols = _relation_echelon(p, m, odd)
    row: dict[int, int] = {}
    for word, c in combo:
        if len(word) != m:
            raise ValueError("word has the wrong number of edges")
        mono, s = _word_to_monomial(list(word), p, odd)
        if s:
            row[cols[mono]] = row.get(cols[mono], 0) + s * c
    return not ech.reduce(row)


def _is_odd(parity) -> bool:
    if isinstance(parity, str):
        return parity.lower() == "odd"
    return bool(int(parity) % 2)


# --- dense linear algebra ---------------------------------------------------


def dense_rank(matrix: Sequence[Sequence[int]], ell: int | None = None) -> int:
    """Rank over Q (``ell=None``) or over ``Z/ell``."""
    rows = [list(r) for r in matrix if any(r)]
    if not rows:
        return 0
    if ell is None:
        A = [[Fraction(x) for x in r] for r in rows]
    else:
        A = [[x % ell for x in r] for r in rows]
    nr, nc = len(A), len(A[0])
    rank = 0
    for c in range(nc):
        piv = next((r for r in range(rank, nr) if A[r][c]), None)
        if piv is None:
            continue
        A[rank], A[piv] = A[piv], A[rank]
        pr = A[rank]
        inv = (1 / pr[c]) if ell is None else pow(pr[c], -1, ell)
        for r in range(rank + 1, nr):
            if A[r][c]:
                f = A[r][c] * inv
                row = A[r]
                for k in range(c, nc):
                    if pr[k]:
                        row[k] = row[k] - f * pr[k] if ell is None else (row[k] - f * pr[k]) % ell
        rank += 1
        if rank == nr:
            break
    return rank


def _dense_product_is_zero(A, B) -> bool:
    for row in A:
        for c in range(len(B[0]) if B else 0):
            if sum(row[k] * B[k][c] for k in range(len(B))):
                return False
    return True


def naive_homology(dims: Sequence[int], maps: Mapping[int, Sequence[Sequence[int]]], ell: int | None = None) -> list[int]:
    """Homology dimensions of ``... -> C_k -> C_{k-1} -> ...``.

    ``dims[k]`` is ``dim C_k`` and ``maps[k]`` is the dense ``dims[k-1] x dims[k]``
    matrix of ``C_k -> C_{k-1}``; missing maps are zero.
    """
    for k, M in maps.items():
        if len(M) != dims[k - 1] or any(len(r) != dims[k] for r in M):
            raise ValueError(f"map {k} has the wrong shape")
        nxt = maps.get(k + 1)
        if nxt is not None and dims[k] and not _dense_product_is_zero(M, nxt):
            raise CompositionError(f"d{k} o d{k + 1} != 0: the differential is wrongly built")
    ranks = {k: dense_rank(M, ell) for k, M in maps.items()}
    return [dims[k] - ranks.get(k, 0) - ranks.get(k + 1, 0) for k in range(len(dims))]


def _dense_smith_divisors(matrix: list[list[int]]) -> list[int]:
    A = [r[:] for r in matrix]
    nr = len(A)
    nc = len(A[0]) if nr else 0
    out = []
    t = 0
    while t < min(nr, nc):
        entries = [(abs(A[i][j]), i, j) for i in range(t, nr) for j in range(t, nc) if A[i][j]]
        if not entries:
            break
        _, i, j = min(entries)
        A[t], A[i] = A[i], A[t]
        for r in A:
            r[t], r[j] = r[j], r[t]
        done = False
        while not done:
            done = True
            for i in range(t + 1, nr):
                q = A[i][t] // A[t][t]
                for k in range(t, nc):
                    A[i][k] -= q * A[t][k]
            for j in range(t + 1, nc):
                q = A[t][j] // A[t][t]
                for r in A:
                    r[j] -= q * r[t]
            rest = [(abs(A[i][t]), i, t) for i in range(t + 1, nr) if A[i][t]]
            rest += [(abs(A[t][j]), t, j) for j in range(t + 1, nc) if A[t][j]]
            if rest:
                done = False
                _, i, j = min(rest)
                A[t], A[i] = A[i], A[t]
                for r in A:
                    r[t], r[j] = r[j], r[t]
            else:
                # enforce divisibility against the trailing block
                bad = next(((i, j) for i in range(t + 1, nr) for j in range(t + 1, nc) if A[i][j] % A[t][t]), None)
                if bad is not None:
                    done = False
                    i, _ = bad
                    for k in range(t, nc):
                        A[t][k] += A[i][k]
        out.append(abs(A[t][t]))
        t += 1
    return out


def complex_homology(K) -> dict:
    """Reduced integral homology of a simplicial complex: ranks and torsion per degree."""
    top = K.dimension
    faces = [K.faces(d) for d in range(top + 1)]
    index = [{f: i for i, f in enumerate(fs)} for fs in faces]
    boundary: dict[int, list[list[int]]] = {}
    # augmentation C_0 -> Z makes the homology reduced
    boundary[0] = [[1] * len(faces[0])]
    for d in range(1, top + 1):
        M = [[0] * len(faces[d]) for _ in faces[d - 1]]
        for c, f in enumerate(faces[d]):
            for k in range(len(f)):
                M[index[d - 1][f[:k] + f[k + 1:]]][c] = (-1) ** k
        boundary[d] = M
    ranks = {d: dense_rank(M) for d, M in boundary.items()}
    betti = [len(faces[d]) - ranks[d] - ranks.get(d + 1, 0) for d in range(top + 1)]
    torsion = {}
    for d in range(top + 1):
        nxt = boundary.get(d + 1)
        if nxt:
            tors = [x for x in _dense_smith_divisors(nxt) if x > 1]
            if tors:
                torsion[d] = tors
    return {"betti": betti, "torsion": torsion}
