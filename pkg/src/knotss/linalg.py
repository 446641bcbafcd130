"""Exact sparse linear algebra over Q, Z and prime fields.

Everything here works on Python integers; there is no floating point.
Pivoting is Markowitz-flavoured: the column with the fewest nonzeros is
eliminated first, using the shortest row in it (unit entries preferred),
with ties broken by lowest row and then lowest column index.
"""

from __future__ import annotations

import heapq
from collections import defaultdict
from dataclasses import dataclass, field
from math import gcd
from typing import Iterable, Mapping, Sequence

from knotss.config import CapExceeded, limits

__all__ = [
    "SparseIntMatrix",
    "SmithForm",
    "rank_over_rationals",
    "rank_mod_prime",
    "smith_normal_form",
    "is_prime",
]


@dataclass(frozen=True)
class SparseIntMatrix:
    """Integer matrix in coordinate form with sorted ``(row, col, value)`` entries."""

    rows: int
    cols: int
    entries: tuple[tuple[int, int, int], ...] = ()

    def __post_init__(self):
        if self.rows < 0 or self.cols < 0:
            raise ValueError("matrix shape must be nonnegative")
        prev = None
        for r, c, v in self.entries:
            if not (0 <= r < self.rows and 0 <= c < self.cols):
                raise ValueError(f"entry ({r}, {c}) outside {self.rows}x{self.cols}")
            if v == 0:
                raise ValueError("explicit zero entry")
            if prev is not None and (r, c) <= prev:
                if (r, c) == prev:
                    raise ValueError(f"duplicate entry ({r}, {c})")
                raise ValueError("entries must be sorted by (row, col)")
            prev = (r, c)

    @classmethod
    def from_dict(cls, rows: int, cols: int, data: Mapping[tuple[int, int], int]) -> "SparseIntMatrix":
        entries = tuple(sorted((r, c, int(v)) for (r, c), v in data.items() if v))
        return cls(rows, cols, entries)

    @classmethod
    def from_columns(cls, rows: int, columns: Sequence[Mapping[int, int]]) -> "SparseIntMatrix":
        data = {}
        for c, col in enumerate(columns):
            for r, v in col.items():
                if v:
                    data[(r, c)] = v
        return cls.from_dict(rows, len(columns), data)

    @classmethod
    def from_dense(cls, dense: Sequence[Sequence[int]], cols: int | None = None) -> "SparseIntMatrix":
        nrows = len(dense)
        ncols = len(dense[0]) if nrows else (cols or 0)
        data = {(r, c): v for r, row in enumerate(dense) for c, v in enumerate(row) if v}
        return cls.from_dict(nrows, ncols, data)

    @classmethod
    def identity(cls, n: int) -> "SparseIntMatrix":
        return cls(n, n, tuple((i, i, 1) for i in range(n)))

    @property
    def shape(self) -> tuple[int, int]:
        return (self.rows, self.cols)

    @property
    def nnz(self) -> int:
        return len(self.entries)

    def to_dict(self) -> dict[tuple[int, int], int]:
        return {(r, c): v for r, c, v in self.entries}

    def to_dense(self) -> list[list[int]]:
        out = [[0] * self.cols for _ in range(self.rows)]
        for r, c, v in self.entries:
            out[r][c] = v
        return out

    def row_dicts(self) -> list[dict[int, int]]:
        out: list[dict[int, int]] = [{} for _ in range(self.rows)]
        for r, c, v in self.entries:
            out[r][c] = v
        return out

    def transpose(self) -> "SparseIntMatrix":
        return SparseIntMatrix.from_dict(self.cols, self.rows, {(c, r): v for r, c, v in self.entries})

    def permuted(self, row_perm: Sequence[int], col_perm: Sequence[int]) -> "SparseIntMatrix":
        """Entry ``(r, c)`` moves to ``(row_perm[r], col_perm[c])``."""
        if sorted(row_perm) != list(range(self.rows)) or sorted(col_perm) != list(range(self.cols)):
            raise ValueError("not a permutation")
        return SparseIntMatrix.from_dict(
            self.rows, self.cols, {(row_perm[r], col_perm[c]): v for r, c, v in self.entries}
        )

    def __matmul__(self, other: "SparseIntMatrix") -> "SparseIntMatrix":
        if self.cols != other.rows:
            raise ValueError(f"shape mismatch {self.shape} @ {other.shape}")
        right = other.row_dicts()
        acc: dict[tuple[int, int], int] = defaultdict(int)
        for r, k, v in self.entries:
            for c, w in right[k].items():
                acc[(r, c)] += v * w
        return SparseIntMatrix.from_dict(self.rows, other.cols, acc)

    def is_zero(self) -> bool:
        return not self.entries

    def to_coordinate_text(self) -> str:
        """``rows cols nnz`` header, then one ``r c v`` line per entry (1-indexed)."""
        lines = [f"{self.rows} {self.cols} {self.nnz}"]
        lines.extend(f"{r + 1} {c + 1} {v}" for r, c, v in self.entries)
        return "\n".join(lines) + "\n"

    @classmethod
    def from_coordinate_text(cls, text: str) -> "SparseIntMatrix":
        lines = [ln.split() for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("%")]
        if not lines:
            raise ValueError("empty matrix text")
        try:
            rows, cols, nnz = (int(x) for x in lines[0])
        except ValueError:
            raise ValueError(f"bad header line: {' '.join(lines[0])!r}") from None
        body = lines[1:]
        if len(body) != nnz:
            raise ValueError(f"header announces {nnz} entries, found {len(body)}")
        data = {}
        for parts in body:
            r, c, v = int(parts[0]) - 1, int(parts[1]) - 1, int(parts[2])
            if (r, c) in data:
                raise ValueError(f"duplicate entry ({r + 1}, {c + 1})")
            data[(r, c)] = v
        return cls.from_dict(rows, cols, data)


@dataclass(frozen=True)
class SmithForm:
    divisors: tuple[int, ...] = field(default_factory=tuple)

    def __post_init__(self):
        for d in self.divisors:
            if d <= 0:
                raise ValueError("elementary divisors must be positive")
        for a, b in zip(self.divisors, self.divisors[1:]):
            if b % a:
                raise ValueError(f"divisibility chain broken: {a} does not divide {b}")

    @property
    def rank(self) -> int:
        return len(self.divisors)

    @property
    def torsion(self) -> tuple[int, ...]:
        return tuple(d for d in self.divisors if d > 1)


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    k = 3
    while k * k <= n:
        if n % k == 0:
            return False
        k += 2
    return True


class _Eliminator:
    """Sparse right-looking elimination on row dictionaries.

    ``mode`` is ``"Q"`` (fraction-free over the integers, rows kept
    primitive), ``"mod"`` (arithmetic mod ``modulus``) or ``"unit"``
    (integer elimination restricted to +-1 pivots, which is unimodular
    and therefore preserves elementary divisors).
    """

    def __init__(self, rows: Iterable[Mapping[int, int]], mode: str, modulus: int | None = None):
        self.mode = mode
        self.modulus = modulus
        self.rows: dict[int, dict[int, int]] = {}
        for i, row in enumerate(rows):
            if mode == "mod":
                row = {c: v % modulus for c, v in row.items() if v % modulus}
            else:
                row = {c: v for c, v in row.items() if v}
            if row:
                self.rows[i] = row
        self.col_rows: dict[int, set[int]] = defaultdict(set)
        for i, row in self.rows.items():
            for c in row:
                self.col_rows[c].add(i)
        self.rank = 0

    def _pick_row(self, col: int) -> int | None:
        best = None
        for r in self.col_rows[col]:
            v = self.rows[r][col]
            unit = v in (1, -1)
            if self.mode == "unit" and not unit:
                continue
            key = (not unit, len(self.rows[r]), r)
            if best is None or key < best:
                best = key
        return None if best is None else best[2]

    def _reduce(self, target: int, prow: dict[int, int], col: int, touched: set[int]) -> None:
        row = self.rows[target]
        a = prow[col]
        b = row[col]
        if self.mode == "mod":
            m = self.modulus
            f = b * pow(a, -1, m) % m
            for k, w in prow.items():
                nv = (row.get(k, 0) - f * w) % m
                self._set(target, row, k, nv, touched)
        elif a in (1, -1):
            f = b * a
            for k, w in prow.items():
                self._set(target, row, k, row.get(k, 0) - f * w, touched)
        else:
            # fraction-free: row <- a*row - b*prow, then strip content
            for k in row:
                row[k] *= a
            for k, w in prow.items():
                self._set(target, row, k, row.get(k, 0) - b * w, touched)
            if row:
                g = 0
                for v in row.values():
                    g = gcd(g, v)
                    if g == 1:
                        break
                if g > 1:
                    for k in row:
                        row[k] //= g
        if not row:
            del self.rows[target]

    def _set(self, r: int, row: dict[int, int], k: int, nv: int, touched: set[int]) -> None:
        if nv:
            if k not in row:
                self.col_rows[k].add(r)
                touched.add(k)
            row[k] = nv
        elif k in row:
            del row[k]
            self.col_rows[k].discard(r)
            touched.add(k)

    def run(self) -> None:
        heap = [(len(s), c) for c, s in self.col_rows.items() if s]
        heapq.heapify(heap)
        deferred: list[int] = []
        progressed = False
        while True:
            while heap:
                cnt, c = heapq.heappop(heap)
                s = self.col_rows.get(c)
                if not s:
                    continue
                if len(s) != cnt:
                    heapq.heappush(heap, (len(s), c))
                    continue
                r = self._pick_row(c)
                if r is None:
                    deferred.append(c)
                    continue
                self._pivot(r, c, heap)
                progressed = True
            if not deferred or not progressed:
                break
            heap = [(len(self.col_rows[c]), c) for c in set(deferred) if self.col_rows.get(c)]
            heapq.heapify(heap)
            deferred = []
            progressed = False

    def _pivot(self, r: int, c: int, heap: list) -> None:
        prow = self.rows.pop(r)
        touched: set[int] = set()
        for k in prow:
            self.col_rows[k].discard(r)
            touched.add(k)
        for other in sorted(self.col_rows[c]):
            self._reduce(other, prow, c, touched)
        self.col_rows.pop(c, None)
        touched.discard(c)
        for k in touched:
            s = self.col_rows.get(k)
            if s:
                heapq.heappush(heap, (len(s), k))
        self.rank += 1


def _rows_of(M: SparseIntMatrix) -> list[dict[int, int]]:
    return M.row_dicts()


def rank_over_rationals(M: SparseIntMatrix) -> int:
    """Exact rank over Q."""
    if M.nnz == 0:
        return 0
    el = _Eliminator(_rows_of(M), "Q")
    el.run()
    return el.rank


def rank_mod_prime(M: SparseIntMatrix, ell: int) -> int:
    """Rank of ``M`` reduced modulo the prime ``ell``."""
    if not is_prime(ell):
        raise ValueError(f"{ell} is not prime")
    if M.nnz == 0:
        return 0
    el = _Eliminator(_rows_of(M), "mod", ell)
    el.run()
    return el.rank


def _dense_diagonal(A: list[list[int]]) -> list[int]:
    """Diagonalize a dense integer matrix by unimodular moves; returns the nonzero diagonal."""
    A = [row[:] for row in A]
    nr = len(A)
    nc = len(A[0]) if nr else 0
    diag = []
    t = 0
    while t < min(nr, nc):
        # smallest nonzero |entry| in the trailing block
        best = None
        for i in range(t, nr):
            row = A[i]
            for j in range(t, nc):
                v = row[j]
                if v and (best is None or abs(v) < best[0]):
                    best = (abs(v), i, j)
                    if best[0] == 1:
                        break
            if best is not None and best[0] == 1:
                break
        if best is None:
            break
        _, i, j = best
        A[t], A[i] = A[i], A[t]
        if j != t:
            for row in A:
                row[t], row[j] = row[j], row[t]
        while True:
            p = A[t][t]
            dirty = False
            for i in range(t + 1, nr):
                v = A[i][t]
                if v:
                    q = v // p
                    if q:
                        ri, rt = A[i], A[t]
                        for k in range(t, nc):
                            if rt[k]:
                                ri[k] -= q * rt[k]
                    if A[i][t]:
                        dirty = True
            rt = A[t]
            for j in range(t + 1, nc):
                v = rt[j]
                if v:
                    q = v // p
                    if q:
                        for row in A[t:]:
                            if row[t]:
                                row[j] -= q * row[t]
                    if rt[j]:
                        dirty = True
            if not dirty:
                break
            # a remainder survived: move the smallest entry of row/column t to the pivot
            cands = [(abs(A[i][t]), i, t) for i in range(t, nr) if A[i][t]]
            cands += [(abs(A[t][j]), t, j) for j in range(t, nc) if A[t][j]]
            _, i, j = min(cands)
            if i != t:
                A[t], A[i] = A[i], A[t]
            if j != t:
                for row in A:
                    row[t], row[j] = row[j], row[t]
        diag.append(abs(A[t][t]))
        t += 1
    return diag


def _invariant_factors(diag: list[int]) -> tuple[int, ...]:
    d = sorted(x for x in diag if x)
    n = len(d)
    for i in range(n):
        for j in range(i + 1, n):
            a, b = d[i], d[j]
            g = gcd(a, b)
            if g != a:
                d[i], d[j] = g, a // g * b
    return tuple(sorted(d))


def smith_normal_form(M: SparseIntMatrix, max_core_cols: int | None = None) -> SmithForm:
    """Elementary divisors of ``M``.

    Unit pivots are eliminated sparsely first; the remaining core is
    diagonalized densely. Raises :class:`CapExceeded` when that core is
    wider than ``max_core_cols`` (default from :func:`knotss.config.limits`).
    """
    if M.nnz == 0:
        return SmithForm(())
    el = _Eliminator(_rows_of(M), "unit")
    el.run()
    units = el.rank
    core_rows = [row for row in el.rows.values() if row]
    cols = sorted({c for row in core_rows for c in row})
    cap = limits().snf_max_cols if max_core_cols is None else max_core_cols
    if len(cols) > cap:
        raise CapExceeded(f"Smith form core has {len(cols)} columns (cap {cap})")
    index = {c: j for j, c in enumerate(cols)}
    dense = []
    for row in core_rows:
        line = [0] * len(cols)
        for c, v in row.items():
            line[index[c]] = v
        dense.append(line)
    core = _invariant_factors(_dense_diagonal(dense)) if dense else ()
    return SmithForm((1,) * units + core)
