"""E1 and E2 pages of the cohomology spectral sequence for long knots in R^{N+1}.

Cells are indexed by ``(p, m)``: ``p`` points, ``m`` edges, cohomological
degree ``q = m * N``.  The E1 cell is spanned by admissible graphs on ``p``
vertices with every vertex covered, and ``d1 = sum_{l=1}^{p-1} (-1)**l c_l``
maps cell ``(p, m)`` to ``(p - 1, m)``.

The page is built up to ``max_p``; the column ``p = max_p`` has no incoming
differential, so its E2 entries are marked incomplete unless the cell
``(max_p + 1, m)`` is empty for degree reasons.
"""

from __future__ import annotations

import csv
import io
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache

from knotss.config import CapExceeded
from knotss.graphs import Key, Parity, basis_keys, codegeneracy_pullback, contract_key
from knotss.linalg import (
    SparseIntMatrix,
    is_prime,
    rank_mod_prime,
    rank_over_rationals,
    smith_normal_form,
)

__all__ = [
    "E1Page",
    "DifferentialMatrix",
    "E2Report",
    "Coefficients",
    "D1SquareError",
    "m_range",
    "build_e1",
    "build_d1",
    "check_d1_squared",
    "compute_e2",
    "unnormalized_cokernel_dimension",
    "vanishing_cohomology_euclidean",
    "vanishing_cohomology_general",
    "vanishing_homotopy",
    "read_report_csv",
]


class D1SquareError(ArithmeticError):
    """``d1 o d1`` is not zero."""


def m_range(p: int) -> range:
    """Edge counts that can carry a covered graph on ``p >= 1`` vertices."""
    return range((p + 1) // 2, 2 * p)


@dataclass(frozen=True)
class E1Page:
    parity: Parity
    max_p: int
    cells: dict[tuple[int, int], tuple[Key, ...]]

    def dim(self, p: int, m: int) -> int:
        return len(self.cells.get((p, m), ()))

    def dimensions(self) -> dict[tuple[int, int], int]:
        return {k: len(v) for k, v in sorted(self.cells.items())}

    def to_json(self) -> dict:
        return {
            "parity": str(self.parity),
            "maxP": self.max_p,
            "cells": [{"p": p, "m": m, "dimE1": d} for (p, m), d in self.dimensions().items()],
        }


def build_e1(max_p: int, parity) -> E1Page:
    if max_p < 1:
        raise ValueError("max_p must be at least 1")
    parity = Parity.coerce(parity)
    cells = {}
    for p in range(1, max_p + 1):
        for m in m_range(p):
            cells[(p, m)] = basis_keys(p, m, normalized=True)
    return E1Page(parity, max_p, cells)


@dataclass(frozen=True)
class DifferentialMatrix:
    source: tuple[int, int]
    target: tuple[int, int]
    matrix: SparseIntMatrix

    def __post_init__(self):
        if self.target != (self.source[0] - 1, self.source[1]):
            raise ValueError("d1 lowers p by one and keeps m")


def _cell_keys(p: int, m: int) -> tuple[Key, ...]:
    if p < 1 or m not in m_range(p):
        return ()
    return basis_keys(p, m, normalized=True)


def build_d1(p: int, m: int, parity, sign_flip: int | None = None) -> DifferentialMatrix:
    """Matrix of ``sum_l (-1)**l c_l`` from cell ``(p, m)`` to ``(p - 1, m)``.

    ``sign_flip`` negates the ``c_l`` term for that ``l``; it exists so the
    verification suite can demonstrate that a corrupted differential is caught.
    Matrices are cached per process.
    """
    return _build_d1(p, m, Parity.coerce(parity), sign_flip)


@lru_cache(maxsize=None)
def _build_d1(p: int, m: int, parity: Parity, sign_flip: int | None) -> DifferentialMatrix:
    src = _cell_keys(p, m)
    tgt = _cell_keys(p - 1, m)
    index = {k: r for r, k in enumerate(tgt)}
    data: dict[tuple[int, int], int] = {}
    for c, key in enumerate(src):
        for ell in range(1, p):
            sign = -1 if ell % 2 else 1
            if ell == sign_flip:
                sign = -sign
            for k2, v in contract_key(key, ell, parity).items():
                try:
                    r = index[k2]
                except KeyError:
                    raise ValueError(f"contraction left the normalized cell ({p - 1}, {m})") from None
                data[(r, c)] = data.get((r, c), 0) + sign * v
    return DifferentialMatrix((p, m), (p - 1, m), SparseIntMatrix.from_dict(len(tgt), len(src), data))


def check_d1_squared(max_p: int, parity, sign_flip: int | None = None) -> list[tuple[int, int]]:
    """Bidegrees ``(p, m)`` where ``d1(p-1) o d1(p)`` fails to vanish."""
    bad = []
    for p in range(3, max_p + 1):
        for m in m_range(p):
            a = build_d1(p, m, parity, sign_flip).matrix
            b = build_d1(p - 1, m, parity, sign_flip).matrix
            if not (b @ a).is_zero():
                bad.append((p, m))
    return bad


# --- E2 -------------------------------------------------------------------


@dataclass(frozen=True)
class Coefficients:
    kind: str  # "Q", "Z" or "F"
    prime: int | None = None

    @classmethod
    def parse(cls, text) -> "Coefficients":
        if isinstance(text, Coefficients):
            return text
        if isinstance(text, int):
            text = f"F:{text}"
        t = str(text).strip()
        if t.upper() in ("Q", "Z"):
            return cls(t.upper())
        if t.upper().startswith("F:"):
            try:
                ell = int(t[2:])
            except ValueError:
                raise ValueError(f"bad field spec {text!r}") from None
            if not is_prime(ell):
                raise ValueError(f"{ell} is not prime")
            return cls("F", ell)
        raise ValueError(f"coefficients must be Q, Z or F:<prime>, got {text!r}")

    def __str__(self) -> str:
        return self.kind if self.kind != "F" else f"F:{self.prime}"


@dataclass(frozen=True)
class _RankResult:
    rank: int
    divisors: tuple[int, ...] | None  # torsion part, None when not computed


def _matrix_rank(p: int, m: int, parity: Parity, coeff: Coefficients) -> tuple[tuple[int, int], _RankResult]:
    M = build_d1(p, m, parity).matrix
    if coeff.kind == "Q":
        return (p, m), _RankResult(rank_over_rationals(M), None)
    if coeff.kind == "F":
        return (p, m), _RankResult(rank_mod_prime(M, coeff.prime), None)
    try:
        snf = smith_normal_form(M)
    except CapExceeded:
        return (p, m), _RankResult(rank_over_rationals(M), None)
    return (p, m), _RankResult(snf.rank, snf.torsion)


def _matrix_rank_star(args):
    return _matrix_rank(*args)


@dataclass(frozen=True)
class E2Cell:
    p: int
    m: int
    dim_e1: int
    rank_e2: int
    complete: bool
    divisors: tuple[int, ...] | None = None

    def to_json(self, integral: bool) -> dict:
        out = {"p": self.p, "m": self.m, "dimE1": self.dim_e1, "rankE2": self.rank_e2, "complete": self.complete}
        if integral:
            out["divisors"] = None if self.divisors is None else list(self.divisors)
        return out


@dataclass(frozen=True)
class E2Report:
    parity: Parity
    coeff: Coefficients
    max_p: int
    cells: tuple[E2Cell, ...]
    euler: tuple[tuple[int, int, int], ...] = field(default=())  # (m, chiE1, chiE2)

    def rank(self, p: int, m: int) -> int:
        for c in self.cells:
            if (c.p, c.m) == (p, m):
                return c.rank_e2
        return 0

    def table(self) -> dict[tuple[int, int], int]:
        return {(c.p, c.m): c.rank_e2 for c in self.cells}

    @property
    def vanishing(self) -> dict:
        nonzero = [(c.p, c.m) for c in self.cells if c.dim_e1]
        return {
            "lower": all(2 * m >= p for p, m in nonzero),
            "upper": all(m <= 2 * p - 1 for p, m in nonzero),
        }

    @property
    def euler_ok(self) -> bool:
        return all(a == b for _, a, b in self.euler)

    def to_json(self) -> dict:
        integral = self.coeff.kind == "Z"
        return {
            "parity": str(self.parity),
            "coeff": str(self.coeff),
            "maxP": self.max_p,
            "cells": [c.to_json(integral) for c in self.cells],
            "euler": [{"m": m, "chiE1": a, "chiE2": b} for m, a, b in self.euler],
            "vanishing": self.vanishing,
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["p", "m", "dimE1", "rankE2", "complete", "divisors"])
        for c in self.cells:
            div = "NA" if c.divisors is None else " ".join(map(str, c.divisors))
            w.writerow([c.p, c.m, c.dim_e1, c.rank_e2, int(c.complete), div])
        return buf.getvalue()

    def with_degrees(self, N: int) -> list[dict]:
        """Cells with the cohomological degree ``q = m * N`` filled in."""
        if N % 2 != int(self.parity):
            raise ValueError(f"N={N} does not have parity {self.parity}")
        return [{"p": c.p, "q": c.m * N, "m": c.m, "rankE2": c.rank_e2} for c in self.cells]


def read_report_csv(text: str) -> list[dict]:
    """Parse the CSV form of an :class:`E2Report` (or E1 table) back into rows."""
    rows = []
    for rec in csv.DictReader(io.StringIO(text)):
        row = {}
        for k, v in rec.items():
            if k == "divisors":
                row[k] = None if v == "NA" else [int(x) for x in v.split()]
            else:
                row[k] = int(v)
        rows.append(row)
    return rows


def compute_e2(max_p: int, parity, coeff="Q", workers: int = 1) -> E2Report:
    """E2 ranks of the normalized page, columns ``1..max_p``.

    Over ``Z`` the rank is the free rank and ``divisors`` lists the torsion
    orders of the cell (``None`` if the Smith form was skipped for size).
    """
    page = build_e1(max_p, parity)
    coeff = Coefficients.parse(coeff)
    jobs = [(p, m, page.parity, coeff) for (p, m) in sorted(page.cells) if p >= 2]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            results = dict(ex.map(_matrix_rank_star, jobs))
    else:
        results = dict(_matrix_rank(*j) for j in jobs)
    cells = []
    for (p, m) in sorted(page.cells, key=lambda k: (k[1], k[0])):
        out = results.get((p, m), _RankResult(0, ()))
        inc = results.get((p + 1, m), _RankResult(0, ()))
        complete = p < max_p or m not in m_range(p + 1)
        cells.append(
            E2Cell(
                p,
                m,
                page.dim(p, m),
                page.dim(p, m) - out.rank - inc.rank,
                complete,
                inc.divisors if coeff.kind == "Z" else None,
            )
        )
    euler = []
    for m in sorted({c.m for c in cells}):
        row = [c for c in cells if c.m == m]
        euler.append(
            (m, sum((-1) ** c.p * c.dim_e1 for c in row), sum((-1) ** c.p * c.rank_e2 for c in row))
        )
    cells.sort(key=lambda c: (c.p, c.m))
    return E2Report(page.parity, coeff, max_p, tuple(cells), tuple(euler))


def unnormalized_cokernel_dimension(p: int, m: int, parity) -> int:
    """``dim coker sum_i (s^i)^*`` computed in the full graph module."""
    from knotss.graphs import GraphVector

    parity = Parity.coerce(parity)
    full = basis_keys(p, m)
    index = {k: r for r, k in enumerate(full)}
    columns = []
    if p >= 1:
        for key in basis_keys(p - 1, m):
            v = GraphVector(p - 1, m, parity, ((key, 1),))
            for ell in range(1, p + 1):
                img = codegeneracy_pullback(ell, v)
                columns.append({index[k]: c for k, c in img.terms})
    M = SparseIntMatrix.from_columns(len(full), columns)
    return len(full) - rank_over_rationals(M)


# --- vanishing lines ------------------------------------------------------


def vanishing_cohomology_euclidean(N: int, p: int, q: int) -> bool:
    """Whether ``E1^{-p,q}`` for knots in ``I^{N+1}`` is forced to vanish."""
    if N < 2 or p < 0 or q < 0:
        raise ValueError("need N >= 2 and p, q >= 0")
    if 2 * q < N * p or q > N * (2 * p - 1):
        return True
    return q % N != 0


def vanishing_cohomology_general(m_dim: int, k_conn: int, p: int, q: int) -> bool:
    """Lower vanishing line ``q < min((m-1)/2 * p, (k+1) * p)`` for a general manifold."""
    if m_dim < 4:
        raise ValueError("manifold dimension must be at least 4")
    # compare 2q with min((m-1) p, 2 (k+1) p) to stay in integers
    return 2 * q < min((m_dim - 1) * p, 2 * (k_conn + 1) * p)


def vanishing_homotopy(m_dim: int, p: int, q: int) -> bool:
    """Homotopy spectral sequence: ``E1^{-p,q} = 0`` when ``q <= (p-1)(m-2)``."""
    if m_dim < 4:
        raise ValueError("manifold dimension must be at least 4")
    return q <= (p - 1) * (m_dim - 2)
