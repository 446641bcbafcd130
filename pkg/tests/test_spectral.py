import json
import random

import pytest

from knotss.graphs import Parity, basis_keys
from knotss.linalg import rank_mod_prime, rank_over_rationals, smith_normal_form
from knotss.oracle import naive_homology
from knotss.spectral import (
    Coefficients,
    build_d1,
    build_e1,
    check_d1_squared,
    compute_e2,
    m_range,
    read_report_csv,
    unnormalized_cokernel_dimension,
    vanishing_cohomology_euclidean,
    vanishing_cohomology_general,
    vanishing_homotopy,
)


def test_e1_examples(schema):
    page = build_e1(3, "odd")
    assert page.cells[(1, 1)] == (((1, 1),),)
    assert [page.dim(1, m) for m in range(0, 4)] == [0, 1, 0, 0]
    assert [page.dim(2, m) for m in (1, 2, 3)] == [1, 3, 1]
    assert page.dimensions() == build_e1(3, "even").dimensions()
    schema("e1page", page.to_json())
    with pytest.raises(ValueError):
        build_e1(0, "odd")


def test_e1_shape():
    for p in range(1, 8):
        for m in range(0, 2 * p + 2):
            nonempty = len(basis_keys(p, m, normalized=True)) > 0
            assert nonempty == (m in m_range(p))


def test_d1_examples():
    d = build_d1(2, 1, "odd")
    assert d.source == (2, 1) and d.target == (1, 1)
    assert d.matrix.to_dense() == [[-1]]
    assert build_d1(1, 1, "odd").matrix.shape == (0, 1)
    assert build_d1(3, 2, "even").matrix.shape == (3, 5)


def test_d1_squared_zero_and_injected_error():
    for par in Parity:
        assert check_d1_squared(6, par) == []
        assert check_d1_squared(5, par, sign_flip=2) != []


def test_coefficients_parse():
    assert str(Coefficients.parse("q")) == "Q"
    assert Coefficients.parse("F:7").prime == 7
    assert Coefficients.parse(5) == Coefficients("F", 5)
    for bad in ("F:9", "R", "F:x"):
        with pytest.raises(ValueError):
            Coefficients.parse(bad)


def test_e2_cell_one_one_matches_oracle():
    rep = compute_e2(3, "odd", "Q")
    d = build_d1(2, 1, "odd").matrix.to_dense()
    dims = [0, 1, 1]
    assert rep.rank(1, 1) == naive_homology(dims, {2: d})[1] == 0


@pytest.mark.parametrize("parity", list(Parity))
def test_e2_matches_naive_homology(parity):
    for coeff in ("Q", "F:2", "F:3", "F:5"):
        c = Coefficients.parse(coeff)
        rep = compute_e2(5, parity, coeff)
        for m in range(1, 10):
            ps = [p for p in range(1, 6) if m in m_range(p)]
            dims = [len(basis_keys(p, m, normalized=True)) if p in ps else 0 for p in range(6)]
            maps = {p: build_d1(p, m, parity).matrix.to_dense() for p in ps if p - 1 in ps}
            hom = naive_homology(dims, maps, c.prime)
            assert [rep.rank(p, m) for p in ps] == [hom[p] for p in ps]


def test_e2_report_invariants(schema):
    for par in Parity:
        q = compute_e2(5, par, "Q")
        assert q.euler_ok
        assert q.vanishing == {"lower": True, "upper": True}
        assert all(c.rank_e2 <= c.dim_e1 for c in q.cells)
        for coeff in ("F:2", "F:3", "F:5"):
            f = compute_e2(5, par, coeff)
            assert f.euler_ok
            assert all(f.rank(c.p, c.m) >= c.rank_e2 for c in q.cells)
        schema("e2report", q.to_json())
        schema("e2report", compute_e2(3, par, "Z").to_json())


def test_top_column_marked_incomplete():
    rep = compute_e2(3, "odd", "Q")
    flags = {(c.p, c.m): c.complete for c in rep.cells}
    assert flags[(2, 2)] and not flags[(3, 2)]


@pytest.mark.parametrize("parity", list(Parity))
def test_universal_coefficients(parity):
    # over F_l the E2 rank picks up the l-divisible torsion of this cell and of the cell below
    z = compute_e2(6, parity, "Z")
    q = compute_e2(6, parity, "Q")
    tors = {(c.p, c.m): c.divisors for c in z.cells}
    for ell in (2, 3, 5):
        f = compute_e2(6, parity, f"F:{ell}")
        for c in q.cells:
            extra = sum(1 for d in tors[(c.p, c.m)] if d % ell == 0)
            extra += sum(1 for d in tors.get((c.p - 1, c.m), ()) if d % ell == 0)
            assert f.rank(c.p, c.m) == c.rank_e2 + extra
            assert z.rank(c.p, c.m) == c.rank_e2


@pytest.mark.parametrize("parity", list(Parity))
def test_universal_coefficients_on_torsion_matrix(parity):
    M = build_d1(7, 4, parity).matrix
    snf = smith_normal_form(M)
    assert snf.torsion
    for ell in (2, 3, 5):
        assert rank_mod_prime(M, ell) == rank_over_rationals(M) - sum(1 for d in snf.divisors if d % ell == 0)


def test_known_torsion():
    odd = {(c.p, c.m): c.divisors for c in compute_e2(7, "odd", "Z").cells}
    even = {(c.p, c.m): c.divisors for c in compute_e2(7, "even", "Z").cells}
    assert odd[(6, 4)] == (10,) and even[(6, 4)] == (2,)


def test_ranks_invariant_under_basis_shuffle():
    rnd = random.Random(7)
    for par in Parity:
        for p in range(2, 6):
            for m in m_range(p):
                M = build_d1(p, m, par).matrix
                rp, cp = list(range(M.rows)), list(range(M.cols))
                rnd.shuffle(rp)
                rnd.shuffle(cp)
                P = M.permuted(rp, cp)
                assert rank_over_rationals(P) == rank_over_rationals(M)
                assert rank_mod_prime(P, 3) == rank_mod_prime(M, 3)


def test_parity_only():
    a = compute_e2(5, Parity.of(3), "Q").dumps()
    b = compute_e2(5, Parity.of(5), "Q").dumps()
    assert a == b
    with pytest.raises(ValueError):
        compute_e2(3, "odd").with_degrees(4)
    rows = compute_e2(3, "odd").with_degrees(3)
    assert all(r["q"] == 3 * r["m"] for r in rows)


def test_workers_deterministic():
    for coeff in ("Q", "Z"):
        serial = compute_e2(5, "odd", coeff)
        assert compute_e2(5, "odd", coeff, workers=2).dumps() == serial.dumps()


def test_csv_round_trip():
    rep = compute_e2(4, "even", "Z")
    rows = read_report_csv(rep.to_csv())
    assert len(rows) == len(rep.cells)
    for row, c in zip(rows, rep.cells):
        assert (row["p"], row["m"], row["dimE1"], row["rankE2"], bool(row["complete"])) == (
            c.p, c.m, c.dim_e1, c.rank_e2, c.complete
        )
        assert row["divisors"] == list(c.divisors)
    assert read_report_csv(compute_e2(3, "odd").to_csv())[0]["divisors"] is None


def test_json_is_stable():
    rep = compute_e2(4, "odd", "Q")
    assert json.loads(rep.dumps()) == rep.to_json()


def test_cokernel_cross_check():
    for par in Parity:
        for p in range(1, 5):
            for m in range(0, 2 * p + 1):
                assert unnormalized_cokernel_dimension(p, m, par) == len(basis_keys(p, m, normalized=True))


def test_vanishing_examples():
    assert vanishing_cohomology_euclidean(3, 2, 2)
    assert vanishing_cohomology_euclidean(3, 2, 10)
    assert not vanishing_cohomology_euclidean(3, 2, 3)
    assert vanishing_cohomology_euclidean(3, 2, 4)  # not a multiple of N
    assert vanishing_cohomology_general(4, 1, 2, 2)
    assert vanishing_cohomology_general(6, 1, 4, 7)
    assert not vanishing_cohomology_general(6, 1, 4, 8)
    assert not vanishing_cohomology_general(5, 3, 0, 0)
    assert vanishing_homotopy(4, 3, 4)
    assert vanishing_homotopy(4, 1, 0)
    assert not vanishing_homotopy(5, 2, 4)
    with pytest.raises(ValueError):
        vanishing_homotopy(3, 1, 0)
    with pytest.raises(ValueError):
        vanishing_cohomology_euclidean(1, 1, 1)


def test_vanishing_agrees_with_e1():
    for N in (2, 3, 4):
        for p in range(1, 7):
            for q in range(0, N * (2 * p + 1)):
                nonzero = q % N == 0 and len(basis_keys(p, q // N, normalized=True)) > 0
                if vanishing_cohomology_euclidean(N, p, q):
                    assert not nonzero
                else:
                    assert nonzero
