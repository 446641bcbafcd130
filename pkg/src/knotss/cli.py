"""Command-line front end.

Exit codes: 0 ok, 2 usage error, 3 resource cap hit, 4 a mathematical
invariant failed.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from itertools import combinations, product
from typing import Sequence

from knotss.config import CapExceeded
from knotss.graphs import Parity, basis_keys, basis_size, normalize_word
from knotss.spectral import (
    Coefficients,
    build_d1,
    build_e1,
    check_d1_squared,
    compute_e2,
    m_range,
    vanishing_cohomology_euclidean,
    vanishing_cohomology_general,
    vanishing_homotopy,
)

EXIT_OK, EXIT_USAGE, EXIT_CAP, EXIT_INVARIANT = 0, 2, 3, 4


class InvariantViolation(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _positive(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return v


def _coeff(text: str) -> Coefficients:
    try:
        return Coefficients.parse(text)
    except ValueError as e:
        raise argparse.ArgumentTypeError(str(e)) from None


# --- commands ---------------------------------------------------------------


def _emit(obj: dict, rows_csv: str | None, fmt: str, out) -> None:
    if fmt == "csv":
        out.write(rows_csv)
    else:
        out.write(json.dumps(obj, sort_keys=True, indent=1) + "\n")


def cmd_e1(args, out) -> int:
    page = build_e1(args.max_p, args.parity)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["p", "m", "dimE1"])
    for (p, m), d in page.dimensions().items():
        w.writerow([p, m, d])
    _emit(page.to_json(), buf.getvalue(), args.format, out)
    return EXIT_OK


def cmd_e2(args, out) -> int:
    bad = check_d1_squared(args.max_p, args.parity, args.inject_sign_error)
    if bad:
        raise InvariantViolation(f"d1 o d1 != 0 at (p, m) = {bad[0]}")
    report = compute_e2(args.max_p, args.parity, args.coeff, workers=args.workers)
    if not report.euler_ok:
        raise InvariantViolation("Euler characteristic of E1 and E2 differ")
    _emit(report.to_json(), report.to_csv(), args.format, out)
    return EXIT_OK


def cmd_vanish(args, out) -> int:
    need = {"cohomology": ("N", "p", "q"), "cohomology-general": ("m", "k", "p", "q"), "homotopy": ("m", "p", "q")}
    missing = [f"--{k}" for k in need[args.which] if getattr(args, k) is None]
    if missing:
        raise argparse.ArgumentTypeError(f"--which {args.which} needs {' '.join(missing)}")
    try:
        if args.which == "cohomology":
            v = vanishing_cohomology_euclidean(args.N, args.p, args.q)
        elif args.which == "cohomology-general":
            v = vanishing_cohomology_general(args.m, args.k, args.p, args.q)
        else:
            v = vanishing_homotopy(args.m, args.p, args.q)
    except ValueError as e:
        raise argparse.ArgumentTypeError(str(e)) from None
    out.write(("true" if v else "false") + "\n")
    return EXIT_OK


def cmd_trees(args, out) -> int:
    from knotss.oracle import complex_homology
    from knotss.trees import (
        CofinalityError,
        associahedron_f_vector,
        beat_point_core,
        build_Y,
        check_F_terminal,
        check_fiber_terminal,
        comma_poset,
        enumerate_psi,
    )

    if args.tree_cmd == "psi":
        P = enumerate_psi(args.n, planar=args.planar)
        if args.format == "json":
            out.write(json.dumps(P.to_json(), sort_keys=True) + "\n")
        else:
            for T in P.objects:
                out.write(T.text() + "\n")
        return EXIT_OK
    if args.tree_cmd == "associahedron":
        out.write(" ".join(map(str, associahedron_f_vector(args.n))) + "\n")
        return EXIT_OK
    if args.tree_cmd == "ynd":
        if not 0 <= args.d <= args.n:
            raise argparse.ArgumentTypeError("need 0 <= d <= n")
        K = build_Y(args.n, args.d)
        out.write("f-vector " + " ".join(map(str, K.f_vector())) + "\n")
        if args.homology:
            h = complex_homology(K)
            out.write("reduced ranks " + " ".join(map(str, h["betti"])) + "\n")
            out.write("torsion " + (json.dumps(h["torsion"], sort_keys=True) if h["torsion"] else "none") + "\n")
        return EXIT_OK
    # cofinal
    P = enumerate_psi(args.n + 1, planar=True)
    failures = 0
    for r in range(1, args.n + 1):
        for S in combinations(range(1, args.n + 1), r):
            label = "{" + ",".join(map(str, S)) + "}"
            try:
                T = check_F_terminal(args.n, S, P)
                out.write(f"S={label} terminal {T}\n")
            except CofinalityError as e:
                failures += 1
                fib = check_fiber_terminal(args.n, S, P)
                contractible = len(beat_point_core(comma_poset(args.n, S, P))) == 1
                out.write(f"S={label} no terminal object ({e}); fiber terminal {fib}; comma category contractible: {contractible}\n")
    if failures:
        out.write(f"terminal object missing for {failures} subsets S\n")
        return EXIT_INVARIANT
    out.write("terminal object found for all S\n")
    return EXIT_OK


# --- verification suites ----------------------------------------------------


def _suite_relations(max_p: int, report) -> None:
    """Every short edge word differs from its normal form by an element of the relation ideal."""
    from knotss.oracle import in_relation_span

    for parity in Parity:
        for p in range(2, min(max_p, 4) + 1):
            edges = [(i, j) for i in range(1, p + 1) for j in range(1, p + 1)]
            for m in (2, 3):
                fails = 0
                for word in product(edges, repeat=m):
                    combo = [(word, 1)] + [(k, -c) for k, c in normalize_word(word, parity).items()]
                    if not in_relation_span(p, m, parity, combo):
                        fails += 1
                report(f"normal form in relation class p={p} m={m} {parity}", fails == 0)


def _suite_identities(max_p: int, report, sign_flip=None) -> None:
    from knotss.graphs import GraphVector, coface_pullback, codegeneracy_pullback

    for parity in Parity:
        bad = check_d1_squared(max_p, parity, sign_flip)
        report(f"d1^2=0 p<={max_p} {parity}" + (f" first failure (p,m)={bad[0]}" if bad else ""), not bad)
        # c_l s^l' relations on every basis vector
        ok = True
        for p in range(2, min(max_p, 4) + 1):
            for m in range(0, 2 * p):
                for key in basis_keys(p - 1, m):
                    v = GraphVector(p - 1, m, parity, ((key, 1),))
                    for lp in range(1, p + 1):
                        sv = codegeneracy_pullback(lp, v)
                        for ell in range(1, p):
                            lhs = coface_pullback(ell, sv)
                            if lp in (ell, ell + 1):
                                rhs = v
                            elif lp < ell:
                                rhs = codegeneracy_pullback(lp, coface_pullback(ell - 1, v))
                            else:
                                rhs = codegeneracy_pullback(lp - 1, coface_pullback(ell, v))
                            ok &= lhs == rhs
        report(f"contraction/insertion identities {parity}", ok)


def _suite_oracle(max_p: int, report) -> None:
    from knotss.oracle import naive_homology, poincare_dimension, relation_span_dimension

    top = min(max_p, 5)
    for parity in Parity:
        ok = all(
            basis_size(p, m) == len(basis_keys(p, m)) == poincare_dimension(p, m) == relation_span_dimension(p, m, parity)
            for p in range(top + 1)
            for m in range(7)
        )
        report(f"basis = Poincare = relation span p<={top} {parity}", ok)
        for coeff in ("Q", "F:2", "F:3", "F:5"):
            rep = compute_e2(top, parity, coeff)
            c = Coefficients.parse(coeff)
            ok = True
            for m in range(1, 2 * top):
                ps = [p for p in range(1, top + 1) if m in m_range(p)]
                dims = [len(basis_keys(p, m, normalized=True)) if p in ps else 0 for p in range(top + 1)]
                maps = {p: build_d1(p, m, parity).matrix.to_dense() for p in ps if p >= 2 and p - 1 in ps}
                hom = naive_homology(dims, maps, c.prime)
                ok &= all(hom[p] == rep.rank(p, m) for p in ps)
            report(f"E2 = naive homology p<={top} {parity} {coeff}", ok)


def cmd_verify(args, out) -> int:
    failed = []

    def report(name: str, ok: bool) -> None:
        out.write(f"{'PASS' if ok else 'FAIL'} {name}\n")
        if not ok:
            failed.append(name)

    suites = ["relations", "identities", "oracle"] if args.suite == "all" else [args.suite]
    for s in suites:
        if s == "relations":
            _suite_relations(args.max_p, report)
        elif s == "identities":
            _suite_identities(args.max_p, report, args.inject_sign_error)
        else:
            _suite_oracle(args.max_p, report)
    out.write(f"{len(failed)} failed\n")
    return EXIT_INVARIANT if failed else EXIT_OK


# --- parser -----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="knotss", description="E1/E2 pages for spaces of long knots, with tree combinatorics.")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def page_flags(p, coeff: bool):
        p.add_argument("--parity", choices=["even", "odd"], default="odd")
        p.add_argument("--max-p", type=_positive, default=3)
        p.add_argument("--format", choices=["json", "csv"], default="json")
        if coeff:
            p.add_argument("--coeff", type=_coeff, default=Coefficients("Q"))
            p.add_argument("--workers", type=_positive, default=1)
            p.add_argument("--inject-sign-error", type=int, default=None, help=argparse.SUPPRESS)

    page_flags(sub.add_parser("e1", help="normalized E1 dimension table"), False)
    page_flags(sub.add_parser("e2", help="E2 ranks over Q, Z or F:l"), True)

    v = sub.add_parser("vanish", help="evaluate a vanishing-line predicate")
    v.add_argument("--which", choices=["cohomology", "cohomology-general", "homotopy"], required=True)
    for flag in ("N", "m", "k", "p", "q"):
        v.add_argument(f"--{flag}", type=int)

    t = sub.add_parser("trees", help="tree posets and complexes")
    tsub = t.add_subparsers(dest="tree_cmd", required=True, parser_class=_Parser)
    psi = tsub.add_parser("psi")
    psi.add_argument("--n", type=_positive, required=True)
    psi.add_argument("--planar", action="store_true")
    psi.add_argument("--format", choices=["json", "text"], default="text")
    tsub.add_parser("cofinal").add_argument("--n", type=_positive, required=True)
    tsub.add_parser("associahedron").add_argument("--n", type=int, required=True)
    y = tsub.add_parser("ynd")
    y.add_argument("--n", type=int, required=True)
    y.add_argument("--d", type=int, required=True)
    y.add_argument("--homology", action="store_true")

    ver = sub.add_parser("verify", help="run verification suites")
    ver.add_argument("--suite", choices=["relations", "identities", "oracle", "all"], default="all")
    ver.add_argument("--max-p", type=_positive, default=5)
    ver.add_argument("--inject-sign-error", type=int, default=None, help=argparse.SUPPRESS)
    return ap


_COMMANDS = {"e1": cmd_e1, "e2": cmd_e2, "vanish": cmd_vanish, "trees": cmd_trees, "verify": cmd_verify}


def main(argv: Sequence[str] | None = None, out=None) -> int:
    out = out if out is not None else sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        return _COMMANDS[args.command](args, out)
    except argparse.ArgumentTypeError as e:
        print(f"knotss: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except CapExceeded as e:
        print(f"knotss: cap exceeded: {e}", file=sys.stderr)
        return EXIT_CAP
    except (InvariantViolation, ArithmeticError) as e:
        print(f"knotss: invariant violated: {e}", file=sys.stderr)
        return EXIT_INVARIANT
    except ValueError as e:
        print(f"knotss: error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
