"""Command-line interface: ``qforms <command> [options]``.

Exit codes: 0 when every requested check passes, 1 when a check fails,
2 for usage errors, 3 for domain or pole errors, 4 when precision or
convergence could not be certified.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from fractions import Fraction

from . import functions, hankel, identities, pade
from .enclosure import as_rat, log2_floor, parse_eps, upper_bits
from .errors import DomainError, QFormsError

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


def _rat(text: str) -> Fraction:
    try:
        return as_rat(text)
    except (TypeError, ValueError) as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _eps(text: str) -> Fraction:
    try:
        return parse_eps(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _nonneg(text: str) -> int:
    try:
        n = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if n < 0:
        raise argparse.ArgumentTypeError("must be nonnegative")
    return n


def _common(sp: argparse.ArgumentParser, fmt=("json",)) -> None:
    sp.add_argument("--out", help="write output to this file instead of stdout")
    sp.add_argument("--format", choices=fmt, default=fmt[0])
    sp.add_argument("--threads", type=int, default=None, help="worker processes (default: QFORMS_THREADS or CPU count)")


def _pxz(sp: argparse.ArgumentParser, defaults=(None, None, None)) -> None:
    for name, d in zip(("p", "x", "z"), defaults):
        sp.add_argument(f"--{name}", type=_rat, required=d is None, default=d)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="qforms", description="Certified q-series evaluation and Hankel determinant checks.")
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("eval", help="certified value of a named function")
    sp.add_argument("--fn", required=True, choices=functions.FUNCTIONS)
    for name in ("p", "q", "x", "y", "z"):
        sp.add_argument(f"--{name}", type=_rat)
    sp.add_argument("--k", type=int, help="index for zeta_q (1 or 2)")
    sp.add_argument("--form", help="representation, where several exist")
    sp.add_argument("--eps", type=_eps, default=Fraction(1, 10**12))
    _common(sp)

    sp = sub.add_parser("forms", help="Pade-type linear forms, integrality and remainders")
    sp.add_argument("--n", type=_nonneg, required=True, help="largest index")
    _pxz(sp)
    sp.add_argument("--eps", type=_eps, default=Fraction(1, 10**30))
    _common(sp, ("json", "csv"))

    sp = sub.add_parser("hankel", help="numeric Hankel determinants and decay fit")
    sp.add_argument("--nmax", type=_nonneg, required=True)
    sp.add_argument("--nmin", type=_nonneg, default=1)
    sp.add_argument("--fit-from", type=_nonneg, default=4)
    _pxz(sp)
    _common(sp, ("json", "csv"))

    sp = sub.add_parser("order-check", help="exact q-order checks")
    sp.add_argument("--kind", required=True, choices=("lemma1", "hankel", "vprime"))
    sp.add_argument("--n", type=_nonneg, required=True)
    sp.add_argument("--l", type=_nonneg, help="lemma1 only: a single l (default: all 0 <= l <= n)")
    sp.add_argument("--M", type=_nonneg, help="truncation order (default: bound + 10)")
    _pxz(sp)
    _common(sp, ("json", "csv"))

    sp = sub.add_parser("vprime", help="alternative linear forms v_n'")
    sp.add_argument("--n", type=_nonneg, required=True)
    _pxz(sp)
    _common(sp)

    sp = sub.add_parser("certify", help="experimental irrationality report")
    sp.add_argument("--nmax", type=_nonneg, required=True)
    sp.add_argument("--nmin", type=_nonneg, default=1)
    sp.add_argument("--order-nmax", type=_nonneg, default=5, help="largest n for exact order checks")
    _pxz(sp)
    _common(sp)

    sp = sub.add_parser("identities", help="run the identity suite")
    group = sp.add_mutually_exclusive_group(required=True)
    group.add_argument("--all", action="store_true")
    group.add_argument("--only", help="comma-separated identity ids")
    group.add_argument("--list", action="store_true", help="list identity ids and exit")
    sp.add_argument("--points", type=_nonneg, default=5)
    sp.add_argument("--seed", type=int, default=1)
    _common(sp)
    return ap


# --- commands ---------------------------------------------------------------------


def cmd_eval(args) -> tuple[dict, bool]:
    params = {k: getattr(args, k) for k in ("p", "q", "x", "y", "z") if getattr(args, k) is not None}
    if args.k is not None:
        params["k"] = args.k
    # a tighter internal target makes more digits certified than eps alone would
    req = functions.EvalRequest(args.fn, params, args.eps * Fraction(1, 2**20), args.form)
    res = functions.evaluate(req)
    # snap to a dyadic grid far below eps so the printed rationals stay short
    enc = res.enclosure.rounded(max(0, -log2_floor(args.eps)) + 40)
    out = {
        "fn": args.fn,
        "params": {k: str(v) for k, v in params.items()},
        "form": args.form,
        "eps": str(args.eps),
        "value_mid": str(enc.mid),
        "value_rad": str(upper_bits(enc.rad)),
        "decimal": enc.decimal(),
        "terms_used": res.terms,
    }
    return out, True


def cmd_forms(args) -> tuple[dict, bool]:
    p, x, z = args.p, args.x, args.z
    integral_p = p.denominator == 1 and abs(p) > 1
    rows = []
    ok = True
    for n in range(args.n + 1):
        c = pade.coeffs(n, p, x, z)
        row = {
            "n": n,
            "A_tilde": str(c.A_tilde),
            "B_tilde": str(c.B_tilde),
            "C_tilde": str(c.C_tilde),
            "D": str(c.D),
        }
        if integral_p:
            verdict = pade.integrality_check(n, p, x, z)
            row["integrality"] = verdict.to_json()
            ok &= verdict.passed
        else:
            row["integrality"] = None
        if abs(z) < abs(p):
            rem = pade.remainder_enclosure(n, p, x, z, args.eps)
            row["remainder"] = rem.to_json()
        else:
            row["remainder"] = None
        rows.append(row)
    return {"p": str(p), "x": str(x), "z": str(z), "forms": rows, "passed": ok}, ok


def _forms_csv(data: dict) -> list[list]:
    rows = [["n", "A_tilde", "B_tilde", "C_tilde", "integral", "remainder_decimal"]]
    for r in data["forms"]:
        integ = "" if r["integrality"] is None else str(r["integrality"]["passed"]).lower()
        rem = "" if r["remainder"] is None else r["remainder"]["decimal"]
        rows.append([r["n"], r["A_tilde"], r["B_tilde"], r["C_tilde"], integ, rem])
    return rows


def cmd_hankel(args) -> tuple[dict, bool]:
    if args.nmin < 1 or args.nmax < args.nmin:
        raise DomainError("need 1 <= nmin <= nmax")
    vals = hankel.hankel_values(args.p, args.x, args.z, range(args.nmin, args.nmax + 1), args.threads)
    logs = {hv.n: (hankel.log_abs(hv.V.mid) if hv.V.excludes_zero() else None) for hv in vals}
    fit_pts = {n: v for n, v in logs.items() if n >= args.fit_from and v is not None}
    fit = hankel.decay_fit(fit_pts, args.p) if len(fit_pts) >= 4 else None
    records = []
    for hv in vals:
        records.append(
            {
                "n": hv.n,
                "V_mid": str(hv.V.mid),
                "V_rad": str(upper_bits(hv.V.rad)),
                "V_decimal": hv.V.decimal(30),
                "nonzero": hv.V.excludes_zero(),
                "log_abs_V": None if logs[hv.n] is None else repr(logs[hv.n]),
                "fitted": None if fit is None else repr(fit.predict(hv.n)),
            }
        )
    ok = all(r["nonzero"] for r in records)
    out = {
        "p": str(args.p),
        "x": str(args.x),
        "z": str(args.z),
        "values": records,
        "decay_fit": None if fit is None else fit.to_json(),
        "passed": ok,
    }
    return out, ok


def _hankel_csv(data: dict) -> list[list]:
    rows = [["n", "log_abs_V", "fitted"]]
    for r in data["values"]:
        rows.append([r["n"], r["log_abs_V"] or "", r["fitted"] or ""])
    return rows


def cmd_order_check(args) -> tuple[dict, bool]:
    p, x, z, n = args.p, args.x, args.z, args.n
    results = []
    if args.kind == "lemma1":
        ls = [args.l] if args.l is not None else list(range(n + 1))
        if any(l > n for l in ls):
            raise DomainError("need l <= n")
        M = args.M if args.M is not None else max(hankel.lemma_bound(n, l) for l in ls) + 10
        seq = hankel.remainder_sequence(n + 1, p, x, z, M, args.threads)
        results = [hankel.lemma1_sequence_check(seq, n, l) for l in ls]
    elif args.kind == "hankel":
        if n < 1:
            raise DomainError("Hankel determinants need n >= 1")
        results = [hankel.hankel_order_check(n, p, x, z, args.threads, args.M)]
    else:
        results = [hankel.vprime(n, p, x, z, args.M).verdict]
    ok = all(r.passed for r in results)
    return {"kind": args.kind, "p": str(p), "x": str(x), "z": str(z), "results": [r.to_json() for r in results], "passed": ok}, ok


def _order_csv(data: dict) -> list[list]:
    rows = [["kind", "n", "l", "bound", "ord", "passed"]]
    for r in data["results"]:
        rows.append([r["kind"], r["n"], "" if r["l"] is None else r["l"], r["bound"], r["ord"], str(r["passed"]).lower()])
    return rows


def cmd_vprime(args) -> tuple[dict, bool]:
    res = hankel.vprime(args.n, args.p, args.x, args.z)
    lhs, rhs = hankel.vprime_numeric_check(args.n, args.p, args.x, args.z)
    out = res.to_json()
    out.update(
        {
            "p": str(args.p),
            "x": str(args.x),
            "z": str(args.z),
            "value_k_sum": lhs.to_json(),
            "value_series": rhs.to_json(),
            "values_overlap": lhs.overlaps(rhs),
        }
    )
    ok = res.forms_equal and res.verdict.passed and lhs.overlaps(rhs)
    out["passed"] = ok
    return out, ok


def cmd_certify(args) -> tuple[dict, bool]:
    rep = hankel.certify(
        args.p, args.x, args.z, args.nmax, n_min=args.nmin, order_n_max=args.order_nmax, threads=args.threads
    )
    return rep.to_json(), rep.passed


def cmd_identities(args) -> tuple[dict, bool]:
    if args.list:
        out = {
            "identities": [
                {"id": i.id, "statement": i.title, "domain": i.domain, "modes": list(i.modes)}
                for i in identities.REGISTRY.values()
            ]
        }
        return out, True
    if args.all:
        ids = list(identities.REGISTRY)
    else:
        ids = [s.strip() for s in args.only.split(",") if s.strip()]
        unknown = [i for i in ids if i not in identities.REGISTRY]
        if unknown:
            raise ValueError(f"unknown identity ids: {', '.join(unknown)} (see --list)")
    rep = identities.run_suite(ids, args.points, args.seed, args.threads)
    return rep.to_json(), rep.passed


COMMANDS = {
    "eval": (cmd_eval, None),
    "forms": (cmd_forms, _forms_csv),
    "hankel": (cmd_hankel, _hankel_csv),
    "order-check": (cmd_order_check, _order_csv),
    "vprime": (cmd_vprime, None),
    "certify": (cmd_certify, None),
    "identities": (cmd_identities, None),
}


def render(data: dict, fmt: str, to_rows) -> str:
    if fmt == "csv":
        buf = io.StringIO()
        csv.writer(buf, lineterminator="\n").writerows(to_rows(data))
        return buf.getvalue()
    return json.dumps(data, indent=2, ensure_ascii=False) + "\n"


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    fn, to_rows = COMMANDS[args.command]
    try:
        data, ok = fn(args)
    except QFormsError as exc:
        print(f"qforms {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code
    except ValueError as exc:
        print(f"qforms {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    text = render(data, args.format, to_rows)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK if ok else EXIT_FAIL


def main_entry() -> None:
    sys.exit(main())


if __name__ == "__main__":  # pragma: no cover
    main_entry()
