"""Command-line front end: manifests, verification drivers, reports.

Standard output stays machine-readable (JSON or CSV); heartbeat progress
goes to standard error.  Exit codes: 0 pass/consistent, 1 refutation or
exact-fail, 2 usage error, 3 budget exceeded.
"""

import argparse
import csv
import io
import json
import sys
import time
from dataclasses import dataclass, asdict

from . import __version__
from .carlitz import exp_log_identity_check, telescoping_lemma_check
from .engine import (SumSpec, accumulate, power_sum_primes, progress_printer)
from .errors import BudgetError, PrimeSumsError, UsageError
from .ffield import field_for_q, field_from_name
from .fqpoly import Poly, count_irreducibles
from .laurent import LaurentSeries
from .ratfun import RatFun
from .ratrec import RationalCandidate, catalog_lookup, reconstruct
from .streams import iter_irreducibles
from .symcomb import specialize_to_carlitz, x_n, x_n_nested, y_n
from .verify import (VerifyOutcome, guesses_I_rows, guesses_II_rows,
                     guesses_III_rows, nonvanishing_rows,
                     powersum_observation_rows, powersum_theorem_rows,
                     valuation_grid_rows, verify_A, verify_B, verify_C,
                     verify_D, verify_finite_level)
from .zeta import euler_product_matches, log_derivative_check

EXIT_PASS = 0
EXIT_FAIL = 1
EXIT_USAGE = 2
EXIT_BUDGET = 3

CSV_COLUMNS = ["q", "kind", "k", "d", "p_d", "exact", "div_q_qm1", "eq_kd",
               "has_dk_plus_1", "runtime_ms"]


@dataclass
class Manifest:
    """Round-trippable description of one run; embedded in every report."""

    field: str
    task: str
    params: dict

    def to_json(self) -> dict:
        return {"field": self.field, "task": self.task, "params": self.params}

    @classmethod
    def from_json(cls, obj: dict) -> "Manifest":
        return cls(field=obj["field"], task=obj["task"],
                   params=dict(obj["params"]))


def _field_from_args(args) -> "Field":
    if getattr(args, "modulus", None) is not None:
        f = field_for_q(args.q)
        from .ffield import field_make
        digits = []
        code = args.modulus
        while code:
            digits.append(code % f.p)
            code //= f.p
        return field_make(f.p, f.m, digits)
    return field_for_q(args.q)


def _emit(args, report: dict) -> None:
    text = json.dumps(report, indent=2, sort_keys=True)
    if getattr(args, "out", None):
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _emit_rows(args, rows: list[dict], manifest: Manifest) -> None:
    if getattr(args, "format", "json") == "csv":
        cols: list[str] = []
        for r in rows:
            for key in r:
                if key not in cols:
                    cols.append(key)
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=cols)
        writer.writeheader()
        for r in rows:
            writer.writerow(r)
        text = buf.getvalue()
        if getattr(args, "out", None):
            with open(args.out, "w", encoding="utf-8") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
    else:
        _emit(args, _wrap(manifest, {"rows": rows}))


def _wrap(manifest: Manifest, payload: dict, timing_ms: float | None = None) -> dict:
    out = {"version": __version__, "manifest": manifest.to_json(),
           "payload": payload}
    if timing_ms is not None:
        out["timing"] = {"total_ms": round(timing_ms, 3)}
    return out


def _result_report(manifest: Manifest, result, timing_ms: float) -> dict:
    return _wrap(manifest, result.to_report(), timing_ms)


def _flags_to_csv_rows(result) -> list[dict]:
    rows = []
    for d in sorted(result.per_degree):
        fl = result.degree_flags(d)
        summary = result.summaries[d]
        rows.append({
            "q": fl["q"], "kind": fl["kind"], "k": fl["k"], "d": d,
            "p_d": fl["p_d"] if fl["exact"] else f">{fl['lower_bound']}",
            "exact": fl["exact"], "div_q_qm1": fl["div_q_qm1"],
            "eq_kd": fl["eq_kd"], "has_dk_plus_1": fl["has_dk_plus_1"],
            "runtime_ms": round(summary.runtime_ms, 3)})
    return rows


# ---------------------------------------------------------------------------
# subcommand handlers

def cmd_primes(args) -> int:
    f = _field_from_args(args)
    manifest = Manifest(f.name, "primes",
                        {"d": args.d, "count_only": args.count_only,
                         "mode": args.mode})
    stream = iter_irreducibles(f.q, args.d, mode=args.mode, field=f)
    if args.count_only:
        n = stream.count()
        _emit(args, _wrap(manifest, {"degree": args.d, "count": n,
                                     "formula": count_irreducibles(f.q, args.d)}))
        return EXIT_PASS
    polys = [str(p) for p in stream]
    _emit(args, _wrap(manifest, {"degree": args.d, "count": len(polys),
                                 "primes": polys}))
    return EXIT_PASS


def cmd_sum(args) -> int:
    f = _field_from_args(args)
    t0 = time.perf_counter()
    spec = SumSpec(f, args.kind, args.k, args.dmax, horizon=args.horizon)
    manifest = Manifest(f.name, "sum", {
        "kind": args.kind, "k": args.k, "d_max": args.dmax,
        "horizon": args.horizon, "workers": args.workers,
        "cache_dir": args.cache_dir, "format": args.format})
    res = accumulate(spec, cache_dir=args.cache_dir, workers=args.workers,
                     normalize=not args.no_normalize,
                     progress=progress_printer(not args.quiet))
    if args.format == "csv":
        _emit_rows(args, _flags_to_csv_rows(res), manifest)
    else:
        _emit(args, _result_report(manifest, res,
                                   (time.perf_counter() - t0) * 1e3))
    return EXIT_PASS


def cmd_verify(args) -> int:
    progress = progress_printer(not args.quiet)
    t0 = time.perf_counter()
    conj = args.conj.upper()
    if conj == "A":
        if args.q != 2:
            raise UsageError("Conjecture A is a statement about q = 2")
        outcome = verify_A(args.dmax, workers=args.workers,
                           cache_dir=args.cache_dir, progress=progress)
    elif conj == "B":
        if args.q != 2:
            raise UsageError("Conjecture B is a statement about q = 2")
        if args.k is None:
            raise UsageError("verify B requires --k")
        outcome = verify_B(args.k, args.dmax, workers=args.workers,
                           cache_dir=args.cache_dir, progress=progress)
    elif conj == "C":
        outcome = verify_C(args.q, args.k, args.dmax, workers=args.workers,
                           cache_dir=args.cache_dir, progress=progress)
    elif conj == "D":
        outcome = verify_D(args.q, args.k, args.dmax, workers=args.workers,
                           cache_dir=args.cache_dir, progress=progress)
    elif conj == "FINITE":
        outs = verify_finite_level(progress=progress)
        manifest = Manifest(field_for_q(args.q).name, "verify",
                            {"conjecture": "finite", "q": args.q})
        _emit(args, _wrap(manifest, {"outcomes": [o.to_json() for o in outs]},
                          (time.perf_counter() - t0) * 1e3))
        return EXIT_PASS if all(o.passed for o in outs) else EXIT_FAIL
    else:
        raise UsageError(f"unknown conjecture {args.conj!r}")
    manifest = Manifest(field_for_q(args.q).name, "verify", {
        "conjecture": conj, "q": args.q, "k": args.k, "d_max": args.dmax,
        "workers": args.workers})
    _emit(args, _wrap(manifest, outcome.to_json(),
                      (time.perf_counter() - t0) * 1e3))
    return EXIT_PASS if outcome.passed else EXIT_FAIL


def cmd_scan(args) -> int:
    manifest = Manifest(field_for_q(args.q or 2).name, "scan",
                        {"suite": args.suite, "q": args.q, "long": args.long})
    suite = args.suite
    if suite == "valgrid":
        rows = []
        qs = (args.q,) if args.q else (2, 3, 4, 5, 8)
        for q in qs:
            base = q - 1 if q > 2 else 1
            for mult in (1, 2, 3):
                rows.extend(valuation_grid_rows(q, base * mult,
                                                args.dmax or 8,
                                                workers=args.workers))
    elif suite == "guess-I":
        d_list = [8, 16, 9, 5] + ([25, 27] if args.long else [])
        rows = guesses_I_rows(d_list, workers=args.workers)
    elif suite == "guess-II":
        rows = guesses_II_rows(workers=args.workers,
                               ell_max=4 if args.long else 3)
    elif suite == "guess-III":
        rows = guesses_III_rows(workers=args.workers)
    elif suite == "nonvanish":
        rows = []
        for q in ((args.q,) if args.q else (4, 8)):
            rows.extend(nonvanishing_rows(q, workers=args.workers))
    elif suite == "powersum-theorems":
        rows = powersum_theorem_rows()
    elif suite == "powersum-observations":
        rows = powersum_observation_rows()
    else:
        raise UsageError(f"unknown scan suite {args.suite!r}")
    _emit_rows(args, rows, manifest)
    bad = [r for r in rows if r.get("ok") is False or r.get("match") is False]
    return EXIT_PASS if not bad else EXIT_FAIL


def cmd_reconstruct(args) -> int:
    with open(args.series, "r", encoding="utf-8") as fh:
        ser = LaurentSeries.from_json(json.load(fh))
    max_deg = args.max_deg if args.max_deg else (ser.horizon - 1) // 2
    manifest = Manifest(ser.field.name, "reconstruct",
                        {"series": args.series, "max_deg": max_deg})
    cand = reconstruct(ser, max_deg)
    payload = {"found": cand is not None}
    if cand is not None:
        payload.update(num=str(cand.num), den=str(cand.den),
                       matched_through=cand.matched_through)
    _emit(args, _wrap(manifest, payload))
    return EXIT_PASS if cand is not None else EXIT_FAIL


def cmd_speyer(args) -> int:
    manifest = Manifest(field_for_q(2).name, "speyer",
                        {"action": args.action, "n": args.n})
    if args.action == "xn":
        payload = {"n": args.n, "x_n": x_n(args.n).pretty()}
    elif args.action == "yn":
        payload = {"n": args.n, "y_n": y_n(args.n).pretty()}
    elif args.action == "check":
        ok_sq = all(y_n(n) == x_n(n) ** 2 for n in range(2, args.n + 1))
        ok_forms = all(x_n(n) == x_n_nested(n) for n in range(1, args.n + 1))
        payload = {"n_max": args.n, "square_identity": ok_sq,
                   "forms_agree": ok_forms}
        _emit(args, _wrap(manifest, payload))
        return EXIT_PASS if ok_sq and ok_forms else EXIT_FAIL
    elif args.action == "specialize":
        from .carlitz import carlitz_A
        val = specialize_to_carlitz(x_n(args.n))
        num, den = carlitz_A(args.n)
        ok = val == RatFun(num, den)
        payload = {"n": args.n, "equals_A_n": ok,
                   "value": str(val.reduced())}
        _emit(args, _wrap(manifest, payload))
        return EXIT_PASS if ok else EXIT_FAIL
    else:
        raise UsageError(f"unknown speyer action {args.action!r}")
    _emit(args, _wrap(manifest, payload))
    return EXIT_PASS


def cmd_carlitz(args) -> int:
    manifest = Manifest(field_for_q(2).name, "carlitz", {"n_max": args.n_max})
    ids = {n: exp_log_identity_check(n) for n in range(2, args.n_max + 1)}
    tele = {k: telescoping_lemma_check(k) for k in range(1, min(args.n_max, 8))}
    payload = {"log_exp_identity": ids, "telescoping": tele}
    _emit(args, _wrap(manifest, payload))
    ok = all(ids.values()) and all(tele.values())
    return EXIT_PASS if ok else EXIT_FAIL


def cmd_zeta_check(args) -> int:
    t0 = time.perf_counter()
    manifest = Manifest(field_for_q(args.q).name, "zeta-check",
                        {"q": args.q, "k": args.k, "d_max": args.dmax})
    rep = log_derivative_check(args.q, args.k, args.dmax)
    euler_ok = euler_product_matches(args.q, args.k, min(args.dmax, 6))
    ok = (not rep.is_exact) and euler_ok
    payload = {"log_derivative_valuation": str(rep),
               "matched_horizon": rep.value if not rep.is_exact else None,
               "euler_product_ok": euler_ok, "pass": ok}
    _emit(args, _wrap(manifest, payload, (time.perf_counter() - t0) * 1e3))
    print(f"zeta-check q={args.q} k={args.k} D={args.dmax}: "
          f"{'PASS' if ok else 'FAIL'} (horizon {rep.value})",
          file=sys.stderr)
    return EXIT_PASS if ok else EXIT_FAIL


def cmd_powersum(args) -> int:
    f = _field_from_args(args)
    manifest = Manifest(f.name, "powersum",
                        {"d": args.d, "k": args.k})
    val = power_sum_primes(f.q, args.d, args.k, field=f)
    payload = {"d": args.d, "k": args.k, "value": str(val),
               "degree": None if val.is_zero() else val.degree,
               "coeff_codes": list(val.coeffs)}
    _emit(args, _wrap(manifest, payload))
    return EXIT_PASS


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="primesums",
        description="Exact sums over monic irreducible polynomials of F_q[t]")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, q_default=None):
        p.add_argument("--q", type=int, default=q_default)
        p.add_argument("--modulus", type=int, default=None,
                       help="field modulus as canonical integer code")
        p.add_argument("--workers", type=int, default=1)
        p.add_argument("--cache-dir", default=None)
        p.add_argument("--out", default=None)
        p.add_argument("--format", choices=("json", "csv"), default="json")
        p.add_argument("--quiet", action="store_true")

    p = sub.add_parser("primes", help="list or count monic irreducibles")
    common(p, 2)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--count-only", action="store_true")
    p.add_argument("--mode", choices=("auto", "sieve", "test"), default="auto")
    p.set_defaults(func=cmd_primes)

    p = sub.add_parser("sum", help="compute P_d(k) and cumulative sums")
    common(p, 2)
    p.add_argument("--kind", choices=("CONJ_A", "PK", "GP"), default="PK")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--dmax", type=int, required=True)
    p.add_argument("--horizon", type=int, default=None)
    p.add_argument("--no-normalize", action="store_true")
    p.set_defaults(func=cmd_sum)

    p = sub.add_parser("verify", help="verify a conjecture instance")
    common(p, 2)
    p.add_argument("--conj", required=True,
                   help="A | B | C | D | finite")
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--dmax", type=int, default=8)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("scan", help="finite-level scan suites")
    common(p)
    p.add_argument("--suite", required=True,
                   choices=("valgrid", "guess-I", "guess-II", "guess-III",
                            "nonvanish", "powersum-theorems",
                            "powersum-observations"))
    p.add_argument("--dmax", type=int, default=None)
    p.add_argument("--long", action="store_true")
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("reconstruct",
                       help="rational reconstruction from a series JSON file")
    common(p, 2)
    p.add_argument("--series", required=True)
    p.add_argument("--max-deg", type=int, default=None)
    p.set_defaults(func=cmd_reconstruct)

    p = sub.add_parser("speyer", help="restricted symmetric-function suite")
    common(p, 2)
    p.add_argument("action", choices=("xn", "yn", "check", "specialize"))
    p.add_argument("--n", type=int, required=True)
    p.set_defaults(func=cmd_speyer)

    p = sub.add_parser("carlitz", help="Carlitz log/exp identity checks")
    common(p, 2)
    p.add_argument("--n-max", type=int, default=8)
    p.set_defaults(func=cmd_carlitz)

    p = sub.add_parser("zeta-check", help="independent zeta-oracle cross-check")
    common(p, 2)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--dmax", type=int, required=True)
    p.set_defaults(func=cmd_zeta_check)

    p = sub.add_parser("powersum", help="exact prime power sums P(d,k)")
    common(p, 2)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.set_defaults(func=cmd_powersum)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except BudgetError as exc:
        print(f"budget exceeded: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except PrimeSumsError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
