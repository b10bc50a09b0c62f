"""Command-line front end.

Exit codes: 0 success, 1 verification failure, 2 usage error, 3 numerical
hard error.  The default worker count comes from ``HOLOCRIT_WORKERS``.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import re
import sys
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import __version__
from .asymptotics import CurveGeometry, curve_expansion, fit_expansion
from .cpm import ChernCheckError, chern_check, chern_polynomial, cpm_expected_number, cpm_total, series_expand
from .empirical import DegenerateCriticalPoint, empirical_counts, write_records_csv
from .gauss_mc import (
    METHODS,
    JetCovariance,
    b0_profile,
    beta2_profile,
    claim_g24_check,
    density_profile,
    estimate_b0,
    iz_check,
    morse_leading_table,
)
from .linalg import CholeskyError, EigenConvergenceError
from .montecarlo import RejectionError, default_workers
from .rational import RationalFunction, parse_rational
from .series import LaurentSeries, PiMultiple

EXIT_OK, EXIT_VERIFY, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2, 3
FORMATS = ("table", "csv", "json")
HARD_ERRORS = (
    RejectionError,
    ChernCheckError,
    EigenConvergenceError,
    CholeskyError,
    DegenerateCriticalPoint,
    ArithmeticError,
    np.linalg.LinAlgError,
)

DEFAULT_SAMPLES = {1: 10**6, 2: 10**6, 3: 2 * 10**6}
DEFAULT_IZ = {2: ("1.3,-0.8", "1.1,-0.6"), 3: ("1.3,0.2,-0.9", "1.1,-0.3,-0.7")}


class UsageError(ValueError):
    pass


# ----------------------------------------------------------------------------
# output


def _cell(v) -> str:
    if isinstance(v, float):
        return f"{v:.10g}"
    if v is None:
        return ""
    return str(v)


def _jsonable(v):
    if isinstance(v, (Fraction, PiMultiple, RationalFunction)):
        return str(v)
    if isinstance(v, complex):
        return [v.real, v.imag]
    if isinstance(v, np.generic):
        return v.item()
    return v


def emit_table(rows: list[dict], fmt: str, columns: Sequence[str] | None = None) -> str:
    """Render result rows as an aligned table, CSV with header, or JSON.

    JSON is a single object for one row and an array otherwise; CSV and JSON
    keep full float precision.
    """
    if columns is None:
        columns = []
        for r in rows:
            for k in r:
                if k not in columns:
                    columns.append(k)
    if fmt == "json":
        objs = [{k: _jsonable(r.get(k)) for k in columns if k in r} for r in rows]
        body = objs[0] if len(objs) == 1 else objs
        return json.dumps(body, indent=2) + "\n"
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\r\n")
        w.writerow(columns)
        for r in rows:
            w.writerow([repr(r[k]) if isinstance(r.get(k), float) else _cell(r.get(k)) for k in columns])
        return buf.getvalue()
    if fmt == "table":
        cells = [list(columns)] + [[_cell(r.get(k)) for k in columns] for r in rows]
        widths = [max(len(row[i]) for row in cells) for i in range(len(columns))]
        lines = ["  ".join(c.rjust(w) for c, w in zip(row, widths)).rstrip() for row in cells]
        if columns:
            lines.insert(1, "  ".join("-" * w for w in widths))
        return "\n".join(lines) + "\n"
    raise UsageError(f"unknown format {fmt!r}")


def _est_row(est, **extra) -> dict:
    d = est.to_dict()
    return {**extra, "mean": d["mean"], "std_error": d["std_error"], "n_samples": d["n_samples"],
            "n_rejected": d["n_rejected"], "seed": d["seed"]}


# ----------------------------------------------------------------------------
# argument helpers


def _floats(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise UsageError(f"expected comma-separated numbers, got {text!r}") from exc


def _ints(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise UsageError(f"expected comma-separated integers, got {text!r}") from exc


def _number(text: str):
    """Parse ``2.5``, ``3/4``, ``4pi``, ``4*pi`` or ``pi``."""
    t = text.replace(" ", "").lower()
    m = re.fullmatch(r"([0-9/.+-]*)\*?pi", t)
    try:
        if m:
            coef = m.group(1) or "1"
            return PiMultiple(Fraction(coef), 1)
        if re.fullmatch(r"[+-]?\d+(/\d+)?", t):
            return Fraction(t)
        return float(t)
    except (ValueError, ZeroDivisionError) as exc:
        raise UsageError(f"cannot parse number {text!r}") from exc


def _seed(text: str) -> int:
    v = int(text)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must be a 64-bit unsigned integer")
    return v


def _positive(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return v


def _samples(args, m: int | None = None) -> int:
    if args.samples is not None:
        return args.samples
    return DEFAULT_SAMPLES.get(m, 2 * 10**6) if m is not None else 10**6


def _check_index(m: int, q: int | None) -> None:
    if q is not None and not m <= q <= 2 * m:
        raise UsageError(f"--index must lie in [{m}, {2 * m}] for --dim {m}")


def _check_dim(m: int, hi: int | None = None) -> None:
    if m < 1 or (hi is not None and m > hi):
        raise UsageError(f"--dim must lie in [1, {hi}]" if hi else "--dim must be >= 1")


# ----------------------------------------------------------------------------
# commands


def cmd_b0(args) -> tuple[list[dict], int]:
    _check_dim(args.dim)
    est = estimate_b0(args.dim, _samples(args, args.dim), args.seed, args.workers)
    return [_est_row(est, quantity="b0", m=args.dim)], EXIT_OK


def _profile_rows(prof, quantity: str, q: int | None, total: bool = True, **extra) -> list[dict]:
    m = prof.m
    qs = [q] if q is not None else list(range(m, 2 * m + 1))
    rows = [_est_row(prof.values[k], quantity=quantity, m=m, q=k, **extra) for k in qs]
    if q is None and total:
        rows.append(_est_row(prof.total, quantity=quantity, m=m, q="total", **extra))
    return rows


def cmd_b0q(args):
    _check_dim(args.dim)
    _check_index(args.dim, args.index)
    prof = b0_profile(args.dim, _samples(args, args.dim), args.seed, args.workers)
    return _profile_rows(prof, "b0q", args.index), EXIT_OK


def cmd_morse_table(args):
    _check_dim(args.dim, 6)
    prof = morse_leading_table(args.dim, _samples(args, args.dim), args.seed, args.workers)
    rows = _profile_rows(prof, "n_q", None)
    target = math.factorial(args.dim) / math.pi**args.dim
    rows.append({**_est_row(prof.signed, quantity="signed_b0q", m=args.dim, q="alt"),
                 "exact": target, "rel_err": abs(prof.signed.mean - target) / target})
    return rows, EXIT_OK


def cmd_beta2q(args):
    _check_dim(args.dim)
    _check_index(args.dim, args.index)
    methods = METHODS if args.method == "all" else (args.method,)
    rows = []
    for i, method in enumerate(methods):
        prof = beta2_profile(args.dim, method, _samples(args, args.dim), args.seed + i, args.workers)
        rows.extend(_profile_rows(prof, "beta2q", args.index, method=method))
    return rows, EXIT_OK


def _covariance(model: str, m: int, n: int) -> JetCovariance:
    if model == "projective":
        return JetCovariance.projective(m, n)
    return JetCovariance.cp1_times_elliptic(m, n)


def cmd_density(args):
    _check_dim(args.dim)
    _check_index(args.dim, args.index)
    if args.N < 2:
        raise UsageError("--N must be >= 2")
    prof = density_profile(_covariance(args.model, args.dim, args.N), _samples(args, args.dim), args.seed, args.workers)
    rows = _profile_rows(prof, "density", args.index, model=args.model, N=args.N)
    if args.model == "projective" and args.dim <= 4:
        vol = math.pi**args.dim / math.factorial(args.dim)
        for r in rows:
            f = cpm_total(args.dim) if r["q"] == "total" else cpm_expected_number(args.dim, r["q"])
            exact = float(f(args.N)) / vol
            r["exact"] = exact
            r["rel_err"] = abs(r["mean"] - exact) / exact
    return rows, EXIT_OK


def cmd_iz_check(args):
    _check_dim(args.dim)
    if args.dim < 2 and (args.lam is None or args.xi is None):
        raise UsageError("--lambda and --xi are required for this dimension")
    dl, dx = DEFAULT_IZ.get(args.dim, (None, None))
    lam = _floats(args.lam or dl or "")
    xi = _floats(args.xi or dx or "")
    if len(lam) != args.dim or len(xi) != args.dim:
        raise UsageError(f"--lambda and --xi need {args.dim} values each")
    try:
        res = iz_check(args.dim, lam, xi, _samples(args), args.seed, args.workers)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    mc = res.mc
    row = {"quantity": "iz", "m": args.dim, "mean_re": mc.mean.real, "mean_im": mc.mean.imag,
           "std_error": mc.std_error, "n_samples": mc.n_samples, "n_rejected": mc.n_rejected, "seed": mc.seed,
           "exact_re": res.exact.real, "exact_im": res.exact.imag, "rel_err": res.rel_err}
    return [row], EXIT_OK


def cmd_g24_check(args):
    _check_dim(args.dim)
    if args.dim < 2:
        raise UsageError("g24-check needs --dim >= 2")
    hseed = args.seed if args.matrix_seed is None else args.matrix_seed
    rng = np.random.default_rng(hseed)
    rows = []
    for k in range(args.matrices):
        a = rng.standard_normal((args.dim, args.dim)) + 1j * rng.standard_normal((args.dim, args.dim))
        h = (a + a.T) / 2
        second, fourth = claim_g24_check(args.dim, h, _samples(args), args.seed + k, args.workers)
        for name, res in (("second", second), ("fourth", fourth)):
            rows.append({**_est_row(res.mc, quantity=f"g24_{name}", m=args.dim, matrix=k),
                         "exact": res.exact, "rel_err": res.rel_err})
    return rows, EXIT_OK


def _exact_target(args) -> RationalFunction:
    if getattr(args, "expr", None):
        try:
            return parse_rational(args.expr)
        except ValueError as exc:
            raise UsageError(str(exc)) from exc
    _check_dim(args.dim, 4)
    if getattr(args, "index", None) is None:
        return cpm_total(args.dim)
    _check_index(args.dim, args.index)
    return cpm_expected_number(args.dim, args.index)


def _exact_rows(f: RationalFunction, args, **extra) -> list[dict]:
    row = {**extra, "exact": f.factored(), "expanded": str(f)}
    if args.at is not None:
        if args.at < 2:
            raise UsageError("--at must be >= 2")
        v = f(args.at)
        row.update({"N": args.at, "value": str(v), "value_float": float(v)})
    return [row]


def _print_exact(rows, args) -> int:
    if args.format == "table":
        r = rows[0]
        out = [r["exact"]]
        if args.expanded and r["expanded"] != r["exact"]:
            out.append(r["expanded"])
        if "N" in r:
            out.append(f"N={r['N']}: {r['value']} = {r['value_float']:.12g}")
        sys.stdout.write("\n".join(out) + "\n")
    else:
        sys.stdout.write(emit_table(rows, args.format))
    return EXIT_OK


def cmd_cpm_exact(args):
    if args.index is None:
        raise UsageError("--index is required")
    f = _exact_target(args)
    return _print_exact(_exact_rows(f, args, m=args.dim, q=args.index), args)


def cmd_cpm_total(args):
    _check_dim(args.dim, 4)
    return _print_exact(_exact_rows(cpm_total(args.dim), args, m=args.dim, q="total"), args)


def cmd_chern_check(args):
    _check_dim(args.dim, 4)
    try:
        got = chern_check(args.dim)
    except ChernCheckError as exc:
        sys.stderr.write(f"chern-check failed: {exc}\n")
        return EXIT_NUMERIC
    if args.format == "table":
        sys.stdout.write(f"{got}  OK\n")
    else:
        sys.stdout.write(emit_table([{"m": args.dim, "alternating_sum": str(got),
                                      "chern_polynomial": str(chern_polynomial(args.dim)), "ok": True}], args.format))
    return EXIT_OK


def _series_rows(s: LaurentSeries) -> list[dict]:
    rows = []
    for i, (c, d) in enumerate(zip(s.coeffs, s.degrees)):
        row = {"degree": d, "value": float(c), "exact": str(c) if s.exact[i] else ""}
        if s.std_errors is not None:
            row["std_error"] = s.std_errors[i]
        if s.labels is not None:
            row["label"] = s.labels[i]
        rows.append(row)
    return rows


def _print_series(s: LaurentSeries, args) -> int:
    if args.format == "table":
        sys.stdout.write(str(s) + "\n")
        if s.std_errors is not None:
            sys.stdout.write(emit_table(_series_rows(s), "table"))
    else:
        sys.stdout.write(emit_table(_series_rows(s), args.format))
    return EXIT_OK


def cmd_series(args):
    if args.expr is None and args.dim is None:
        raise UsageError("give --dim (with optional --index) or --expr")
    f = _exact_target(args)
    return _print_series(series_expand(f, args.terms), args)


def cmd_curve_expansion(args):
    if args.genus < 0 or args.degree < 1:
        raise UsageError("need --genus >= 0 and --degree >= 1")
    calabi = _number(args.calabi) if args.calabi is not None else None
    geom = CurveGeometry.round_sphere(args.degree) if calabi is None else CurveGeometry(args.genus, args.degree, calabi)
    if calabi is None and args.genus != 0:
        raise UsageError("--calabi is required unless genus is 0 (round sphere)")
    q = None if args.index == "total" else int(args.index)
    return _print_series(curve_expansion(geom, q), args)


def cmd_fit(args):
    _check_dim(args.dim)
    _check_index(args.dim, args.index)
    ladder = _ints(args.ladder)
    if min(ladder) < 2:
        raise UsageError("ladder values must be >= 2")
    data = []
    if args.exact:
        if args.model != "projective":
            raise UsageError("--exact data exists only for the projective model")
        vol = math.pi**args.dim / math.factorial(args.dim)
        f = _exact_target(argparse.Namespace(dim=args.dim, index=args.index, expr=None))
        data = [(n, float(f(n)) / vol) for n in ladder]
    else:
        for i, n in enumerate(ladder):
            prof = density_profile(_covariance(args.model, args.dim, n), _samples(args, args.dim), args.seed + i, args.workers)
            data.append((n, prof.total if args.index is None else prof.values[args.index]))
    try:
        s = fit_expansion(data, args.dim, args.terms)
    except np.linalg.LinAlgError as exc:
        raise UsageError(str(exc)) from exc
    return _print_series(s, args)


def cmd_sample_cp1(args):
    if args.N < 2:
        raise UsageError("--N must be >= 2")
    res = empirical_counts(args.N, args.trials, args.seed, args.workers, keep_records=bool(args.dump))
    if args.dump:
        with open(args.dump, "w", newline="") as fh:
            write_records_csv(res.records, fh)
    rows = []
    for name, est, f in (("saddles", res.saddles, cpm_expected_number(1, 1)),
                         ("maxima", res.maxima, cpm_expected_number(1, 2)),
                         ("total", res.total, cpm_total(1))):
        exact = float(f(args.N))
        rows.append({**_est_row(est, quantity=name, N=args.N), "exact": exact, "z": est.zscore(exact),
                     "euler_violation_rate": res.euler_violation_rate, "n_degenerate": res.n_degenerate})
    return rows, EXIT_OK


def cmd_verify(args):
    from .verify import CRITERIA, run_all

    only = _ints(args.criteria) if args.criteria else None
    if only and any(k not in CRITERIA for k in only):
        raise UsageError(f"criteria must be among {sorted(CRITERIA)}")
    results = run_all("quick" if args.quick else "full", only)
    for r in results:
        sys.stdout.write(r.line() + "\n")
        if args.verbose or not r.passed:
            for d in r.details:
                sys.stdout.write(f"    {d}\n")
    return EXIT_OK if all(r.passed for r in results) else EXIT_VERIFY


# ----------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="holocrit",
        description="Expected critical points of Gaussian random holomorphic sections.",
    )
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    fmt = argparse.ArgumentParser(add_help=False)
    fmt.add_argument("--format", choices=FORMATS, default="table")

    mc = argparse.ArgumentParser(add_help=False)
    mc.add_argument("--samples", type=_positive, default=None, help="Monte-Carlo sample count")
    mc.add_argument("--seed", type=_seed, default=0)
    mc.add_argument("--workers", type=_positive, default=None,
                    help="worker processes (default: $HOLOCRIT_WORKERS or 1)")

    def add(name, func, helptext, parents=(fmt,)):
        sp = sub.add_parser(name, help=helptext, description=helptext, parents=list(parents))
        sp.set_defaults(func=func)
        return sp

    sp = add("b0", cmd_b0, "leading universal density b0(m)", (fmt, mc))
    sp.add_argument("--dim", type=int, required=True)

    sp = add("b0q", cmd_b0q, "leading densities b0q(m) per Morse index", (fmt, mc))
    sp.add_argument("--dim", type=int, required=True)
    sp.add_argument("--index", type=int, default=None)

    sp = add("morse-table", cmd_morse_table, "leading coefficients of the CP^m counts per Morse index", (fmt, mc))
    sp.add_argument("--dim", type=int, required=True)

    sp = add("beta2q", cmd_beta2q, "Calabi coefficients beta_2q(m)", (fmt, mc))
    sp.add_argument("--dim", type=int, required=True)
    sp.add_argument("--index", type=int, default=None)
    sp.add_argument("--method", choices=METHODS + ("all",), default="baugher")

    sp = add("density", cmd_density, "critical-point density for a model jet covariance", (fmt, mc))
    sp.add_argument("--dim", type=int, required=True)
    sp.add_argument("--N", type=int, required=True)
    sp.add_argument("--index", type=int, default=None)
    sp.add_argument("--model", choices=("projective", "cp1xE"), default="projective")

    sp = add("iz-check", cmd_iz_check, "Haar average of exp(i Tr(D(xi) U D(lambda) U*)) vs closed form", (fmt, mc))
    sp.add_argument("--dim", type=int, required=True)
    sp.add_argument("--lambda", dest="lam", default=None, help="comma-separated eigenvalues")
    sp.add_argument("--xi", default=None, help="comma-separated eigenvalues")

    sp = add("g24-check", cmd_g24_check, "Haar second and fourth moments of (g H g^t)_11", (fmt, mc))
    sp.add_argument("--dim", type=int, required=True)
    sp.add_argument("--matrices", type=_positive, default=1)
    sp.add_argument("--matrix-seed", type=_seed, default=None)

    sp = add("cpm-exact", cmd_cpm_exact, "exact expected number of index-q critical points on CP^m")
    sp.add_argument("--dim", type=int, required=True)
    sp.add_argument("--index", type=int, default=None)
    sp.add_argument("--at", type=int, default=None, help="also evaluate at this N")
    sp.add_argument("--expanded", action="store_true", help="also print the expanded form")

    sp = add("cpm-total", cmd_cpm_total, "exact expected total number of critical points on CP^m")
    sp.add_argument("--dim", type=int, required=True)
    sp.add_argument("--at", type=int, default=None)
    sp.add_argument("--expanded", action="store_true")

    sp = add("chern-check", cmd_chern_check, "alternating sum of the exact counts vs the top Chern number")
    sp.add_argument("--dim", type=int, required=True)

    sp = add("series", cmd_series, "large-N expansion of an exact count or a rational expression")
    sp.add_argument("--dim", type=int, default=None)
    sp.add_argument("--index", type=int, default=None)
    sp.add_argument("--expr", default=None, help="rational function of N, e.g. 'N^2/(3*N-2)'")
    sp.add_argument("--terms", type=_positive, default=3)

    sp = add("curve-expansion", cmd_curve_expansion, "three-term expansion for a polarised curve")
    sp.add_argument("--genus", type=int, default=0)
    sp.add_argument("--degree", type=int, default=1)
    sp.add_argument("--calabi", default=None, help="integral of rho^2, e.g. 4pi or 12.5 (default: round sphere)")
    sp.add_argument("--index", choices=("1", "2", "total"), default="total")

    sp = add("fit", cmd_fit, "fit b0, b1, b2 from densities along a ladder of N", (fmt, mc))
    sp.add_argument("--dim", type=int, required=True)
    sp.add_argument("--index", type=int, default=None)
    sp.add_argument("--model", choices=("projective", "cp1xE"), default="projective")
    sp.add_argument("--ladder", default="10,20,40,80")
    sp.add_argument("--terms", type=int, choices=(1, 2, 3), default=3)
    sp.add_argument("--exact", action="store_true", help="use exact counts instead of Monte-Carlo")

    sp = add("sample-cp1", cmd_sample_cp1, "empirical critical points of random sections on CP^1", (fmt, mc))
    sp.add_argument("--N", type=int, required=True)
    sp.add_argument("--trials", type=_positive, default=2000)
    sp.add_argument("--dump", default=None, help="write every critical point to this CSV file")

    sp = sub.add_parser("verify", help="run the acceptance suite", description="run the acceptance suite")
    sp.set_defaults(func=cmd_verify)
    g = sp.add_mutually_exclusive_group()
    g.add_argument("--quick", action="store_true")
    g.add_argument("--full", action="store_true")
    sp.add_argument("--criteria", default=None, help="comma-separated criterion numbers")
    sp.add_argument("--verbose", action="store_true")
    return p


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if getattr(args, "workers", None) is None and hasattr(args, "workers"):
        args.workers = default_workers()
    try:
        out = args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        sys.stderr.write(f"holocrit: error: {exc}\n")
        return EXIT_USAGE
    except HARD_ERRORS as exc:
        sys.stderr.write(f"holocrit: numerical error: {exc}\n")
        return EXIT_NUMERIC
    if isinstance(out, int):
        return out
    rows, code = out
    sys.stdout.write(emit_table(rows, args.format))
    return code


if __name__ == "__main__":
    sys.exit(main())
