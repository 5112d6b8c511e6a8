"""Command-line front end.

Exit codes: 0 success, 1 numerical/check failure, 2 usage error.
``--json`` emits the machine-readable envelope (stable key order); the
default output is human-readable text.  The env var SERIALSUM_BUDGET
overrides the series-oracle work budget.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time

import numpy as np

from . import ar_model, lambda_sums
from .lambda_sums import (
    BudgetExceededError,
    FiniteSumSpec,
    RootMultiset,
    ShiftSpec,
)


class UsageError(ValueError):
    pass


def _parse_complex(text: str) -> complex:
    raw = text.strip().replace(" ", "")
    try:
        return complex(raw.replace("i", "j"))
    except ValueError:
        raise UsageError(f"cannot parse complex number {text!r}") from None


def _parse_complex_list(text: str) -> list[complex]:
    return [_parse_complex(part) for part in text.split(",") if part.strip()]


def _parse_int_list(text: str) -> list[int]:
    try:
        return [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise UsageError(f"cannot parse integer list {text!r}") from None


def _jsonify(obj):
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, dict):
        return {k: _jsonify(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonify(v) for v in obj]
    return obj


def _emit(args, command: str, inputs: dict, result: dict, err_estimate: float,
          started: float) -> None:
    envelope = {
        "command": command,
        "inputs": _jsonify(inputs),
        "result": _jsonify(result),
        "err_estimate": float(err_estimate),
        "elapsed_ms": (time.perf_counter() - started) * 1000.0,
    }
    if args.json:
        print(json.dumps(envelope))
        return
    print(f"{command}:")
    for key, val in envelope["result"].items():
        print(f"  {key} = {val}")
    print(f"  err_estimate = {envelope['err_estimate']:.3e}")


def _budget(args) -> int:
    if args.budget is not None:
        return args.budget
    env = os.environ.get("SERIALSUM_BUDGET")
    return int(float(env)) if env else lambda_sums.DEFAULT_BUDGET


def _resolve_S(args, n_lambdas: int) -> int:
    has_S = getattr(args, "S", None) is not None
    has_shifts = getattr(args, "shifts", None) is not None
    if has_S and has_shifts:
        raise UsageError("give either --S or --shifts, not both")
    if has_S:
        if args.S < 0:
            raise UsageError("--S must be >= 0")
        return args.S
    if has_shifts:
        shifts = _parse_int_list(args.shifts)
        if len(shifts) != n_lambdas:
            raise UsageError("--shifts must have one entry per lambda")
        return ShiftSpec(tuple(shifts)).S
    raise UsageError("one of --S or --shifts is required")


def _build_multiset(args) -> RootMultiset:
    lams = _parse_complex_list(args.lambdas)
    if args.mult:
        mults = _parse_int_list(args.mult)
        if len(mults) != len(lams):
            raise UsageError("--mult must have one entry per lambda")
        lams = [v for v, m in zip(lams, mults) for _ in range(m)]
    try:
        roots = RootMultiset.from_lambdas(lams)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if not args.allow_complex_result and not roots.is_conjugate_closed():
        raise UsageError(
            "root multiset is not closed under complex conjugation "
            "(pass --allow-complex-result to evaluate anyway)"
        )
    return roots


def _cmd_eval(args) -> int:
    started = time.perf_counter()
    roots = _build_multiset(args)
    S = _resolve_S(args, roots.ell)
    if roots.is_distinct():
        res = lambda_sums.f_distinct(roots, S)
        route = "distinct"
    else:
        res = lambda_sums.f_general(roots, S)
        route = "confluent"
    inputs = {
        "lambdas": list(roots.lambdas),
        "S": S,
    }
    result = {
        "value": res.value,
        "is_real_certified": res.is_real_certified,
        "route": route,
    }
    _emit(args, "eval", inputs, result, res.err_estimate, started)
    return 0


def _cmd_oracle_series(args) -> int:
    started = time.perf_counter()
    lams = _parse_complex_list(args.lambdas)
    if len(lams) < 2:
        raise UsageError("need at least two lambdas")
    S = _resolve_S(args, len(lams))
    res = lambda_sums.series_oracle(lams, S, args.tol, budget=_budget(args))
    inputs = {"lambdas": lams, "S": S, "tol": args.tol}
    result = {
        "value": res.value,
        "truncation_J": res.truncation,
        "is_real_certified": res.is_real_certified,
    }
    _emit(args, "oracle series", inputs, result, res.err_estimate, started)
    return 0


def _cmd_oracle_finite(args) -> int:
    started = time.perf_counter()
    lams = _parse_complex_list(args.lambdas)
    shifts = _parse_int_list(args.shifts)
    adjust = _parse_int_list(args.adjust) if args.adjust else []
    try:
        spec = FiniteSumSpec(tuple(lams), tuple(shifts), args.n, tuple(adjust))
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    value = lambda_sums.finite_sum(spec)
    inputs = {
        "lambdas": lams,
        "shifts": shifts,
        "n": args.n,
        "adjust": list(spec.upper_adjust),
    }
    result = {"value": value, "exact": True}
    _emit(args, "oracle finite", inputs, result, 0.0, started)
    return 0


def _cmd_conjecture(args) -> int:
    started = time.perf_counter()
    if args.ell not in (5, 6):
        raise UsageError("--ell must be 5 or 6 (smaller cases are proven)")
    report = lambda_sums.conjecture_probe(
        args.ell, args.trials, args.seed, args.tol, budget=_budget(args)
    )
    inputs = {
        "ell": args.ell,
        "trials": args.trials,
        "seed": args.seed,
        "tol": args.tol,
    }
    result = {
        "passed": report.passed,
        "failed": report.failed,
        "skipped": report.skipped,
        "trials": [
            {
                "lambdas": list(t.lambdas),
                "S": t.S,
                "status": t.status,
                "discrepancy": t.discrepancy,
                "oracle_err": t.oracle_err,
            }
            for t in report.trials
        ],
    }
    worst = max(
        (t.discrepancy for t in report.trials if t.discrepancy is not None),
        default=0.0,
    )
    if args.json:
        _emit(args, "conjecture", inputs, result, worst, started)
    else:
        print(f"conjecture ell={args.ell} tol={args.tol:g}")
        for i, t in enumerate(report.trials):
            lams = ", ".join(_format_complex(v) for v in t.lambdas)
            disc = f"{t.discrepancy:.3e}" if t.discrepancy is not None else "-"
            print(f"  [{i:3d}] {t.status:4s}  S={t.S}  disc={disc}  roots=({lams})")
        print(
            f"  summary: {report.passed} passed, {report.failed} failed, "
            f"{report.skipped} skipped"
        )
    return 0 if report.ok else 1


def _format_complex(z: complex) -> str:
    if z.imag == 0:
        return f"{z.real:.6g}"
    sign = "+" if z.imag >= 0 else "-"
    return f"{z.real:.6g}{sign}{abs(z.imag):.6g}i"


def _cmd_ar(args) -> int:
    started = time.perf_counter()
    alphas = [float(a) for a in args.alpha.split(",") if a.strip()]
    if not alphas:
        raise UsageError("--alpha requires at least one coefficient")
    inputs = {"alpha": alphas}

    if args.ar_command == "roots":
        cr = ar_model.char_roots(alphas)
        result = {
            "roots": list(cr.roots),
            "stationary": cr.stationary,
        }
        _emit(args, "ar roots", inputs, result, 0.0, started)
        return 0

    if args.ar_command == "acf":
        inputs["jmax"] = args.jmax
        model, rhos = ar_model.acf(alphas, args.jmax)
        result = {
            "roots": list(model.roots),
            "coefficients": list(model.coeffs),
            "rho": rhos,
        }
        _emit(args, "ar acf", inputs, result, 0.0, started)
        return 0

    model = ar_model.ARModel(tuple(alphas), args.sigma)

    if args.ar_command == "simulate":
        inputs.update({"sigma": args.sigma, "n": args.n, "seed": args.seed})
        sample = ar_model.simulate(model, args.n, args.burn_in, args.seed)
        ar_model.write_csv(sample, args.out)
        result = {"rows": sample.n, "burn_in": sample.burn_in, "path": args.out}
        _emit(args, "ar simulate", inputs, result, 0.0, started)
        return 0

    # check: batch-mean empirical ACF across seeds vs the theoretical values
    inputs.update(
        {"sigma": args.sigma, "n": args.n, "seed": args.seed,
         "seeds": args.seeds, "jmax": args.jmax}
    )
    _, rhos = ar_model.acf(alphas, args.jmax)
    per_seed = []
    for s in range(args.seed, args.seed + args.seeds):
        sample = ar_model.simulate(model, args.n, args.burn_in, s)
        per_seed.append(ar_model.empirical_acf(sample, args.jmax))
    batch = np.asarray(per_seed)
    means = batch.mean(axis=0)
    ses = batch.std(axis=0, ddof=1) / np.sqrt(args.seeds)
    zs = [0.0]
    for j in range(1, args.jmax + 1):
        zs.append(float((means[j] - rhos[j]) / ses[j]) if ses[j] > 0 else 0.0)
    ok = all(abs(z) <= args.zmax for z in zs[1:])
    result = {
        "rho_theoretical": rhos,
        "rho_empirical": means.tolist(),
        "z_scores": zs,
        "z_max_allowed": args.zmax,
        "ok": ok,
    }
    _emit(args, "ar check", inputs, result, float(np.max(ses)), started)
    return 0 if ok else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="serialsum",
        description="Limits of cyclic geometric lattice sums and an AR(k) toolkit.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--json", action="store_true", help="emit JSON envelope")
        p.add_argument("--budget", type=int, default=None,
                       help="series-oracle work budget override")

    p = sub.add_parser("eval", help="evaluate the closed-form limit")
    p.add_argument("--lambdas", required=True)
    p.add_argument("--mult", default=None)
    p.add_argument("--S", type=int, default=None)
    p.add_argument("--shifts", default=None)
    p.add_argument("--allow-complex-result", action="store_true")
    add_common(p)
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("oracle", help="brute-force oracles")
    osub = p.add_subparsers(dest="oracle_command", required=True)

    ps = osub.add_parser("series", help="truncated infinite-lattice sum")
    ps.add_argument("--lambdas", required=True)
    ps.add_argument("--S", type=int, default=None)
    ps.add_argument("--shifts", default=None)
    ps.add_argument("--tol", type=float, default=1e-10)
    add_common(ps)
    ps.set_defaults(func=_cmd_oracle_series)

    pf = osub.add_parser("finite", help="exact finite-n cyclic sum")
    pf.add_argument("--lambdas", required=True)
    pf.add_argument("--shifts", required=True)
    pf.add_argument("--n", type=int, required=True)
    pf.add_argument("--adjust", default=None)
    add_common(pf)
    pf.set_defaults(func=_cmd_oracle_finite)

    p = sub.add_parser("conjecture", help="probe the closed form at ell in {5,6}")
    p.add_argument("--ell", type=int, required=True)
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tol", type=float, default=1e-8)
    add_common(p)
    p.set_defaults(func=_cmd_conjecture)

    p = sub.add_parser("ar", help="AR(k) toolkit")
    asub = p.add_subparsers(dest="ar_command", required=True)
    for name, helptext in [
        ("roots", "characteristic roots and stationarity"),
        ("acf", "theoretical serial correlations"),
        ("simulate", "simulate a series to CSV"),
        ("check", "simulate and compare empirical vs theoretical ACF"),
    ]:
        pa = asub.add_parser(name, help=helptext)
        pa.add_argument("--alpha", required=True)
        if name in ("acf", "check"):
            pa.add_argument("--jmax", type=int, default=3)
        if name in ("simulate", "check"):
            pa.add_argument("--sigma", type=float, default=1.0)
            pa.add_argument("--n", type=int, required=True)
            pa.add_argument("--seed", type=int, default=0)
            pa.add_argument("--burn-in", type=int, default=None, dest="burn_in")
        if name == "simulate":
            pa.add_argument("--out", required=True)
        if name == "check":
            pa.add_argument("--seeds", type=int, default=20)
            pa.add_argument("--zmax", type=float, default=4.0)
        add_common(pa)
        pa.set_defaults(func=_cmd_ar)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if exc.code is not None else 2
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except BudgetExceededError as exc:
        payload = {
            "command": args.command,
            "error": "BudgetExceeded",
            "message": str(exc),
            "achievable_bound": exc.achievable_bound,
        }
        if getattr(args, "json", False):
            print(json.dumps(payload))
        else:
            print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ar_model.NotStationaryError, ar_model.AcfConfluentError,
            ar_model.BadLagError, ar_model.DegenerateSampleError,
            RuntimeError) as exc:
        payload = {
            "command": args.command,
            "error": type(exc).__name__,
            "message": str(exc),
        }
        if getattr(args, "json", False):
            print(json.dumps(payload))
        else:
            print(f"error: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
