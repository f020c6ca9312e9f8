"""Command-line entry point: ``expcal <subcommand> ...``.

Exit codes: 0 success, 1 internal or solver failure, 2 invalid input or an
unsatisfiable calibration target. Every subcommand also accepts
``--config FILE.json``, an object whose keys mirror the long flags; flags
given on the command line take precedence.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import calibrate as cal
from .dataio import ParseError, read_logits_csv, write_logits_csv, write_report_json, write_rows_csv
from .metrics import DEFAULT_BINS, InvalidInputError, report
from .simulation import AGG_COLUMNS, REP_COLUMNS, aggregate, simulate
from .synthetic import TARGETS, GenerativeModel, corrupt_labels
from .theory.asymptotics import asymptotic_ece, fit_ec_asymptotic, fit_ts_asymptotic
from .theory.density import density_curves, joint_density_grid
from .theory.state_evolution import SEParams, se_fixed_point
from .theory.sweep import SWEEP_COLUMNS, optimize_lambda, relative_temperature_gap, sweep

logger = logging.getLogger("expcal")

EXIT_OK, EXIT_FAILURE, EXIT_INVALID = 0, 1, 2


class UsageError(Exception):
    pass


def parse_grid(spec: str) -> list[float]:
    """``"1,2,5"`` or ``"start:stop:num"`` (inclusive linspace)."""
    spec = str(spec).strip()
    try:
        if ":" in spec:
            a, b, n = spec.split(":")
            n = int(n)
            if n < 1:
                raise ValueError
            return [float(x) for x in np.linspace(float(a), float(b), n)]
        vals = [float(x) for x in spec.split(",") if x.strip()]
    except ValueError:
        raise UsageError(f"bad grid specification {spec!r}") from None
    if not vals:
        raise UsageError("empty grid")
    return vals


def parse_lambda(value: str):
    if value in ("error", "loss"):
        return value
    try:
        lam = float(value)
    except ValueError:
        raise UsageError(f"--lambda must be a positive number, 'error' or 'loss', got {value!r}") from None
    if not lam > 0:
        raise UsageError("--lambda must be positive")
    return lam


def parse_classes(value: str) -> list[int]:
    try:
        classes = [int(x) for x in str(value).split(",") if x.strip()]
    except ValueError:
        raise UsageError(f"bad class list {value!r}") from None
    if not classes:
        raise UsageError("class list must be non-empty")
    return classes


def _sibling(path: str, suffix: str) -> Path:
    p = Path(path)
    return p.with_name(f"{p.stem}.{suffix}{p.suffix or '.csv'}")


# --- subcommands -------------------------------------------------------------

def cmd_calibrate(args) -> int:
    data = read_logits_csv(args.logits)
    if args.method == "ec":
        fit = cal.fit_ec(data, args.tol, args.t_min, args.t_max)
    elif args.method == "ts":
        fit = cal.fit_ts(data, args.t_min, args.t_max)
    else:
        fit = cal.fit_ec_topn(data, args.n, args.tol, args.t_min, args.t_max)
    out = {
        "method": args.method,
        "n_samples": data.n,
        "n_classes": data.K,
        "fit": fit.to_dict(),
        "before": report(data, 1.0, args.bins),
        "after": report(data, fit.temperature, args.bins),
    }
    write_report_json(out, args.out, kind="calibration")
    print(f"{args.method}: T = {fit.temperature:.6g} (clamped={fit.clamped}); "
          f"ECE {out['before'].ece:.4f} -> {out['after'].ece:.4f}")
    return EXIT_OK


def cmd_simulate(args) -> int:
    model = GenerativeModel(args.target, T_star=args.t_star)
    lam = parse_lambda(args.lam)
    if isinstance(lam, str):
        raise UsageError("simulate needs a numeric --lambda")
    if args.reps < 1 or args.d < 1 or not args.alpha > 0:
        raise UsageError("need reps >= 1, d >= 1, alpha > 0")
    rows = simulate(model, args.alpha, args.d, lam, args.reps, args.seed, args.n_val, args.jobs)
    ov = se_fixed_point(SEParams(args.alpha, lam, model))
    agg = aggregate(rows, model, args.alpha, args.d, lam, (ov.m, ov.q))
    write_rows_csv(rows, REP_COLUMNS, args.out)
    write_rows_csv([agg], AGG_COLUMNS, _sibling(args.out, "aggregate"))
    print(f"{agg['n_ok']}/{len(rows)} repetitions ok; mean delta_T = {agg['delta_T_mean']}")
    return EXIT_OK if agg["n_ok"] > 0 else EXIT_FAILURE


def _se_kw(args) -> dict:
    return {"max_iter": args.max_iter, "tol": args.tol, "damping": args.damping}


def _se_rows(args, alphas, lam, targets):
    rows = sweep(alphas, [lam], targets, jobs=args.jobs, order=args.order, T_star=args.t_star, **_se_kw(args))
    for r in rows:
        r["delta_T"] = relative_temperature_gap(r)
    return rows


def cmd_state_evolution(args) -> int:
    rows = _se_rows(args, parse_grid(args.alpha_grid), parse_lambda(args.lam), [args.target])
    write_rows_csv(rows, SWEEP_COLUMNS + ("delta_T",), args.out)
    print(f"wrote {len(rows)} rows to {args.out}")
    return EXIT_OK


def cmd_sweep(args) -> int:
    targets = [t.strip() for t in args.targets.split(",") if t.strip()]
    for t in targets:
        if t not in TARGETS:
            raise UsageError(f"unknown target {t!r}")
    rows = _se_rows(args, parse_grid(args.alpha_grid), parse_lambda(args.lam), targets)
    write_rows_csv(rows, SWEEP_COLUMNS + ("delta_T",), args.out)
    print(f"wrote {len(rows)} rows to {args.out}")
    return EXIT_OK


def cmd_density(args) -> int:
    model = GenerativeModel(args.target, T_star=args.t_star)
    lam = parse_lambda(args.lam)
    if isinstance(lam, str):
        ov = optimize_lambda(args.alpha, model, lam, args.order, **_se_kw(args)).overlaps
    else:
        ov = se_fixed_point(SEParams(args.alpha, lam, model, order=args.order, **_se_kw(args)))
    temps = {"raw": 1.0,
             "TS": fit_ts_asymptotic(ov, model, args.order).temperature,
             "EC": fit_ec_asymptotic(ov, model, args.order).temperature}
    mass_rows, curve_rows, summary = [], [], []
    for name, T in temps.items():
        mass, edges = joint_density_grid(ov, model, T, args.grid)
        for i in range(args.grid):
            for j in range(args.grid):
                mass_rows.append({"method": name, "f_hat_lo": edges[i], "f_hat_hi": edges[i + 1],
                                  "f_star_lo": edges[j], "f_star_hi": edges[j + 1], "mass": mass[i, j]})
        ell, cond, diag = density_curves(ov, model, T)
        curve_rows += [{"method": name, "confidence": a, "conditional_mean": b, "diagonal": c}
                       for a, b, c in zip(ell, cond, diag)]
        summary.append({"method": name, "T": T, "ECE": asymptotic_ece(ov, model, T, args.order),
                        "ECE_half": asymptotic_ece(ov, model, T, args.order, domain="half"),
                        "m": ov.m, "q": ov.q, "converged": ov.converged})
    write_rows_csv(mass_rows, ("method", "f_hat_lo", "f_hat_hi", "f_star_lo", "f_star_hi", "mass"), args.out)
    write_rows_csv(curve_rows, ("method", "confidence", "conditional_mean", "diagonal"), _sibling(args.out, "curves"))
    write_rows_csv(summary, ("method", "T", "ECE", "ECE_half", "m", "q", "converged"), _sibling(args.out, "summary"))
    for s in summary:
        print(f"{s['method']:>3}: T = {s['T']:.4f}  ECE = {s['ECE']:.4f}  (half-line {s['ECE_half']:.4f})")
    return EXIT_OK


def cmd_corrupt(args) -> int:
    data = read_logits_csv(args.logits)
    classes = parse_classes(args.classes)
    if any(c < 0 or c >= data.K for c in classes):
        raise UsageError(f"class indices must lie in [0, {data.K})")
    touched = np.isin(data.labels, classes)
    if not touched.any():
        logger.warning("no sample carries a label in %s; nothing corrupted", classes)
    write_logits_csv(corrupt_labels(data, classes, args.seed), args.out)
    print(f"corrupted {int(touched.sum())}/{data.n} rows ({touched.mean():.1%})")
    return EXIT_OK


# --- parser ------------------------------------------------------------------

def _positive_int(s):
    v = int(s)
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="expcal", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, *required):
        # required flags are checked after the config file has been merged
        sp.add_argument("--config", help="JSON file with default values for the flags")
        sp.add_argument("--out")
        sp.set_defaults(_required=("out",) + required)
        return sp

    c = common(sub.add_parser("calibrate", help="fit EC or TS on a logits file"), "logits")
    c.add_argument("--logits")
    c.add_argument("--method", choices=("ec", "ts", "ec-topn"), default="ec")
    c.add_argument("--n", type=_positive_int, default=1, help="N for ec-topn")
    c.add_argument("--bins", type=_positive_int, default=DEFAULT_BINS)
    c.add_argument("--tol", type=float, default=1e-10)
    c.add_argument("--t-min", type=float, default=cal.T_MIN)
    c.add_argument("--t-max", type=float, default=cal.T_MAX)
    c.set_defaults(func=cmd_calibrate)

    def solver_flags(sp):
        sp.add_argument("--t-star", type=float, default=1.0)
        sp.add_argument("--order", type=_positive_int, default=100)
        sp.add_argument("--max-iter", type=_positive_int, default=10_000, help="fixed-point iteration budget")
        sp.add_argument("--tol", type=float, default=1e-9, help="fixed-point relative tolerance")
        sp.add_argument("--damping", type=float, default=0.5)

    def theory_flags(sp):
        solver_flags(sp)
        sp.add_argument("--jobs", type=_positive_int, default=1)

    s = common(sub.add_parser("simulate", help="finite-size ERM repetitions"), "alpha")
    s.add_argument("--alpha", type=float)
    s.add_argument("--d", type=_positive_int, default=200)
    s.add_argument("--lambda", dest="lam", default="1e-4")
    s.add_argument("--target", choices=TARGETS, default="logit")
    s.add_argument("--reps", type=_positive_int, default=50)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--n-val", type=_positive_int, default=None)
    s.add_argument("--t-star", type=float, default=1.0)
    s.add_argument("--jobs", type=_positive_int, default=1)
    s.set_defaults(func=cmd_simulate)

    e = common(sub.add_parser("state-evolution", help="fixed points and asymptotic metrics over an alpha grid"),
               "alpha_grid")
    e.add_argument("--alpha-grid")
    e.add_argument("--lambda", dest="lam", default="1e-4")
    e.add_argument("--target", choices=TARGETS, default="logit")
    theory_flags(e)
    e.set_defaults(func=cmd_state_evolution)

    w = common(sub.add_parser("sweep", help="relative temperature gap versus alpha for several targets"))
    w.add_argument("--alpha-grid", default="1:20:40")
    w.add_argument("--lambda", dest="lam", default="1e-4")
    w.add_argument("--targets", default=",".join(TARGETS))
    theory_flags(w)
    w.set_defaults(func=cmd_sweep)

    g = common(sub.add_parser("density", help="joint density of confidence and teacher probability"), "alpha")
    g.add_argument("--alpha", type=float)
    g.add_argument("--lambda", dest="lam", default="1e-4")
    g.add_argument("--target", choices=TARGETS, default="affine")
    g.add_argument("--grid", type=_positive_int, default=50)
    solver_flags(g)
    g.set_defaults(func=cmd_density)

    k = common(sub.add_parser("corrupt", help="replace labels of some classes by uniform random labels"),
               "logits", "classes")
    k.add_argument("--logits")
    k.add_argument("--classes", help="comma-separated class indices")
    k.add_argument("--seed", type=int, default=0)
    k.set_defaults(func=cmd_corrupt)
    return p


def _apply_config(parser, argv):
    """Parse ``argv``; values from ``--config`` become defaults that flags override."""
    args = parser.parse_args(argv)
    if args.config:
        try:
            cfg = json.loads(Path(args.config).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}") from None
        if not isinstance(cfg, dict):
            raise UsageError("config must be a JSON object")
        sub = parser._subparsers._group_actions[0].choices[args.command]
        known = {a.dest: a for a in sub._actions}
        defaults = {}
        for key, value in cfg.items():
            dest = "lam" if key == "lambda" else key.replace("-", "_")
            if dest not in known or dest in ("config", "help"):
                raise UsageError(f"unknown config key {key!r} for {args.command}")
            action = known[dest]
            try:
                defaults[dest] = action.type(value) if action.type and value is not None else value
            except (TypeError, ValueError, argparse.ArgumentTypeError):
                raise UsageError(f"bad value {value!r} for config key {key!r}") from None
            if action.choices is not None and defaults[dest] not in action.choices:
                raise UsageError(f"config key {key!r} must be one of {sorted(action.choices)}")
        sub.set_defaults(**defaults)
        args = parser.parse_args(argv)
    missing = [f"--{d.replace('_', '-')}" for d in args._required if getattr(args, d) is None]
    if missing:
        raise UsageError(f"missing required setting(s): {', '.join(missing)}")
    return args


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = _apply_config(parser, argv)
    except UsageError as exc:
        print(f"expcal: error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (UsageError, ParseError, InvalidInputError, cal.UnsatisfiableTargetError, ValueError) as exc:
        print(f"expcal: error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"expcal: error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except Exception as exc:
        logger.exception("internal failure")
        print(f"expcal: failure: {exc}", file=sys.stderr)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
