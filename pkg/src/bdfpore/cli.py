"""Command line interface: ``bdfpore <subcommand> [options]``.

Subcommands
-----------
coeffs       coefficient tables of the q-step method
stability    multiplier and coupling-threshold checks
converge     convergence table from a JSON experiment config
sweep        omega x tau error grid for the matrix ODE
consistency  observed order of the discrete derivative

Exit codes: 0 on success (rows that diverged are data, not failures),
1 on an internal numerical failure, 2 on usage or configuration errors.
"""

import argparse
import csv
import io
import json
import math
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from .bdf import consistency_probe, make_scheme
from .exceptions import ConfigError, DegeneracyError, DivergenceError, RootFindingError, SingularMatrixError
from .harness import ExperimentConfig, run_convergence, run_sweep
from .polynomial import as_fraction
from .stability import (
    Multiplier,
    check_A_condition,
    check_positivity_property,
    default_multiplier,
    necessary_condition_witness,
    run_scalar_recursion,
    toeplitz_positivity,
)

NUMERICAL_ERRORS = (DivergenceError, SingularMatrixError, RootFindingError, DegeneracyError, np.linalg.LinAlgError)


class UsageError(Exception):
    pass


def _emit(args, stem, csv_text, payload):
    """Write ``<stem>.csv`` and/or ``<stem>.json`` under ``--out``."""
    if args.out is None:
        return []
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    if args.format in (None, "csv"):
        path = out / f"{stem}.csv"
        path.write_text(csv_text)
        written.append(path)
    if args.format in (None, "json"):
        path = out / f"{stem}.json"
        path.write_text(json.dumps(payload, indent=2, default=str) + "\n")
        written.append(path)
    return written


def _csv(header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _ints(poly_scaled):
    lcm, ints = poly_scaled
    return lcm, list(ints)


def cmd_coeffs(args):
    if not 1 <= args.q <= 6:
        raise UsageError(f"q must be in 1..6, got {args.q}")
    s = make_scheme(args.q)
    tables = {
        "alpha": s.alpha_poly,
        "gamma": s.gamma_poly,
        "alpha_tilde": s.alpha_tilde_poly,
        "alpha_hat": s.alpha_hat_poly,
    }
    if args.m is not None:
        tables["alpha_check"] = s.composite(as_fraction(args.m))
    rows, payload = [], {"q": args.q, "threshold": str(s.threshold)}
    print(f"q = {args.q}, coupling threshold 1/{2 ** args.q - 1}")
    for name, poly in tables.items():
        lcm, ints = _ints(poly.scaled_to_integers())
        print(f"{lcm} * {name} = ({', '.join(str(i) for i in ints)})  [ascending powers]")
        rows.append([name, lcm] + ints)
        payload[name] = {"scale": lcm, "coefficients": ints, "exact": [str(c) for c in poly.coeffs]}
    width = max(len(r) for r in rows)
    header = ["table", "scale"] + [f"c{i}" for i in range(width - 2)]
    _emit(args, f"coeffs_q{args.q}", _csv(header, rows), payload)
    return 0


def _parse_multiplier(text, q):
    if text is None:
        return default_multiplier(q)
    try:
        mu = [Fraction(v.strip()) for v in text.split(",")]
    except ValueError:
        raise UsageError(f"bad multiplier {text!r}") from None
    if len(mu) != q:
        raise UsageError(f"multiplier needs {q} entries, got {len(mu)}")
    return Multiplier(mu)


def cmd_stability(args):
    if not 1 <= args.q <= 6:
        raise UsageError(f"q must be in 1..6, got {args.q}")
    if args.m_grid < 2:
        raise UsageError("--m-grid needs at least 2 points")
    s = make_scheme(args.q)
    mult = _parse_multiplier(args.multiplier, args.q)
    pos = check_positivity_property(mult, args.margin)
    print(f"multiplier {tuple(str(m) for m in mult.mu_exact)}")
    print(f"positivity: min {pos.min_value:.9g} at cos(phi) = {pos.argmin_x:.9g}, "
          f"margin {pos.margin:g}, residual {pos.residual:.9g} -> {'pass' if pos.passed else 'FAIL'}")
    ms = [s.threshold * Fraction(k, args.m_grid - 1) for k in range(args.m_grid)]
    rows = []
    for m in ms:
        r = check_A_condition(s, m, mult)
        rows.append([str(m), f"{float(m):.10g}", r.passed, f"{r.max_root_modulus:.6g}",
                     f"{r.min_real_part:.6g}", f"{r.leading_ratio:.6g}"])
    n_pass = sum(1 for r in rows if r[2])
    print(f"A-condition on m in [0, {s.threshold}] ({len(ms)} points): {n_pass}/{len(ms)} pass")
    ell = 1.5 * float(s.threshold)
    wit = necessary_condition_witness(args.q, ell)
    payload = {
        "q": args.q,
        "multiplier": [str(m) for m in mult.mu_exact],
        "positivity": {"min": pos.min_value, "argmin_x": pos.argmin_x, "margin": pos.margin,
                       "residual": pos.residual, "passed": pos.passed},
        "a_condition": [dict(zip(["m", "m_float", "passed", "max_root_modulus", "min_real_part",
                                  "leading_ratio"], r)) for r in rows],
    }
    if wit is not None:
        rec = run_scalar_recursion(args.q, ell, wit.x_star, 500, np.ones(2 * args.q))
        print(f"coupling 1.5 x threshold: zeta* = {wit.zeta_star:.6g}, x* = {wit.x_star:.6g}, "
              f"growth over 500 steps {rec.growth:.3g}")
        payload["witness"] = {"ell": ell, "zeta_star": wit.zeta_star, "x_star": wit.x_star,
                              "growth_500": rec.growth}
    if mult.q >= 1 and 2 * mult.q <= args.toeplitz_n:
        tp = toeplitz_positivity(mult, n=args.toeplitz_n)
        print(f"Toeplitz: generating min {tp.generating_min:.6g}, symmetric part eigenvalues "
              f"[{tp.symmetric_min_eig:.6g}, {tp.symmetric_max_eig:.6g}] -> {'pass' if tp.passed else 'FAIL'}")
        payload["toeplitz"] = {"generating_min": tp.generating_min, "generating_max": tp.generating_max,
                               "min_eig": tp.symmetric_min_eig, "max_eig": tp.symmetric_max_eig,
                               "passed": tp.passed}
    header = ["m", "m_float", "passed", "max_root_modulus", "min_real_part", "leading_ratio"]
    _emit(args, f"stability_q{args.q}", _csv(header, rows), payload)
    return 0


def _load_config(args):
    if args.config is None:
        raise UsageError("--config is required")
    return ExperimentConfig.from_json(args.config)


def _out_from_config(args, config):
    if args.out is None and config.output.get("dir"):
        args.out = config.output["dir"]


def cmd_converge(args):
    config = _load_config(args)
    _out_from_config(args, config)
    traj = None
    if args.trajectory:
        traj = Path(args.out or ".") / "trajectories"
    report = run_convergence(config, jobs=args.jobs, trajectory_dir=traj)
    print(report.summary())
    stem = config.output.get("stem", f"converge_q{config.q}_{config.mode}")
    _emit(args, stem, report.to_csv(), report.to_dict())
    return 0


def cmd_sweep(args):
    config = _load_config(args)
    _out_from_config(args, config)
    sweep = run_sweep(config, jobs=args.jobs)
    print(sweep.summary(args.factor))
    stem = config.output.get("stem", f"sweep_q{config.q}_{config.mode}")
    _emit(args, stem, sweep.to_csv(), sweep.to_dict())
    return 0


def cmd_consistency(args):
    qs = range(1, 7) if args.q is None else [args.q]
    try:
        taus = [Fraction(t) for t in args.taus.split(",")]
    except (ValueError, ZeroDivisionError):
        raise UsageError(f"bad --taus {args.taus!r}") from None
    if len(taus) < 2:
        raise UsageError("--taus needs at least two step sizes")
    rows, payload = [], {}
    for q in qs:
        if not 1 <= q <= 6:
            raise UsageError(f"q must be in 1..6, got {q}")
        res = consistency_probe(make_scheme(q), np.sin, np.cos, taus)
        slopes = [float("nan")] + list(res.slopes)
        for t, d, sl in zip(taus, res.defects, slopes):
            rows.append([q, str(t), f"{d:.6g}", "" if math.isnan(sl) else f"{sl:.4f}"])
        print(f"q={q}: slopes " + ", ".join(f"{x:.4f}" for x in res.slopes))
        payload[str(q)] = {"taus": [str(t) for t in taus], "defects": list(map(float, res.defects)),
                           "slopes": list(map(float, res.slopes))}
    _emit(args, "consistency", _csv(["q", "tau", "defect", "slope"], rows), payload)
    return 0


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help="directory for CSV/JSON output")
    common.add_argument("--format", choices=("csv", "json"), help="emit only this format (default: both)")
    common.add_argument("--jobs", type=int, default=1, help="parallel worker processes")

    parser = argparse.ArgumentParser(prog="bdfpore", description="BDF schemes for elliptic-parabolic systems")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("coeffs", parents=[common], help="print coefficient tables")
    p.add_argument("q", type=int)
    p.add_argument("--m", help="also print alpha_tilde + m*alpha_hat (e.g. 1/63)")
    p.set_defaults(func=cmd_coeffs)

    p = sub.add_parser("stability", parents=[common], help="multiplier and threshold checks")
    p.add_argument("--q", type=int, default=6)
    p.add_argument("--m-grid", type=int, default=66, help="number of m values in [0, threshold]")
    p.add_argument("--multiplier", help="comma separated mu_1..mu_q, fractions allowed")
    p.add_argument("--margin", default="0", help="required lower bound in the positivity check")
    p.add_argument("--toeplitz-n", type=int, default=24)
    p.set_defaults(func=cmd_stability)

    p = sub.add_parser("converge", parents=[common], help="convergence table from a config")
    p.add_argument("--config")
    p.add_argument("--trajectory", action="store_true", help="dump per-step errors")
    p.set_defaults(func=cmd_converge)

    p = sub.add_parser("sweep", parents=[common], help="omega x tau error grid")
    p.add_argument("--config")
    p.add_argument("--factor", type=float, default=1e3, help="blow-up factor over the omega=0 error")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("consistency", parents=[common], help="order of the discrete derivative")
    p.add_argument("--q", type=int)
    p.add_argument("--taus", default="1/10,1/20,1/40")
    p.set_defaults(func=cmd_consistency)
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if getattr(args, "jobs", 1) < 1:
        print("error: --jobs must be positive", file=sys.stderr)
        return 2
    try:
        return args.func(args)
    except (UsageError, ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NUMERICAL_ERRORS as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
