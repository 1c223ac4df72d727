"""Experiment configuration, convergence tables and coupling sweeps."""

import csv
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from .bdf import make_scheme
from .exceptions import ConfigError, DivergenceError, UnsupportedOrderError
from .polynomial import as_fraction
from .steppers import StepperRun, integrate, write_trajectory
from .systems import make_matrix_ode_system, make_poroelastic_system, matrix_ode_solution, poroelastic_solution

__all__ = [
    "ExperimentConfig",
    "ConvergenceRow",
    "ConvergenceReport",
    "SweepReport",
    "compute_rates",
    "build_system",
    "run_convergence",
    "run_sweep",
    "detect_threshold",
    "default_sweep_omegas",
]

CSV_HEADER = ["tau", "err_u", "rate_u", "err_p", "rate_p", "status"]
POROELASTIC_KEYS = {"N": 20, "eta": 0.3, "mu": 0.3, "lambda": 0.3, "M": 0.1, "kappa": 0.05}


def default_sweep_omegas(n=25, lo=0.01, hi=0.025):
    """Log-spaced coupling strengths bracketing 1/63."""
    return [float(w) for w in np.geomspace(lo, hi, n)]


@dataclass
class ExperimentConfig:
    """Validated experiment description, usually read from a JSON document.

    ``tau_list`` entries are kept as exact fractions so that the number
    of steps ``T / tau`` can be checked for integrality.
    """

    system: dict
    q: int = 6
    mode: str = "imex"
    tau_list: list = field(default_factory=lambda: [Fraction(1, 50), Fraction(1, 100)])
    final_time: Fraction = Fraction(1)
    omega_list: list = None
    output: dict = field(default_factory=dict)
    seed_mode: str = "exact-nodal"
    reduced: bool = False

    def __post_init__(self):
        if not isinstance(self.system, dict) or self.system.get("kind") not in ("matrix-ode", "poroelastic"):
            raise ConfigError("system.kind must be 'matrix-ode' or 'poroelastic'")
        try:
            make_scheme(self.q)
        except UnsupportedOrderError as exc:
            raise ConfigError(str(exc)) from None
        if self.mode not in ("implicit", "imex"):
            raise ConfigError(f"scheme.mode must be 'implicit' or 'imex', got {self.mode!r}")
        if self.seed_mode != "exact-nodal":
            raise ConfigError(f"unsupported seed_mode {self.seed_mode!r}")
        try:
            self.tau_list = [as_fraction(t) for t in self.tau_list]
            self.final_time = as_fraction(self.final_time)
        except (ValueError, TypeError, ZeroDivisionError) as exc:
            raise ConfigError(f"bad tau_list or final_time: {exc}") from None
        if not self.tau_list:
            raise ConfigError("tau_list is empty")
        if any(t <= 0 for t in self.tau_list) or self.final_time <= 0:
            raise ConfigError("step sizes and final time must be positive")
        if any(a <= b for a, b in zip(self.tau_list, self.tau_list[1:])):
            raise ConfigError("tau_list must be strictly decreasing")
        for t in self.tau_list:
            if (self.final_time / t).denominator != 1:
                raise ConfigError(f"final_time {self.final_time} is not a multiple of tau {t}")
            if self.final_time / t < self.q:
                raise ConfigError(f"tau {t} gives fewer than q steps")
        if self.omega_list is not None:
            self.omega_list = [float(w) for w in self.omega_list]
            if any(w < 0 for w in self.omega_list):
                raise ConfigError("omega_list entries must be non-negative")
        build_system(self.system, dry_run=True)

    @classmethod
    def from_dict(cls, data):
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        scheme = data.get("scheme", {})
        known = {"system", "scheme", "tau_list", "final_time", "omega_list", "output", "seed_mode"}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        if "system" not in data:
            raise ConfigError("config needs a 'system' block")
        kwargs = {"system": data["system"]}
        if "q" in scheme:
            kwargs["q"] = scheme["q"]
        if "mode" in scheme:
            kwargs["mode"] = scheme["mode"]
        if "reduced" in scheme:
            kwargs["reduced"] = bool(scheme["reduced"])
        for key in ("tau_list", "final_time", "omega_list", "output", "seed_mode"):
            if key in data:
                kwargs[key] = data[key]
        return cls(**kwargs)

    @classmethod
    def from_json(cls, path):
        try:
            with open(path) as fh:
                data = json.load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from None
        return cls.from_dict(data)

    def n_steps(self, tau):
        return int(self.final_time / tau)


def build_system(block, omega=None, dry_run=False):
    """Assemble the system described by a config ``system`` block.

    ``omega`` overrides the block's coupling strength for the matrix ODE.
    With ``dry_run`` only the parameters are validated.
    """
    kind = block.get("kind")
    params = {k: v for k, v in block.items() if k != "kind"}
    if kind == "matrix-ode":
        extra = set(params) - {"omega"}
        if extra:
            raise ConfigError(f"unknown matrix-ode parameters: {sorted(extra)}")
        w = params.get("omega", 0.0) if omega is None else omega
        if not isinstance(w, (int, float)) or w < 0:
            raise ConfigError("matrix-ode omega must be a non-negative number")
        return None if dry_run else make_matrix_ode_system(w)
    if kind == "poroelastic":
        extra = set(params) - set(POROELASTIC_KEYS)
        if extra:
            raise ConfigError(f"unknown poroelastic parameters: {sorted(extra)}")
        p = {**POROELASTIC_KEYS, **params}
        if not isinstance(p["N"], int) or p["N"] < 8:
            raise ConfigError("N must be an integer >= 8")
        if not isinstance(p["eta"], (int, float)) or p["eta"] < 0:
            raise ConfigError("eta must be a non-negative number")
        for k in ("mu", "lambda", "M", "kappa"):
            if not isinstance(p[k], (int, float)) or p[k] <= 0:
                raise ConfigError(f"{k} must be a positive number")
        if omega is not None:
            raise ConfigError("omega cannot be overridden for the poroelastic system")
        if dry_run:
            return None
        return make_poroelastic_system(p["N"], p["eta"], p["mu"], p["lambda"], p["M"], p["kappa"])
    raise ConfigError(f"unknown system kind {kind!r}")


def solution_for(system):
    if system.kind == "matrix-ode":
        return matrix_ode_solution(system)
    return poroelastic_solution(system)


def compute_rates(errors, taus):
    """Observed orders ``log(e_{k-1}/e_k) / log(tau_{k-1}/tau_k)``.

    Returns a list aligned with the inputs; the first entry and entries
    touching a non-positive or non-finite error are ``None``.
    """
    if len(errors) != len(taus):
        raise ValueError("errors and taus must have equal length")
    if len(errors) < 2:
        raise ValueError("need at least two errors")
    rates = [None]
    for (e0, t0), (e1, t1) in zip(zip(errors, taus), zip(errors[1:], taus[1:])):
        ok = all(e is not None and math.isfinite(e) and e > 0 for e in (e0, e1))
        rates.append(math.log(e0 / e1) / math.log(float(t0) / float(t1)) if ok else None)
    return rates


# ---------------------------------------------------------------------------
# reports


def _fmt_err(e):
    return "" if e is None or not math.isfinite(e) else f"{e:.6g}"


def _fmt_rate(r):
    return "" if r is None else f"{r:.4f}"


def _parse(s):
    return None if s == "" else float(s)


@dataclass
class ConvergenceRow:
    tau: Fraction
    err_u: float
    err_p: float
    rate_u: float = None
    rate_p: float = None
    status: str = "ok"
    err_u_energy: float = None

    def csv_fields(self):
        return [str(self.tau), _fmt_err(self.err_u), _fmt_rate(self.rate_u),
                _fmt_err(self.err_p), _fmt_rate(self.rate_p), self.status]


@dataclass
class ConvergenceReport:
    """Error table with pairwise observed orders, one row per step size."""

    rows: list
    metadata: dict = field(default_factory=dict)

    @classmethod
    def from_rows(cls, rows, metadata=None):
        rows = list(rows)
        if len(rows) >= 2:
            taus = [r.tau for r in rows]
            ok = [r.status == "ok" for r in rows]
            eu = [r.err_u if k else None for r, k in zip(rows, ok)]
            ep = [r.err_p if k else None for r, k in zip(rows, ok)]
            for r, ru, rp in zip(rows, compute_rates(eu, taus), compute_rates(ep, taus)):
                r.rate_u, r.rate_p = ru, rp
        return cls(rows=rows, metadata=dict(metadata or {}))

    def rates(self, which="p"):
        return [getattr(r, f"rate_{which}") for r in self.rows[1:]]

    def to_csv(self, path=None):
        lines = [",".join(CSV_HEADER)] + [",".join(r.csv_fields()) for r in self.rows]
        text = "\n".join(lines) + "\n"
        if path is not None:
            Path(path).write_text(text)
        return text

    @classmethod
    def from_csv(cls, text):
        reader = csv.DictReader(text.splitlines())
        if reader.fieldnames != CSV_HEADER:
            raise ValueError(f"unexpected CSV header {reader.fieldnames}")
        rows = [
            ConvergenceRow(
                tau=Fraction(d["tau"]), err_u=_parse(d["err_u"]), err_p=_parse(d["err_p"]),
                rate_u=_parse(d["rate_u"]), rate_p=_parse(d["rate_p"]), status=d["status"],
            )
            for d in reader
        ]
        return cls(rows=rows)

    def to_dict(self):
        rows = []
        for r in self.rows:
            d = asdict(r)
            d["tau"] = str(r.tau)
            rows.append(d)
        return {"metadata": self.metadata, "rows": rows}

    def to_json(self, path=None):
        text = json.dumps(self.to_dict(), indent=2, default=str)
        if path is not None:
            Path(path).write_text(text + "\n")
        return text

    def summary(self):
        m = self.metadata
        head = f"q={m.get('q')} mode={m.get('mode')} omega={m.get('omega', float('nan')):.6g}"
        lines = [head, f"{'tau':>8} {'err_u':>12} {'rate_u':>8} {'err_p':>12} {'rate_p':>8}  status"]
        for r in self.rows:
            lines.append(
                f"{str(r.tau):>8} {_fmt_err(r.err_u):>12} {_fmt_rate(r.rate_u):>8} "
                f"{_fmt_err(r.err_p):>12} {_fmt_rate(r.rate_p):>8}  {r.status}"
            )
        return "\n".join(lines)


def _run_point(system_block, q, mode, reduced, tau, final_time, omega=None, trajectory_path=None):
    system = build_system(system_block, omega=omega)
    scheme = make_scheme(q)
    tau = Fraction(tau)
    n_steps = int(Fraction(final_time) / tau)
    run = StepperRun(scheme, system, float(tau), n_steps, mode, solution_for(system))
    try:
        res = integrate(run, reduced=reduced, trajectory=trajectory_path is not None)
    except DivergenceError:
        return ConvergenceRow(tau=tau, err_u=float("nan"), err_p=float("nan"), status="diverged")
    if trajectory_path is not None:
        write_trajectory(trajectory_path, res.trajectory)
    return ConvergenceRow(
        tau=tau, err_u=res.err_u, err_p=res.err_p,
        status="diverged" if res.diverged else "ok", err_u_energy=res.err_u_energy,
    )


def _map(jobs, fn, arglists):
    if jobs is None or jobs <= 1 or len(arglists) <= 1:
        return [fn(*a) for a in arglists]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        futures = [pool.submit(fn, *a) for a in arglists]
        return [f.result() for f in futures]


def _metadata(config, system, omega):
    return {
        "q": config.q,
        "mode": config.mode,
        "reduced": config.reduced,
        "system": config.system.get("kind"),
        "omega": float(omega),
        "final_time": str(config.final_time),
        "norm_u": "discrete H1" if system.kind == "poroelastic" else "euclidean",
        "norm_p": "weighted discrete L2" if system.kind == "poroelastic" else "euclidean",
    }


def run_convergence(config, jobs=1, trajectory_dir=None):
    """Run the configured scheme for every step size and tabulate the errors."""
    system = build_system(config.system)
    traj = None
    if trajectory_dir is not None:
        Path(trajectory_dir).mkdir(parents=True, exist_ok=True)
        traj = [str(Path(trajectory_dir) / f"trajectory_tau_{t.numerator}_{t.denominator}.csv")
                for t in config.tau_list]
    args = [
        (config.system, config.q, config.mode, config.reduced, str(t), str(config.final_time), None,
         None if traj is None else traj[k])
        for k, t in enumerate(config.tau_list)
    ]
    rows = _map(jobs, _run_point, args)
    return ConvergenceReport.from_rows(rows, _metadata(config, system, system.omega))


@dataclass
class SweepReport:
    """Errors on an omega x tau grid, sorted by tau then omega."""

    omegas: list
    taus: list
    reports: dict  # omega -> ConvergenceReport
    baseline: dict  # tau -> error at omega = 0
    metadata: dict = field(default_factory=dict)

    def error(self, omega, tau):
        for r in self.reports[omega].rows:
            if r.tau == tau:
                return r
        raise KeyError((omega, tau))

    def to_csv(self, path=None):
        lines = ["omega," + ",".join(CSV_HEADER)]
        for tau in self.taus:
            for w in self.omegas:
                lines.append(f"{w!r}," + ",".join(self.error(w, tau).csv_fields()))
        text = "\n".join(lines) + "\n"
        if path is not None:
            Path(path).write_text(text)
        return text

    def to_dict(self):
        return {
            "metadata": self.metadata,
            "thresholds": {str(t): w for t, w in detect_threshold(self).items()},
            "baseline": {str(t): e for t, e in self.baseline.items()},
            "reports": {repr(w): self.reports[w].to_dict() for w in self.omegas},
        }

    def to_json(self, path=None):
        text = json.dumps(self.to_dict(), indent=2, default=str)
        if path is not None:
            Path(path).write_text(text + "\n")
        return text

    def summary(self, factor=1e3):
        lines = [f"sweep q={self.metadata.get('q')} mode={self.metadata.get('mode')}"]
        for tau, w in detect_threshold(self, factor).items():
            shown = "none in range" if w is None else f"{w:.6g}"
            lines.append(f"tau={tau}: error exceeds {factor:g} x baseline first at omega = {shown}")
        return "\n".join(lines)


def run_sweep(config, omegas=None, jobs=1):
    """Final-time pressure errors of the matrix ODE over a grid of coupling strengths."""
    if config.system.get("kind") != "matrix-ode":
        raise ConfigError("sweeps are defined for the matrix-ode system only")
    omegas = sorted(set(omegas or config.omega_list or default_sweep_omegas()))
    grid = [0.0] + [w for w in omegas if w != 0.0]
    args = [
        (config.system, config.q, config.mode, config.reduced, str(t), str(config.final_time), w, None)
        for w in grid
        for t in config.tau_list
    ]
    flat = _map(jobs, _run_point, args)
    k = len(config.tau_list)
    reports = {}
    for i, w in enumerate(grid):
        system = make_matrix_ode_system(w)
        reports[w] = ConvergenceReport.from_rows(flat[i * k:(i + 1) * k], _metadata(config, system, w))
    baseline = {r.tau: r.err_p for r in reports[0.0].rows}
    return SweepReport(
        omegas=omegas, taus=list(config.tau_list), reports=reports, baseline=baseline,
        metadata={"q": config.q, "mode": config.mode, "final_time": str(config.final_time)},
    )


def detect_threshold(sweep, factor=1e3):
    """First swept omega whose pressure error exceeds ``factor`` times the omega=0 error.

    Diverged runs count as exceeding. Returns ``{tau: omega or None}``.
    """
    out = {}
    for tau in sweep.taus:
        base = sweep.baseline[tau]
        hit = None
        for w in sweep.omegas:
            row = sweep.error(w, tau)
            if row.status != "ok" or not (row.err_p <= factor * base):
                hit = w
                break
        out[tau] = hit
    return out
