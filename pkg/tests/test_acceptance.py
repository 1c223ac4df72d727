"""End-to-end acceptance checks, one test per criterion.

Each test prints a single ``criterion N: PASS/FAIL`` line (visible with
``-s``); the terminal summary repeats the verdicts.
"""

import time
from fractions import Fraction

import numpy as np
import pytest

from bdfpore.bdf import consistency_probe, make_scheme
from bdfpore.harness import ConvergenceReport, ExperimentConfig, detect_threshold, run_convergence, run_sweep
from bdfpore.linalg import poly_roots
from bdfpore.stability import (
    Multiplier,
    ToeplitzSpec,
    check_A_condition,
    check_positivity_property,
    necessary_condition_witness,
    run_scalar_recursion,
)
from bdfpore.steppers import STEPPERS, StepperRun
from bdfpore.systems import make_matrix_ode_system, make_poroelastic_system, matrix_ode_solution

TAUS = ["1/50", "1/100", "1/150", "1/200"]
RATE_BAND = (5.75, 6.25)

# reference final-time errors (u, p) at the four step sizes
TABLE_WEAK = {
    "imex": ((1.2218e-07, 1.9896e-09, 1.7700e-10, 3.1689e-11), (4.9606e-08, 7.4826e-10, 6.4951e-11, 1.1535e-11)),
    "implicit": ((1.7802e-08, 2.6747e-10, 2.3181e-11, 4.1175e-12), (4.6881e-08, 7.0436e-10, 6.1035e-11, 1.0825e-11)),
}


def verdict(n, ok, detail=""):
    print(f"\ncriterion {n}: {'PASS' if ok else 'FAIL'} {detail}".rstrip())
    return ok


def poroelastic_report(mode, strength):
    system = {"kind": "poroelastic", "N": 20, "eta": strength, "mu": strength, "lambda": strength,
              "M": 0.1, "kappa": 0.05}
    config = ExperimentConfig.from_dict(
        {"system": system, "scheme": {"q": 6, "mode": mode}, "tau_list": TAUS, "final_time": 1}
    )
    return run_convergence(config, jobs=len(TAUS))


def in_band(rates):
    return all(r is not None and RATE_BAND[0] <= r <= RATE_BAND[1] for r in rates)


@pytest.fixture(scope="module")
def weak_reports():
    return {mode: poroelastic_report(mode, 0.3) for mode in ("imex", "implicit")}


@pytest.fixture(scope="module")
def strong_reports():
    return {mode: poroelastic_report(mode, 0.6) for mode in ("imex", "implicit")}


@pytest.mark.criterion(1, "exact six-step coefficients")
def test_criterion_1_coefficients():
    start = time.perf_counter()
    s = make_scheme(6)
    alpha = s.alpha_poly.scaled_to_integers()
    check = s.composite(Fraction(1, 63)).scaled_to_integers()
    elapsed = time.perf_counter() - start
    ok = (
        alpha == (60, (10, -72, 225, -400, 450, -360, 147))
        and check == (3780, (-10, 132, -807, 3030, -7815, 14700, -20234, 18096, -4380, -14160, 23985,
                             -21798, 9261))
        and elapsed < 1.0
    )
    assert verdict(1, ok, f"({elapsed:.3f} s)")


@pytest.mark.criterion(2, "multiplier positivity and A-condition")
def test_criterion_2_multipliers():
    start = time.perf_counter()
    pos = check_positivity_property(Multiplier((1, "-9/10", "3/10")), "9/100")
    failures = []
    cases = {6: (1, "-9/10", "3/10", 0, 0, 0), 4: ("1/2", 0, 0, 0), 5: (1, "-1/4", 0, 0, 0)}
    for q, mu in cases.items():
        s, mult = make_scheme(q), Multiplier(mu)
        # endpoints plus 64 interior values
        for k in range(66):
            m = s.threshold * Fraction(k, 65)
            if not check_A_condition(s, m, mult).passed:
                failures.append((q, m))
    elapsed = time.perf_counter() - start
    ok = pos.passed and pos.residual > 0.008584 and not failures and elapsed < 30.0
    assert verdict(2, ok, f"(residual {pos.residual:.7f}, failures {failures}, {elapsed:.1f} s)")


@pytest.mark.criterion(3, "sharpness of the coupling threshold")
def test_criterion_3_witness():
    start = time.perf_counter()
    problems = []
    for q in range(1, 7):
        thr = 1 / (2 ** q - 1)
        if necessary_condition_witness(q, thr) is not None:
            problems.append((q, "witness at threshold"))
        w = necessary_condition_witness(q, 1.5 * thr)
        if w is None or not (w.zeta_star < -1 and w.x_star > 0 and abs(w.residual) <= 1e-10):
            problems.append((q, "no valid witness"))
            continue
        rec = run_scalar_recursion(q, 1.5 * thr, w.x_star, 500, np.ones(2 * q))
        if not (rec.diverged or rec.growth > 1e3):
            problems.append((q, f"growth {rec.growth:.3g}"))
    elapsed = time.perf_counter() - start
    ok = not problems and elapsed < 10.0
    assert verdict(3, ok, f"({problems}, {elapsed:.1f} s)")


@pytest.mark.criterion(4, "six-step rates with weak coupling")
def test_criterion_4_weak_coupling(weak_reports):
    details, ok = [], True
    for mode, rep in weak_reports.items():
        ru, rp = rep.rates("u"), rep.rates("p")
        ok &= in_band(ru) and in_band(rp)
        ref_u, ref_p = TABLE_WEAK[mode]
        for row, eu, ep in zip(rep.rows, ref_u, ref_p):
            ok &= 0.1 <= row.err_u / eu <= 10 and 0.1 <= row.err_p / ep <= 10
        details.append(f"{mode}: u {[f'{r:.3f}' for r in ru]} p {[f'{r:.3f}' for r in rp]}")
    print("\n" + "\n".join(rep.summary() for rep in weak_reports.values()))
    assert verdict(4, ok, "; ".join(details))


@pytest.mark.criterion(5, "IMEX loses order with strong coupling")
def test_criterion_5_strong_coupling(strong_reports):
    imex, implicit = strong_reports["imex"], strong_reports["implicit"]
    imex_rates = [r for r in imex.rates("u") + imex.rates("p") if r is not None]
    failed = [r for r in imex.rows if r.status != "ok"]
    ok = (any(r < 0 for r in imex_rates) or bool(failed)) and in_band(implicit.rates("u")) and in_band(
        implicit.rates("p"))
    print("\n" + imex.summary() + "\n" + implicit.summary())
    assert verdict(5, ok, f"imex p rates {[f'{r:.3f}' for r in imex.rates('p')]}")


@pytest.mark.criterion(6, "sweep threshold near 1/63")
def test_criterion_6_sweep():
    config = ExperimentConfig.from_dict(
        {"system": {"kind": "matrix-ode"}, "scheme": {"q": 6, "mode": "imex"},
         "tau_list": ["1/40", "1/80", "1/160"], "final_time": 1}
    )
    sweep = run_sweep(config, jobs=4)
    found = detect_threshold(sweep, 1e3)
    print("\n" + sweep.summary())
    ok = all(w is not None and 0.014 <= w <= 0.018 for w in found.values())
    assert verdict(6, ok, str({str(t): w for t, w in found.items()}))


@pytest.mark.criterion(7, "primal and reduced schemes agree")
def test_criterion_7_equivalence():
    start = time.perf_counter()
    worst = 0.0
    rng = np.random.default_rng(7)
    for q in range(1, 7):
        omega = rng.uniform(0, 1 / (2 ** q - 1))
        system = make_matrix_ode_system(omega)
        sol = matrix_ode_solution(system)
        for mode in ("implicit", "imex"):
            a = StepperRun(make_scheme(q), system, 0.01, 100, mode, sol)
            b = StepperRun(make_scheme(q), system, 0.01, 100, mode, sol)
            while a.n <= 100:
                pa = STEPPERS[(mode, False)](a)[1]
                pb = STEPPERS[(mode, True)](b)[1]
                worst = max(worst, np.max(np.abs(pa - pb)) / np.max(np.abs(pa)))
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-11 and elapsed < 5.0
    assert verdict(7, ok, f"(max relative gap {worst:.2e}, {elapsed:.2f} s)")


@pytest.mark.criterion(8, "consistency orders")
def test_criterion_8_consistency():
    slopes, worst_defect = {}, 0.0
    for q in range(1, 7):
        s = make_scheme(q)
        slopes[q] = consistency_probe(s, np.sin, np.cos, [0.1, 0.05, 0.025]).slopes
        for k in range(q + 1):
            res = consistency_probe(s, lambda t, k=k: t ** k, lambda t, k=k: k * t ** max(k - 1, 0), [0.1, 0.05])
            worst_defect = max(worst_defect, float(np.max(res.defects)))
    ok = all(np.all(np.abs(sl - q) <= 0.3) for q, sl in slopes.items()) and worst_defect < 1e-10
    assert verdict(8, ok, f"(max polynomial defect {worst_defect:.1e})")


@pytest.mark.criterion(9, "structural properties")
def test_criterion_9_properties():
    rng = np.random.default_rng(9)
    sysm = make_poroelastic_system(12)
    checks = {}

    m = sysm.schur().matrix
    vs = rng.standard_normal((sysm.dim_p, 50))
    checks["schur"] = all(
        sysm.norm_p(sysm.riesz_p(m @ v)) <= sysm.omega * sysm.norm_p(sysm.riesz_p(sysm.C @ v)) * (1 + 1e-10)
        for v in vs.T
    )

    u, w = rng.standard_normal(sysm.dim_u), rng.standard_normal(sysm.dim_p)
    checks["adjoint"] = abs(sysm.apply_D(u) @ w - u @ sysm.apply_D_star(w)) <= 1e-12 * np.linalg.norm(u) * np.linalg.norm(w)

    spec = ToeplitzSpec(band=(Fraction(-19, 20), Fraction(1), Fraction(-9, 10), Fraction(3, 10)), n=30)
    vals = spec.generating_polynomial().evaluate(np.linspace(-1, 1, 4001))
    eig = np.linalg.eigvalsh(spec.symmetric_part())
    checks["sandwich"] = vals.min() - 1e-9 <= eig[0] and eig[-1] <= vals.max() + 1e-9

    c = rng.standard_normal(8)
    c[-1] = 1.0
    r = poly_roots(c)
    # monic degree 7: sum of roots -c6, product -c0
    checks["vieta"] = abs(np.sum(r) + c[-2]) <= 1e-8 and abs(np.prod(r) + c[0]) <= 1e-8

    rows = run_convergence(ExperimentConfig.from_dict(
        {"system": {"kind": "matrix-ode", "omega": 0.01}, "scheme": {"q": 2}, "tau_list": ["1/10", "1/20"]}))
    checks["csv round trip"] = ConvergenceReport.from_csv(rows.to_csv()).to_csv() == rows.to_csv()

    failed = [k for k, v in checks.items() if not v]
    assert verdict(9, not failed, f"(failed: {failed})" if failed else "")
