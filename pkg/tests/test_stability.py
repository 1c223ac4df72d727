import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bdfpore.bdf import make_scheme
from bdfpore.exceptions import DegeneracyError
from bdfpore.polynomial import Polynomial
from bdfpore.stability import (
    Multiplier,
    ToeplitzSpec,
    check_A_condition,
    check_positivity_property,
    chebyshev_t,
    chebyshev_u,
    default_multiplier,
    necessary_condition_witness,
    roots_in_unit_disk,
    run_scalar_recursion,
    toeplitz_positivity,
    trig_to_chebyshev,
    unit_circle_form,
)

X = Polynomial([Fraction(0), Fraction(1)])
SIX = (1, "-9/10", "3/10", 0, 0, 0)


def poly(ints):
    return Polynomial([Fraction(c) for c in ints])


class TestChebyshev:
    @pytest.mark.parametrize("n", range(8))
    def test_cosine_identity(self, n):
        phi = np.linspace(0, np.pi, 17)
        np.testing.assert_allclose(chebyshev_t(n).evaluate(np.cos(phi)), np.cos(n * phi), atol=1e-12)

    @pytest.mark.parametrize("n", range(1, 8))
    def test_sine_identity(self, n):
        phi = np.linspace(0.1, 3.0, 17)
        got = chebyshev_u(n - 1).evaluate(np.cos(phi)) * np.sin(phi)
        np.testing.assert_allclose(got, np.sin(n * phi), atol=1e-12)

    def test_trig_example(self):
        form = trig_to_chebyshev([-400, 675, -432, 157])
        assert form.cos_part == poly([32, 204, -864, 628])
        assert form.cos_part == 4 * (1 - X) * poly([8, 59, -157])

    def test_pure_terms(self):
        assert trig_to_chebyshev([0, 0, 1]).cos_part == 2 * X * X - 1
        assert trig_to_chebyshev([], [0, 0, 1]).sin_part == 4 * X * X - 1

    def test_constant(self):
        assert trig_to_chebyshev([5]).cos_part == 5

    @settings(max_examples=30, deadline=None)
    @given(
        a=st.lists(st.integers(-9, 9), min_size=1, max_size=8),
        b=st.lists(st.integers(-9, 9), max_size=7),
        phi=st.floats(0, 2 * math.pi),
    )
    def test_reduction_matches_trig_sum(self, a, b, phi):
        form = trig_to_chebyshev(a, b)
        direct = sum(c * math.cos(k * phi) for k, c in enumerate(a))
        direct += 1j * sum(c * math.sin((k + 1) * phi) for k, c in enumerate(b))
        assert form(phi) == pytest.approx(direct, abs=1e-9 * (1 + sum(map(abs, a + b))))

    def test_unit_circle_form(self):
        p, r = poly([1, 2]), poly([3, 0, 1])
        phi = 0.7
        z = np.exp(1j * phi)
        direct = p.evaluate(z) * r.evaluate(np.conj(z))
        form = unit_circle_form(p, r)
        assert form.cos_part.evaluate(np.cos(phi)) == pytest.approx(direct.real)


class TestPositivity:
    def test_six_step(self):
        rep = check_positivity_property(Multiplier(SIX[:3]), "9/100")
        assert rep.passed
        assert rep.argmin_x == pytest.approx((3 - 2 * math.sqrt(2)) / 6, abs=1e-9)
        assert rep.residual > 0.008584
        assert rep.min_value == pytest.approx(0.09 + 0.0085842556, abs=1e-9)

    def test_six_step_full_tuple_same(self):
        a = check_positivity_property(Multiplier(SIX), 0)
        b = check_positivity_property(Multiplier(SIX[:3]), 0)
        assert a.min_value == pytest.approx(b.min_value)

    def test_four_step(self):
        rep = check_positivity_property(Multiplier(("1/2", 0, 0, 0)), 0)
        assert rep.min_value == pytest.approx(0.5) and rep.argmin_x == pytest.approx(1.0)

    def test_five_step(self):
        # 1 - cos(phi) + cos(2 phi) / 4 = 3/4 - x + x^2 / 2
        rep = check_positivity_property(Multiplier((1, "-1/4", 0, 0, 0)), 0)
        assert rep.min_value == pytest.approx(0.25) and rep.argmin_x == pytest.approx(1.0)

    def test_zero_multiplier(self):
        rep = check_positivity_property(Multiplier((0, 0, 0)), 0)
        assert rep.min_value == 1.0 and rep.passed

    def test_failing_multiplier(self):
        rep = check_positivity_property(Multiplier((2,)), 0)
        assert not rep.passed and rep.min_value == pytest.approx(-1.0)

    @settings(max_examples=40, deadline=None)
    @given(st.lists(st.fractions(-1, 1, max_denominator=20), min_size=1, max_size=6))
    def test_min_matches_dense_sampling(self, mu):
        rep = check_positivity_property(Multiplier(mu), 0)
        phi = np.linspace(0, np.pi, 20001)
        vals = 1 - sum(float(m) * np.cos((j + 1) * phi) for j, m in enumerate(mu))
        assert rep.min_value <= vals.min() + 1e-12
        assert rep.min_value >= vals.min() - 1e-4


class TestRootsInDisk:
    def test_six_step_multiplier(self):
        rep = roots_in_unit_disk(Multiplier(SIX).mu_poly)
        assert rep.passed and rep.max_modulus < 1

    def test_unit_root_rejected(self):
        assert not roots_in_unit_disk(poly([-1, 1])).passed

    def test_degree_zero_rejected(self):
        with pytest.raises(ValueError):
            roots_in_unit_disk(poly([1]))


class TestACondition:
    def test_six_step_boundary_polynomials(self):
        s, mult = make_scheme(6), default_multiplier(6)
        r0 = check_A_condition(s, 0, mult)
        p0 = poly([34, -73, 829, -2440, 2480, -800])
        assert r0.boundary_polynomial * 600 == 4 * (1 - X) * p0
        r1 = check_A_condition(s, Fraction(1, 63), mult)
        p1 = poly([110, 787, 473, -16589, 66209, -159242, 245716, -237184, 138880, -45440, 6400])
        assert r1.boundary_polynomial * 37800 == 32 * (1 - X * X) * p1
        assert r0.passed and r1.passed

    @pytest.mark.parametrize("q", [4, 5, 6])
    def test_passes_across_m(self, q):
        s, mult = make_scheme(q), default_multiplier(q)
        for k in range(9):
            rep = check_A_condition(s, s.threshold * Fraction(k, 8), mult)
            assert rep.passed, (q, k, rep.notes)
            assert rep.roots_inside and rep.leading_ratio > 0

    def test_zero_multiplier_fails_for_six_steps(self):
        rep = check_A_condition(make_scheme(6), 0, Multiplier((0,) * 6))
        assert not rep.passed and rep.min_real_part < 0

    def test_common_factor_detected(self):
        # alpha_check = (z - 1)(z + m) for one step; mu(z) = z + m shares the root -m
        with pytest.raises(DegeneracyError):
            check_A_condition(make_scheme(1), "1/2", Multiplier(("-1/2",)))

    def test_multiplier_length_must_match(self):
        with pytest.raises(ValueError):
            check_A_condition(make_scheme(6), 0, Multiplier((1, 0)))


class TestWitness:
    @pytest.mark.parametrize("q", range(1, 7))
    def test_none_at_threshold(self, q):
        assert necessary_condition_witness(q, 1 / (2 ** q - 1)) is None

    @pytest.mark.parametrize("q", range(1, 7))
    @pytest.mark.parametrize("factor", [1.05, 1.5, 2.0])
    def test_witness_above_threshold(self, q, factor):
        w = necessary_condition_witness(q, factor / (2 ** q - 1))
        assert w is not None
        assert w.zeta_star < -1 and w.x_star > 0 and w.residual <= 1e-10

    @pytest.mark.parametrize("q", range(1, 7))
    @pytest.mark.parametrize("factor", [1.05, 1.5, 2.0])
    def test_witness_recursion_diverges(self, q, factor):
        ell = factor / (2 ** q - 1)
        w = necessary_condition_witness(q, ell)
        # enough steps for the unstable root to amplify by 1e6
        n = max(10 * q, int(math.log(1e6) / math.log(abs(w.zeta_star))) + 200)
        seeds = np.random.default_rng(q).standard_normal(2 * q)
        rec = run_scalar_recursion(q, ell, w.x_star, n, seeds)
        assert rec.diverged or rec.growth > 1e3

    @pytest.mark.parametrize("q", range(1, 7))
    def test_decoupled_recursion_bounded(self, q):
        rec = run_scalar_recursion(q, 0.0, 0.0, 500, np.ones(2 * q))
        assert not rec.diverged and rec.growth <= 1.0 + 1e-9

    def test_zero_seeds(self):
        assert run_scalar_recursion(2, 0.5, 1.0, 50, np.zeros(4)).growth == 0.0

    def test_recursion_validates(self):
        with pytest.raises(ValueError):
            run_scalar_recursion(3, 0.0, 0.0, 10, np.ones(6))
        with pytest.raises(ValueError):
            run_scalar_recursion(3, 0.0, 0.0, 100, np.ones(5))


class TestToeplitz:
    def test_six_step(self):
        rep = toeplitz_positivity(Multiplier(SIX))
        assert rep.passed
        assert rep.generating_min == pytest.approx(0.0085842556, abs=1e-9)

    def test_band_layout(self):
        mat = ToeplitzSpec(band=(Fraction(-1, 2), Fraction(1)), n=3).matrix()
        np.testing.assert_array_equal(mat, [[0.5, 0, 0], [-1, 0.5, 0], [0, -1, 0.5]])

    @pytest.mark.parametrize("q", [4, 5, 6])
    def test_default_multipliers(self, q):
        assert toeplitz_positivity(default_multiplier(q)).passed

    def test_size_check(self):
        with pytest.raises(ValueError):
            toeplitz_positivity(Multiplier(SIX), n=8)

    @settings(max_examples=30, deadline=None)
    @given(
        band=st.lists(st.fractions(-1, 1, max_denominator=10), min_size=2, max_size=5),
        n=st.integers(10, 30),
    )
    def test_grenander_szego_sandwich(self, band, n):
        spec = ToeplitzSpec(band=tuple(band), n=max(n, 2 * len(band)))
        g = spec.generating_polynomial()
        xs = np.linspace(-1, 1, 4001)
        vals = g.evaluate(xs)
        eig = np.linalg.eigvalsh(spec.symmetric_part())
        assert vals.min() - 1e-9 <= eig[0] and eig[-1] <= vals.max() + 1e-9
