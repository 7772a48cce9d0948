import cmath

import numpy as np
import pytest

from circlekam import (
    CircleDiffeo,
    LaurentSeries,
    NestingError,
    NotACircleMapError,
    RotationConvergenceWarning,
    UnivalenceError,
    ValidationError,
    WindingError,
    apply_inverse,
    circle_defect,
    compose,
    eval_diffeo,
    expand,
    identity_map,
    invert,
    rotation,
    rotation_number,
    unit_circle,
)

from conftest import GOLDEN, random_diffeo, random_symmetric_hat

TWO_PI = 2.0 * np.pi


class TestConstruction:
    def test_nonzero_constant_term_rejected(self):
        hat = LaurentSeries.from_coeffs({0: 0.1, 1: 0.1, -1: -0.1}, width=1.0)
        with pytest.raises(NotACircleMapError):
            CircleDiffeo(0.3, hat)

    def test_symmetry_violation_rejected(self):
        hat = LaurentSeries.from_coeffs({1: 1e-3}, width=1.0)  # c_{-1} missing
        with pytest.raises(NotACircleMapError):
            CircleDiffeo(0.3, hat)

    def test_phase_reduced_mod_2pi(self):
        f = rotation(TWO_PI + 0.25, width=1.0)
        assert abs(f.phase - 0.25) < 1e-12


class TestExpand:
    def test_rigid_rotation(self):
        phi = 2.1
        w = unit_circle(64)
        f = expand(np.exp(1j * phi) * w, n_trunc=8, width=1.0)
        assert abs(f.phase - phi) < 1e-12
        assert np.all(f.hat.coeffs == 0)

    def test_single_mode_exponent(self):
        # f = w exp(i phi + eps (w - 1/w)): the exponent is its own expansion
        phi, eps = 0.9, 1e-3
        w = unit_circle(64)
        f = expand(w * np.exp(1j * phi + eps * (w - 1.0 / w)), n_trunc=8, width=1.0)
        assert abs(f.phase - phi) < 1e-12
        assert abs(f.hat.coeff(1) - eps) < 1e-12
        assert abs(f.hat.coeff(-1) + eps) < 1e-12
        assert all(abs(f.hat.coeff(n)) == 0 for n in (2, 3, -2, -3))

    def test_squaring_map_winds(self):
        w = unit_circle(64)
        with pytest.raises(WindingError):
            expand(w**2, n_trunc=8, width=1.0)

    def test_off_circle_samples_rejected(self):
        w = unit_circle(64)
        with pytest.raises(NotACircleMapError):
            expand(w * np.exp(1e-3 * w), n_trunc=8, width=1.0)  # Re exponent != 0

    def test_round_trip_phase_and_hat(self, rng):
        for _ in range(10):
            f = random_diffeo(rng, width=1.0, scale=1e-3)
            g = expand(eval_diffeo(f, unit_circle(64)), f.hat.truncation, 1.0)
            assert abs(g.phase - f.phase) < 1e-10
            n_t = f.hat.truncation
            for n in range(-n_t, n_t + 1):
                assert abs(g.hat.coeff(n) - f.hat.coeff(n)) < 1e-10


class TestRotationNumber:
    def test_rigid(self):
        f = rotation(TWO_PI * 0.375, width=1.0)
        assert abs(rotation_number(f, 2048) - 0.375) < 1e-12

    def test_iters_floor(self):
        with pytest.raises(ValidationError):
            rotation_number(rotation(1.0, 1.0), iters=10)

    def test_conjugacy_invariance(self, rng):
        from circlekam import conjugated_rotation

        theta = GOLDEN
        for _ in range(3):
            psi = CircleDiffeo(0.0, random_symmetric_hat(rng, 1.2, 2e-3, max_mode=3))
            f = conjugated_rotation(psi, TWO_PI * theta, n_trunc=32, out_width=1.0)
            assert abs(rotation_number(f) - theta) < 1e-6

    def test_conjugacy_invariance_via_ops(self, rng):
        # same statement, routed through invert and compose themselves
        theta = GOLDEN
        psi = CircleDiffeo(0.0, random_symmetric_hat(rng, 1.2, 1e-3, max_mode=3))
        mid = compose(rotation(TWO_PI * theta, 1.2), psi, out_width=1.0)
        f = compose(invert(psi, out_width=0.7), mid, out_width=0.55)
        assert abs(rotation_number(f) - theta) < 1e-6

    def test_against_long_orbit_oracle(self):
        # independent oracle: raw lift orbit, no extrapolation
        phi, eps = TWO_PI * 0.2, 0.05
        hat = LaurentSeries.from_coeffs({1: eps, -1: -eps}, width=1.0)
        f = CircleDiffeo(phi, hat)

        m = 10**6
        x = 0.0
        for _ in range(m):
            z = cmath.exp(2j * cmath.pi * x)
            imhat = 2.0 * (eps * z).imag  # Im hat on the circle, both modes
            x += (phi + imhat) / TWO_PI
        oracle = (x / m) % 1.0
        assert abs(rotation_number(f, 2**15) - oracle) < 1e-6

    def test_warns_when_spread_large(self):
        # strong perturbation, short orbit: the extrapolation cannot settle
        hat = LaurentSeries.from_coeffs({1: 0.1, -1: -0.1}, width=0.5)
        f = CircleDiffeo(TWO_PI * GOLDEN, hat)
        with pytest.warns(RotationConvergenceWarning):
            rotation_number(f, 1024)


class TestCompose:
    def test_rotations_add(self):
        f = compose(rotation(1.0, 1.0), rotation(2.0, 1.0), out_width=0.8)
        assert abs(f.phase - 3.0) < 1e-12
        assert np.all(f.hat.coeffs == 0)

    def test_identity_neutral(self, rng):
        f = random_diffeo(rng, width=1.0, scale=1e-3)
        g = compose(f, identity_map(1.0), out_width=0.9)
        assert abs(g.phase - f.phase) < 1e-10
        n_t = f.hat.truncation
        assert all(
            abs(g.hat.coeff(n) - f.hat.coeff(n)) < 1e-10
            for n in range(-n_t, n_t + 1)
        )

    def test_pointwise_oracle(self, rng):
        f = random_diffeo(rng, width=1.0, scale=2e-4)
        g = random_diffeo(rng, width=1.0, scale=2e-4)
        h = compose(g, f, out_width=0.8)
        w = np.exp(1j * rng.uniform(0, TWO_PI, 128))
        direct = eval_diffeo(g, eval_diffeo(f, w))
        assert np.max(np.abs(eval_diffeo(h, w) - direct)) < 1e-9

    def test_nesting_violation(self):
        big = CircleDiffeo(
            0.1, LaurentSeries.from_coeffs({1: 0.3, -1: -0.3}, width=1.0)
        )
        small = rotation(0.2, width=1.0)
        with pytest.raises(NestingError):
            compose(small, big, out_width=0.9)


class TestInvert:
    def test_identity(self):
        inv = invert(identity_map(1.0), out_width=0.8)
        assert min(inv.phase, TWO_PI - inv.phase) < 1e-14
        assert np.all(inv.hat.coeffs == 0)

    def test_rotation_inverse(self):
        inv = invert(rotation(0.7, 1.0), out_width=0.8)
        assert abs(inv.phase - (TWO_PI - 0.7)) < 1e-12

    def test_composition_residual(self, rng):
        hat = LaurentSeries.from_coeffs({1: 0.01, -1: -0.01}, width=1.0)
        psi = CircleDiffeo(0.0, hat)
        inv = invert(psi, out_width=0.8)
        w = np.exp(1j * rng.uniform(0, TWO_PI, 128))
        assert np.max(np.abs(eval_diffeo(inv, eval_diffeo(psi, w)) - w)) < 1e-9

    def test_phases_cancel(self, rng):
        for _ in range(5):
            psi = random_diffeo(rng, width=1.0, scale=1e-5, max_mode=3)
            inv = invert(psi, out_width=0.7)
            s = (inv.phase + psi.phase) % TWO_PI
            assert min(s, TWO_PI - s) < 1e-9

    def test_univalence_gate(self):
        hat = LaurentSeries.from_coeffs({1: 0.2, -1: -0.2}, width=1.0)
        with pytest.raises(UnivalenceError):
            invert(CircleDiffeo(0.0, hat), out_width=0.3)

    def test_apply_inverse_matches(self, rng):
        psi = random_diffeo(rng, width=1.0, scale=1e-3, max_mode=4)
        u = unit_circle(64)
        x = apply_inverse(psi, u)
        assert np.max(np.abs(eval_diffeo(psi, x) - u)) < 1e-13


class TestCirclePreservation:
    def test_unit_circle_invariant(self, rng):
        for _ in range(25):
            f = random_diffeo(rng, width=1.0, scale=1e-3)
            assert circle_defect(f, 1024) <= 1e-10

    def test_larger_hats_still_preserve(self, rng):
        f = random_diffeo(rng, width=1.0, scale=0.05, max_mode=3)
        assert circle_defect(f, 512) <= 1e-10
