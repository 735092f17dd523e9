import math
from fractions import Fraction

import numpy as np
import pytest

import maslovkit as mk
from conftest import random_symplectic
from maslovkit.core import omega_nullity_matrix, shifted_determinant, symplectic_defect
from maslovkit.errors import NotSymplectic, OddDimension, RealnessViolated


def rot(theta):
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, -s], [s, c]])


def test_structure_matrix_basics():
    for n in (1, 2, 3):
        J = mk.structure_matrix(n)
        assert np.array_equal(J @ J, -np.eye(2 * n))
        assert np.array_equal(J.T, -J)


def test_certify_accepts_rotations_rejects_scalings():
    M = mk.certify_symplectic(rot(0.7))
    assert M.n == 1
    assert M.defect <= 1e-12
    with pytest.raises(NotSymplectic):
        mk.certify_symplectic(1.1 * rot(0.3))
    with pytest.raises(OddDimension):
        mk.certify_symplectic(np.eye(3))


def test_defect_is_relative_to_matrix_scale():
    # high hyperbolic powers have huge entries; the group relation error
    # scales like the square of the norm and must still register as tiny
    big = np.diag([math.exp(-20.0), math.exp(20.0)])
    assert symplectic_defect(big) < 1e-12


def test_inverse_and_matmul():
    rng = np.random.default_rng(3)
    for n in (1, 2):
        M = mk.certify_symplectic(random_symplectic(n, rng))
        prod = M.inverse() @ M
        assert np.abs(prod.entries - np.eye(2 * n)).max() < 1e-11


def test_conjugate_preserves_spectrum():
    rng = np.random.default_rng(5)
    M = mk.certify_symplectic(rot(1.1))
    P = mk.certify_symplectic(random_symplectic(1, rng))
    C = mk.conjugate(M, P)
    want = sorted(np.angle(np.linalg.eigvals(M.entries)))
    got = sorted(np.angle(np.linalg.eigvals(C.entries)))
    assert np.allclose(want, got, atol=1e-9)


class TestUnitCirclePoint:
    def test_rational_construction(self):
        w = mk.UnitCirclePoint.from_turns(1, 2)
        assert w.turns == Fraction(1, 2)
        assert abs(w.value + 1.0) < 1e-15
        assert not w.is_one
        assert mk.UnitCirclePoint.one().is_one

    def test_equality_and_hash_reduce_fractions(self):
        assert mk.UnitCirclePoint.from_turns(1, 2) == mk.UnitCirclePoint.from_turns(2, 4)
        assert hash(mk.UnitCirclePoint.from_turns(1, 3)) == hash(
            mk.UnitCirclePoint.from_turns(2, 6)
        )

    def test_conjugate_flips_turns(self):
        w = mk.UnitCirclePoint.from_turns(1, 3)
        assert w.conj().turns == Fraction(2, 3)
        assert abs(w.conj().value - np.conj(w.value)) < 1e-15

    def test_float_angle_snaps_to_rational_when_close(self):
        w = mk.UnitCirclePoint(2.0 * math.pi / 3.0)
        assert w.turns == Fraction(1, 3)
        # an angle that is no small-denominator fraction of a turn stays float
        assert mk.UnitCirclePoint(1.234567).turns is None


class TestSpectrum:
    def test_rotation_has_conjugate_pair(self):
        spec = mk.spectrum_on_unit_circle(mk.certify_symplectic(rot(0.8)))
        assert [round(e.angle, 9) for e in spec.entries] == [
            round(0.8, 9),
            round(2.0 * math.pi - 0.8, 9),
        ]
        assert all(e.algebraic == 1 and e.geometric == 1 for e in spec.entries)
        assert spec.elliptic_height == 2

    def test_hyperbolic_has_empty_circle_spectrum(self):
        spec = mk.spectrum_on_unit_circle(mk.certify_symplectic(np.diag([2.0, 0.5])))
        assert spec.entries == ()
        assert mk.elliptic_height(mk.certify_symplectic(np.diag([2.0, 0.5]))) == 0

    def test_identity_is_fully_degenerate(self):
        spec = mk.spectrum_on_unit_circle(mk.certify_symplectic(np.eye(4)))
        assert len(spec.entries) == 1
        entry = spec.entries[0]
        assert entry.angle == 0.0
        assert entry.algebraic == 4
        assert entry.geometric == 4

    def test_minus_identity_snaps_to_pi(self):
        spec = mk.spectrum_on_unit_circle(mk.certify_symplectic(rot(math.pi)))
        assert len(spec.entries) == 1
        assert spec.entries[0].angle == math.pi
        assert spec.entries[0].geometric == 2

    def test_mixed_block_matrix(self):
        from maslovkit.paths import symplectic_direct_sum

        M = symplectic_direct_sum(rot(0.8), np.diag([3.0, 1.0 / 3.0]))
        spec = mk.spectrum_on_unit_circle(mk.certify_symplectic(M))
        assert spec.elliptic_height == 2
        assert spec.entry_at(0.8).algebraic == 1


@pytest.mark.parametrize("theta", [0.3, 1.2, 2.9])
@pytest.mark.parametrize("phi", [0.25, 0.5, math.pi, 4.0])
def test_shifted_determinant_rotation_closed_form(theta, phi):
    # det(R(theta) - omega I) / omega = 2 cos(phi) - 2 cos(theta)
    w = mk.UnitCirclePoint(phi)
    got = shifted_determinant(rot(theta), w.value, 1)
    assert got == pytest.approx(2.0 * (math.cos(phi) - math.cos(theta)), abs=1e-12)


def test_shifted_determinant_flags_non_real_values():
    skew = np.array([[1.0, 1.0], [0.0, 2.0]])  # det 2, not symplectic
    with pytest.raises(RealnessViolated):
        shifted_determinant(skew, 1j, 1)


def test_singular_detector_vanishes_on_spectrum():
    M = mk.certify_symplectic(rot(1.0))
    assert mk.singular_detector(M, mk.UnitCirclePoint(1.0)) == pytest.approx(0.0, abs=1e-12)
    assert mk.singular_detector(M, mk.UnitCirclePoint(2.0)) != 0.0


class TestOmegaNullity:
    def test_identity(self):
        assert omega_nullity_matrix(np.eye(2), 1.0 + 0.0j) == 2
        assert omega_nullity_matrix(np.eye(4), 1.0 + 0.0j) == 4

    def test_half_turn(self):
        assert omega_nullity_matrix(rot(math.pi), np.exp(1j * math.pi)) == 2

    def test_hyperbolic(self):
        assert omega_nullity_matrix(np.diag([math.e, 1.0 / math.e]), 1.0 + 0.0j) == 0

    def test_simple_elliptic(self):
        assert omega_nullity_matrix(rot(1.0), np.exp(1.0j)) == 1
