import math
from fractions import Fraction

import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings
from hypothesis import strategies as st

import maslovkit as mk
from conftest import random_descriptor
from maslovkit.errors import EndpointMismatch, InvolutionRequired, MaslovkitError


def test_rotation_path_endpoints():
    g = mk.rotation_path(math.pi)
    assert np.abs(g.start - np.eye(2)).max() == 0.0
    assert np.abs(g.end_matrix + np.eye(2)).max() < 1e-12
    assert g.tau == 1.0
    assert g.n == 1


def test_rotation_path_exact_mean_from_turns():
    g = mk.rotation_path(0.0, turns=Fraction(3, 2))
    assert g.exact_mean == Fraction(3)
    assert g.provenance["theta"] == pytest.approx(3.0 * math.pi)
    assert mk.rotation_path(1.234).exact_mean is None


@settings(max_examples=25, derandomize=True, deadline=None)
@given(st.floats(-12.0, 12.0))
def test_rotation_endpoint_matches_angle(theta):
    g = mk.rotation_path(theta)
    c, s = math.cos(theta), math.sin(theta)
    assert np.abs(g.end_matrix - np.array([[c, -s], [s, c]])).max() < 1e-12


def test_hyperbolic_path_endpoint():
    h = mk.hyperbolic_path(1.0)
    assert np.allclose(h.end_matrix, np.diag([1.0 / math.e, math.e]), atol=1e-12)
    assert h.exact_mean == 0


def test_refined_keeps_existing_nodes_bit_exact():
    g = mk.rotation_path(2.3)
    r = g.refined(2)
    assert r.times.size == 4 * (g.times.size - 1) + 1
    take = np.searchsorted(r.times, g.times)
    assert np.array_equal(r.times[take], g.times)
    assert np.array_equal(r.mats[take], g.mats)


def test_meshed_bounds_node_increments():
    g = mk.rotation_path(40.0, samples=32).meshed(0.1)
    diffs = np.abs(np.diff(g.mats, axis=0)).max(axis=(1, 2))
    assert diffs.max() <= 0.1 + 1e-12  # rotation norms are 1, so the bound is absolute


def test_extension_path_runs_from_diag_to_identity():
    z = mk.extension_path(2, 1.0)
    assert np.allclose(z.start, np.diag([2.0, 2.0, 0.5, 0.5]))
    assert np.abs(z.end_matrix - np.eye(4)).max() < 1e-12


class TestIntegrate:
    def test_identity_block_gives_rotation(self):
        desc = mk.HamiltonianDescriptor.constant(np.eye(2), 1.0)
        g = mk.integrate(desc, steps=64)
        ts = np.linspace(0.0, 1.0, 17)
        want = mk.rotation_path(1.0).eval_many(ts)
        assert np.abs(g.eval_many(ts) - want).max() < 1e-10

    def test_offdiagonal_block_gives_hyperbolic(self):
        a = 0.8
        desc = mk.HamiltonianDescriptor.constant(np.array([[0.0, a], [a, 0.0]]), 1.0)
        g = mk.integrate(desc, steps=64)
        ts = np.linspace(0.0, 1.0, 9)
        want = mk.hyperbolic_path(a).eval_many(ts)
        assert np.abs(g.eval_many(ts) - want).max() < 1e-10

    def test_piecewise_matches_exponential_product(self):
        rng = np.random.default_rng(11)
        desc = random_descriptor(rng, n=2)
        g = mk.integrate(desc)
        J = mk.structure_matrix(2)
        M = np.eye(4)
        prev = 0.0
        for B, b in zip(desc.blocks, desc.breaks):
            M = scipy.linalg.expm((b - prev) * (J @ B)) @ M
            prev = b
        scale = max(1.0, np.abs(M).max())
        assert np.abs(g.end_matrix - M).max() < 1e-9 * scale

    def test_rejects_tiny_step_counts(self):
        desc = mk.HamiltonianDescriptor.constant(np.eye(2), 1.0)
        with pytest.raises(MaslovkitError):
            mk.integrate(desc, steps=4)


class TestIterate:
    def test_segment_identity(self):
        g = mk.rotation_path(1.3)
        g2 = mk.iterate(g, 2)
        t = 1.37
        want = g.eval(t - 1.0) @ g.end_matrix
        assert np.abs(g2.eval(t) - want).max() < 1e-12
        assert g2.tau == 2.0
        W2 = np.linalg.matrix_power(g.end_matrix, 2)
        assert np.abs(g2.end_matrix - W2).max() < 1e-12

    def test_exact_mean_scales_linearly(self):
        g = mk.rotation_path(0.0, turns=Fraction(1, 3))
        assert mk.iterate(g, 5).exact_mean == Fraction(10, 3)

    @settings(max_examples=8, derandomize=True, deadline=None)
    @given(st.integers(1, 6))
    def test_endpoint_is_matrix_power(self, m):
        g = mk.rotation_path(0.77)
        W = mk.iterate(g, m).end_matrix
        assert np.abs(W - mk.rotation_path(0.77 * m).end_matrix).max() < 1e-11

    def test_rejects_zero_iterations(self):
        with pytest.raises(MaslovkitError):
            mk.iterate(mk.rotation_path(1.0), 0)


class TestPIterate:
    def test_requires_involution(self):
        g = mk.rotation_path(0.5)
        P = mk.certify_symplectic(mk.structure_matrix(1))  # J squares to -I
        with pytest.raises(InvolutionRequired):
            mk.p_iterate(g, P, 2)

    def test_identity_twist_matches_plain_iterate(self):
        g = mk.rotation_path(0.9)
        P = mk.certify_symplectic(np.eye(2))
        a = mk.p_iterate(g, P, 3)
        b = mk.iterate(g, 3)
        ts = np.linspace(0.0, 3.0, 13)
        assert np.abs(a.eval_many(ts) - b.eval_many(ts)).max() < 1e-12

    def test_minus_identity_twist_junctions_are_continuous(self):
        g = mk.rotation_path(0.6)
        P = mk.certify_symplectic(-np.eye(2))
        tw = mk.p_iterate(g, P, 3, mesh=False)
        eps = 1e-9
        for j in (1.0, 2.0):
            gap = np.abs(tw.eval(j - eps) - tw.eval(j + eps)).max()
            assert gap < 1e-6

    def test_reflection_twist_in_sp4(self):
        g = mk.diamond_sum(mk.rotation_path(0.6), mk.rotation_path(1.1))
        P = mk.certify_symplectic(np.diag([1.0, -1.0, 1.0, -1.0]))
        tw = mk.p_iterate(g, P, 2, mesh=False)
        eps = 1e-9
        gap = np.abs(tw.eval(1.0 - eps) - tw.eval(1.0 + eps)).max()
        assert gap < 1e-6
        PW = P.entries @ g.end_matrix
        assert np.abs(tw.end_matrix - P.entries @ g.end_matrix @ PW).max() < 1e-10


def test_diamond_sum_blocks_and_mean():
    a = mk.rotation_path(0.0, turns=Fraction(1, 2))
    b = mk.rotation_path(0.0, turns=Fraction(1, 4))
    s = mk.diamond_sum(a, b)
    assert s.n == 2
    assert s.exact_mean == Fraction(3, 2)
    M = s.eval(0.5)
    assert np.abs(M[np.ix_([0, 2], [0, 2])] - a.eval(0.5)).max() < 1e-12
    assert np.abs(M[np.ix_([1, 3], [1, 3])] - b.eval(0.5)).max() < 1e-12


def test_concatenate_order_and_junction_check():
    zeta = mk.extension_path(1, 1.0)
    g = mk.rotation_path(2.2)
    c = mk.concatenate(zeta, g)
    assert np.abs(c.eval(0.25) - zeta.eval(0.5)).max() < 1e-12
    assert np.abs(c.eval(0.75) - g.eval(0.5)).max() < 1e-12
    with pytest.raises(EndpointMismatch):
        mk.concatenate(g, zeta)  # the rotation does not end where zeta starts
