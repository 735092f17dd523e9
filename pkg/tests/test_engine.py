import math

import numpy as np
import pytest

import maslovkit as mk
from conftest import TWO_PI, random_descriptor, random_symplectic, rotation_reference
from maslovkit.engine import _CACHE
from maslovkit.errors import DegenerateEndpoint, TangentialCrossing

ONE = mk.UnitCirclePoint.one()
MINUS_ONE = mk.UnitCirclePoint.from_turns(1, 2)


def conjugated(path, P):
    Pinv = np.linalg.inv(P)

    def sample(ts):
        return Pinv[None] @ path.eval_many(ts) @ P[None]

    return mk.SymplecticPath(
        path.times, sample(path.times), sample, {"family": "conjugated"}
    )


@pytest.mark.parametrize("theta", [math.pi, 3 * math.pi, -math.pi, 0.7, 5.0,
                                   TWO_PI + 0.3, -1.5 * math.pi, 11.0])
@pytest.mark.parametrize("phi", [0.0, math.pi, math.pi / 3, 2.1])
def test_rotation_indices_match_closed_form(theta, phi):
    th = abs(theta) % TWO_PI
    if min(abs(th - phi), abs(TWO_PI - th - phi)) < 1e-9:
        pytest.skip("endpoint degenerate at this omega")
    got = mk.omega_index_nondegenerate(mk.rotation_path(theta), mk.UnitCirclePoint(phi))
    assert got == rotation_reference(theta, phi)


@pytest.mark.parametrize("a", [0.5, -1.3])
@pytest.mark.parametrize("phi", [0.0, math.pi, 1.0])
def test_hyperbolic_paths_have_zero_index(a, phi):
    pair = mk.omega_index(mk.hyperbolic_path(a), mk.UnitCirclePoint(phi))
    assert pair.as_tuple() == (0, 0)


@pytest.mark.parametrize(
    "theta1,theta2,phi",
    [(math.pi, 0.7, 0.0), (math.pi, -math.pi, 0.0), (5.0, 2.0, 1.3)],
)
def test_direct_sums_add_indices(theta1, theta2, phi):
    g = mk.diamond_sum(mk.rotation_path(theta1), mk.rotation_path(theta2))
    want = rotation_reference(theta1, phi) + rotation_reference(theta2, phi)
    assert mk.omega_index_nondegenerate(g, mk.UnitCirclePoint(phi)) == want


def test_iterated_rotation_matches_total_angle():
    theta = TWO_PI - 0.3
    g3 = mk.iterate(mk.rotation_path(theta), 3)
    assert mk.omega_index_nondegenerate(g3, ONE) == rotation_reference(3 * theta, 0.0)


class TestDegenerate:
    def test_full_turn(self):
        pair = mk.omega_index(mk.rotation_path(TWO_PI), ONE)
        assert pair.as_tuple() == (1, 2)

    def test_half_turn_at_minus_one(self):
        pair = mk.omega_index(mk.rotation_path(math.pi), MINUS_ONE)
        assert pair.as_tuple() == (0, 2)

    def test_three_half_turns_at_minus_one(self):
        pair = mk.omega_index(mk.rotation_path(3 * math.pi), MINUS_ONE)
        assert pair.as_tuple() == (2, 2)

    def test_constant_path(self):
        pair = mk.omega_index(mk.rotation_path(0.0), ONE)
        assert pair.as_tuple() == (-1, 2)

    def test_nondegenerate_input_delegates(self):
        pair = mk.omega_index(mk.rotation_path(math.pi), ONE)
        assert pair.as_tuple() == (1, 0)


class TestIndexPairOp:
    def test_full_turn_iterates(self):
        base = mk.rotation_path(TWO_PI)
        assert mk.index_pair(base, 3).as_tuple() == (5, 2)

    def test_hyperbolic_iterates(self):
        base = mk.hyperbolic_path(1.0)
        assert mk.index_pair(base, 4).as_tuple() == (0, 0)

    def test_m_equal_one_matches_omega_index(self):
        base = mk.rotation_path(0.9)
        assert mk.index_pair(base, 1) == mk.omega_index(base, ONE)

    def test_rejects_nonpositive_m(self):
        with pytest.raises(ValueError):
            mk.index_pair(mk.rotation_path(1.0), 0)


def test_conjugate_omega_gives_equal_pair():
    rng = np.random.default_rng(21)
    g = mk.integrate(random_descriptor(rng, n=1))
    w = mk.UnitCirclePoint(2.3)
    assert mk.omega_index(g, w) == mk.omega_index(g, w.conj())


def test_conjugated_path_keeps_index():
    rng = np.random.default_rng(8)
    g = mk.rotation_path(math.pi)
    P = random_symplectic(1, rng, scale=0.5)
    for w in (ONE, mk.UnitCirclePoint(2.1)):
        assert mk.omega_index(conjugated(g, P), w) == mk.omega_index(g, w)


def test_mesh_doubling_keeps_index():
    for g in (mk.rotation_path(5.0), mk.hyperbolic_path(0.7)):
        for w in (ONE, mk.UnitCirclePoint(1.9)):
            assert mk.omega_index(g.refined(1), w) == mk.omega_index(g, w)


def test_nullity_matches_spectrum_geometric_multiplicity():
    g = mk.rotation_path(1.0)
    spec = mk.spectrum_on_unit_circle(g.end())
    for entry in spec.entries:
        w = mk.UnitCirclePoint(entry.angle)
        assert mk.omega_nullity(g, w) == entry.geometric
    assert mk.omega_nullity(g, mk.UnitCirclePoint(2.5)) == 0


def test_degenerate_endpoint_raises_in_nondegenerate_op():
    with pytest.raises(DegenerateEndpoint):
        mk.omega_index_nondegenerate(mk.rotation_path(TWO_PI), ONE)


def test_tangential_without_escalation_raises():
    # at omega = 1 the junction with the extension always touches the locus
    with pytest.raises(TangentialCrossing):
        mk.omega_index_nondegenerate(mk.rotation_path(math.pi), ONE, escalate=False)


def test_results_are_cached_per_path_and_omega():
    g = mk.rotation_path(0.8)
    w = mk.UnitCirclePoint(2.0)
    first = mk.omega_index(g, w)
    assert (g.token, w.key()) in _CACHE
    assert mk.omega_index(g, w) is first


class TestCrossingProfile:
    def test_direct_profile_reports_crossings(self):
        pair, records, meta = mk.crossing_profile(mk.rotation_path(5.0), mk.UnitCirclePoint(1.9))
        assert meta["method"] == "direct"
        assert pair.i == sum(r.sign for r in records)
        assert all(not r.tangential for r in records)
        assert all(0.0 < r.t_star < 1.0 for r in records)

    def test_bumped_profile_still_sums_to_index(self):
        pair, records, meta = mk.crossing_profile(mk.rotation_path(math.pi), ONE)
        assert meta["method"] == "bump"
        assert pair.as_tuple() == (1, 0)
        assert sum(r.sign for r in records) == 1

    def test_ladder_profile_reports_rungs(self):
        pair, records, meta = mk.crossing_profile(mk.rotation_path(TWO_PI), ONE)
        assert meta["method"] == "ladder"
        assert pair.as_tuple() == (1, 2)
        assert len(meta["rungs"]) >= 3


def test_bott_style_consistency_on_a_random_path():
    rng = np.random.default_rng(4)
    g = mk.integrate(random_descriptor(rng, n=1))
    g2 = mk.iterate(g, 2)
    if mk.omega_nullity(g, ONE) or mk.omega_nullity(g, MINUS_ONE):
        pytest.skip("degenerate draw")
    total = mk.omega_index(g, ONE).i + mk.omega_index(g, MINUS_ONE).i
    assert mk.omega_index(g2, ONE).i == total
