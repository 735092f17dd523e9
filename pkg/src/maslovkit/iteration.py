"""Iteration calculus on top of the crossing-count engine.

Bott-type root sums, the mean index with a dual-route consistency check,
splitting numbers by their one-sided limit definition, the closed-form
index of the m-th iterate built from splitting data, and the three
iteration inequality chains.
"""

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import numpy as np

from .core import (
    TWO_PI,
    SymplecticMatrix,
    UnitCirclePoint,
    elliptic_height,
    omega_nullity_matrix,
    spectrum_on_unit_circle,
)
from .engine import IndexPair, index_pair, omega_index
from .errors import (
    AmbiguousCeiling,
    EpsilonUnstable,
    MaslovkitError,
    MeanIndexInconsistent,
    WitnessMismatch,
)

MEAN_ITERATE_M = 64
MEAN_GRID = 256
EPS_CAP = 1e-2
CEILING_GUARD = 1e-12


def mth_roots(z, m):
    """The m m-th roots of z, exact rationals when z itself is rational."""
    if z.turns is not None:
        p, q = z.turns.numerator, z.turns.denominator
        return [
            UnitCirclePoint.from_turns(Fraction(p + k * q, q * m)) for k in range(m)
        ]
    return [UnitCirclePoint((z.angle + TWO_PI * k) / m) for k in range(m)]


def bott_sum(path, m, z=None, seed=1234, check_attainment=True):
    """(sum of i_omega, sum of nu_omega) over the m-th roots of z."""
    z = UnitCirclePoint.one() if z is None else z
    isum = 0
    nsum = 0
    for w in mth_roots(z, m):
        pair = omega_index(path, w, seed=seed, check_attainment=check_attainment)
        isum += pair.i
        nsum += pair.nu
    return isum, nsum


# ---------------------------------------------------------------------------
# Mean index


@dataclass(frozen=True)
class MeanIndex:
    """Index growth rate per iteration, with both estimates attached.

    ``value`` is the exact rational when the path construction pins it
    down, otherwise the unit-circle average; ``iterate_estimate`` is the
    index of the 64th iterate divided by 64 and serves as the witness.
    """

    value: float
    iterate_estimate: float
    circle_average: float
    exact: Optional[Fraction] = None

    def __float__(self):
        return float(self.value)


def mean_index(path, seed=1234, check_attainment=True):
    """Mean index per period, computed two ways and cross-checked.

    Route (a) is i(path, 64)/64; route (b) averages i_omega over a
    uniform grid of 256 angles nudged off the endpoint spectrum.  The
    Bott sum identity makes (a) a 64-point version of (b), so the two
    must agree within 2n/64 + 2n/256.
    """
    n = path.n
    a = (
        index_pair(path, MEAN_ITERATE_M, seed=seed,
                   check_attainment=check_attainment).i
        / MEAN_ITERATE_M
    )

    spec_angles = [e.angle for e in spectrum_on_unit_circle(path.end()).entries]

    def clear_of_spectrum(phi):
        return all(
            abs((phi - s + math.pi) % TWO_PI - math.pi) > 1e-6 for s in spec_angles
        )

    total = 0
    for k in range(MEAN_GRID):
        phi = TWO_PI * (k + 0.5) / MEAN_GRID
        while not clear_of_spectrum(phi):
            phi += 2.5e-6
        total += omega_index(
            path, UnitCirclePoint(phi), seed=seed,
            check_attainment=check_attainment,
        ).i
    b = total / MEAN_GRID

    tol = 2.0 * n / MEAN_ITERATE_M + 2.0 * n / MEAN_GRID
    if abs(a - b) > tol:
        raise MeanIndexInconsistent(a, b, tol)
    exact = path.exact_mean
    if exact is not None and abs(a - float(exact)) > 2.0 * n / MEAN_ITERATE_M:
        raise MeanIndexInconsistent(a, float(exact), 2.0 * n / MEAN_ITERATE_M)
    value = float(exact) if exact is not None else b
    return MeanIndex(value, a, b, exact)


# ---------------------------------------------------------------------------
# Splitting numbers


@dataclass(frozen=True)
class SplittingEntry:
    omega: UnitCirclePoint
    s_plus: int
    s_minus: int

    @property
    def angle(self):
        return self.omega.angle


@dataclass(frozen=True)
class SplittingData:
    """Splitting numbers of an endpoint matrix at every circle eigenvalue.

    ``C`` sums s_minus over the angles in (0, 2*pi); the angle-0 entry is
    excluded by definition.
    """

    M: SymplecticMatrix
    table: tuple
    C: int

    def s_plus_at_one(self):
        for entry in self.table:
            if entry.omega.is_one:
                return entry.s_plus
        return 0

    def entry_at(self, omega):
        for entry in self.table:
            if entry.omega == omega or abs(
                (entry.angle - omega.angle + math.pi) % TWO_PI - math.pi
            ) < 1e-9:
                return entry
        return None


def _gap_to_other_angles(angle, angles):
    gaps = [
        d
        for a in angles
        if (d := abs((angle - a + math.pi) % TWO_PI - math.pi)) > 1e-9
    ]
    return min(gaps) if gaps else math.pi


def splitting_numbers(M, omega, witness, seed=1234):
    """One-sided index jumps (S+, S-) of M at omega, via a witness path.

    The witness must end at M; epsilon is half the angular gap to the
    nearest other circle eigenvalue (capped at 1e-2) and the jumps must
    be identical for epsilon and epsilon/2.
    """
    scale = max(1.0, float(np.abs(M.entries).max()))
    if np.abs(witness.end_matrix - M.entries).max() > 1e-8 * scale:
        raise WitnessMismatch("witness path does not end at M")
    nu = omega_nullity_matrix(M.entries, omega.value)
    if nu == 0:
        # i_omega is locally constant away from the endpoint spectrum
        return 0, 0
    angles = [e.angle for e in spectrum_on_unit_circle(M).entries]
    eps0 = min(0.5 * _gap_to_other_angles(omega.angle, angles), EPS_CAP)
    base = omega_index(witness, omega, seed=seed).i
    results = []
    for eps in (eps0, 0.5 * eps0):
        plus = omega_index(witness, omega.rotated(+eps), seed=seed).i - base
        minus = omega_index(witness, omega.rotated(-eps), seed=seed).i - base
        results.append((plus, minus))
    if results[0] != results[1]:
        raise EpsilonUnstable(eps0, results)
    s_plus, s_minus = results[0]
    if not (0 <= s_plus <= nu and 0 <= s_minus <= nu):
        raise MaslovkitError(
            f"splitting numbers ({s_plus}, {s_minus}) escape [0, {nu}]"
        )
    return s_plus, s_minus


def splitting_table(M, witness, seed=1234):
    """SplittingData with one entry per distinct circle eigenvalue angle."""
    entries = []
    C = 0
    for spec_entry in spectrum_on_unit_circle(M).entries:
        w = UnitCirclePoint(spec_entry.angle)
        s_plus, s_minus = splitting_numbers(M, w, witness, seed=seed)
        entries.append(SplittingEntry(w, s_plus, s_minus))
        if not w.is_one:
            C += s_minus
    return SplittingData(M, tuple(entries), C)


# ---------------------------------------------------------------------------
# Closed-form iterated index


def _ceiling(m, omega):
    """E(m * angle / 2pi), exact for rational angles."""
    if omega.turns is not None:
        return math.ceil(m * omega.turns)
    x = m * omega.angle / TWO_PI
    if abs(x - round(x)) < CEILING_GUARD:
        raise AmbiguousCeiling(
            f"m*theta/(2*pi) = {x!r} sits on an integer within the guard band "
            f"and theta has no exact rational form"
        )
    return math.ceil(x)


def index_via_splitting(i1, table, m):
    """Index of the m-th iterate from i(path, 1) and the splitting table.

    Exact integer arithmetic throughout; the ceiling terms use rational
    angles when available and raise AmbiguousCeiling on numerically
    integral float multiples.
    """
    if m < 1:
        raise ValueError("iteration count must be >= 1")
    s_plus_one = table.s_plus_at_one()
    total = m * (i1 + s_plus_one - table.C)
    for entry in table.table:
        if entry.omega.is_one:
            continue
        total += 2 * _ceiling(m, entry.omega) * entry.s_minus
    return total - (s_plus_one + table.C)


# ---------------------------------------------------------------------------
# Iteration inequalities


@dataclass(frozen=True)
class Chain:
    """One evaluated inequality chain lhs <= mid <= rhs."""

    name: str
    lhs: float
    mid: float
    rhs: float
    passed: bool
    slack: float = 0.0


@dataclass(frozen=True)
class InequalityReport:
    m: int
    pair_one: IndexPair
    pair_m: IndexPair
    pair_next: IndexPair
    mean: MeanIndex
    height: int
    chains: tuple

    @property
    def all_pass(self):
        return all(chain.passed for chain in self.chains)


def index_sequence(path, max_m, seed=1234, check_attainment=True):
    """IndexPairs of the iterates m = 1..max_m."""
    return [
        index_pair(path, m, seed=seed, check_attainment=check_attainment)
        for m in range(1, max_m + 1)
    ]


def check_inequalities(path, m, seed=1234, pairs=None, mean=None,
                       check_attainment=True):
    """Evaluate the three iteration inequality chains at iterate m.

    ``pairs`` may carry precomputed IndexPairs for iterates 1..m+1 (as
    from :func:`index_sequence`) and ``mean`` a precomputed MeanIndex;
    they are recomputed otherwise.  With an exact rational mean index the
    mean-index chain is checked in exact arithmetic; a float mean gets a
    guard band of m times its own tolerance, recorded as slack.
    """
    if m < 1:
        raise ValueError("iteration count must be >= 1")
    if pairs is not None and len(pairs) >= m + 1:
        one, at_m, at_next = pairs[0], pairs[m - 1], pairs[m]
    else:
        one = index_pair(path, 1, seed=seed, check_attainment=check_attainment)
        at_m = index_pair(path, m, seed=seed, check_attainment=check_attainment)
        at_next = index_pair(
            path, m + 1, seed=seed, check_attainment=check_attainment
        )
    if mean is None:
        mean = mean_index(path, seed=seed, check_attainment=check_attainment)
    n = path.n
    height = elliptic_height(path.end())

    if mean.exact is not None:
        lo = m * mean.exact - n
        hi = m * mean.exact + n - at_m.nu
        mean_chain = Chain(
            "mean-index",
            float(lo),
            at_m.i,
            float(hi),
            lo <= at_m.i <= hi,
        )
    else:
        band = m * (2.0 * n / MEAN_ITERATE_M + 2.0 * n / MEAN_GRID)
        lo = m * mean.value - n
        hi = m * mean.value + n - at_m.nu
        mean_chain = Chain(
            "mean-index",
            lo,
            at_m.i,
            hi,
            lo - band <= at_m.i <= hi + band,
            slack=band,
        )

    lo13 = m * (one.i + one.nu - n) + n - one.nu
    hi13 = m * (one.i + n) - n - (at_m.nu - one.nu)
    initial_chain = Chain(
        "initial-index", lo13, at_m.i, hi13, lo13 <= at_m.i <= hi13
    )

    mid14 = at_next.i - at_m.i - one.i
    lo14 = at_m.nu - height / 2.0
    hi14 = one.nu - at_next.nu + height / 2.0
    successive_chain = Chain(
        "successive-index", lo14, mid14, hi14, lo14 <= mid14 <= hi14
    )

    return InequalityReport(
        m=m,
        pair_one=one,
        pair_m=at_m,
        pair_next=at_next,
        mean=mean,
        height=height,
        chains=(mean_chain, initial_chain, successive_chain),
    )
