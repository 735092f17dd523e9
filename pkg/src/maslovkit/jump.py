"""Index jump intervals, the common jump search, and minimal-period forcing.

The m-th index jump of a path is the open integer interval from
i(m) + nu(m) - 1 to i(m+2).  When every path in a family has positive
mean index and initial index at least n, there are infinitely many
integers 2N that land inside a jump interval of an odd iterate of every
family member at once; ``search_common_jumps`` enumerates such tuples up
to a bound.  The candidate scan runs on the closed-form iterated index,
and every tuple that survives is re-verified against indices computed
directly on the iterated paths, so a formula slip cannot leak into the
output.  ``minimal_period_forced`` is the pure integer certificate that
pins the minimal period to the path itself.
"""

import math
from dataclasses import dataclass
from fractions import Fraction

from .core import UnitCirclePoint, omega_nullity_matrix
from .engine import index_pair
from .errors import (
    AmbiguousCeiling,
    HypothesesNotMet,
    MaslovkitError,
    NoneFoundWithinBound,
)
from .iteration import MEAN_GRID, MEAN_ITERATE_M, index_via_splitting, mean_index, splitting_table


@dataclass(frozen=True)
class JumpInterval:
    """The open interval (i(m) + nu(m) - 1, i(m+2)) of one path."""

    m: int
    lo: int
    hi: int

    def contains_closed(self, a, b):
        """Whether the closed interval [a, b] sits strictly inside."""
        return self.lo < a and b < self.hi

    def __contains__(self, k):
        return self.lo < k < self.hi


@dataclass(frozen=True)
class JumpTuple:
    """One verified common jump: [2N - kappa1, 2N + kappa2] inside every
    path's (2 m_j - 1)-th jump interval."""

    N: int
    m: tuple
    kappa1: int
    kappa2: int
    interval: tuple

    def __iter__(self):
        yield self.N
        yield from self.m


@dataclass(frozen=True)
class HypothesisEntry:
    mean_value: float
    initial: int
    nullity: int
    mean_positive: bool
    initial_at_least_n: bool

    @property
    def passed(self):
        return self.mean_positive and self.initial_at_least_n


@dataclass(frozen=True)
class HypothesisReport:
    n: int
    entries: tuple

    @property
    def passed(self):
        return all(entry.passed for entry in self.entries)


def jump_interval(path, m, seed=1234, check_attainment=True):
    """The m-th index jump interval, from directly computed index pairs."""
    if m < 1:
        raise ValueError("iteration count must be >= 1")
    at_m = index_pair(path, m, seed=seed, check_attainment=check_attainment)
    at_next2 = index_pair(
        path, m + 2, seed=seed, check_attainment=check_attainment
    )
    return JumpInterval(m=m, lo=at_m.i + at_m.nu - 1, hi=at_next2.i)


def minimal_period_forced(i_m, i_1, nu_1, n):
    """True when the index data certifies that the iterate count is 1.

    The certificate needs i(m) <= n+1 together with i(1) >= n and
    nu(1) >= 1; a path of m-th-iterate type whose indices satisfy all
    three can only be the first iterate.
    """
    return i_m <= n + 1 and i_1 >= n and nu_1 >= 1


def jump_hypotheses(paths, seed=1234):
    """Check positivity of the mean index and i(1) >= n for each path.

    These are the standing hypotheses of the common jump search; the
    returned report carries the computed quantities per path.  A float
    mean (integrated paths) counts as positive only when it clears its
    own cross-check tolerance, so a zero mean cannot sneak through as a
    tiny positive float.
    """
    paths = list(paths)
    if not paths:
        raise ValueError("need at least one path")
    n = paths[0].n
    if any(path.n != n for path in paths):
        raise ValueError("paths must share the same n")
    entries = []
    for path in paths:
        mean = mean_index(path, seed=seed)
        pair = index_pair(path, 1, seed=seed)
        if mean.exact is not None:
            positive = mean.exact > 0
        else:
            band = 2.0 * n / MEAN_ITERATE_M + 2.0 * n / MEAN_GRID
            positive = mean.value > band
        entries.append(
            HypothesisEntry(
                mean_value=float(mean),
                initial=pair.i,
                nullity=pair.nu,
                mean_positive=positive,
                initial_at_least_n=pair.i >= n,
            )
        )
    return HypothesisReport(n=n, entries=tuple(entries))


def _nu_iterate(path, m):
    """Endpoint nullity of the m-th iterate, summed over m-th roots of 1."""
    end = path.end_matrix
    total = 0
    for k in range(m):
        root = UnitCirclePoint.from_turns(Fraction(k, m))
        total += omega_nullity_matrix(end, root.value)
    return total


class _PathData:
    """Per-path quantities the candidate scan needs over and over."""

    def __init__(self, path, seed):
        self.path = path
        self.seed = seed
        pair = index_pair(path, 1, seed=seed)
        self.i1 = pair.i
        self.nu1 = pair.nu
        self.table = splitting_table(path.end(), path, seed=seed)
        # scan support only; the audited mean was already computed by the
        # hypotheses gate and is served from the engine cache
        mean = mean_index(path, seed=seed, check_attainment=False)
        self.mean = float(mean)
        self._nu_cache = {}

    def kappa1_term(self):
        return self.i1 + 2 * self.table.s_plus_at_one() - self.nu1

    def scan_interval(self, m):
        """(lo, hi) of the (2m-1)-th jump via the closed formula.

        Falls back to the direct route when the formula hits a ceiling
        tie (irrational angles only).
        """
        k = 2 * m - 1
        nu_k = self._nu_cache.get(k)
        if nu_k is None:
            nu_k = self._nu_cache[k] = _nu_iterate(self.path, k)
        try:
            i_k = index_via_splitting(self.i1, self.table, k)
            i_next2 = index_via_splitting(self.i1, self.table, k + 2)
        except AmbiguousCeiling:
            i_k = index_pair(
                self.path, k, seed=self.seed, check_attainment=False
            ).i
            i_next2 = index_pair(
                self.path, k + 2, seed=self.seed, check_attainment=False
            ).i
        return i_k + nu_k - 1, i_next2

    def direct_interval(self, m):
        # the engine ladder already demands three stable rungs; the
        # neighbor audit would multiply the search cost ~50x for no
        # extra integer information, so the bulk verification skips it
        return jump_interval(
            self.path, 2 * m - 1, seed=self.seed, check_attainment=False
        )


def search_common_jumps(paths, n_max, count=None, seed=1234):
    """Common jump tuples (N, m_1, ..., m_q) with N up to ``n_max``.

    For each N the candidate m_j are scanned over a window around
    N / mean_index(path_j) whose radius covers everything the mean-index
    bound allows; a tuple is kept when [2N - kappa1, 2N + kappa2] lies in
    the (2 m_j - 1)-th jump interval of every path, first by the
    closed-form scan and then re-verified on directly computed indices.
    Returns at most ``count`` tuples (all of them when ``count`` is
    None); raises NoneFoundWithinBound when the scan comes up empty,
    which bounds the search, not the existence.
    """
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    report = jump_hypotheses(paths, seed=seed)
    if not report.passed:
        raise HypothesesNotMet(
            "common jump search needs a positive mean index and initial "
            f"index >= n for every path; report: {report}"
        )
    data = [_PathData(path, seed) for path in paths]
    n = report.n
    kappa1 = min(d.kappa1_term() for d in data)
    kappa2 = min(d.i1 for d in data) - 1
    if kappa1 + kappa2 < 0:
        # [2N - kappa1, 2N + kappa2] is empty for every N
        raise NoneFoundWithinBound(n_max)

    found = []
    for N in range(1, n_max + 1):
        lo_target = 2 * N - kappa1
        hi_target = 2 * N + kappa2
        ms = []
        for d in data:
            center = N / d.mean
            radius = math.ceil((2 * n + kappa1 + kappa2) / d.mean) + 2
            chosen = None
            for m in range(max(1, math.floor(center - radius)),
                           math.ceil(center + radius) + 1):
                lo, hi = d.scan_interval(m)
                if lo < lo_target and hi_target < hi:
                    chosen = m
                    break
            if chosen is None:
                break
            ms.append(chosen)
        if len(ms) < len(data):
            continue
        for d, m in zip(data, ms):
            direct = d.direct_interval(m)
            if not direct.contains_closed(lo_target, hi_target):
                raise MaslovkitError(
                    f"closed-form scan accepted N={N}, m={m} but the "
                    f"directly computed interval {direct} rejects it"
                )
        found.append(
            JumpTuple(
                N=N,
                m=tuple(ms),
                kappa1=kappa1,
                kappa2=kappa2,
                interval=(lo_target, hi_target),
            )
        )
        if count is not None and len(found) >= count:
            return found
    if not found:
        raise NoneFoundWithinBound(n_max)
    return found
