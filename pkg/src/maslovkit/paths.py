"""Symplectic matrix paths.

Paths are immutable sample sequences on [0, tau] starting at the identity,
together with enough provenance to evaluate the underlying curve at any
intermediate time: a closed-form sampler for the analytic families, the
generator for integrated Hamiltonian systems, and the algebraic recursion
for iterated paths.  Refinement only ever inserts nodes, so existing nodes
are preserved bit-for-bit.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional

import numpy as np
import scipy.linalg

from .core import (
    DEFAULT_SYMP_TOL,
    SymplecticMatrix,
    certify_symplectic,
    structure_matrix,
    symplectic_defect,
)
from .errors import (
    DimensionMismatch,
    EndpointMismatch,
    InvolutionRequired,
    MaslovkitError,
    NoConvergence,
    NotSymplectic,
)

#: default bound on the node-to-node increment, relative to the local scale
DEFAULT_MESH_BOUND = 0.2

_token_counter = itertools.count(1)


# ---------------------------------------------------------------------------
# Hamiltonian descriptors


def _check_symmetric(mat: np.ndarray, what: str) -> np.ndarray:
    mat = np.asarray(mat, dtype=float)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise DimensionMismatch(f"{what} must be square, got {mat.shape}")
    if np.abs(mat - mat.T).max() > 1e-12 * max(1.0, np.abs(mat).max()):
        raise MaslovkitError(f"{what} must be symmetric")
    return 0.5 * (mat + mat.T)


@dataclass(frozen=True)
class HamiltonianDescriptor:
    """Time-dependent symmetric coefficient matrix B(t) of x' = J B(t) x.

    kind is one of 'constant', 'piecewise-constant', 'trig-polynomial'.
    For the piecewise kind, ``breaks`` holds the right endpoint of each piece
    (the last one equals tau) and ``blocks`` the matching matrices.  For the
    trig kind, ``blocks`` is (C0, [(k, Ck), ...], [(k, Sk), ...]) with integer
    frequencies relative to the period tau.
    """

    kind: str
    n: int
    tau: float
    blocks: tuple
    breaks: tuple = ()

    @classmethod
    def constant(cls, B, tau: float) -> "HamiltonianDescriptor":
        B = _check_symmetric(B, "B")
        return cls("constant", B.shape[0] // 2, float(tau), (B,))

    @classmethod
    def piecewise(cls, blocks, breaks, tau: float) -> "HamiltonianDescriptor":
        mats = tuple(_check_symmetric(B, f"piece {i}") for i, B in enumerate(blocks))
        breaks = tuple(float(b) for b in breaks)
        if len(mats) != len(breaks):
            raise MaslovkitError("need one break per piece (last break = tau)")
        if any(b2 <= b1 for b1, b2 in zip(breaks, breaks[1:])) or breaks[0] <= 0:
            raise MaslovkitError("breaks must be strictly increasing and positive")
        if abs(breaks[-1] - tau) > 1e-12 * max(1.0, tau):
            raise MaslovkitError("last break must equal tau")
        if len({B.shape for B in mats}) != 1:
            raise DimensionMismatch("pieces must share one dimension")
        return cls("piecewise-constant", mats[0].shape[0] // 2, float(tau), mats, breaks)

    @classmethod
    def trig_polynomial(cls, const, cos_terms, sin_terms, tau: float) -> "HamiltonianDescriptor":
        C0 = _check_symmetric(const, "constant term")
        cos_t = tuple((int(k), _check_symmetric(C, f"cos term {k}")) for k, C in cos_terms)
        sin_t = tuple((int(k), _check_symmetric(S, f"sin term {k}")) for k, S in sin_terms)
        for k, _ in cos_t + sin_t:
            if k < 1:
                raise MaslovkitError("trig frequencies must be positive integers")
        return cls("trig-polynomial", C0.shape[0] // 2, float(tau), (C0, cos_t, sin_t))

    def eval_B(self, t: float) -> np.ndarray:
        if self.kind == "constant":
            return self.blocks[0]
        if self.kind == "piecewise-constant":
            idx = int(np.searchsorted(np.asarray(self.breaks), t, side="right"))
            idx = min(idx, len(self.blocks) - 1)
            return self.blocks[idx]
        C0, cos_t, sin_t = self.blocks
        w = 2.0 * math.pi / self.tau
        B = C0.copy()
        for k, C in cos_t:
            B += math.cos(w * k * t) * C
        for k, S in sin_t:
            B += math.sin(w * k * t) * S
        return B


# ---------------------------------------------------------------------------
# Path objects


def _batch_defect(mats: np.ndarray) -> np.ndarray:
    """Relative symplectic defect of a stack of matrices."""
    n = mats.shape[-1] // 2
    J = structure_matrix(n)
    residue = np.einsum("kji,jl,klm->kim", mats, J, mats) - J
    scales = np.maximum(1.0, np.abs(mats).max(axis=(1, 2)) ** 2)
    return np.abs(residue).max(axis=(1, 2)) / scales


class MatrixPath:
    """Sampled symplectic path with an evaluator for intermediate times.

    Not necessarily anchored at the identity; see :class:`SymplecticPath`
    for the anchored variant.  ``sampler`` maps an array of times to a stack
    of matrices and must agree with the stored nodes.
    """

    def __init__(
        self,
        times: np.ndarray,
        mats: np.ndarray,
        sampler: Callable[[np.ndarray], np.ndarray],
        provenance: dict,
        tol: float = DEFAULT_SYMP_TOL,
        mesh_bound: float = DEFAULT_MESH_BOUND,
        _certify: bool = True,
    ):
        times = np.asarray(times, dtype=float)
        mats = np.asarray(mats, dtype=float)
        if times.ndim != 1 or mats.shape[0] != times.shape[0]:
            raise DimensionMismatch("times and matrices must align")
        if np.any(np.diff(times) <= 0):
            raise MaslovkitError("times must be strictly increasing")
        self.times = times
        self.mats = mats
        self.sampler = sampler
        self.provenance = provenance
        self.tol = tol
        self.mesh_bound = mesh_bound
        self.token = next(_token_counter)
        self.n = mats.shape[-1] // 2
        if _certify:
            defects = _batch_defect(mats)
            worst = int(np.argmax(defects))
            if not np.all(np.isfinite(defects)) or defects[worst] > tol:
                raise NotSymplectic(float(defects[worst]), tol)
        self.times.setflags(write=False)
        self.mats.setflags(write=False)

    # -- basic accessors ----------------------------------------------------

    @property
    def tau(self) -> float:
        return float(self.times[-1])

    @property
    def start(self) -> np.ndarray:
        return self.mats[0]

    @property
    def end_matrix(self) -> np.ndarray:
        return self.mats[-1]

    def end(self) -> SymplecticMatrix:
        return certify_symplectic(self.mats[-1], self.tol)

    def eval_many(self, ts) -> np.ndarray:
        ts = np.asarray(ts, dtype=float)
        out = self.sampler(ts)
        return out

    def eval(self, t: float) -> np.ndarray:
        return self.eval_many(np.array([t]))[0]

    # -- refinement ---------------------------------------------------------

    def _with_nodes(self, times, mats) -> "MatrixPath":
        clone = object.__new__(type(self))
        clone.__dict__.update(self.__dict__)
        clone.times = np.asarray(times, dtype=float)
        clone.mats = np.asarray(mats, dtype=float)
        clone.times.setflags(write=False)
        clone.mats.setflags(write=False)
        clone.token = next(_token_counter)
        return clone

    def refined(self, levels: int = 1) -> "MatrixPath":
        """Insert midpoints ``levels`` times.  Existing nodes are untouched."""
        times, mats = self.times, self.mats
        for _ in range(levels):
            mids = 0.5 * (times[:-1] + times[1:])
            mid_mats = self.sampler(mids)
            new_times = np.empty(times.size + mids.size)
            new_times[0::2] = times
            new_times[1::2] = mids
            new_mats = np.empty((new_times.size,) + mats.shape[1:])
            new_mats[0::2] = mats
            new_mats[1::2] = mid_mats
            times, mats = new_times, new_mats
        return self._with_nodes(times, mats)

    def meshed(self, bound: Optional[float] = None, max_rounds: int = 24) -> "MatrixPath":
        """Refine locally until node increments respect the mesh bound.

        The bound is relative to the local matrix scale so that large-norm
        stretches (high hyperbolic iterates) do not demand absurd node
        counts while small-norm stretches stay genuinely fine.
        """
        bound = self.mesh_bound if bound is None else bound
        times, mats = self.times, self.mats
        for _ in range(max_rounds):
            diffs = np.abs(np.diff(mats, axis=0)).max(axis=(1, 2))
            scales = np.maximum(
                1.0,
                np.maximum(
                    np.abs(mats[:-1]).max(axis=(1, 2)), np.abs(mats[1:]).max(axis=(1, 2))
                ),
            )
            bad = diffs > bound * scales
            if not bad.any():
                break
            mids = 0.5 * (times[:-1][bad] + times[1:][bad])
            mid_mats = self.sampler(mids)
            order = np.argsort(np.concatenate([times, mids]), kind="stable")
            all_times = np.concatenate([times, mids])[order]
            all_mats = np.concatenate([mats, mid_mats], axis=0)[order]
            times, mats = all_times, all_mats
        return self._with_nodes(times, mats)


class SymplecticPath(MatrixPath):
    """A certified path anchored at the identity."""

    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)
        if np.abs(self.mats[0] - np.eye(2 * self.n)).max() > 1e-10:
            raise EndpointMismatch("path must start at the identity")

    @property
    def exact_mean(self) -> Optional[Fraction]:
        """Exact mean index per period when the construction pins it down."""
        return self.provenance.get("exact_mean")


class ExtensionPath(MatrixPath):
    """The diagonal path from diag(2,..,1/2,..) to the identity.

    This is the standard extension glued before a path so that crossing
    counts start from a matrix with no unit-circle spectrum at all.
    """


# ---------------------------------------------------------------------------
# Analytic families


def _rotation_sampler(n: int, rate: float):
    J = structure_matrix(n)
    eye = np.eye(2 * n)

    def sample(ts: np.ndarray) -> np.ndarray:
        ang = rate * ts
        return (
            np.cos(ang)[:, None, None] * eye + np.sin(ang)[:, None, None] * J
        )

    return sample


def rotation_path(
    theta: float,
    tau: float = 1.0,
    n: int = 1,
    turns: Optional[Fraction] = None,
    samples: Optional[int] = None,
    mesh_bound: float = DEFAULT_MESH_BOUND,
) -> SymplecticPath:
    """exp(t * (theta/tau) * J) on [0, tau].

    When ``turns`` is given it fixes theta = 2*pi*turns exactly-in-spirit and
    is propagated so angle arithmetic downstream can stay rational.
    """
    if turns is not None:
        turns = Fraction(turns)
        theta = 2.0 * math.pi * float(turns)
    rate = theta / tau
    if samples is None:
        samples = max(32, 8 * int(abs(theta) / math.pi + 1))
    times = np.linspace(0.0, tau, samples + 1)
    sampler = _rotation_sampler(n, rate)
    prov = {
        "family": "rotation",
        "theta": theta,
        "turns": turns,
        "n": n,
        "exact_mean": (2 * n * turns) if turns is not None else None,
    }
    if turns is None:
        prov["exact_mean"] = None
    return SymplecticPath(times, sampler(times), sampler, prov, mesh_bound=mesh_bound)


def hyperbolic_path(
    a: float,
    tau: float = 1.0,
    samples: Optional[int] = None,
    mesh_bound: float = DEFAULT_MESH_BOUND,
) -> SymplecticPath:
    """diag(e^{-at}, e^{at}) on [0, tau]; no unit-circle spectrum for t > 0."""

    def sample(ts: np.ndarray) -> np.ndarray:
        out = np.zeros((ts.size, 2, 2))
        out[:, 0, 0] = np.exp(-a * ts)
        out[:, 1, 1] = np.exp(a * ts)
        return out

    if samples is None:
        samples = max(32, 8 * int(abs(a) * tau + 1))
    times = np.linspace(0.0, tau, samples + 1)
    prov = {"family": "hyperbolic", "rate": a, "exact_mean": Fraction(0)}
    return SymplecticPath(times, sample(times), sample, prov, mesh_bound=mesh_bound)


def symplectic_direct_sum(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Direct sum respecting the (q_1..q_n, p_1..p_n) coordinate order."""
    na, nb = A.shape[-1] // 2, B.shape[-1] // 2
    n = na + nb
    out = np.zeros(A.shape[:-2] + (2 * n, 2 * n)) if A.ndim > 2 else np.zeros((2 * n, 2 * n))
    qa, pa = slice(0, na), slice(n, n + na)
    qb, pb = slice(na, n), slice(n + na, 2 * n)
    for rs, rb in ((qa, slice(0, na)), (pa, slice(na, 2 * na))):
        for cs, cb in ((qa, slice(0, na)), (pa, slice(na, 2 * na))):
            out[..., rs, cs] = A[..., rb, cb]
    for rs, rb in ((qb, slice(0, nb)), (pb, slice(nb, 2 * nb))):
        for cs, cb in ((qb, slice(0, nb)), (pb, slice(nb, 2 * nb))):
            out[..., rs, cs] = B[..., rb, cb]
    return out


def diamond_sum(first: SymplecticPath, second: SymplecticPath) -> SymplecticPath:
    """Blockwise direct sum of two paths over a common interval."""
    if abs(first.tau - second.tau) > 1e-12 * max(1.0, first.tau):
        raise DimensionMismatch("direct sum needs a common interval")

    def sample(ts: np.ndarray) -> np.ndarray:
        return symplectic_direct_sum(first.eval_many(ts), second.eval_many(ts))

    times = np.union1d(first.times, second.times)
    m1 = first.exact_mean if isinstance(first, SymplecticPath) else None
    m2 = second.exact_mean if isinstance(second, SymplecticPath) else None
    prov = {
        "family": "diamond",
        "parts": (first.provenance, second.provenance),
        "exact_mean": (m1 + m2) if (m1 is not None and m2 is not None) else None,
    }
    return SymplecticPath(
        times, sample(times), sample, prov,
        tol=max(first.tol, second.tol),
        mesh_bound=min(first.mesh_bound, second.mesh_bound),
    )


def extension_path(n: int, tau: float, samples: int = 64) -> ExtensionPath:
    """The anchor path diag(2 - t/tau, .., (2 - t/tau)^{-1}, ..) on [0, tau]."""

    def sample(ts: np.ndarray) -> np.ndarray:
        a = 2.0 - ts / tau
        out = np.zeros((ts.size, 2 * n, 2 * n))
        for i in range(n):
            out[:, i, i] = a
            out[:, n + i, n + i] = 1.0 / a
        return out

    times = np.linspace(0.0, tau, samples + 1)
    prov = {"family": "extension", "n": n}
    return ExtensionPath(times, sample(times), sample, prov)


# ---------------------------------------------------------------------------
# Integration


def integrate(
    descriptor: HamiltonianDescriptor,
    steps: int = 256,
    tol: float = DEFAULT_SYMP_TOL,
    mesh_bound: float = DEFAULT_MESH_BOUND,
    max_doublings: int = 6,
) -> SymplecticPath:
    """Solve M' = J B(t) M, M(0) = I by the exponential midpoint rule.

    Each step multiplies by exp(h J B(t + h/2)), so every node is symplectic
    by construction; the step count doubles until the certified defect passes
    (rounding is the only defect source, so this converges immediately in
    practice).  Piece breakpoints are always included among the nodes, which
    makes the rule exact for constant and piecewise-constant systems.
    """
    if steps < 8:
        raise MaslovkitError("need at least 8 steps")
    n, tau = descriptor.n, descriptor.tau
    J = structure_matrix(n)

    def grid(total_steps: int) -> np.ndarray:
        base = np.linspace(0.0, tau, total_steps + 1)
        if descriptor.kind == "piecewise-constant":
            base = np.union1d(base, np.asarray(descriptor.breaks))
        return base

    def generators(mids: np.ndarray) -> np.ndarray:
        """Stack of J B(t) over an array of midpoint times."""
        if descriptor.kind == "constant":
            return np.broadcast_to(J @ descriptor.blocks[0], (mids.size, 2 * n, 2 * n))
        if descriptor.kind == "piecewise-constant":
            A = np.stack([J @ B for B in descriptor.blocks])
            idx = np.minimum(
                np.searchsorted(np.asarray(descriptor.breaks), mids, side="right"),
                len(descriptor.blocks) - 1,
            )
            return A[idx]
        C0, cos_t, sin_t = descriptor.blocks
        w = 2.0 * math.pi / tau
        B = np.broadcast_to(C0, (mids.size, 2 * n, 2 * n)).copy()
        for k, C in cos_t:
            B += np.cos(w * k * mids)[:, None, None] * C
        for k, S in sin_t:
            B += np.sin(w * k * mids)[:, None, None] * S
        return J @ B

    for attempt in range(max_doublings + 1):
        times = grid(steps * (2 ** attempt))
        hs = np.diff(times)
        factors = scipy.linalg.expm(hs[:, None, None] * generators(times[:-1] + 0.5 * hs))
        mats = np.empty((times.size, 2 * n, 2 * n))
        mats[0] = np.eye(2 * n)
        for k in range(hs.size):
            mats[k + 1] = factors[k] @ mats[k]
        if _batch_defect(mats).max() <= tol:
            break
    else:
        raise NoConvergence(
            f"symplectic defect still above {tol:.1e} after {max_doublings} doublings"
        )

    def sample(ts: np.ndarray) -> np.ndarray:
        ts = np.asarray(ts, dtype=float)
        idx = np.clip(np.searchsorted(times, ts, side="right") - 1, 0, times.size - 2)
        hs = ts - times[idx]
        steps_exp = scipy.linalg.expm(hs[:, None, None] * generators(times[idx] + 0.5 * hs))
        return steps_exp @ mats[idx]

    prov = {"family": "integrated", "descriptor": descriptor, "exact_mean": None}
    path = SymplecticPath(times, mats, sample, prov, tol=tol, mesh_bound=mesh_bound)
    return path.meshed()


# ---------------------------------------------------------------------------
# Iteration and concatenation


def _segment_eval(base: MatrixPath, right_factors, left_factors=None):
    """Evaluator for paths defined segmentwise as L_j * base(s) * R_j."""
    tau = base.tau
    nseg = len(right_factors)
    right = np.asarray(right_factors)
    left = None if left_factors is None else np.asarray(left_factors)

    def sample(ts: np.ndarray) -> np.ndarray:
        js = np.clip(np.floor(ts / tau + 1e-12).astype(int), 0, nseg - 1)
        ss = np.clip(ts - js * tau, 0.0, tau)
        vals = base.eval_many(ss) @ right[js]
        if left is not None:
            vals = left[js] @ vals
        return vals

    return sample


def iterate(path: SymplecticPath, m: int, mesh: bool = True) -> SymplecticPath:
    """The m-th iterate on [0, m*tau]: gamma(t - j*tau) * gamma(tau)^j."""
    if m < 1:
        raise MaslovkitError(f"m must be >= 1, got {m}")
    W = path.end_matrix
    powers = [np.eye(2 * path.n)]
    for _ in range(m - 1):
        powers.append(powers[-1] @ W)
    sampler = _segment_eval(path, powers)

    times = np.concatenate(
        [path.times[:-1] + j * path.tau for j in range(m)] + [[m * path.tau]]
    )
    mats = np.concatenate(
        [path.mats[:-1] @ powers[j] for j in range(m)] + [(path.mats[-1] @ powers[-1])[None]]
    )
    base_mean = path.exact_mean
    prov = {
        "family": "iterated",
        "base": path,
        "m": m,
        "exact_mean": m * base_mean if base_mean is not None else None,
    }
    out = SymplecticPath(times, mats, sampler, prov, tol=path.tol, mesh_bound=path.mesh_bound)
    return out.meshed() if mesh else out


def p_iterate(path: SymplecticPath, P: SymplecticMatrix, m: int, mesh: bool = True) -> SymplecticPath:
    """Twisted iterate: gamma(t + tau) = P gamma(t) P gamma(tau), for t >= 0.

    Requires P to be an involution (P^2 = I); otherwise the recursion is
    inconsistent at the junctions and produces a discontinuous curve.
    """
    if m < 1:
        raise MaslovkitError(f"m must be >= 1, got {m}")
    if P.n != path.n:
        raise DimensionMismatch(f"P acts on Sp({2 * P.n}), path lives in Sp({2 * path.n})")
    eye = np.eye(2 * P.n)
    if np.abs(P.entries @ P.entries - eye).max() > 1e-8:
        raise InvolutionRequired("twisted iteration needs P with P^2 = I")

    PW = P.entries @ path.end_matrix
    right = [np.eye(2 * path.n)]
    for _ in range(m - 1):
        right.append(right[-1] @ PW)
    left = [eye if j % 2 == 0 else P.entries for j in range(m)]
    sampler = _segment_eval(path, right, left)

    times = np.concatenate(
        [path.times[:-1] + j * path.tau for j in range(m)] + [[m * path.tau]]
    )
    mats = sampler(times)
    prov = {"family": "p-iterated", "base": path, "m": m, "P": P, "exact_mean": None}
    out = SymplecticPath(times, mats, sampler, prov, tol=path.tol, mesh_bound=path.mesh_bound)
    return out.meshed() if mesh else out


def concatenate(first: MatrixPath, second: MatrixPath) -> MatrixPath:
    """Run ``first`` then ``second`` at double speed over the common interval.

    The junction requires first(tau) = second(0); the result keeps the
    interval [0, tau] of the inputs.
    """
    if abs(first.tau - second.tau) > 1e-12 * max(1.0, first.tau):
        raise DimensionMismatch("concatenation needs a common interval")
    if first.n != second.n:
        raise DimensionMismatch("concatenation needs a common dimension")
    gap = np.abs(first.end_matrix - second.start).max()
    if gap > 1e-8 * max(1.0, np.abs(first.end_matrix).max()):
        raise EndpointMismatch(f"junction mismatch {gap:.3e}")
    tau = first.tau

    def sample(ts: np.ndarray) -> np.ndarray:
        out = np.empty((ts.size, 2 * first.n, 2 * first.n))
        lo = ts < 0.5 * tau
        if lo.any():
            out[lo] = first.eval_many(2.0 * ts[lo])
        if (~lo).any():
            out[~lo] = second.eval_many(2.0 * ts[~lo] - tau)
        return out

    times = np.unique(np.concatenate([0.5 * first.times, 0.5 * (second.times + tau)]))
    mats = sample(times)
    prov = {"family": "concatenated", "parts": (first.provenance, second.provenance)}
    return MatrixPath(
        times, mats, sample, prov,
        tol=max(first.tol, second.tol),
        mesh_bound=min(first.mesh_bound, second.mesh_bound),
    )
