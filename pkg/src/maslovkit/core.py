"""Symplectic linear algebra kernels.

Certification of membership in Sp(2n), the unit-circle part of a spectrum,
and the real function whose zero set is the locus of matrices with a given
unit-circle eigenvalue.  Everything downstream (paths, crossing counts,
iteration calculus) sits on top of these few functions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import numpy as np
import scipy.linalg

from .errors import (
    DimensionMismatch,
    NotSymplectic,
    OddDimension,
    RealnessViolated,
)

TWO_PI = 2.0 * math.pi

#: default tolerance for the (scale-relative) symplectic defect
DEFAULT_SYMP_TOL = 1e-8
#: default scale-invariant tolerance for unit-circle / rank decisions
DEFAULT_EIG_TOL = 1e-8
#: angular width used to cluster numerically split multiple eigenvalues;
#: a double eigenvalue computed in floating point scatters like sqrt(eps)
ANGLE_CLUSTER_TOL = 1e-6


def structure_matrix(n: int) -> np.ndarray:
    """The block matrix [[0, -I], [I, 0]] defining the standard symplectic
    form on R^{2n}."""
    if n < 1:
        raise DimensionMismatch(f"n must be >= 1, got {n}")
    J = np.zeros((2 * n, 2 * n))
    J[:n, n:] = -np.eye(n)
    J[n:, :n] = np.eye(n)
    return J


def symplectic_defect(matrix: np.ndarray) -> float:
    """Max-norm residue of M^T J M - J, relative to the squared matrix scale.

    The relative scaling keeps the certificate meaningful for large-norm
    matrices (high iterates of hyperbolic paths), where the absolute residue
    grows like eps * ||M||^2 from rounding alone.
    """
    n = matrix.shape[0] // 2
    J = structure_matrix(n)
    residue = matrix.T @ J @ matrix - J
    scale = max(1.0, float(np.abs(matrix).max()) ** 2)
    return float(np.abs(residue).max()) / scale


@dataclass(frozen=True)
class SymplecticMatrix:
    """A certified member of Sp(2n).

    Instances are produced by :func:`certify_symplectic`; ``defect`` records
    the measured residue so reports can show how close the input was.
    """

    n: int
    entries: np.ndarray
    defect: float
    tol: float

    def __post_init__(self):
        self.entries.setflags(write=False)

    @property
    def dim(self) -> int:
        return 2 * self.n

    def inverse(self) -> "SymplecticMatrix":
        """Group inverse via M^{-1} = -J M^T J (exact in exact arithmetic)."""
        J = structure_matrix(self.n)
        inv = -J @ self.entries.T @ J
        return SymplecticMatrix(self.n, inv, symplectic_defect(inv), self.tol)

    def __matmul__(self, other: "SymplecticMatrix") -> "SymplecticMatrix":
        if self.n != other.n:
            raise DimensionMismatch(
                f"cannot multiply Sp({2 * self.n}) by Sp({2 * other.n})"
            )
        prod = self.entries @ other.entries
        return SymplecticMatrix(self.n, prod, symplectic_defect(prod), self.tol)


def certify_symplectic(matrix, tol: float = DEFAULT_SYMP_TOL) -> SymplecticMatrix:
    """Check M^T J M = J and wrap the matrix with its certificate.

    Parameters
    ----------
    matrix : array_like, shape (2n, 2n)
        Real square matrix of even dimension.
    tol : float
        Bound on the scale-relative defect.

    Raises
    ------
    OddDimension
        If the matrix is not square of even dimension.
    NotSymplectic
        If the defect exceeds ``tol``.  The measured defect rides on the
        exception.
    """
    M = np.asarray(matrix, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1] or M.shape[0] % 2 != 0:
        raise OddDimension(M.shape)
    n = M.shape[0] // 2
    defect = symplectic_defect(M)
    if not np.isfinite(defect) or defect > tol:
        raise NotSymplectic(defect, tol)
    # secondary sanity: det = +1, judged at the scale where the float
    # determinant still carries information
    det = float(np.linalg.det(M))
    det_scale = max(1.0, float(np.abs(M).max()) ** (2 * n))
    if abs(det - 1.0) > max(1e-6, 1e-9 * det_scale):
        raise NotSymplectic(abs(det - 1.0), tol)
    return SymplecticMatrix(n, M.copy(), defect, tol)


def conjugate(M: SymplecticMatrix, P: SymplecticMatrix) -> SymplecticMatrix:
    """P^{-1} M P, with the inverse taken by the exact group formula."""
    if M.n != P.n:
        raise DimensionMismatch(f"n mismatch: {M.n} vs {P.n}")
    J = structure_matrix(P.n)
    Pinv = -J @ P.entries.T @ J
    out = Pinv @ M.entries @ P.entries
    return SymplecticMatrix(M.n, out, symplectic_defect(out), M.tol)


class UnitCirclePoint:
    """A point on the unit circle, carrying an exact rational angle when the
    construction is analytic.

    ``turns`` is the angle as a fraction of a full turn (angle = 2*pi*turns);
    it is ``None`` for generic floating-point angles.  Keeping the fraction
    around lets the iteration formulas use exact ceiling arithmetic.
    """

    __slots__ = ("angle", "turns")

    def __init__(self, angle: float, turns: Optional[Fraction] = None):
        if turns is not None:
            turns = Fraction(turns) % 1
            angle = TWO_PI * float(turns)
        else:
            angle = float(angle) % TWO_PI
            # -1e-18 % 2pi == 2pi in floating point; fold back
            if angle >= TWO_PI:
                angle = 0.0
            # recognize analytically-rational angles given as floats, so the
            # exact ceiling arithmetic downstream stays available
            guess = Fraction(angle / TWO_PI).limit_denominator(64)
            if abs(angle - TWO_PI * float(guess)) <= 1e-9:
                turns = guess % 1
                angle = TWO_PI * float(turns)
        self.angle = angle
        self.turns = turns

    @classmethod
    def from_turns(cls, p, q=None) -> "UnitCirclePoint":
        frac = Fraction(p, q) if q is not None else Fraction(p)
        return cls(0.0, frac)

    @classmethod
    def one(cls) -> "UnitCirclePoint":
        return cls.from_turns(0)

    @property
    def value(self) -> complex:
        return complex(math.cos(self.angle), math.sin(self.angle))

    @property
    def is_one(self) -> bool:
        if self.turns is not None:
            return self.turns == 0
        return self.angle == 0.0

    def conj(self) -> "UnitCirclePoint":
        if self.turns is not None:
            return UnitCirclePoint.from_turns(-self.turns)
        return UnitCirclePoint(-self.angle)

    def rotated(self, delta: float) -> "UnitCirclePoint":
        """Shift the angle by ``delta`` radians (result loses rationality)."""
        return UnitCirclePoint(self.angle + delta)

    def key(self):
        """Hashable identity used for caching index computations."""
        if self.turns is not None:
            return ("Q", self.turns)
        return ("F", round(self.angle, 12))

    def __repr__(self):
        if self.turns is not None:
            return f"UnitCirclePoint(turns={self.turns})"
        return f"UnitCirclePoint(angle={self.angle:.12g})"

    def __eq__(self, other):
        return isinstance(other, UnitCirclePoint) and self.key() == other.key()

    def __hash__(self):
        return hash(self.key())


@dataclass(frozen=True)
class SpectrumEntry:
    angle: float
    algebraic: int
    geometric: int


@dataclass(frozen=True)
class SpectrumOnU:
    """Unit-circle part of a symplectic spectrum.

    ``entries`` lists the distinct angles in [0, 2*pi) with algebraic and
    geometric multiplicities; ``elliptic_height`` is the total number of
    eigenvalues on the circle counted with algebraic multiplicity (always
    even for a real symplectic matrix).
    """

    entries: tuple
    elliptic_height: int

    def angles(self):
        return [e.angle for e in self.entries]

    def entry_at(self, angle: float, tol: float = ANGLE_CLUSTER_TOL):
        for e in self.entries:
            gap = abs((e.angle - angle + math.pi) % TWO_PI - math.pi)
            if gap <= tol:
                return e
        return None


def _rank_deficiency(shifted: np.ndarray, scale: float, eig_tol: float) -> int:
    """Number of negligible singular values of ``shifted``.

    Thresholds are taken relative to the larger of the shifted matrix's own
    top singular value and the parent matrix scale, so a matrix that is zero
    to rounding (e.g. M - I at M = I) is seen as rank zero.  The scale is
    capped: on huge-norm iterates an uncapped relative threshold would
    swallow the order-one singular values that separate genuine kernel
    directions from the rest.
    """
    sv = np.linalg.svd(shifted, compute_uv=False)
    cap = min(max(sv[0] if sv.size else 0.0, scale), 1e6)
    thresh = eig_tol * max(cap, 1.0)
    return int(np.count_nonzero(sv <= thresh))


def spectrum_on_unit_circle(
    M: SymplecticMatrix, eig_tol: float = DEFAULT_EIG_TOL
) -> SpectrumOnU:
    """Eigenvalues of M on the unit circle, clustered by angle.

    Eigenvalues within ``eig_tol`` of the circle (scale-invariant test on
    |lambda| - 1) are kept; angles within :data:`ANGLE_CLUSTER_TOL` are merged
    and snapped, so an exactly real eigenvalue reports angle 0.0 or pi.
    Geometric multiplicity comes from a rank computation at the snapped point.
    """
    eigs = np.linalg.eigvals(M.entries)
    on_circle = [z for z in eigs if abs(abs(z) - 1.0) <= max(eig_tol, 1e-7)]
    if not on_circle:
        return SpectrumOnU(entries=(), elliptic_height=0)

    angles = sorted((float(np.angle(z)) % TWO_PI) for z in on_circle)
    clusters = [[angles[0]]]
    for a in angles[1:]:
        if a - clusters[-1][-1] <= ANGLE_CLUSTER_TOL:
            clusters[-1].append(a)
        else:
            clusters.append([a])
    # the circle wraps: merge a cluster hugging 2*pi into the one at 0
    if len(clusters) > 1 and (TWO_PI - clusters[-1][-1]) + clusters[0][0] <= ANGLE_CLUSTER_TOL:
        clusters[0] = [a - TWO_PI for a in clusters[-1]] + clusters[0]
        clusters.pop()

    scale = float(np.abs(M.entries).max())
    entries = []
    for cluster in clusters:
        theta = float(np.mean(cluster)) % TWO_PI
        # snap to the nearest "clean" angle when within clustering distance
        for special in (0.0, math.pi):
            if abs((theta - special + math.pi) % TWO_PI - math.pi) <= ANGLE_CLUSTER_TOL:
                theta = special
                break
        lam = complex(math.cos(theta), math.sin(theta))
        shifted = M.entries.astype(complex) - lam * np.eye(M.dim)
        geo = _rank_deficiency(shifted, scale, eig_tol)
        entries.append(SpectrumEntry(angle=theta, algebraic=len(cluster), geometric=geo))

    entries.sort(key=lambda e: e.angle)
    height = sum(e.algebraic for e in entries)
    return SpectrumOnU(entries=tuple(entries), elliptic_height=height)


def elliptic_height(M: SymplecticMatrix, eig_tol: float = DEFAULT_EIG_TOL) -> int:
    """Total algebraic multiplicity of the unit-circle spectrum of M."""
    return spectrum_on_unit_circle(M, eig_tol).elliptic_height


def shifted_determinant(
    entries: np.ndarray,
    omega: complex,
    n: int,
    rtol: float = 1e-8,
) -> float:
    """omega^{-n} det(M - omega I), which is real on Sp(2n).

    Raises :class:`RealnessViolated` when the imaginary residue is large
    relative to the determinant's own magnitude.
    """
    dim = 2 * n
    value = complex(omega) ** (-n) * complex(
        np.linalg.det(entries.astype(complex) - omega * np.eye(dim))
    )
    scale = max(1.0, abs(value))
    if abs(value.imag) > rtol * scale:
        raise RealnessViolated(abs(value.imag), scale)
    return float(value.real)


def singular_detector(M: SymplecticMatrix, omega: UnitCirclePoint) -> float:
    """Real defining function of the omega-singular locus, evaluated at M.

    Zero exactly when omega is an eigenvalue of M; the sign carries the
    side of the locus and drives all crossing computations downstream.
    """
    return shifted_determinant(M.entries, omega.value, M.n)


def omega_nullity_matrix(
    entries: np.ndarray, omega: complex, eig_tol: float = DEFAULT_EIG_TOL
) -> int:
    """dim_C ker(M - omega I), robust across matrix norms.

    A spectral proximity gate runs first: when no eigenvalue comes near
    omega the kernel is empty and the answer is 0 without any rank
    decision; the gate widens only logarithmically with the matrix norm.
    Candidate eigenvalues are then deflated to the leading block of an
    ordered Schur form and the rank decision happens on that small block.
    On a huge-norm iterate a direct SVD of M - omega I is useless (its
    interior singular values carry absolute noise ~eps * |M|), but the
    deflated block stays order-one: the hyperbolic part is separated by a
    large spectral gap, so it leaks in only through a negligible subspace
    rotation.
    """
    dim = entries.shape[0]
    scale = float(np.abs(entries).max())
    gate = 1e-5 * max(1.0, math.log10(1.0 + scale))
    eigs = np.linalg.eigvals(entries)
    near = np.abs(eigs - omega) <= gate
    if not near.any():
        return 0
    if near.all():
        shifted = entries.astype(complex) - omega * np.eye(dim)
        return _rank_deficiency(shifted, scale, eig_tol)
    T, _Z, sdim = scipy.linalg.schur(
        entries.astype(complex),
        output="complex",
        sort=lambda lam: np.abs(lam - omega) <= gate,
    )
    if sdim == 0:  # gate-edge disagreement between eigvals and schur
        return 0
    block = T[:sdim, :sdim]
    shifted = block - omega * np.eye(sdim)
    return _rank_deficiency(shifted, float(np.abs(block).max()), eig_tol)
