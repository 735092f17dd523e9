"""Brute-force index oracle, independent of the adaptive engine.

``oracle_index`` counts signed zero crossings of the shifted determinant
over the extended curve on a dense uniform grid with plain interval
bisection.  It shares only the path/extension constructors and the
coorientation definition with the engine; the scanning, refinement, and
tangency policies are written from scratch so that an engine bug cannot
cancel out of a comparison.

Tangential stretches are handled by one fixed, deterministic bump: the
curve is multiplied by exp(phi(t) * G) with G a rigid shear direction
and phi an interior envelope vanishing at both ends, which leaves every
crossing count invariant but breaks the rotation strata where double
zeros live.  There is no retry machinery here on purpose; if the fixed
bump leaves a non-transversal zero, the oracle raises.
"""

import math

import numpy as np
import scipy.linalg

from .core import UnitCirclePoint, omega_nullity_matrix, structure_matrix
from .errors import DegenerateEndpoint, RealnessViolated, TangentialCrossing
from .paths import extension_path

ORACLE_BUMP_SIZE = 0.1
ORACLE_BISECTIONS = 48


def _fixed_bump(n):
    """The deterministic shear generator J @ diag(1, -1, ...)."""
    signs = np.array([1.0, -1.0] * n)
    return ORACLE_BUMP_SIZE * (structure_matrix(n) @ np.diag(signs))


def _make_curve(path, bump):
    zeta = extension_path(path.n, path.tau)
    tau = path.tau

    def curve(ts):
        ts = np.asarray(ts, dtype=float)
        first = ts < 0.5
        out = np.empty((ts.size, 2 * path.n, 2 * path.n))
        if first.any():
            out[first] = zeta.eval_many(2.0 * ts[first] * tau)
        if (~first).any():
            out[~first] = path.eval_many(
                np.clip(2.0 * ts[~first] - 1.0, 0.0, 1.0) * tau
            )
        phi = np.sin(math.pi * ts) ** 2
        phi[phi < 1e-20] = 0.0  # the ends must carry exactly no bump
        return out @ scipy.linalg.expm(phi[:, None, None] * bump)

    return curve


def _shifted_det(mats, omega, n):
    vals = np.linalg.det(mats - omega * np.eye(2 * n)) * omega ** (-n)
    scale = np.maximum(np.abs(vals.real), 1.0)
    worst = np.abs(vals.imag / scale).max()
    if worst > 1e-5:
        raise RealnessViolated(worst, float(np.abs(vals).max()))
    return vals.real


def oracle_index(path, omega, grid=100_000):
    """Signed crossing count at ``omega`` from a dense uniform grid.

    Requires an omega-nondegenerate endpoint.  Zero crossings are
    bracketed between adjacent grid nodes, refined by fixed-depth
    bisection, and signed by comparing the curve slope against the
    coorientation slope along s -> M exp(sJ).
    """
    omega = UnitCirclePoint(omega) if isinstance(omega, float) else omega
    n = path.n
    w = omega.value
    nu = omega_nullity_matrix(path.end_matrix, w)
    if nu:
        raise DegenerateEndpoint(nu)
    curve = _make_curve(path, _fixed_bump(n))

    ts = np.linspace(0.0, 1.0, grid + 1)
    fs = _shifted_det(curve(ts), w, n)
    signs = np.sign(fs)
    if signs[0] == 0.0 or signs[-1] == 0.0:
        raise TangentialCrossing("curve endpoint sits on the singular set")
    interior_zero = signs[1:-1] == 0.0
    if interior_zero.any():
        # a grid node landing exactly on a zero of a transversal crossing
        # has probability ~0; treat it as a tangency rather than guess
        raise TangentialCrossing("exact zero at a grid node")
    flips = np.nonzero(signs[:-1] * signs[1:] < 0.0)[0]
    if flips.size == 0:
        return 0

    lo = ts[flips].copy()
    hi = ts[flips + 1].copy()
    flo = fs[flips].copy()
    for _ in range(ORACLE_BISECTIONS):
        mid = 0.5 * (lo + hi)
        fmid = _shifted_det(curve(mid), w, n)
        left = flo * fmid > 0.0
        lo = np.where(left, mid, lo)
        flo = np.where(left, fmid, flo)
        hi = np.where(left, hi, mid)
    roots = 0.5 * (lo + hi)

    h = 0.25 / grid
    df = _shifted_det(curve(roots + h), w, n) - _shifted_det(curve(roots - h), w, n)
    mats = curve(roots)
    J = structure_matrix(n)
    s = 1e-6
    rot_p = scipy.linalg.expm(s * J)
    rot_m = scipy.linalg.expm(-s * J)
    dg = _shifted_det(mats @ rot_p, w, n) - _shifted_det(mats @ rot_m, w, n)

    scale = np.abs(fs).max()
    if np.any(np.abs(df) < 1e-11 * scale) or np.any(np.abs(dg) < 1e-11 * scale):
        raise TangentialCrossing("crossing slope below resolution")
    return int(np.sum(np.sign(df * dg)).item())
