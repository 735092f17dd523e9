"""Shared test helpers: closed-form references and random generators."""

import math

import numpy as np
import scipy.linalg

import maslovkit as mk

TWO_PI = 2.0 * math.pi


def rotation_reference(theta, phi):
    """Closed-form index of t -> exp(t*theta*J) in Sp(2) at omega = e^{i*phi}.

    Valid when the endpoint is omega-nondegenerate (|theta| not congruent
    to +-phi mod 2*pi).  Counted from the crossing picture: the rotation
    meets the omega-singular set once per passage of the angle through
    +-phi mod 2*pi, every passage positively oriented, plus the anchor
    crossing contributed at angle 0 when phi = 0.
    """
    sgn = 1 if theta > 0 else -1
    th = abs(theta)
    phi = phi % TWO_PI
    kmax = int(th / TWO_PI) + 2
    if phi == 0.0:
        count = 1 + 2 * sum(1 for k in range(1, kmax) if TWO_PI * k < th)
    elif abs(phi - math.pi) < 1e-12:
        count = 2 * sum(1 for j in range(kmax) if (2 * j + 1) * math.pi < th)
    else:
        count = sum(1 for k in range(kmax) if phi + TWO_PI * k < th)
        count += sum(1 for k in range(kmax) if (TWO_PI - phi) + TWO_PI * k < th)
    return sgn * count


def random_symplectic(n, rng, scale=0.8):
    """exp(J S) for random symmetric S: in the group up to rounding."""
    S = rng.standard_normal((2 * n, 2 * n))
    S = scale * 0.5 * (S + S.T)
    return scipy.linalg.expm(mk.structure_matrix(n) @ S)


def random_descriptor(rng, n=None, tau=1.0, max_pieces=4):
    """Random piecewise-constant symmetric system."""
    if n is None:
        n = int(rng.integers(1, 3))
    pieces = int(rng.integers(1, max_pieces + 1))
    blocks = []
    for _ in range(pieces):
        S = rng.uniform(-2.0, 2.0, (2 * n, 2 * n))
        blocks.append(0.5 * (S + S.T))
    if pieces > 1:
        cuts = np.sort(rng.uniform(0.15, 0.95, pieces - 1)) * tau
        breaks = cuts.tolist() + [tau]
    else:
        breaks = [tau]
    return mk.HamiltonianDescriptor.piecewise(blocks, breaks, tau)
