"""Seeded path corpus: analytic families plus random piecewise systems.

The analytic members (rotations at low-order rational turns, hyperbolic
stretches, and their direct sums) carry exact angle data and exercise
every degenerate branch on purpose.  The random members integrate
piecewise-constant symmetric systems with entries in [-2, 2], one to
four pieces, n in {1, 2}; their endpoint circle angles are redrawn until
they clear the low-order roots of unity by a whole gate width, so that a
float angle sitting on the edge of the nullity gate cannot make the two
sides of a root-sum comparison read the matrix differently.
"""

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .core import TWO_PI, spectrum_on_unit_circle
from .paths import (
    HamiltonianDescriptor,
    diamond_sum,
    hyperbolic_path,
    integrate,
    rotation_path,
)

#: members whose endpoint spectrum sits within this of a resonant angle
#: are redrawn; an order of magnitude wider than the nullity gate
RESONANCE_CLEARANCE = 1e-3

#: denominators whose roots of unity the test suites actually visit
RESONANT_DENOMINATORS = tuple(range(1, 25)) + (32, 40, 48, 64)

_RESONANT_ANGLES = np.unique(
    np.concatenate(
        [TWO_PI * np.arange(q, dtype=float) / q for q in RESONANT_DENOMINATORS]
    )
)


@dataclass(frozen=True)
class CorpusEntry:
    label: str
    path: object
    seed: int = 0


def _clear_of_resonances(path):
    angles = [e.angle for e in spectrum_on_unit_circle(path.end()).entries]
    for angle in angles:
        gaps = np.abs(
            (angle - _RESONANT_ANGLES + math.pi) % TWO_PI - math.pi
        )
        if gaps.min() < RESONANCE_CLEARANCE:
            return False
    return True


def random_descriptor(rng, n=None, tau=1.0):
    """One random piecewise-constant symmetric system."""
    if n is None:
        n = int(rng.integers(1, 3))
    pieces = int(rng.integers(1, 5))
    cuts = np.sort(rng.uniform(0.15, 0.85, size=pieces - 1)) * tau
    breaks = tuple(cuts) + (tau,)
    blocks = []
    for _ in range(pieces):
        raw = rng.uniform(-2.0, 2.0, size=(2 * n, 2 * n))
        blocks.append(0.5 * (raw + raw.T))
    return HamiltonianDescriptor.piecewise(blocks, breaks, tau)


def random_path(rng, n=None, steps=64, max_draws=40):
    """An integrated random system whose endpoint clears the resonant angles."""
    for _ in range(max_draws):
        descriptor = random_descriptor(rng, n=n)
        path = integrate(descriptor, steps=steps)
        if _clear_of_resonances(path):
            return path
    raise RuntimeError("could not draw a resonance-free system")


def _analytic_catalog():
    """The fixed analytic members, in a stable order."""
    entries = []
    turn_list = [
        Fraction(1, 2), Fraction(1), Fraction(3, 2), Fraction(2),
        Fraction(1, 3), Fraction(2, 3), Fraction(4, 3), Fraction(1, 4),
        Fraction(3, 4), Fraction(5, 4), Fraction(1, 5), Fraction(2, 5),
        Fraction(3, 5), Fraction(1, 6), Fraction(5, 6), Fraction(1, 7),
        Fraction(3, 7), Fraction(5, 7), Fraction(1, 8), Fraction(3, 8),
        Fraction(5, 8), Fraction(7, 8),
    ]
    for turns in turn_list:
        entries.append(
            CorpusEntry(f"rotation-{turns}", rotation_path(0.0, turns=turns))
        )
    for rate in (0.5, 1.0, 1.7):
        entries.append(CorpusEntry(f"hyperbolic-{rate}", hyperbolic_path(rate)))
    for turns in (Fraction(1, 2), Fraction(1), Fraction(2, 3), Fraction(3, 4)):
        entries.append(
            CorpusEntry(
                f"diamond-{turns}-hyp",
                diamond_sum(rotation_path(0.0, turns=turns), hyperbolic_path(1.0)),
            )
        )
    for ta, tb in ((Fraction(1, 2), Fraction(1, 3)), (Fraction(1), Fraction(1, 4))):
        entries.append(
            CorpusEntry(
                f"diamond-{ta}-{tb}",
                diamond_sum(
                    rotation_path(0.0, turns=ta), rotation_path(0.0, turns=tb)
                ),
            )
        )
    return entries


def corpus(size, seed, steps=64):
    """``size`` corpus entries, deterministic in ``seed``.

    The analytic catalog comes first (truncated when size is small); the
    remainder are integrated random systems, each drawn from its own
    child seed so entries do not depend on how many precede them.
    """
    if size < 1:
        raise ValueError("corpus size must be >= 1")
    entries = _analytic_catalog()[:size]
    # spawn all children up front so entry k is a pure function of (seed, k)
    seq = np.random.SeedSequence(seed)
    children = seq.spawn(max(0, size - len(entries)))
    for k, child in enumerate(children):
        rng = np.random.default_rng(child)
        path = random_path(rng, steps=steps)
        entries.append(CorpusEntry(f"random-{k:04d}", path, seed=seed))
    return entries
