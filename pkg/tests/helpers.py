"""Shared fixtures and generators for the test-suite."""

from fractions import Fraction

import numpy as np

from gridcert.netmodel import Bus, Line, Network

# 3-bus fixture impedance matrix, consumption-positive convention
FIXTURE_Z = np.array([[-1 / 7, -1 / 7], [-1 / 7, -64 / 203 + 2j / 29]])
# same matrix in the library's injection convention
FIXTURE_Z_INJ = -FIXTURE_Z

# exact rational parts of the 3-bus fixture, for oracle arithmetic
FIXTURE_Z_EXACT = {
    (0, 0): (Fraction(-1, 7), Fraction(0)),
    (0, 1): (Fraction(-1, 7), Fraction(0)),
    (1, 0): (Fraction(-1, 7), Fraction(0)),
    (1, 1): (Fraction(-64, 203), Fraction(2, 29)),
}


def random_radial_network(rng, n=None, shunts=None, chain=False):
    """Random radial feeder: bus k hangs off a uniformly chosen earlier bus.

    ``r, x ~ U[0.01, 1]``; when ``shunts`` is true (default: coin flip) each
    load bus gets a capacitive shunt ``b ~ U[0, 0.05]`` with probability 1/2.
    """
    if n is None:
        n = int(rng.integers(1, 7))
    if shunts is None:
        shunts = bool(rng.integers(0, 2))
    lines = []
    for k in range(1, n + 1):
        parent = k - 1 if chain else int(rng.integers(0, k))
        lines.append(Line(parent, k, float(rng.uniform(0.01, 1)), float(rng.uniform(0.01, 1))))
    buses = [Bus(0)]
    for k in range(1, n + 1):
        b = float(rng.uniform(0, 0.05)) if shunts and rng.random() < 0.5 else 0.0
        buses.append(Bus(k, complex(0, b)))
    return Network(tuple(buses), tuple(lines), 1.0)


def random_direction(rng, n):
    """Random complex load direction with unit 2-norm."""
    w = rng.normal(size=n) + 1j * rng.normal(size=n)
    return w / np.linalg.norm(w)
