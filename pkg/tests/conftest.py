import math
from pathlib import Path

import numpy as np
import pytest

from hcone.arcs import Arc, GeometricTail, validate

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


def fig2_family():
    d = math.radians
    return validate([Arc(d(-15.0), d(45.0)), Arc(d(112.5), d(22.5)), Arc(d(172.5), d(37.5))])


def one_arc_family(alpha=math.pi / 4, center=0.0):
    return validate([Arc(center, alpha)])


def halves_family():
    return validate([Arc(0.0, math.pi / 2), Arc(math.pi, math.pi / 2)])


def tail_family():
    return validate([], GeometricTail(0.0, 1.0, 0.5, 0.3))


def random_family(rng, k, covering):
    """k arcs from a random partition of the circle; shrunk when not covering."""
    cuts = np.sort(rng.uniform(0.0, 2 * math.pi, size=k))
    while k > 1 and np.min(np.diff(np.append(cuts, cuts[0] + 2 * math.pi))) < 0.05:
        cuts = np.sort(rng.uniform(0.0, 2 * math.pi, size=k))
    ends = np.append(cuts[1:], cuts[0] + 2 * math.pi)
    arcs = []
    for i, (a, b) in enumerate(zip(cuts, ends)):
        half = (b - a) / 2
        if k == 1:
            half = min(half, math.pi * 0.9)
        if not covering and (i == 0 or rng.random() < 0.5):
            half *= rng.uniform(0.3, 0.95)
        arcs.append(Arc((a + b) / 2, half))
    return validate(arcs)


@pytest.fixture
def fixtures_dir():
    return FIXTURES


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
