"""Heisenberg group core: group law, dilations, the left-invariant frame
X = d/dx + y d/dt, Y = d/dy - x d/dt, the contact form and horizontal lifts
of planar polylines.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

from hcone.errors import HconeError


@dataclass(frozen=True)
class HPoint:
    x: float
    y: float
    t: float

    def __post_init__(self):
        if not all(math.isfinite(c) for c in (self.x, self.y, self.t)):
            raise HconeError(f"non-finite coordinates {(self.x, self.y, self.t)}")

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.x, self.y, self.t)


@dataclass(frozen=True)
class HVector:
    """Horizontal vector a X + b Y."""

    a: float
    b: float

    def __post_init__(self):
        if not (math.isfinite(self.a) and math.isfinite(self.b)):
            raise HconeError(f"non-finite coefficients {(self.a, self.b)}")

    @property
    def norm(self) -> float:
        return math.hypot(self.a, self.b)


X = HVector(1.0, 0.0)
Y = HVector(0.0, 1.0)


@dataclass(frozen=True)
class ScalarField:
    """A smooth function on H^1 together with its Euclidean partials.

    All callables take ``(x, y, t)``. Missing partials are treated as zero,
    which is the common case of t-independent coefficients.
    """

    value: Callable[[float, float, float], float]
    dx: Callable[[float, float, float], float]
    dy: Callable[[float, float, float], float]
    dt: Callable[[float, float, float], float] | None = None


class PlanarCurve:
    """Polyline in the plane, stored as an ``(n, 2)`` float array."""

    def __init__(self, vertices: Iterable[Sequence[float]]):
        arr = np.array(vertices, dtype=float).reshape(-1, 2)
        if arr.shape[0] < 2:
            raise HconeError("a planar curve needs at least 2 vertices")
        if not np.all(np.isfinite(arr)):
            raise HconeError("non-finite curve vertex")
        arr.setflags(write=False)
        self.vertices = arr

    def __len__(self):
        return self.vertices.shape[0]

    def __repr__(self):
        return f"PlanarCurve({self.vertices.tolist()!r})"

    @classmethod
    def from_csv(cls, path) -> "PlanarCurve":
        rows = []
        with open(path, newline="") as fh:
            for row in csv.reader(fh):
                if not row or row[0].lstrip().startswith("#"):
                    continue
                if len(row) != 2:
                    raise HconeError(f"expected 'x,y' per line, got {row!r}")
                rows.append((float(row[0]), float(row[1])))
        return cls(rows)


def group_mul(p: HPoint, q: HPoint) -> HPoint:
    return HPoint(p.x + q.x, p.y + q.y, p.t + q.t + (q.x * p.y - p.x * q.y))


def group_inv(p: HPoint) -> HPoint:
    return HPoint(-p.x, -p.y, -p.t)


def dilate(lam: float, p: HPoint) -> HPoint:
    if not lam > 0:
        raise HconeError(f"dilation factor must be positive, got {lam}")
    return HPoint(lam * p.x, lam * p.y, lam * lam * p.t)


def frame_apply(v: HVector, f: ScalarField, p: HPoint) -> float:
    """Derivative of ``f`` at ``p`` along the left-invariant field ``aX + bY``."""
    x, y, t = p.x, p.y, p.t
    ft = f.dt(x, y, t) if f.dt is not None else 0.0
    return v.a * (f.dx(x, y, t) + y * ft) + v.b * (f.dy(x, y, t) - x * ft)


def horizontal_divergence(v1: ScalarField, v2: ScalarField) -> Callable[[HPoint], float]:
    """Return ``p -> X v1(p) + Y v2(p)``, the divergence of ``v1 X + v2 Y``."""

    def div(p: HPoint) -> float:
        return frame_apply(X, v1, p) + frame_apply(Y, v2, p)

    return div


def contact_form(p: HPoint, dp: Sequence[float]) -> float:
    """Evaluate dt - y dx + x dy at ``p`` on the tangent vector ``dp``."""
    dx, dy, dt = dp
    return dt - p.y * dx + p.x * dy


def segment_increments(vertices: np.ndarray) -> np.ndarray:
    """Exact t-increment of the horizontal lift along each straight segment.

    On a segment the integrand y x' - x y' is constant, equal to its value at
    the start vertex.
    """
    v = np.asarray(vertices, dtype=float)
    x1, y1 = v[:-1, 0], v[:-1, 1]
    dx = v[1:, 0] - x1
    dy = v[1:, 1] - y1
    return y1 * dx - x1 * dy


def lift_curve(gamma: PlanarCurve, t0: float = 0.0) -> list[HPoint]:
    """Horizontal lift of ``gamma`` starting at height ``t0``.

    The horizontality equation t' = y x' - x y' is left-invariant, so the same
    increments apply for curves that do not start at the origin.
    """
    inc = segment_increments(gamma.vertices)
    ts = np.concatenate(([t0], t0 + np.cumsum(inc)))
    return [HPoint(float(x), float(y), float(t)) for (x, y), t in zip(gamma.vertices, ts)]


def balayage_area(gamma: PlanarCurve) -> float:
    """Signed area swept by the segments from the origin to the curve."""
    v = gamma.vertices
    if v[0, 0] != 0.0 or v[0, 1] != 0.0:
        raise HconeError("balayage area is defined for curves starting at the origin")
    # triangle (0, v_i, v_{i+1}) has signed area -increment / 2
    return float(-0.5 * np.cumsum(segment_increments(v))[-1])
