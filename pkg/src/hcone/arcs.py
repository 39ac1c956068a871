"""Families of disjoint open arcs of the unit circle.

An arc is stored by its center angle (the direction of its bisectrix) and its
half opening angle. Families are validated once and are immutable afterwards.
Countable families are represented by a finite prefix plus a geometric tail of
arcs shrinking towards an accumulation angle.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from hcone.errors import BadHalfAngle, BadTail, HconeError, OriginQuery, OverlappingArcs

TWO_PI = 2.0 * math.pi
ANGLE_TOL = 1e-12


def wrap(theta):
    """Map an angle (or array of angles) to (-pi, pi]."""
    w = np.mod(np.asarray(theta, dtype=float) + math.pi, TWO_PI) - math.pi
    w = np.where(w == -math.pi, math.pi, w)
    return float(w) if np.ndim(w) == 0 else w


def normalize_angle(theta: float) -> float:
    """Map an angle to [0, 2pi)."""
    a = math.fmod(theta, TWO_PI)
    if a < 0:
        a += TWO_PI
    if a >= TWO_PI:
        a = 0.0
    return a


@dataclass(frozen=True)
class Arc:
    """Open arc {theta : |theta - center| < half_angle} of the unit circle."""

    center: float
    half_angle: float

    def __post_init__(self):
        if not (math.isfinite(self.center) and math.isfinite(self.half_angle)):
            raise BadHalfAngle(f"non-finite arc parameters {(self.center, self.half_angle)}")
        if not 0.0 < self.half_angle < math.pi:
            raise BadHalfAngle(f"half angle must lie in (0, pi), got {self.half_angle}")
        object.__setattr__(self, "center", normalize_angle(self.center))

    @property
    def length(self) -> float:
        return 2.0 * self.half_angle

    @property
    def endpoints(self) -> tuple[float, float]:
        """(clockwise end, counterclockwise end), normalized to [0, 2pi)."""
        return (
            normalize_angle(self.center - self.half_angle),
            normalize_angle(self.center + self.half_angle),
        )


@dataclass(frozen=True)
class ComplementaryArc:
    """Open arc starting at ``start`` and running counterclockwise for ``length``."""

    start: float
    length: float

    def contains(self, theta: float) -> bool:
        return 0.0 < normalize_angle(theta - self.start) < self.length


@dataclass(frozen=True)
class GeometricTail:
    """Arcs I_j, j = 0, 1, ..., accumulating at ``accumulate_at``.

    The j-th arc has center offset ``(first_center - accumulate_at) * ratio**j``
    from the accumulation angle and half angle ``first_half_angle * ratio**j``.
    """

    accumulate_at: float
    first_center: float
    ratio: float
    first_half_angle: float

    def __post_init__(self):
        object.__setattr__(self, "accumulate_at", normalize_angle(self.accumulate_at))
        object.__setattr__(self, "first_center", normalize_angle(self.first_center))
        if not 0.0 < self.ratio < 1.0:
            raise BadTail(f"tail ratio must lie in (0, 1), got {self.ratio}")
        if not 0.0 < self.first_half_angle < math.pi:
            raise BadHalfAngle(f"half angle must lie in (0, pi), got {self.first_half_angle}")
        d = self.offset
        if d == 0.0:
            raise BadTail("first tail center coincides with the accumulation angle")
        if d + self.first_half_angle >= math.pi:
            raise BadTail("tail must fit in an open half circle next to the accumulation angle")
        # consecutive arcs j, j+1 are disjoint iff alpha0 (1 + r) <= D (1 - r)
        if self.first_half_angle * (1.0 + self.ratio) > d * (1.0 - self.ratio) + ANGLE_TOL:
            raise OverlappingArcs("consecutive tail arcs overlap")

    @property
    def direction(self) -> float:
        return 1.0 if wrap(self.first_center - self.accumulate_at) > 0 else -1.0

    @property
    def offset(self) -> float:
        return abs(wrap(self.first_center - self.accumulate_at))

    @property
    def extent(self) -> float:
        """Angular width of the region occupied by the tail, from the accumulation angle."""
        return self.offset + self.first_half_angle

    def arc(self, j: int) -> Arc:
        rj = self.ratio**j
        return Arc(self.accumulate_at + self.direction * self.offset * rj, self.first_half_angle * rj)

    def half_angle(self, j: int) -> float:
        return self.first_half_angle * self.ratio**j

    def candidates(self, phi):
        """Nearest tail indices for offsets ``phi`` > 0 measured from the accumulation angle."""
        phi = np.asarray(phi, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            j = np.rint(np.log(phi / self.offset) / math.log(self.ratio))
        j = np.where(np.isfinite(j), j, 0.0)
        return np.maximum(j, 0.0).astype(np.int64)


@dataclass(frozen=True)
class SectorLocation:
    """Where a nonzero planar point sits relative to the sectors of a family.

    ``kind`` is one of ``inside_i``, ``inside_j``, ``bisectrix`` or ``boundary``.
    For ``inside_i`` the side is ``upper``/``lower`` (counterclockwise or
    clockwise of the bisectrix); for ``boundary`` it names the arc endpoint,
    ``ccw`` or ``cw``. ``index`` is ``None`` for gaps inside a geometric tail.
    """

    kind: str
    index: int | None
    side: str | None = None


@dataclass(frozen=True)
class ArcFamily:
    arcs: tuple[Arc, ...]
    complementary: tuple[ComplementaryArc, ...]
    tail: GeometricTail | None = None

    @property
    def is_finite(self) -> bool:
        return self.tail is None

    def __len__(self):
        if self.tail is not None:
            raise HconeError("infinite family has no length")
        return len(self.arcs)

    def arc(self, i: int) -> Arc:
        n = len(self.arcs)
        if i < n:
            return self.arcs[i]
        if self.tail is None:
            raise IndexError(i)
        return self.tail.arc(i - n)

    def truncate(self, k: int) -> "ArcFamily":
        """Finite family made of the prefix and the first ``k`` tail arcs."""
        if self.tail is None:
            return self
        return validate(list(self.arcs) + [self.tail.arc(j) for j in range(k)])

    def rotated(self, angle: float) -> "ArcFamily":
        tail = None
        if self.tail is not None:
            t = self.tail
            tail = GeometricTail(t.accumulate_at + angle, t.first_center + angle, t.ratio, t.first_half_angle)
        return validate([Arc(a.center + angle, a.half_angle) for a in self.arcs], tail)

    def assign(self, theta):
        """Vectorized lookup of the arc whose open sector contains each angle.

        Returns ``(index, center, half_angle)`` arrays; ``index`` is -1 where no
        arc applies and center/half_angle are then 0.
        """
        theta = np.asarray(theta, dtype=float)
        idx = np.full(theta.shape, -1, dtype=np.int64)
        cen = np.zeros(theta.shape)
        alp = np.zeros(theta.shape)
        for i, a in enumerate(self.arcs):
            hit = np.abs(wrap(theta - a.center)) < a.half_angle
            idx[hit] = i
            cen[hit] = a.center
            alp[hit] = a.half_angle
        if self.tail is not None:
            t = self.tail
            phi = t.direction * wrap(theta - t.accumulate_at)
            inside = (phi > 0) & (phi < t.extent)
            j0 = t.candidates(np.where(inside, phi, t.offset))
            for dj in (-1, 0, 1):
                j = np.maximum(j0 + dj, 0)
                rj = t.ratio ** j.astype(float)
                hit = inside & (np.abs(phi - t.offset * rj) < t.first_half_angle * rj)
                idx[hit] = len(self.arcs) + j[hit]
                cen[hit] = np.mod(t.accumulate_at + t.direction * t.offset * rj[hit], TWO_PI)
                alp[hit] = t.first_half_angle * rj[hit]
        return idx, cen, alp

    def interface_angles(self) -> list[float]:
        """Angles of all bisectrices and arc boundary rays (finite part only)."""
        out = []
        for a in self.arcs:
            out.extend([a.center, *a.endpoints])
        return sorted(set(out))

    def to_dict(self) -> dict:
        tail = None
        if self.tail is not None:
            t = self.tail
            tail = {
                "accumulate_at_rad": t.accumulate_at,
                "first_center_rad": t.first_center,
                "ratio": t.ratio,
                "first_half_angle_rad": t.first_half_angle,
            }
        return {
            "arcs": [{"center_rad": a.center, "half_angle_rad": a.half_angle} for a in self.arcs],
            "tail": tail,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    @classmethod
    def from_dict(cls, data: dict) -> "ArcFamily":
        if not isinstance(data, dict) or "arcs" not in data:
            raise HconeError("arc family JSON must be an object with an 'arcs' list")
        arcs = [Arc(_angle(item, "center"), _angle(item, "half_angle")) for item in data["arcs"]]
        tail = None
        if data.get("tail") is not None:
            t = data["tail"]
            tail = GeometricTail(
                _angle(t, "accumulate_at"),
                _angle(t, "first_center"),
                float(t["ratio"]),
                _angle(t, "first_half_angle"),
            )
        return validate(arcs, tail)

    @classmethod
    def from_json(cls, text: str) -> "ArcFamily":
        return cls.from_dict(json.loads(text))


def _angle(item: dict, key: str) -> float:
    if f"{key}_rad" in item:
        return float(item[f"{key}_rad"])
    if f"{key}_deg" in item:
        return math.radians(float(item[f"{key}_deg"]))
    raise HconeError(f"missing '{key}_rad' (or '{key}_deg')")


def _intervals_overlap(c1, a1, c2, a2) -> bool:
    return abs(wrap(c1 - c2)) < a1 + a2 - ANGLE_TOL


def validate(arcs, tail: GeometricTail | None = None) -> ArcFamily:
    """Check disjointness and build the normalized family with its complementary arcs.

    Closures may share endpoints. Raises ``OverlappingArcs`` if two open arcs
    intersect (or a finite arc enters the region of the tail) and
    ``BadHalfAngle`` for half angles outside (0, pi).
    """
    arcs = [a if isinstance(a, Arc) else Arc(*a) for a in arcs]
    arcs.sort(key=lambda a: (a.center, a.half_angle))
    spans = [(a.center, a.half_angle) for a in arcs]
    if tail is not None:
        ext = tail.extent
        spans.append((normalize_angle(tail.accumulate_at + tail.direction * ext / 2), ext / 2))
    for i in range(len(spans)):
        for j in range(i + 1, len(spans)):
            if _intervals_overlap(*spans[i], *spans[j]):
                raise OverlappingArcs(f"arcs centered at {spans[i][0]:.6g} and {spans[j][0]:.6g} intersect")
    total = sum(2 * a for _, a in spans)
    if total > TWO_PI + ANGLE_TOL:
        raise OverlappingArcs(f"total arc length {total} exceeds 2 pi")

    spans.sort()
    comp = []
    if not spans:
        comp.append(ComplementaryArc(0.0, TWO_PI))
    for i, (c, a) in enumerate(spans):
        cn, an = spans[(i + 1) % len(spans)]
        sep = normalize_angle(cn - c) if len(spans) > 1 else TWO_PI
        gap = sep - a - an
        if gap > ANGLE_TOL:
            comp.append(ComplementaryArc(normalize_angle(c + a), gap))
    return ArcFamily(tuple(arcs), tuple(comp), tail)


def _classify_offset(d: float, alpha: float, index: int) -> SectorLocation | None:
    ad = abs(d)
    if ad <= ANGLE_TOL:
        return SectorLocation("bisectrix", index)
    if abs(ad - alpha) <= ANGLE_TOL:
        return SectorLocation("boundary", index, "ccw" if d > 0 else "cw")
    if ad < alpha:
        return SectorLocation("inside_i", index, "upper" if d > 0 else "lower")
    return None


def locate(family: ArcFamily, v) -> SectorLocation:
    """Find the sector of ``family`` containing the nonzero planar point ``v``."""
    x, y = float(v[0]), float(v[1])
    if x == 0.0 and y == 0.0:
        raise OriginQuery("the origin belongs to every sector")
    theta = math.atan2(y, x)
    for i, a in enumerate(family.arcs):
        loc = _classify_offset(wrap(theta - a.center), a.half_angle, i)
        if loc is not None:
            return loc
    t = family.tail
    if t is not None:
        phi = t.direction * wrap(theta - t.accumulate_at)
        if ANGLE_TOL < phi <= t.extent + ANGLE_TOL:
            j0 = int(t.candidates(phi))
            for j in (j0 - 1, j0, j0 + 1):
                if j < 0:
                    continue
                rj = t.ratio**j
                d = t.direction * (phi - t.offset * rj)
                loc = _classify_offset(d, t.first_half_angle * rj, len(family.arcs) + j)
                if loc is not None:
                    return loc
    for j, gap in enumerate(family.complementary):
        if gap.contains(theta):
            return SectorLocation("inside_j", j)
    return SectorLocation("inside_j", None)


def is_covering(family: ArcFamily) -> bool:
    """True iff the family is finite, nonempty and its closures cover the circle."""
    return family.is_finite and len(family.arcs) > 0 and not family.complementary
