"""The cones C(I) as t-graphs of piecewise quadratic functions.

In the frame of an arc with half angle ``alpha`` (bisectrix along the positive
x-axis) the graph function is ``y (|y| cot(alpha) - x)`` inside the sector and
zero outside; a family glues rotated copies, at most one of which is nonzero at
any point. The surface is ruled by lifted half-lines: radial rays over the
complementary sectors and, inside each arc sector, half-lines leaving the
bisectrix at angle +-alpha.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from hcone.arcs import ANGLE_TOL, Arc, ArcFamily, locate, is_covering, wrap
from hcone.errors import BadHalfAngle, InfiniteFamily, NoTail, NotC1, SingularPoint
from hcone.hgroup import PlanarCurve


def _check_alpha(alpha: float) -> None:
    if not 0.0 < alpha < math.pi:
        raise BadHalfAngle(f"half angle must lie in (0, pi), got {alpha}")


def _cot(alpha):
    # pi/2 - alpha is exact for alpha >= pi/4, so cot(pi/2) comes out as 0
    alpha = np.asarray(alpha, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(alpha >= math.pi / 4, np.tan(math.pi / 2 - alpha), np.cos(alpha) / np.sin(alpha))
    return float(out) if out.ndim == 0 else out


def _to_frame(x, y, center):
    c, s = np.cos(center), np.sin(center)
    return x * c + y * s, -x * s + y * c


def _from_frame(gx, gy, center):
    c, s = np.cos(center), np.sin(center)
    return gx * c - gy * s, gx * s + gy * c


def _local_u(alpha, xr, yr):
    return yr * (np.abs(yr) * _cot(alpha) - xr)


def _local_grad(alpha, xr, yr):
    return -yr, 2.0 * np.abs(yr) * _cot(alpha) - xr


@dataclass(frozen=True)
class OneSided:
    """Possibly multi-valued planar vector.

    Off interface rays there is a single entry tagged ``interior``. On a ray
    the entries ``ccw`` and ``cw`` hold the limits from the counterclockwise
    and clockwise sides.
    """

    sides: dict

    @property
    def single(self) -> bool:
        return len(self.sides) == 1

    @property
    def value(self) -> tuple[float, float]:
        if "interior" in self.sides:
            return self.sides["interior"]
        raise ValueError("multi-valued; pick a side")

    @property
    def jump(self) -> float:
        vals = list(self.sides.values())
        return max(
            (math.hypot(a[0] - b[0], a[1] - b[1]) for a in vals for b in vals),
            default=0.0,
        )

    def to_dict(self) -> dict:
        return {k: [float(v[0]), float(v[1])] for k, v in self.sides.items()}


def u_alpha(alpha: float, v) -> float:
    """Graph function of the single arc of half angle ``alpha`` centered at angle 0."""
    _check_alpha(alpha)
    x, y = float(v[0]), float(v[1])
    if (x == 0.0 and y == 0.0) or math.atan2(abs(y), x) >= alpha:
        return 0.0
    return float(_local_u(alpha, x, y))


def grad_u_alpha(alpha: float, v) -> OneSided:
    """Gradient of :func:`u_alpha`, with both one-sided limits on the three rays."""
    _check_alpha(alpha)
    x, y = float(v[0]), float(v[1])
    if x == 0.0 and y == 0.0:
        return OneSided({"interior": (0.0, 0.0)})
    theta = math.atan2(y, x)
    inner = tuple(float(g) for g in _local_grad(alpha, x, y))
    zero = (0.0, 0.0)
    if abs(theta) <= ANGLE_TOL:
        return OneSided({"ccw": inner, "cw": inner})
    if abs(theta - alpha) <= ANGLE_TOL:
        return OneSided({"ccw": zero, "cw": inner})
    if abs(theta + alpha) <= ANGLE_TOL:
        return OneSided({"ccw": inner, "cw": zero})
    return OneSided({"interior": inner if abs(theta) < alpha else zero})


class ConeSurface:
    """The t-graph C(I) of a family of disjoint arcs.

    ``values`` and ``gradients`` are vectorized over coordinate arrays and are
    what the quadrature code uses; on interface rays they return the value of
    one fixed side. The point queries :func:`evaluate`, :func:`gradient` and
    :func:`characteristic_vector` resolve rays into one-sided limits.
    """

    def __init__(self, family: ArcFamily):
        self.family = family

    def __repr__(self):
        return f"ConeSurface({self.family!r})"

    def _frame(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        idx, cen, alp = self.family.assign(np.arctan2(y, x))
        xr, yr = _to_frame(x, y, cen)
        return idx >= 0, cen, np.where(idx >= 0, alp, 1.0), xr, yr

    def values(self, x, y):
        inside, _, alp, xr, yr = self._frame(x, y)
        return np.where(inside, _local_u(alp, xr, yr), 0.0)

    def gradients(self, x, y):
        inside, cen, alp, xr, yr = self._frame(x, y)
        gx, gy = _from_frame(*_local_grad(alp, xr, yr), cen)
        return np.where(inside, gx, 0.0), np.where(inside, gy, 0.0)

    def interface_angles(self) -> list[float]:
        if not self.family.is_finite:
            raise InfiniteFamily("interfaces of an infinite family are not finite")
        return self.family.interface_angles()

    def arc_gradient(self, i: int, x: float, y: float) -> tuple[float, float]:
        """Closed-form gradient of arc ``i``'s piece, continued to the closed sector."""
        a = self.family.arc(i)
        xr, yr = _to_frame(x, y, a.center)
        g = _from_frame(*_local_grad(a.half_angle, xr, yr), a.center)
        return float(g[0]), float(g[1])

    def side_arc(self, theta: float, side: str) -> int | None:
        """Arc whose open sector contains the angles just ``side`` of ``theta``."""
        sgn = 1.0 if side == "ccw" else -1.0
        fam = self.family
        for i, a in enumerate(fam.arcs):
            d = sgn * wrap(theta - a.center)
            if -a.half_angle - ANGLE_TOL <= d < a.half_angle - ANGLE_TOL:
                return i
        t = fam.tail
        if t is not None:
            phi = t.direction * wrap(theta - t.accumulate_at)
            if 0.0 <= phi <= t.extent + ANGLE_TOL:
                j0 = int(t.candidates(max(phi, 1e-300)))
                for j in (j0 - 1, j0, j0 + 1):
                    if j < 0:
                        continue
                    a = t.arc(j)
                    d = sgn * wrap(theta - a.center)
                    if -a.half_angle - ANGLE_TOL <= d < a.half_angle - ANGLE_TOL:
                        return len(fam.arcs) + j
        return None


def _as_cone(obj) -> ConeSurface:
    return obj if isinstance(obj, ConeSurface) else ConeSurface(obj)


def evaluate(cone: ConeSurface, v) -> float:
    return float(_as_cone(cone).values(float(v[0]), float(v[1])))


def gradient(cone: ConeSurface, v) -> OneSided:
    """Gradient of the graph function at ``v`` with one-sided limits on rays."""
    cone = _as_cone(cone)
    x, y = float(v[0]), float(v[1])
    if x == 0.0 and y == 0.0:
        return OneSided({"interior": (0.0, 0.0)})
    loc = locate(cone.family, (x, y))
    zero = (0.0, 0.0)
    if loc.kind == "inside_i":
        return OneSided({"interior": cone.arc_gradient(loc.index, x, y)})
    if loc.kind == "inside_j":
        return OneSided({"interior": zero})
    theta = math.atan2(y, x)
    out = {}
    for side in ("ccw", "cw"):
        i = cone.side_arc(theta, side)
        out[side] = zero if i is None else cone.arc_gradient(i, x, y)
    return OneSided(out)


def characteristic_vector(cone: ConeSurface, v) -> OneSided:
    """(u_x - y, u_y + x): the horizontal part of the graph's normal, up to sign.

    It vanishes exactly where the tangent plane of the graph is horizontal.
    """
    x, y = float(v[0]), float(v[1])
    g = gradient(cone, v)
    return OneSided({k: (gx - y, gy + x) for k, (gx, gy) in g.sides.items()})


@dataclass(frozen=True)
class SingularSet:
    """``kind`` is ``empty``, ``point`` (the origin) or ``rays`` (origin plus rays)."""

    kind: str
    ray_angles: tuple[float, ...] = ()

    def to_dict(self) -> dict:
        return {"kind": self.kind, "ray_angles_rad": list(self.ray_angles)}


def singular_set(cone: ConeSurface) -> SingularSet:
    fam = _as_cone(cone).family
    if not fam.is_finite:
        raise InfiniteFamily("the singular set of an infinite family has infinitely many rays")
    if not fam.arcs:
        return SingularSet("point")
    return SingularSet("rays", tuple(a.center for a in fam.arcs))


def characteristic_ray(cone: ConeSurface, v, extent: float = 2.0, samples: int = 3) -> PlanarCurve:
    """Planar projection of the ruling through ``v``.

    The returned polyline starts at the foot of the ruling (the origin, or a
    point of a bisectrix, where the surface has height 0) and runs through
    ``v`` up to ``extent`` times the distance from the foot to ``v``.
    """
    cone = _as_cone(cone)
    x, y = float(v[0]), float(v[1])
    if x == 0.0 and y == 0.0:
        raise SingularPoint("the vertex is singular")
    loc = locate(cone.family, (x, y))
    if loc.kind == "bisectrix":
        raise SingularPoint(f"{(x, y)} lies on the singular ray of arc {loc.index}")
    if loc.kind == "inside_j":
        foot = np.zeros(2)
    else:
        a = cone.family.arc(loc.index)
        xr, yr = _to_frame(x, y, a.center)
        x0 = xr - abs(yr) * _cot(a.half_angle)
        foot = np.array([x0 * math.cos(a.center), x0 * math.sin(a.center)])
    if samples < 2:
        raise ValueError("need at least 2 samples")
    s = np.linspace(0.0, extent, samples)
    pts = foot[None, :] + s[:, None] * (np.array([x, y]) - foot)[None, :]
    return PlanarCurve(pts)


@dataclass(frozen=True)
class C1Report:
    c1: bool
    reason: str
    witness_angle: float | None = None
    witness_jump: float | None = None
    max_shared_jump: float = 0.0
    rays_checked: int = 0

    def to_dict(self) -> dict:
        return {
            "c1": self.c1,
            "reason": self.reason,
            "witness_angle_rad": self.witness_angle,
            "witness_jump": self.witness_jump,
            "max_shared_jump": self.max_shared_jump,
            "rays_checked": self.rays_checked,
        }


def is_c1(cone: ConeSurface, radius: float = 1.0) -> C1Report:
    """Decide whether the cone is a C^1 surface.

    Nonempty finite families are C^1 exactly when the closed arcs cover the
    circle; infinite families never are. The empty family gives the plane
    t = 0. One-sided gradients are compared on every boundary ray at distance
    ``radius`` from the vertex to confirm the answer or exhibit a witness.
    """
    cone = _as_cone(cone)
    fam = cone.family
    if not fam.is_finite:
        t = fam.tail
        amp = oscillation_probe(cone, radius).min_amplitude
        return C1Report(False, "infinite family: gradient oscillates near the accumulation ray", t.accumulate_at, amp)
    if not fam.arcs:
        return C1Report(True, "empty family: horizontal plane t = 0")
    worst = 0.0
    witness = None
    n = 0
    for a in fam.arcs:
        for theta in a.endpoints:
            p = (radius * math.cos(theta), radius * math.sin(theta))
            jump = gradient(cone, p).jump
            n += 1
            if jump > worst:
                worst = jump
                witness = theta
    if is_covering(fam):
        return C1Report(True, "closed arcs cover the circle", max_shared_jump=worst, rays_checked=n)
    return C1Report(False, "some complementary arc is nonempty", witness, worst, worst, n)


def numeric_c1_probe(cone: ConeSurface, radius: float = 1.0, delta: float = 1e-11,
                     threshold: float = 1e-8, tail_arcs: int = 8) -> tuple[bool, float]:
    """Compare gradients just either side of every boundary ray.

    Uses only the vectorized off-ray gradient, so it is independent of the
    analytic covering test. Returns ``(no_jump_found, max_jump)``.
    """
    cone = _as_cone(cone)
    fam = cone.family
    arcs = list(fam.arcs)
    if fam.tail is not None:
        arcs += [fam.tail.arc(j) for j in range(tail_arcs)]
    angles = np.array([e for a in arcs for e in a.endpoints])
    if angles.size == 0:
        return True, 0.0
    th = np.concatenate([angles + delta, angles - delta])
    gx, gy = cone.gradients(radius * np.cos(th), radius * np.sin(th))
    m = angles.size
    jumps = np.hypot(gx[:m] - gx[m:], gy[:m] - gy[m:])
    worst = float(jumps.max())
    return worst <= threshold, worst


@dataclass(frozen=True)
class VerticalPlaneSpec:
    """The vertical plane through the t-axis with planar unit normal ``normal``."""

    normal: tuple[float, float] = (1.0, 0.0)


@dataclass(frozen=True)
class HorizontalPlaneSpec:
    pass


@dataclass(frozen=True)
class SurfaceClassification:
    kind: str
    singular_set: SingularSet
    family: ArcFamily | None = None
    normal: tuple[float, float] | None = None

    def to_dict(self) -> dict:
        out = {"kind": self.kind, "singular_set": self.singular_set.to_dict()}
        if self.family is not None:
            out["family"] = self.family.to_dict()
        if self.normal is not None:
            out["normal"] = list(self.normal)
        return out


def classify(obj) -> SurfaceClassification:
    """Place a C^1 minimal cone in the vertical plane / horizontal plane / arc cone trichotomy."""
    if isinstance(obj, VerticalPlaneSpec):
        nx, ny = obj.normal
        r = math.hypot(nx, ny)
        if r == 0:
            raise ValueError("vertical plane needs a nonzero normal")
        return SurfaceClassification("vertical_plane", SingularSet("empty"), normal=(nx / r, ny / r))
    if isinstance(obj, HorizontalPlaneSpec):
        return SurfaceClassification("horizontal_plane", SingularSet("point"))
    cone = _as_cone(obj)
    report = is_c1(cone)
    if not report.c1:
        raise NotC1(report.reason)
    if not cone.family.arcs:
        return SurfaceClassification("horizontal_plane", SingularSet("point"))
    return SurfaceClassification("arc_cone", singular_set(cone), family=cone.family)


def gradient_bound_constant(alpha: float) -> float:
    """C with |grad u_alpha(v)| <= C |v|, read off the closed-form gradient."""
    if alpha <= math.pi / 2:
        return math.sqrt(1.0 + math.sin(alpha) ** 2)
    return math.sqrt(1.0 + (1.0 + 2.0 * abs(_cot(alpha))) ** 2)


@dataclass
class OscillationReport:
    radius: float
    rows: list = field(default_factory=list)
    min_amplitude: float = math.inf
    sup_grad: float = 0.0
    grad_bound: float = 0.0
    radial_ok: bool = True

    def to_dict(self) -> dict:
        return {
            "radius": self.radius,
            "min_amplitude": self.min_amplitude,
            "sup_grad": self.sup_grad,
            "grad_bound": self.grad_bound,
            "radial_ok": self.radial_ok,
            "arcs": self.rows,
        }


def oscillation_probe(cone: ConeSurface, radius: float = 1.0, arcs: int = 20,
                      samples: int = 41) -> OscillationReport:
    """Sample the derivative across the bisectrix in the shrinking tail arcs.

    For each tail arc the derivative of u along the unit normal of its
    bisectrix runs from -|v| on the bisectrix to nearly +|v| at the arc ends,
    so the normalized peak-to-peak amplitude stays above 1 however small the
    arc, while |grad u| stays bounded.
    """
    cone = _as_cone(cone)
    t = cone.family.tail
    if t is None:
        raise NoTail("oscillation probe needs an infinite family")
    rep = OscillationReport(radius)
    n = len(cone.family.arcs)
    frac = np.linspace(-1.0, 1.0, samples) * (1.0 - 1e-6)
    for j in range(arcs):
        a = t.arc(j)
        th = a.center + frac * a.half_angle
        x, y = radius * np.cos(th), radius * np.sin(th)
        gx, gy = cone.gradients(x, y)
        normal_d = -math.sin(a.center) * gx + math.cos(a.center) * gy
        radial_d = (x * gx + y * gy) / radius
        u = cone.values(x, y)
        lo, hi = float(normal_d.min()), float(normal_d.max())
        amp = (hi - lo) / radius
        # Euler's identity v . grad u = 2 u and |u| <= |v|^2 tan(alpha)
        radial_bound = 2.0 * radius * math.tan(a.half_angle)
        radial_ok = bool(np.all(np.abs(radial_d) <= radial_bound * (1 + 1e-12))
                         and np.allclose(radial_d * radius, 2.0 * u, atol=1e-12 * radius**2))
        sup = float(np.hypot(gx, gy).max())
        rep.rows.append({
            "index": n + j,
            "half_angle_rad": a.half_angle,
            "min_derivative": lo,
            "max_derivative": hi,
            "amplitude": amp,
            "sup_grad": sup,
            "radial_bound": radial_bound,
        })
        rep.min_amplitude = min(rep.min_amplitude, amp)
        rep.sup_grad = max(rep.sup_grad, sup)
        rep.grad_bound = max(rep.grad_bound, gradient_bound_constant(a.half_angle) * radius)
        rep.radial_ok = rep.radial_ok and radial_ok
    return rep


def two_half_circles() -> ArcFamily:
    """The covering pair of half circles whose cone is the graph t = -xy."""
    from hcone.arcs import validate

    return validate([Arc(0.0, math.pi / 2), Arc(math.pi, math.pi / 2)])
