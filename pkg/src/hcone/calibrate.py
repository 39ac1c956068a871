"""Calibrations of the cones C(I).

The calibrating field is the upward unit horizontal normal of the graph,
extended to be invariant along t. Over a complementary sector it is the
rotation field (yX - xY)/r; over each half of an arc sector it is constant.
Minimality then reduces to zero divergence inside every sector plus zero net
flux through every interface ray.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from hcone.arcs import TWO_PI, normalize_angle
from hcone.cone import ConeSurface, _as_cone
from hcone.errors import InfiniteFamily
from hcone.hgroup import HPoint, HVector

FLUX_TOL = 1e-12
DIV_TOL = 1e-8
NORMAL_TOL = 1e-10


def radial_field(x, y):
    r = np.hypot(x, y)
    with np.errstate(divide="ignore", invalid="ignore"):
        a = np.where(r > 0, y / r, 0.0)
        b = np.where(r > 0, -x / r, 0.0)
    return a, b


def _constant_field(a: float, b: float) -> Callable:
    def f(x, y):
        shape = np.shape(x)
        return np.full(shape, a), np.full(shape, b)

    return f


@dataclass(frozen=True)
class Region:
    """Planar sector {start <= angle < start + width} with its field.

    ``kind`` is ``J`` (complementary sector), ``I`` (half of an arc sector)
    or ``custom`` for injected fields.
    """

    kind: str
    index: int
    side: str | None
    start: float
    width: float
    field: Callable
    constant: tuple[float, float] | None = None

    @property
    def radial(self) -> bool:
        return self.field is radial_field

    def contains(self, theta):
        return np.mod(np.asarray(theta) - self.start, TWO_PI) < self.width

    def label(self) -> str:
        return f"{self.kind}{self.index}" + (f"-{self.side}" if self.side else "")


@dataclass(frozen=True)
class Interface:
    """Ray at ``angle`` separating region ``cw`` (clockwise side) from ``ccw``."""

    angle: float
    cw: int
    ccw: int


@dataclass(frozen=True)
class SectorDecomposition:
    regions: tuple[Region, ...]
    interfaces: tuple[Interface, ...]

    def replace(self, i: int, region: Region) -> "SectorDecomposition":
        regs = list(self.regions)
        regs[i] = region
        return SectorDecomposition(tuple(regs), self.interfaces)


class CalibrationField:
    """t-independent horizontal field assembled from the sector decomposition.

    On an interface ray the value is taken from the region listed first.
    """

    def __init__(self, decomposition: SectorDecomposition):
        self.decomposition = decomposition

    def __call__(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        theta = np.mod(np.arctan2(y, x), TWO_PI)
        a = np.full(x.shape, np.nan)
        b = np.full(x.shape, np.nan)
        todo = np.ones(x.shape, dtype=bool)
        for reg in self.decomposition.regions:
            hit = todo & reg.contains(theta)
            if np.any(hit):
                fa, fb = reg.field(x[hit], y[hit])
                a[hit], b[hit] = fa, fb
                todo &= ~hit
        return a, b

    def at(self, p: HPoint) -> HVector:
        a, b = self(np.array([p.x]), np.array([p.y]))
        return HVector(float(a[0]), float(b[0]))

    def with_region(self, i: int, region: Region) -> "CalibrationField":
        return CalibrationField(self.decomposition.replace(i, region))


def build_calibration(cone: ConeSurface) -> CalibrationField:
    cone = _as_cone(cone)
    fam = cone.family
    if not fam.is_finite:
        raise InfiniteFamily("build the calibration of a truncation instead")
    regions = []
    for i, arc in enumerate(fam.arcs):
        c, al = arc.center, arc.half_angle
        cc, sc = math.cos(c), math.sin(c)
        # frame of the arc: upper half (sin a, -cos a), lower half (-sin a, -cos a)
        for side, (pa, pb) in (("lower", (-math.sin(al), -math.cos(al))),
                               ("upper", (math.sin(al), -math.cos(al)))):
            const = (pa * cc - pb * sc, pa * sc + pb * cc)
            start = normalize_angle(c - al) if side == "lower" else c
            regions.append(Region("I", i, side, start, al, _constant_field(*const), const))
    for j, gap in enumerate(fam.complementary):
        regions.append(Region("J", j, None, gap.start, gap.length, radial_field))
    regions.sort(key=lambda r: r.start)
    interfaces = []
    if len(regions) > 1:
        for k in range(len(regions)):
            nxt = (k + 1) % len(regions)
            interfaces.append(Interface(regions[nxt].start, k, nxt))
    return CalibrationField(SectorDecomposition(tuple(regions), tuple(interfaces)))


def _interior_samples(reg: Region, n: int, rng, rmin=0.5, rmax=4.0):
    margin = min(0.05 * reg.width, 0.05)
    th = reg.start + margin + (reg.width - 2 * margin) * rng.random(n)
    r = rmin + (rmax - rmin) * rng.random(n)
    return r * np.cos(th), r * np.sin(th)


def fd_divergence(f: Callable, x, y, h: float = 1e-5):
    """Central-difference X v1 + Y v2 for a t-independent field."""
    a_p, _ = f(x + h, y)
    a_m, _ = f(x - h, y)
    _, b_p = f(x, y + h)
    _, b_m = f(x, y - h)
    return (a_p - a_m) / (2 * h) + (b_p - b_m) / (2 * h)


@dataclass
class DivergenceReport:
    regions: list = field(default_factory=list)
    passed: bool = True

    def to_dict(self):
        return {"passed": self.passed, "regions": self.regions}


def check_piecewise_divergence(fld: CalibrationField, samples: int = 200, h: float = 1e-5,
                               tol: float = DIV_TOL, seed: int = 0) -> DivergenceReport:
    """Divergence inside each sector: closed-form where possible, plus a finite-difference audit."""
    rng = np.random.default_rng(seed)
    rep = DivergenceReport()
    for reg in fld.decomposition.regions:
        if reg.constant is not None:
            symbolic = 0.0
        elif reg.radial:
            # d/dx (y/r) + d/dy (-x/r) = -xy/r^3 + xy/r^3
            symbolic = 0.0
        else:
            symbolic = None
        x, y = _interior_samples(reg, samples, rng)
        fd = float(np.max(np.abs(fd_divergence(reg.field, x, y, h))))
        ok = symbolic in (0.0, None) and fd < tol
        rep.regions.append({"region": reg.label(), "symbolic": symbolic, "fd_max": fd, "passed": ok})
        rep.passed = rep.passed and ok
    return rep


@dataclass
class FluxReport:
    interfaces: list = field(default_factory=list)
    max_residual: float = 0.0
    passed: bool = True

    def to_dict(self):
        return {"passed": self.passed, "max_residual": self.max_residual, "interfaces": self.interfaces}


def check_interface_flux(fld: CalibrationField, samples: int = 100, radius: float = 4.0,
                         tol: float = FLUX_TOL) -> FluxReport:
    """Sum of normal components from both sides of every interface ray.

    With outward normals nu_cw = (-sin, cos) and nu_ccw = (sin, -cos), the
    sum <V_cw, nu_cw> + <V_ccw, nu_ccw> must vanish along the ray.
    """
    rep = FluxReport()
    regs = fld.decomposition.regions
    r = np.linspace(radius / samples, radius, samples)
    for itf in fld.decomposition.interfaces:
        s, c = math.sin(itf.angle), math.cos(itf.angle)
        x, y = r * c, r * s
        a1, b1 = regs[itf.cw].field(x, y)
        a2, b2 = regs[itf.ccw].field(x, y)
        total = (-s * a1 + c * b1) + (s * a2 - c * b2)
        worst = float(np.max(np.abs(total)))
        ok = worst < tol
        rep.interfaces.append({
            "angle_rad": itf.angle,
            "between": [regs[itf.cw].label(), regs[itf.ccw].label()],
            "max_residual": worst,
            "passed": ok,
        })
        rep.max_residual = max(rep.max_residual, worst)
        rep.passed = rep.passed and ok
    return rep


def graph_unit_normal(cone: ConeSurface, x, y):
    """Upward unit horizontal normal of the graph, -(u_x - y, u_y + x) normalized."""
    gx, gy = _as_cone(cone).gradients(x, y)
    nx, ny = y - gx, -x - gy
    r = np.hypot(nx, ny)
    return nx / r, ny / r


def _off_interface_samples(fld: CalibrationField, n: int, rng, radius=4.0):
    regs = fld.decomposition.regions
    xs, ys = [], []
    per = max(1, n // len(regs))
    for reg in regs:
        x, y = _interior_samples(reg, per, rng, rmin=1e-3, rmax=radius)
        xs.append(x)
        ys.append(y)
    return np.concatenate(xs), np.concatenate(ys)


@dataclass
class Certificate:
    normal_residual: float
    normal_ok: bool
    divergence: DivergenceReport
    flux: FluxReport

    @property
    def passed(self) -> bool:
        return self.normal_ok and self.divergence.passed and self.flux.passed

    def to_dict(self):
        return {
            "passed": self.passed,
            "normal_residual": self.normal_residual,
            "normal_ok": self.normal_ok,
            "divergence": self.divergence.to_dict(),
            "flux": self.flux.to_dict(),
        }


def verify_minimality_certificate(cone: ConeSurface, samples: int = 2000, seed: int = 0,
                                  flux_samples: int = 100) -> Certificate:
    """Check that the calibration agrees with the graph normal and is divergence free."""
    cone = _as_cone(cone)
    fld = build_calibration(cone)
    rng = np.random.default_rng(seed)
    x, y = _off_interface_samples(fld, samples, rng)
    a, b = fld(x, y)
    nx, ny = graph_unit_normal(cone, x, y)
    resid = float(np.max(np.hypot(a - nx, b - ny)))
    return Certificate(
        resid,
        resid < NORMAL_TOL,
        check_piecewise_divergence(fld, seed=seed),
        check_interface_flux(fld, samples=flux_samples),
    )


def bump_test_function(center, rho: float):
    """phi = (1 - |v - c|^2 / rho^2)^4 on its support, with its gradient."""
    cx, cy = center

    def phi(x, y):
        s = ((x - cx) ** 2 + (y - cy) ** 2) / rho**2
        w = np.clip(1.0 - s, 0.0, None)
        val = w**4
        g = -8.0 * w**3 / rho**2
        return val, g * (x - cx), g * (y - cy)

    return phi


def audit_tolerance(cells: int = 400, half_width: float = 4.0) -> float:
    """Acceptance threshold for the audit: midpoint quadrature error is O(h^2)."""
    h = 2 * half_width / cells
    return 0.5 * h * h


def distributional_divergence_audit(fld: CalibrationField, n_tests: int = 20, half_width: float = 4.0,
                                    cells: int = 400, seed: int = 0, subsample: int = 8) -> list[float]:
    """Integral of <grad phi, V> over the plane for random compactly supported phi.

    Zero distributional divergence means every such integral vanishes. Uses
    midpoint quadrature on a ``cells`` x ``cells`` grid over the square of
    half width ``half_width``; cells crossed by an interface ray are
    subsampled ``subsample`` x ``subsample`` times. A t-dependent factor of
    the test function contributes nothing because V does not depend on t.
    """
    rng = np.random.default_rng(seed)
    h = 2 * half_width / cells
    c1 = -half_width + h * (np.arange(cells) + 0.5)
    X, Y = np.meshgrid(c1, c1, indexing="ij")
    cut = np.zeros(X.shape, dtype=bool)
    for itf in fld.decomposition.interfaces:
        s, c = math.sin(itf.angle), math.cos(itf.angle)
        dist = np.abs(-s * X + c * Y)
        along = c * X + s * Y
        cut |= (dist <= h * 0.7072) & (along >= -h)
    ox = (np.arange(subsample) + 0.5) / subsample - 0.5
    SX, SY = np.meshgrid(ox * h, ox * h, indexing="ij")
    cx, cy = X[cut][:, None] + SX.ravel()[None, :], Y[cut][:, None] + SY.ravel()[None, :]
    a_main, b_main = fld(X[~cut], Y[~cut])
    a_sub, b_sub = fld(cx, cy)
    out = []
    for _ in range(n_tests):
        rho = rng.uniform(0.5, 2.0)
        center = rng.uniform(-half_width + rho, half_width - rho, size=2)
        phi = bump_test_function(center, rho)
        _, px, py = phi(X[~cut], Y[~cut])
        total = np.sum(px * a_main + py * b_main) * h * h
        _, qx, qy = phi(cx, cy)
        total += np.sum(qx * a_sub + qy * b_sub) * h * h / subsample**2
        out.append(float(total))
    return out
