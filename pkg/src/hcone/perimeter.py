"""Sub-Riemannian perimeter of t-graphs and perturbation experiments.

For the subgraph E = {t <= u(x, y)} the perimeter measure has density
sqrt((u_x - y)^2 + (u_y + x)^2) with respect to dx dy, i.e. the length of the
horizontal part of the Euclidean graph normal (-u_x, -u_y, 1) measured
against X and Y.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable

import numpy as np

from hcone.arcs import TWO_PI, ArcFamily, normalize_angle
from hcone.cone import ConeSurface
from hcone.errors import HconeError, NoTail

SUBSAMPLE = 4


@dataclass(frozen=True)
class Domain2D:
    """Planar domain: ``disk`` with params (cx, cy, radius) or ``rectangle`` with (x0, x1, y0, y1)."""

    shape: str
    params: tuple
    n: int = 256

    def __post_init__(self):
        if self.n < 16:
            raise HconeError(f"grid resolution must be at least 16, got {self.n}")
        if self.shape == "disk":
            if not self.params[2] > 0:
                raise HconeError("disk radius must be positive")
        elif self.shape == "rectangle":
            x0, x1, y0, y1 = self.params
            if not (x1 > x0 and y1 > y0):
                raise HconeError("rectangle must have positive area")
        else:
            raise HconeError(f"unknown domain shape {self.shape!r}")

    @classmethod
    def disk(cls, radius: float = 1.0, center=(0.0, 0.0), n: int = 256) -> "Domain2D":
        return cls("disk", (float(center[0]), float(center[1]), float(radius)), n)

    @classmethod
    def rectangle(cls, x0, x1, y0, y1, n: int = 256) -> "Domain2D":
        return cls("rectangle", (float(x0), float(x1), float(y0), float(y1)), n)

    @classmethod
    def parse(cls, text: str, n: int = 256) -> "Domain2D":
        """``disk:R``, ``disk:R@cx,cy`` or ``rect:x0,x1,y0,y1``."""
        kind, _, rest = text.partition(":")
        try:
            if kind == "disk":
                r, _, c = rest.partition("@")
                center = tuple(float(v) for v in c.split(",")) if c else (0.0, 0.0)
                return cls.disk(float(r), center, n)
            if kind in ("rect", "rectangle"):
                return cls.rectangle(*(float(v) for v in rest.split(",")), n=n)
        except (ValueError, TypeError) as exc:
            raise HconeError(f"cannot parse domain {text!r}: {exc}") from exc
        raise HconeError(f"cannot parse domain {text!r}")

    def with_n(self, n: int) -> "Domain2D":
        return Domain2D(self.shape, self.params, n)

    @property
    def scale(self) -> float:
        if self.shape == "disk":
            return self.params[2]
        x0, x1, y0, y1 = self.params
        return 0.5 * min(x1 - x0, y1 - y0)

    @property
    def max_radius(self) -> float:
        """Largest distance from the origin to a point of the domain."""
        if self.shape == "disk":
            cx, cy, r = self.params
            return math.hypot(cx, cy) + r
        x0, x1, y0, y1 = self.params
        return max(math.hypot(x, y) for x in (x0, x1) for y in (y0, y1))

    def contains_disk(self, center, radius) -> bool:
        cx, cy = center
        if self.shape == "disk":
            dx, dy, r = self.params
            return math.hypot(cx - dx, cy - dy) + radius < r
        x0, x1, y0, y1 = self.params
        return x0 < cx - radius and cx + radius < x1 and y0 < cy - radius and cy + radius < y1

    def random_center(self, rng, radius):
        if self.shape == "disk":
            dx, dy, r = self.params
            rr = (r - radius) * math.sqrt(rng.random())
            th = TWO_PI * rng.random()
            return (dx + rr * math.cos(th), dy + rr * math.sin(th))
        x0, x1, y0, y1 = self.params
        return (rng.uniform(x0 + radius, x1 - radius), rng.uniform(y0 + radius, y1 - radius))


@lru_cache(maxsize=16)
def _nodes(dom: Domain2D, breaks: tuple[float, ...]):
    if dom.shape == "disk" and dom.params[0] == 0.0 and dom.params[1] == 0.0:
        return _polar_nodes(dom.params[2], dom.n, breaks)
    return _cartesian_nodes(dom, breaks)


def _polar_nodes(radius, n, breaks):
    """Midpoint rule on a polar grid whose angular cells never straddle a break."""
    dr = radius / n
    r = dr * (np.arange(n) + 0.5)
    cuts = sorted({normalize_angle(b) for b in breaks}) or [0.0]
    m_total = 2 * n
    thetas, dths = [], []
    for k, a in enumerate(cuts):
        b = cuts[k + 1] if k + 1 < len(cuts) else cuts[0] + TWO_PI
        length = b - a
        if length <= 0:
            continue
        m = max(1, int(round(m_total * length / TWO_PI)))
        d = length / m
        thetas.append(a + d * (np.arange(m) + 0.5))
        dths.append(np.full(m, d))
    th = np.concatenate(thetas)
    dth = np.concatenate(dths)
    R, TH = np.meshgrid(r, th, indexing="ij")
    W = R * dr * dth[None, :]
    x, y, w = (R * np.cos(TH)).ravel(), (R * np.sin(TH)).ravel(), W.ravel()
    for a in (x, y, w):
        a.setflags(write=False)
    return x, y, w


def _cartesian_nodes(dom, breaks):
    """Midpoint rule on a uniform grid; cells crossed by a break ray or the
    boundary of a disk are subsampled ``SUBSAMPLE`` x ``SUBSAMPLE`` times."""
    n = dom.n
    if dom.shape == "disk":
        cx, cy, r = dom.params
        x0, x1, y0, y1 = cx - r, cx + r, cy - r, cy + r
    else:
        x0, x1, y0, y1 = dom.params
    hx, hy = (x1 - x0) / n, (y1 - y0) / n
    X, Y = np.meshgrid(x0 + hx * (np.arange(n) + 0.5), y0 + hy * (np.arange(n) + 0.5), indexing="ij")
    half_diag = 0.5 * math.hypot(hx, hy)
    fine = np.zeros(X.shape, dtype=bool)
    for b in breaks:
        s, c = math.sin(b), math.cos(b)
        fine |= (np.abs(-s * X + c * Y) <= half_diag) & (c * X + s * Y >= -half_diag)
    if dom.shape == "disk":
        d = np.hypot(X - cx, Y - cy)
        fine |= np.abs(d - r) <= half_diag
        keep = (d < r) & ~fine
    else:
        keep = ~fine
    off = (np.arange(SUBSAMPLE) + 0.5) / SUBSAMPLE - 0.5
    OX, OY = np.meshgrid(off * hx, off * hy, indexing="ij")
    fx = (X[fine][:, None] + OX.ravel()[None, :]).ravel()
    fy = (Y[fine][:, None] + OY.ravel()[None, :]).ravel()
    fw = np.full(fx.shape, hx * hy / SUBSAMPLE**2)
    if dom.shape == "disk":
        inside = np.hypot(fx - cx, fy - cy) < r
        fx, fy, fw = fx[inside], fy[inside], fw[inside]
    x = np.concatenate([X[keep], fx])
    y = np.concatenate([Y[keep], fy])
    w = np.concatenate([np.full(int(keep.sum()), hx * hy), fw])
    for a in (x, y, w):
        a.setflags(write=False)
    return x, y, w


def _graph(u, breaks):
    """Normalize a graph description to (gradient callable, break angles)."""
    if isinstance(u, ConeSurface):
        return u.gradients, tuple(u.interface_angles()) if breaks is None else tuple(breaks)
    return u, tuple(breaks or ())


def quadrature_nodes(dom: Domain2D, breaks=()):
    return _nodes(dom, tuple(sorted(breaks)))


def perimeter_density(gx, gy, x, y):
    return np.hypot(gx - y, gy + x)


def perimeter_of_graph(u, dom: Domain2D, breaks=None) -> float:
    """Perimeter in the cylinder over ``dom`` of the subgraph of ``u``.

    ``u`` is a :class:`ConeSurface` or a callable returning gradient arrays.
    ``breaks`` are angles of rays across which the gradient jumps; the
    quadrature grid is aligned with (disk at the origin) or refined along them.
    """
    grad, brk = _graph(u, breaks)
    x, y, w = quadrature_nodes(dom, brk)
    gx, gy = grad(x, y)
    return float(np.sum(w * perimeter_density(gx, gy, x, y)))


@dataclass(frozen=True)
class Bump:
    """Quartic bump amplitude * (1 - (|v - c| / r)^2)^2, zero outside the disk."""

    center: tuple[float, float]
    radius: float
    amplitude: float

    def value(self, x, y):
        s = ((x - self.center[0]) ** 2 + (y - self.center[1]) ** 2) / self.radius**2
        return self.amplitude * np.clip(1.0 - s, 0.0, None) ** 2

    def grad(self, x, y):
        dx, dy = x - self.center[0], y - self.center[1]
        s = (dx * dx + dy * dy) / self.radius**2
        k = -4.0 * self.amplitude * np.clip(1.0 - s, 0.0, None) / self.radius**2
        return k * dx, k * dy

    def support_mask(self, x, y):
        return (x - self.center[0]) ** 2 + (y - self.center[1]) ** 2 < self.radius**2


def random_bumps(dom: Domain2D, trials: int, seed: int) -> list[Bump]:
    """Seeded bumps: log-uniform radius in [0.05, 0.5] * scale, amplitude in [-0.5, 0.5]."""
    rng = np.random.default_rng(seed)
    out = []
    lo, hi = math.log(0.05 * dom.scale), math.log(0.5 * dom.scale)
    for _ in range(trials):
        radius = math.exp(rng.uniform(lo, hi))
        center = dom.random_center(rng, radius)
        amp = rng.uniform(-0.5, 0.5)
        out.append(Bump(center, radius, amp))
    return out


def perimeter_change(grad: Callable, dom: Domain2D, bump: Bump, eps_grid, breaks=()) -> list[float]:
    """P(u + eps phi) - P(u) for each eps, accumulated only where phi is supported."""
    x, y, w = quadrature_nodes(dom, breaks)
    m = bump.support_mask(x, y)
    x, y, w = x[m], y[m], w[m]
    gx, gy = grad(x, y)
    bx, by = bump.grad(x, y)
    base = perimeter_density(gx, gy, x, y)
    return [float(np.sum(w * (perimeter_density(gx + e * bx, gy + e * by, x, y) - base))) for e in eps_grid]


def _threads(workers):
    if workers is not None:
        return max(1, int(workers))
    env = os.environ.get("HCONE_THREADS")
    return max(1, int(env)) if env else 1


def _sweep(grad, dom, bumps, eps_grid, breaks, workers):
    def one(b):
        return perimeter_change(grad, dom, b, eps_grid, breaks)

    quadrature_nodes(dom, breaks)
    n = _threads(workers)
    if n == 1:
        return [one(b) for b in bumps]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(one, bumps))


def _zero_grad(x, y):
    return np.zeros_like(x), np.zeros_like(y)


def calibrate_tolerance(dom: Domain2D, trials: int, eps_grid, seed: int = 7, workers=None) -> float:
    """Quadrature noise of the perimeter change, measured on the plane t = 0.

    The same bumps are run at resolutions n and 2n; the tolerance is twice the
    largest discrepancy, floored at 1e-6.
    """
    bumps = random_bumps(dom, trials, seed)
    coarse = _sweep(_zero_grad, dom, bumps, eps_grid, (), workers)
    fine = _sweep(_zero_grad, dom.with_n(2 * dom.n), bumps, eps_grid, (), workers)
    noise = max((abs(a - b) for rc, rf in zip(coarse, fine) for a, b in zip(rc, rf)), default=0.0)
    return max(1e-6, 2.0 * noise)


@dataclass
class PerturbationReport:
    tol: float
    rows: list = field(default_factory=list)
    min_delta: float = math.inf
    min_config: dict | None = None

    @property
    def passed(self) -> bool:
        return self.min_delta >= -self.tol

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "tol": self.tol,
            "min_delta": self.min_delta,
            "min_config": self.min_config,
            "trials": self.rows,
        }


def perturbation_test(u, dom: Domain2D, trials: int = 100, eps_grid=(0.2, -0.2, 0.1, -0.1, 0.05, -0.05),
                      seed: int = 7, tol: float | None = None, breaks=None, workers=None) -> PerturbationReport:
    """Perimeter change under random compactly supported bumps.

    A perimeter minimizer gives Delta(eps) >= 0 for every bump; the report
    passes iff every Delta is at least ``-tol``. With ``tol=None`` the
    tolerance comes from :func:`calibrate_tolerance`.
    """
    grad, brk = _graph(u, breaks)
    if tol is None:
        tol = calibrate_tolerance(dom, trials, eps_grid, seed, workers)
    bumps = random_bumps(dom, trials, seed)
    results = _sweep(grad, dom, bumps, eps_grid, brk, workers)
    rep = PerturbationReport(tol)
    for k, (b, deltas) in enumerate(zip(bumps, results)):
        for e, d in zip(eps_grid, deltas):
            row = {
                "trial": k,
                "eps": e,
                "delta": d,
                "center": list(b.center),
                "radius": b.radius,
                "amplitude": b.amplitude,
            }
            rep.rows.append(row)
            if d < rep.min_delta:
                rep.min_delta = d
                rep.min_config = row
    return rep


@dataclass
class TruncationReport:
    ks: list
    sup_diffs: list = field(default_factory=list)
    bounds: list = field(default_factory=list)
    l1_diffs: list = field(default_factory=list)
    l1_voxel: list = field(default_factory=list)

    @property
    def within_bound(self) -> bool:
        return all(d <= b for d, b in zip(self.sup_diffs, self.bounds))

    @property
    def monotone(self) -> bool:
        return all(a >= b for a, b in zip(self.sup_diffs, self.sup_diffs[1:]))

    def to_dict(self) -> dict:
        pairs = [[a, b] for a, b in zip(self.ks, self.ks[1:])]
        return {
            "pairs": pairs,
            "sup_diffs": self.sup_diffs,
            "bounds": self.bounds,
            "l1_diffs": self.l1_diffs,
            "l1_voxel": self.l1_voxel,
            "within_bound": self.within_bound,
            "monotone": self.monotone,
        }


def _sector_samples(arc, rmax, n_ang=65, n_rad=33):
    th = arc.center + arc.half_angle * np.linspace(-1.0, 1.0, n_ang)
    r = np.linspace(0.0, rmax, n_rad)
    R, TH = np.meshgrid(r, th, indexing="ij")
    return (R * np.cos(TH)).ravel(), (R * np.sin(TH)).ravel()


def _in_domain(dom, x, y):
    if dom.shape == "disk":
        cx, cy, r = dom.params
        return np.hypot(x - cx, y - cy) <= r
    x0, x1, y0, y1 = dom.params
    return (x >= x0) & (x <= x1) & (y >= y0) & (y <= y1)


def truncation_convergence(family: ArcFamily, dom: Domain2D, ks=(2, 4, 8, 16), voxels: int = 48) -> TruncationReport:
    """Distance between consecutive truncations of an infinite family.

    For each consecutive pair k < k' in ``ks`` reports the sampled sup-norm of
    u_k - u_k' over ``dom`` (sampled on the quadrature grid plus a fan in each
    arc that differs), the bound sum R^2 tan(alpha_j) over the added arcs, the
    L1 distance of the subgraphs as the integral of |u_k - u_k'| and, as a
    cruder surrogate, the same distance counted on a voxel slab.
    """
    tail = family.tail
    if tail is None:
        raise NoTail("truncation needs an infinite family")
    ks = sorted(ks)
    rmax = dom.max_radius
    rep = TruncationReport(list(ks))
    gx, gy, _ = quadrature_nodes(dom)
    for k, k2 in zip(ks, ks[1:]):
        c1, c2 = ConeSurface(family.truncate(k)), ConeSurface(family.truncate(k2))
        added = [tail.arc(j) for j in range(k, k2)]
        xs, ys = [gx], [gy]
        for a in added:
            sx, sy = _sector_samples(a, rmax)
            m = _in_domain(dom, sx, sy)
            xs.append(sx[m])
            ys.append(sy[m])
        x, y = np.concatenate(xs), np.concatenate(ys)
        rep.sup_diffs.append(float(np.max(np.abs(c1.values(x, y) - c2.values(x, y)))))
        rep.bounds.append(float(sum(rmax**2 * math.tan(a.half_angle) for a in added)))
        brk = tuple(c2.interface_angles())
        qx, qy, qw = quadrature_nodes(dom, brk)
        rep.l1_diffs.append(float(np.sum(qw * np.abs(c1.values(qx, qy) - c2.values(qx, qy)))))
        rep.l1_voxel.append(_voxel_l1(c1, c2, dom, voxels))
    return rep


def _voxel_l1(c1, c2, dom, n):
    if dom.shape == "disk":
        cx, cy, r = dom.params
        x0, x1, y0, y1 = cx - r, cx + r, cy - r, cy + r
    else:
        x0, x1, y0, y1 = dom.params
    hx, hy = (x1 - x0) / n, (y1 - y0) / n
    X, Y = np.meshgrid(x0 + hx * (np.arange(n) + 0.5), y0 + hy * (np.arange(n) + 0.5), indexing="ij")
    inside = _in_domain(dom, X, Y)
    u1, u2 = c1.values(X, Y), c2.values(X, Y)
    top = max(float(np.max(np.abs(u1))), float(np.max(np.abs(u2))), 1e-300)
    ht = 2 * top / n
    t = -top + ht * (np.arange(n) + 0.5)
    differ = (t[None, None, :] <= u1[..., None]) != (t[None, None, :] <= u2[..., None])
    return float(np.sum(differ & inside[..., None]) * hx * hy * ht)
