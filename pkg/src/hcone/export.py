"""Mesh and plot-data export."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from hcone.arcs import TWO_PI, normalize_angle
from hcone.calibrate import build_calibration
from hcone.cone import ConeSurface
from hcone.errors import HconeError, InfiniteFamily


@dataclass(frozen=True)
class MeshSpec:
    radius: float = 1.0
    angular: int = 64
    radial: int = 16
    path: str | None = None

    def __post_init__(self):
        if self.angular < 8 or self.radial < 8:
            raise HconeError("mesh resolutions must be at least 8")
        if not self.radius > 0:
            raise HconeError("mesh radius must be positive")


@dataclass
class Mesh:
    vertices: np.ndarray
    faces: np.ndarray  # 0-based
    extra_rays: int

    def to_obj(self) -> str:
        lines = [f"v {x!r} {y!r} {z!r}" for x, y, z in self.vertices.tolist()]
        lines += [f"f {i + 1} {j + 1} {k + 1}" for i, j, k in self.faces.tolist()]
        return "\n".join(lines) + "\n"


def mesh_angles(cone: ConeSurface, angular: int) -> tuple[np.ndarray, int]:
    """Uniform angles plus every interface ray not already on the grid."""
    base = [TWO_PI * i / angular for i in range(angular)]
    extra = []
    for a in cone.interface_angles():
        a = normalize_angle(a)
        if all(abs((a - b + math.pi) % TWO_PI - math.pi) > 1e-9 for b in base + extra):
            extra.append(a)
    return np.array(sorted(base + extra)), len(extra)


def build_mesh(cone: ConeSurface, spec: MeshSpec) -> Mesh:
    if not cone.family.is_finite:
        raise InfiniteFamily("truncate the family before meshing")
    th, extra = mesh_angles(cone, spec.angular)
    m = th.size
    r = spec.radius * np.arange(1, spec.radial + 1) / spec.radial
    R, TH = np.meshgrid(r, th, indexing="ij")
    x, y = (R * np.cos(TH)).ravel(), (R * np.sin(TH)).ravel()
    z = cone.values(x, y)
    verts = np.vstack([[0.0, 0.0, 0.0], np.column_stack([x, y, z])])

    def vid(ring, k):
        return 1 + ring * m + (k % m)

    faces = []
    for k in range(m):
        faces.append((0, vid(0, k), vid(0, k + 1)))
    for ring in range(spec.radial - 1):
        for k in range(m):
            a, b = vid(ring, k), vid(ring, k + 1)
            c, d = vid(ring + 1, k + 1), vid(ring + 1, k)
            faces.append((a, d, c))
            faces.append((a, c, b))
    return Mesh(verts, np.array(faces, dtype=np.int64), extra)


def export_mesh(cone: ConeSurface, spec: MeshSpec) -> Mesh:
    """Triangulate the graph over the disk of ``spec.radius`` and write it as OBJ text."""
    mesh = build_mesh(cone, spec)
    if spec.path is not None:
        with open(spec.path, "w") as fh:
            fh.write(mesh.to_obj())
    return mesh


FIGURE_HEADER = ["kind", "index", "x0", "y0", "x1", "y1"]


def _clip_length(p, d, radius):
    """Largest s >= 0 with |p + s d| <= radius (d a unit vector, |p| <= radius)."""
    b = p[0] * d[0] + p[1] * d[1]
    c = p[0] ** 2 + p[1] ** 2 - radius**2
    return -b + math.sqrt(max(b * b - c, 0.0))


def figure_segments(cone: ConeSurface, radius: float = 1.0, lines: int = 10,
                    with_field: bool = False, arrows: int = 12) -> list[tuple]:
    """Line arrangement of the ruling (and optionally calibration arrows).

    Kinds: ``radial`` rays filling complementary sectors, ``boundary`` rays of
    the arc sectors, ``bisectrix`` rays (the singular set), ``alpha_line``
    half-lines leaving a bisectrix at angle +-alpha, and ``arrow`` unit
    calibration vectors scaled to ``radius / arrows``.
    """
    fam = cone.family
    if not fam.is_finite:
        raise InfiniteFamily("truncate the family before exporting figure data")
    segs = []
    for j, gap in enumerate(fam.complementary):
        for th in gap.start + gap.length * np.arange(1, lines + 1) / (lines + 1):
            segs.append(("radial", j, 0.0, 0.0, radius * math.cos(th), radius * math.sin(th)))
    for i, a in enumerate(fam.arcs):
        for th in a.endpoints:
            segs.append(("boundary", i, 0.0, 0.0, radius * math.cos(th), radius * math.sin(th)))
        c = a.center
        segs.append(("bisectrix", i, 0.0, 0.0, radius * math.cos(c), radius * math.sin(c)))
        for s in radius * np.arange(1, lines + 1) / (lines + 1):
            foot = (s * math.cos(c), s * math.sin(c))
            for sgn in (1.0, -1.0):
                d = (math.cos(c + sgn * a.half_angle), math.sin(c + sgn * a.half_angle))
                ell = _clip_length(foot, d, radius)
                segs.append(("alpha_line", i, foot[0], foot[1], foot[0] + ell * d[0], foot[1] + ell * d[1]))
    if with_field:
        fld = build_calibration(cone)
        g = radius * (np.arange(arrows) + 0.5) / arrows * 2 - radius
        X, Y = np.meshgrid(g, g, indexing="ij")
        keep = np.hypot(X, Y) < radius
        xs, ys = X[keep], Y[keep]
        a, b = fld(xs, ys)
        scale = radius / arrows
        for x0, y0, va, vb in zip(xs, ys, a, b):
            segs.append(("arrow", -1, float(x0), float(y0), float(x0 + scale * va), float(y0 + scale * vb)))
    return segs


def export_figure_data(cone: ConeSurface, path, **kwargs) -> list[tuple]:
    segs = figure_segments(cone, **kwargs)
    with open(path, "w", newline="") as fh:
        write_figure_csv(fh, segs)
    return segs


def write_figure_csv(fh, segs) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(FIGURE_HEADER)
    for kind, idx, *xy in segs:
        w.writerow([kind, idx, *(repr(float(v)) for v in xy)])

