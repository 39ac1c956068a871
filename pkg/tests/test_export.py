import csv
import io
import math
from collections import Counter

import numpy as np
import pytest

from conftest import fig2_family, halves_family, one_arc_family, tail_family
from hcone.arcs import validate
from hcone.cone import ConeSurface
from hcone.errors import HconeError, InfiniteFamily
from hcone.export import MeshSpec, build_mesh, export_figure_data, export_mesh, figure_segments, write_figure_csv


def _edge_counts(faces):
    c = Counter()
    for f in faces.tolist():
        for i in range(3):
            c[tuple(sorted((f[i], f[(i + 1) % 3])))] += 1
    return c


def test_mesh_spec_validation():
    with pytest.raises(HconeError):
        MeshSpec(angular=4)
    with pytest.raises(HconeError):
        MeshSpec(radial=7)
    with pytest.raises(HconeError):
        MeshSpec(radius=0.0)


def test_empty_family_is_flat_disk():
    mesh = build_mesh(ConeSurface(validate([])), MeshSpec())
    assert np.all(mesh.vertices[:, 2] == 0.0)
    assert mesh.vertices.shape[0] == 64 * 16 + 1


def test_halves_mesh_is_saddle():
    mesh = build_mesh(ConeSurface(halves_family()), MeshSpec(radius=2.0))
    x, y, z = mesh.vertices.T
    assert np.max(np.abs(z + x * y)) <= 1e-15 * 4.0


@pytest.mark.parametrize("fam", [fig2_family, one_arc_family, halves_family])
def test_vertex_count_and_snapped_rays(fam):
    cone = ConeSurface(fam())
    spec = MeshSpec(angular=48, radial=10)
    mesh = build_mesh(cone, spec)
    assert mesh.vertices.shape[0] == 48 * 10 + 10 * mesh.extra_rays + 1
    angles = {round(math.atan2(y, x) % (2 * math.pi), 9) for x, y, _ in mesh.vertices[1:]}
    for a in cone.interface_angles():
        assert any(abs((a - b + math.pi) % (2 * math.pi) - math.pi) < 1e-9 for b in angles)


@pytest.mark.parametrize("fam", [fig2_family, halves_family])
def test_watertight_on_sampled_disk(fam):
    mesh = build_mesh(ConeSurface(fam()), MeshSpec(angular=32, radial=8))
    counts = _edge_counts(mesh.faces)
    outer = set(range(mesh.vertices.shape[0] - (mesh.vertices.shape[0] - 1) // 8, mesh.vertices.shape[0]))
    for (i, j), n in counts.items():
        if i in outer and j in outer:
            assert n == 1
        else:
            assert n == 2


def test_faces_consistently_oriented():
    mesh = build_mesh(ConeSurface(validate([])), MeshSpec())
    v = mesh.vertices
    for f in mesh.faces:
        a, b, c = v[f]
        assert np.cross(b - a, c - a)[2] > 0


def test_obj_roundtrip(tmp_path):
    path = tmp_path / "m.obj"
    mesh = export_mesh(ConeSurface(fig2_family()), MeshSpec(angular=16, radial=8, path=str(path)))
    lines = path.read_text().splitlines()
    vs = [ln for ln in lines if ln.startswith("v ")]
    fs = [ln for ln in lines if ln.startswith("f ")]
    assert len(vs) == mesh.vertices.shape[0] and len(fs) == mesh.faces.shape[0]
    idx = np.array([[int(t) for t in ln.split()[1:]] for ln in fs])
    assert idx.min() == 1 and idx.max() == len(vs)
    back = np.array([[float(t) for t in ln.split()[1:]] for ln in vs])
    assert np.array_equal(back, mesh.vertices)


def test_mesh_rejects_infinite_family():
    with pytest.raises(InfiniteFamily):
        build_mesh(ConeSurface(tail_family()), MeshSpec())


def test_figure_fig1_and_fig2_kinds():
    fig1 = figure_segments(ConeSurface(one_arc_family(math.radians(35))), lines=5)
    kinds = Counter(s[0] for s in fig1)
    assert kinds == {"radial": 5, "boundary": 2, "bisectrix": 1, "alpha_line": 10}
    fig2 = figure_segments(ConeSurface(fig2_family()))
    assert Counter(s[0] for s in fig2)["bisectrix"] == 3


def test_alpha_lines_are_rulings():
    # every alpha line leaves its bisectrix at angle alpha and stays inside the closed disk
    cone = ConeSurface(fig2_family())
    for kind, i, x0, y0, x1, y1 in figure_segments(cone):
        if kind != "alpha_line":
            continue
        a = cone.family.arcs[i]
        heading = math.atan2(y1 - y0, x1 - x0)
        off = abs((heading - a.center + math.pi) % (2 * math.pi) - math.pi)
        assert off == pytest.approx(a.half_angle, abs=1e-9)
        assert math.hypot(x1, y1) == pytest.approx(1.0, abs=1e-12)


def test_figure_arrows_are_unit_field(tmp_path):
    cone = ConeSurface(fig2_family())
    segs = export_figure_data(cone, tmp_path / "f.csv", with_field=True, arrows=10)
    arrows = [s for s in segs if s[0] == "arrow"]
    assert arrows
    for _, _, x0, y0, x1, y1 in arrows:
        assert math.hypot(x1 - x0, y1 - y0) == pytest.approx(0.1)
    rows = list(csv.reader(io.StringIO((tmp_path / "f.csv").read_text())))
    assert rows[0] == ["kind", "index", "x0", "y0", "x1", "y1"]
    assert len(rows) == len(segs) + 1


def test_figure_csv_deterministic():
    a, b = io.StringIO(), io.StringIO()
    cone = ConeSurface(fig2_family())
    write_figure_csv(a, figure_segments(cone, with_field=True))
    write_figure_csv(b, figure_segments(cone, with_field=True))
    assert a.getvalue() == b.getvalue()
