import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import fig2_family, halves_family, one_arc_family, random_family, tail_family
from hcone.arcs import Arc, validate
from hcone.cone import (
    ConeSurface,
    HorizontalPlaneSpec,
    VerticalPlaneSpec,
    characteristic_ray,
    characteristic_vector,
    classify,
    evaluate,
    gradient,
    gradient_bound_constant,
    grad_u_alpha,
    is_c1,
    numeric_c1_probe,
    oscillation_probe,
    singular_set,
    two_half_circles,
    u_alpha,
)
from hcone.errors import BadHalfAngle, InfiniteFamily, NoTail, NotC1, SingularPoint
from hcone.hgroup import lift_curve

ALPHAS = [math.pi / 6, math.pi / 4, math.pi / 2, 3 * math.pi / 4]
nonzero = st.tuples(st.floats(-5, 5), st.floats(-5, 5)).filter(lambda v: math.hypot(*v) > 1e-3)


def test_u_alpha_closed_form_values():
    # bisectrix is a zero line; boundary rays are zero lines
    a = math.pi / 4
    assert u_alpha(a, (2.0, 0.0)) == 0.0
    assert u_alpha(a, (1.0, 1.0)) == pytest.approx(0.0, abs=1e-15)
    assert u_alpha(a, (2.0, 1.0)) == pytest.approx(1.0 * (1.0 - 2.0))
    assert u_alpha(a, (-1.0, 0.5)) == 0.0
    with pytest.raises(BadHalfAngle):
        u_alpha(0.0, (1, 1))


@pytest.mark.parametrize("alpha", ALPHAS)
def test_gradient_matches_finite_differences(alpha, rng):
    h = 1e-5
    pts = rng.uniform(-2, 2, size=(400, 2))
    th = np.arctan2(pts[:, 1], pts[:, 0])
    far = (np.abs(np.abs(th) - alpha) > 1e-3) & (np.abs(th) > 1e-3) & (np.hypot(*pts.T) > 1e-2)
    for x, y in pts[far]:
        g = grad_u_alpha(alpha, (x, y)).value
        fx = (u_alpha(alpha, (x + h, y)) - u_alpha(alpha, (x - h, y))) / (2 * h)
        fy = (u_alpha(alpha, (x, y + h)) - u_alpha(alpha, (x, y - h))) / (2 * h)
        assert abs(g[0] - fx) < 1e-6 and abs(g[1] - fy) < 1e-6


@pytest.mark.parametrize("alpha", ALPHAS)
def test_one_sided_limits_on_rays(alpha):
    h = 1e-7
    for theta, name in ((alpha, "boundary+"), (-alpha, "boundary-"), (0.0, "bisectrix")):
        v = (math.cos(theta), math.sin(theta))
        g = grad_u_alpha(alpha, v)
        assert set(g.sides) == {"ccw", "cw"}, name
        for side, sgn in (("ccw", 1), ("cw", -1)):
            t = theta + sgn * h
            ref = grad_u_alpha(alpha, (math.cos(t), math.sin(t))).value
            assert np.allclose(g.sides[side], ref, atol=1e-6), (name, side)
    # inner limit at the ccw boundary equals r(-sin, cos), outer limit is zero
    v = (math.cos(alpha), math.sin(alpha))
    g = grad_u_alpha(alpha, v)
    assert np.allclose(g.sides["cw"], (-math.sin(alpha), math.cos(alpha)), atol=1e-14)
    assert g.sides["ccw"] == (0.0, 0.0)


def test_halves_is_minus_xy(rng):
    cone = ConeSurface(two_half_circles())
    x, y = rng.uniform(-3, 3, (2, 1000))
    assert np.max(np.abs(cone.values(x, y) + x * y)) <= 1e-15 * np.max(x * x + y * y)
    assert evaluate(cone, (1, 2)) == -2.0


@settings(max_examples=200, deadline=None)
@given(nonzero, st.floats(0.01, 100), st.sampled_from(["fig2", "halves", "one"]))
def test_homogeneity(v, lam, which):
    fam = {"fig2": fig2_family, "halves": halves_family, "one": one_arc_family}[which]()
    cone = ConeSurface(fam)
    u1 = evaluate(cone, (lam * v[0], lam * v[1]))
    u0 = evaluate(cone, v)
    assert u1 == pytest.approx(lam * lam * u0, rel=1e-12, abs=1e-12 * lam * lam * (v[0] ** 2 + v[1] ** 2))


@settings(max_examples=100, deadline=None)
@given(nonzero, st.sampled_from(["fig2", "halves", "one"]))
def test_euler_identity(v, which):
    fam = {"fig2": fig2_family, "halves": halves_family, "one": one_arc_family}[which]()
    g = gradient(fam, v)
    u = evaluate(fam, v)
    for gx, gy in g.sides.values():
        assert v[0] * gx + v[1] * gy == pytest.approx(2 * u, abs=1e-12 * (1 + v[0] ** 2 + v[1] ** 2))


@pytest.mark.parametrize("alpha", ALPHAS[:3])
def test_sup_bound(alpha, rng):
    r = rng.uniform(0.1, 3, 2000)
    th = rng.uniform(-alpha, alpha, 2000)
    vals = np.array([u_alpha(alpha, (a * math.cos(b), a * math.sin(b))) for a, b in zip(r, th)])
    assert np.all(np.abs(vals) <= r * r * math.tan(alpha) + 1e-15)
    assert np.all(np.abs(vals) <= r * r * math.tan(alpha / 2) / 2 * (1 + 1e-12))


def test_continuity_across_interfaces():
    cone = ConeSurface(fig2_family())
    gaps = []
    for th in cone.interface_angles():
        for d in (1e-2, 1e-3, 1e-4, 1e-5, 1e-6):
            a = cone.values(math.cos(th + d), math.sin(th + d))
            b = cone.values(math.cos(th - d), math.sin(th - d))
            gaps.append((d, abs(float(a - b))))
    for d, g in gaps:
        assert g <= 2.5 * d


def test_gradient_tagged_by_side():
    cone = ConeSurface(fig2_family())
    th = math.radians(30.0)
    g = gradient(cone, (math.cos(th), math.sin(th)))
    assert set(g.sides) == {"ccw", "cw"}
    assert g.jump == pytest.approx(1.0)
    assert gradient(cone, (0.0, 0.0)).value == (0.0, 0.0)
    assert evaluate(cone, (0.0, 0.0)) == 0.0


def test_characteristic_vector_vanishes_on_bisectrices_only(rng):
    fam = fig2_family()
    for a in fam.arcs:
        for r in (0.5, 1.0, 3.0):
            n = characteristic_vector(fam, (r * math.cos(a.center), r * math.sin(a.center)))
            assert all(math.hypot(*v) <= 1e-14 * r for v in n.sides.values())
    th = rng.uniform(0, 2 * math.pi, 500)
    for t in th:
        if min(abs(math.remainder(t - a.center, 2 * math.pi)) for a in fam.arcs) < 1e-3:
            continue
        n = characteristic_vector(fam, (math.cos(t), math.sin(t)))
        assert all(math.hypot(*v) > 1e-4 for v in n.sides.values())


def test_singular_set_description():
    assert singular_set(ConeSurface(validate([]))).kind == "point"
    s = singular_set(ConeSurface(fig2_family()))
    assert s.kind == "rays" and len(s.ray_angles) == 3
    with pytest.raises(InfiniteFamily):
        singular_set(ConeSurface(tail_family()))


@pytest.mark.parametrize("which", ["fig2", "halves", "one", "empty"])
def test_rulings_are_horizontal_lines(which, rng):
    fam = {"fig2": fig2_family, "halves": halves_family, "one": one_arc_family, "empty": lambda: validate([])}[which]()
    cone = ConeSurface(fam)
    for _ in range(50):
        v = tuple(rng.uniform(-2, 2, 2))
        ray = characteristic_ray(cone, v, extent=1.5, samples=6)
        lifted = lift_curve(ray, 0.0)
        u = cone.values(ray.vertices[:, 0], ray.vertices[:, 1])
        assert np.allclose([p.t for p in lifted], u, atol=1e-12)


def test_characteristic_ray_errors():
    fam = one_arc_family()
    with pytest.raises(SingularPoint):
        characteristic_ray(fam, (0.0, 0.0))
    with pytest.raises(SingularPoint):
        characteristic_ray(fam, (1.0, 0.0))


def test_c1_dichotomy():
    assert is_c1(ConeSurface(halves_family())).c1
    assert is_c1(ConeSurface(validate([]))).c1
    rep = is_c1(ConeSurface(one_arc_family()))
    assert not rep.c1 and rep.witness_jump == pytest.approx(1.0)
    rep = is_c1(ConeSurface(tail_family()))
    assert not rep.c1 and rep.witness_jump >= 1.0


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 8), st.booleans())
def test_numeric_probe_agrees(seed, k, covering):
    fam = random_family(np.random.default_rng(seed), k, covering)
    cone = ConeSurface(fam)
    assert is_c1(cone).c1 == numeric_c1_probe(cone)[0]


def test_oscillation_probe():
    rep = oscillation_probe(ConeSurface(tail_family()), radius=1.0)
    assert rep.min_amplitude >= 1.0
    assert rep.sup_grad <= rep.grad_bound
    assert rep.radial_ok
    rep2 = oscillation_probe(ConeSurface(tail_family()), radius=2.0)
    assert rep2.min_amplitude == pytest.approx(rep.min_amplitude)
    with pytest.raises(NoTail):
        oscillation_probe(ConeSurface(halves_family()))


def test_gradient_bound_constant_dominates(rng):
    for alpha in ALPHAS:
        c = gradient_bound_constant(alpha)
        th = rng.uniform(-alpha, alpha, 500)
        g = np.array([grad_u_alpha(alpha, (math.cos(t), math.sin(t))).sides for t in th], dtype=object)
        worst = max(math.hypot(*v) for s in g for v in s.values())
        assert worst <= c * (1 + 1e-12)


def test_classify():
    assert classify(VerticalPlaneSpec((0.0, 2.0))).normal == (0.0, 1.0)
    assert classify(VerticalPlaneSpec()).singular_set.kind == "empty"
    assert classify(HorizontalPlaneSpec()).singular_set.kind == "point"
    assert classify(validate([])).kind == "horizontal_plane"
    c = classify(halves_family())
    assert c.kind == "arc_cone" and c.singular_set.ray_angles == (0.0, math.pi)
    with pytest.raises(NotC1):
        classify(fig2_family())


def test_rotation_equivariance(rng):
    fam = fig2_family()
    rot = fam.rotated(0.9)
    x, y = rng.uniform(-2, 2, (2, 500))
    c, s = math.cos(0.9), math.sin(0.9)
    a = ConeSurface(rot).values(c * x - s * y, s * x + c * y)
    b = ConeSurface(fam).values(x, y)
    assert np.allclose(a, b, atol=1e-12)


def test_vectorized_matches_point_queries(rng):
    cone = ConeSurface(fig2_family())
    x, y = rng.uniform(-2, 2, (2, 300))
    gx, gy = cone.gradients(x, y)
    for i in range(300):
        g = gradient(cone, (x[i], y[i])).value
        assert g == pytest.approx((gx[i], gy[i]), abs=1e-14)
