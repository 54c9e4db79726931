import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from splashguard import families
from splashguard.dynamics import SheetState
from splashguard.errors import QuadratureUnderflow, SingularTarget
from splashguard.geometry import TWO_PI, PeriodicCurve, rotation
from splashguard.kernels import (
    BetweenGraphs, BulkVorticity, HalfPlaneBelow, birkhoff_rott, birkhoff_rott_refined,
    bulk_biot_savart, interface_velocity, read_gridded, rectangle_kernel_integral, write_gridded,
)


def disc(a, w0=1.0, center=(0.0, 0.0), h=None):
    cx, cy = center
    return BulkVorticity.analytic(
        "disc", lambda p: w0 * (np.hypot(p[:, 0] - cx, p[:, 1] - cy) <= a),
        bounds=(cx - a, cx + a, cy - a, cy + a), h=h or a / 64)


def gaussian(width=0.1, center=(0.0, 0.0)):
    cx, cy = center
    return BulkVorticity.analytic(
        "gauss", lambda p: np.exp(-((p[:, 0] - cx) ** 2 + (p[:, 1] - cy) ** 2) / width ** 2),
        bounds=(cx - 0.5, cx + 0.5, cy - 0.5, cy + 0.5), h=0.01)


def gaussian_velocity(x, width=0.1):
    # default normalization: 2 pi times the standard Lamb-Oseen velocity
    x = np.asarray(x, dtype=float)
    r2 = x @ x
    return np.pi * width ** 2 * (1 - np.exp(-r2 / width ** 2)) / r2 * np.array([-x[1], x[0]])


def wavy(n, amp=0.6, mode=3):
    return families.sinusoid(n, amp, mode)


# Birkhoff-Rott sheet integral ------------------------------------------------------
def test_constant_strength_on_flat_sheet_induces_nothing():
    c = families.flat(64)
    assert np.abs(birkhoff_rott(c, np.full(64, 1.3))).max() < 1e-13


def test_cos_strength_on_flat_sheet():
    c = families.flat(256)
    v = birkhoff_rott(c, np.cos(c.alpha))
    exact = np.column_stack([np.zeros(256), 0.5 * np.sin(c.alpha)])
    assert np.abs(v - exact).max() < 1e-10
    a = np.array([0.05, 1.234, 4.0])
    off = birkhoff_rott(c, np.cos(c.alpha), a)
    np.testing.assert_allclose(off, np.column_stack([0 * a, 0.5 * np.sin(a)]), atol=1e-12)


def test_cos_strength_matches_dense_oracle():
    n = 64
    c = families.flat(n)
    dense = families.flat(16 * n)
    v = birkhoff_rott(c, np.cos(c.alpha))
    ref = birkhoff_rott(dense, np.cos(dense.alpha))[::16]
    assert np.abs(v - ref).max() < 1e-12


def test_spectral_convergence_on_wavy_sheet():
    ref_curve = wavy(4096)
    targets = ref_curve.alpha[::256]
    ref = birkhoff_rott(ref_curve, np.cos(ref_curve.alpha), targets)
    errs = []
    for n in (32, 64, 128):
        c = wavy(n)
        errs.append(np.abs(birkhoff_rott(c, np.cos(c.alpha), targets) - ref).max())
    assert errs[0] / errs[1] >= 10 and errs[1] / errs[2] >= 10


def test_off_grid_targets_agree_with_on_grid_on_fine_grid():
    c = wavy(256)
    om = np.cos(c.alpha) + 0.3 * np.sin(2 * c.alpha)
    j = np.arange(0, 256, 37)
    on = birkhoff_rott(c, om, c.alpha[j])
    off = birkhoff_rott(c, om, c.alpha[j] + 1e-7)
    np.testing.assert_allclose(on, off, atol=1e-6)


def test_sheet_integral_rotation_equivariance():
    c = wavy(128, 0.3, 2)
    om = np.cos(c.alpha)
    theta = 0.77
    moved = c.moved(theta, (0.3, -1.0))
    np.testing.assert_allclose(birkhoff_rott(moved, om), birkhoff_rott(c, om) @ rotation(theta).T, atol=1e-12)


def test_self_touching_curve_is_singular():
    n = 64
    c = families.flat(n)
    w = np.zeros((n, 2))
    w[:, 0] = 0.0
    # pull node 10 onto node 30
    w[10] = c.z[30] - c.z[10]
    with pytest.raises(SingularTarget):
        birkhoff_rott(PeriodicCurve(w), np.ones(n))


def test_refined_integral_matches_trapezoid_on_well_separated_curve():
    c = wavy(256, 0.3, 2)
    om = np.cos(c.alpha)
    for j in (5, 100):
        a = c.alpha[j] + 0.3 * c.h
        np.testing.assert_allclose(birkhoff_rott_refined(c, om, a), birkhoff_rott(c, om, a), atol=1e-10)


def test_refined_integral_converges_near_the_neck():
    c = families.keyhole(256, 1e-4)
    om = np.ones(256)
    a1, a2 = families.keyhole_pair()
    v16 = birkhoff_rott_refined(c, om, a1, focus=a2, order=16)
    v24 = birkhoff_rott_refined(c, om, a1, focus=a2, order=24)
    assert np.abs(v16 - v24).max() < 1e-9


@settings(max_examples=15, deadline=None)
@given(st.floats(-2, 2), st.floats(-2, 2), st.integers(0, 100))
def test_sheet_integral_is_linear(s1, s2, seed):
    rng = np.random.default_rng(seed)
    c = wavy(64, 0.3, 1)
    k = np.arange(1, 5)
    w1 = rng.normal(size=4) @ np.cos(np.outer(k, c.alpha))
    w2 = rng.normal(size=4) @ np.sin(np.outer(k, c.alpha))
    lhs = birkhoff_rott(c, s1 * w1 + s2 * w2)
    rhs = s1 * birkhoff_rott(c, w1) + s2 * birkhoff_rott(c, w2)
    scale = max(1.0, np.abs(rhs).max())
    assert np.abs(lhs - rhs).max() <= 1e-12 * scale


# bulk Biot-Savart --------------------------------------------------------------------
def test_disc_centre_has_no_velocity():
    assert np.abs(bulk_biot_savart(disc(0.1), [0.0, 0.0])).max() < 1e-14


def test_rankine_far_field():
    a, w0 = 0.1, 1.5
    r = 2 * a
    v = bulk_biot_savart(disc(a, w0), [r, 0.0])
    assert v[1] == pytest.approx(np.pi * w0 * a * a / r, rel=5e-3)
    assert abs(v[0]) < 1e-12


def test_standard_normalization_divides_by_two_pi():
    f = disc(0.1)
    p = bulk_biot_savart(f, [0.2, 0.05])
    s = bulk_biot_savart(f, [0.2, 0.05], normalization="standard")
    np.testing.assert_allclose(s, p / TWO_PI, rtol=1e-14)
    with pytest.raises(ValueError):
        bulk_biot_savart(f, [0.2, 0.0], normalization="other")


def test_gaussian_vortex_converges_at_second_order():
    f = gaussian()
    x = np.array([0.13, 0.05])
    exact = gaussian_velocity(x)
    errs = [np.linalg.norm(bulk_biot_savart(f, x, h=h) - exact) for h in (0.01, 0.005, 0.0025)]
    assert errs[0] / errs[1] > 3.5 and errs[1] / errs[2] > 3.5


def test_rectangle_integral_matches_fine_midpoint():
    x = np.array([0.03, -0.01])
    center, half = np.array([[0.0, 0.0]]), np.array([[0.05, 0.02]])
    exact = rectangle_kernel_integral(x, center, half)[0]
    m = 2000
    gx = (np.arange(m) + 0.5) / m * 0.1 - 0.05
    gy = (np.arange(m) + 0.5) / m * 0.04 - 0.02
    X, Y = np.meshgrid(gx, gy)
    dx, dy = x[0] - X, x[1] - Y
    r2 = dx * dx + dy * dy
    dA = 0.1 * 0.04 / m ** 2
    approx = np.array([(-dy / r2).sum() * dA, (dx / r2).sum() * dA])
    np.testing.assert_allclose(exact, approx, atol=2e-4)


def test_bulk_rigid_equivariance():
    theta, b = 0.6, np.array([0.4, -0.2])
    Rm = rotation(theta)
    f = gaussian()
    # an axis-aligned grid cannot follow the rotation, so compare against the closed form
    x = np.array([0.13, 0.05])
    exact = Rm @ gaussian_velocity(x)
    moved = BulkVorticity.analytic("gauss", lambda p: f.func((p - b) @ Rm),
                                   bounds=(b[0] - 0.6, b[0] + 0.6, b[1] - 0.6, b[1] + 0.6), h=0.0025)
    np.testing.assert_allclose(bulk_biot_savart(moved, Rm @ x + b), exact, atol=5e-5)


def test_empty_region_underflows():
    f = BulkVorticity.analytic("none", lambda p: np.zeros(len(p)), bounds=(0, 1, 0, 1), h=0.1)
    with pytest.raises(QuadratureUnderflow):
        bulk_biot_savart(f, [2.0, 0.0])


def test_lp_norms_of_disc():
    a = 0.1
    f = disc(a, 2.0)
    assert f.lp_norm(np.inf) == pytest.approx(2.0)
    assert f.lp_norm(1) == pytest.approx(2.0 * np.pi * a * a, rel=1e-3)
    # boundary cells carry averaged values, so the L2 norm is low by O(h)
    assert f.lp_norm(2) == pytest.approx(2.0 * np.sqrt(np.pi) * a, rel=5e-3)


def test_gridded_round_trip(tmp_path):
    vals = np.arange(12.0).reshape(3, 4) / 7
    mask = vals > 0.2
    f = BulkVorticity.gridded(0.05, -0.1, 0.2, vals, mask)
    write_gridded(f, tmp_path / "g.txt")
    back = read_gridded(tmp_path / "g.txt")
    np.testing.assert_array_equal(back.values, f.values)
    np.testing.assert_array_equal(back.mask, f.mask)
    x = [0.5, 0.5]
    np.testing.assert_allclose(bulk_biot_savart(back, x), bulk_biot_savart(f, x), rtol=1e-15)


def test_gridded_rejects_cells_outside_region():
    region = HalfPlaneBelow(families.flat(64))
    with pytest.raises(ValueError):
        BulkVorticity.gridded(0.1, 0.0, -0.05, np.ones((2, 2)), region=region)


def test_half_plane_below_flat_curve():
    region = HalfPlaneBelow(families.sinusoid(64, 0.2, 1))
    pts = np.array([[np.pi / 2, 0.1], [np.pi / 2, 0.3], [3 * np.pi / 2, -0.1], [3 * np.pi / 2, -0.3],
                    [np.pi / 2 + TWO_PI, 0.1]])
    np.testing.assert_array_equal(region.contains(pts), [True, False, False, True, True])


@settings(max_examples=15, deadline=None)
@given(st.floats(-0.5, 0.5), st.floats(0.05, 0.95))
def test_between_graphs_coverage_of_band(y0, frac):
    band = BetweenGraphs(np.eye(2), np.zeros(2), lower=lambda r: 0 * r + y0,
                         upper=lambda r: 0 * r + y0 + 1.0)
    centers = np.array([[0.0, y0 - 0.5 + frac]])
    cov = band.frame_coverage(centers, np.array([[0.5, 0.5]]))
    assert cov[0] == pytest.approx(frac, abs=1e-12)


# interface velocity ----------------------------------------------------------------
def test_flat_sheet_uniform_strength():
    c = families.flat(256)
    v = interface_velocity(SheetState(c, np.full(256, 0.8)))
    assert np.abs(v.value - [0.4, 0.0]).max() < 1e-12


def test_zero_sheet_equals_bulk_alone():
    c = families.flat(64)
    f = disc(0.1, center=(1.0, -0.5), h=0.005)
    v = interface_velocity(SheetState(c, np.zeros(64)), f)
    np.testing.assert_allclose(v.value, bulk_biot_savart(f, c.z), atol=1e-15)


def test_parts_sum_to_value():
    c = wavy(64, 0.2, 2)
    om = 1 + 0.5 * np.cos(c.alpha)
    f = disc(0.1, center=(2.0, -0.6), h=0.01)
    v = interface_velocity(SheetState(c, om), f, alpha=np.array([0.3, 1.7]))
    np.testing.assert_allclose(v.value, v.sheet_local + v.sheet_br + v.bulk, atol=1e-15)
