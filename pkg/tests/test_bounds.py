import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from splashguard import families
from splashguard.bounds import (
    BoundReport, GraphOperators, GronwallTrace, SplashCells, cutoff, d_sweep, default_d_values,
    dtilde_derivative, dtilde_from_velocities, envelope_slope, graded_cells, gronwall_integrate,
    keyhole_case, near_far_split, phi0, poisson_mass, splash_certificate, v_difference, w_difference,
)
from splashguard.dynamics import SheetState
from splashguard.errors import DomainError, InconsistentRepresentations
from splashguard.kernels import BetweenGraphs, BulkVorticity
from splashguard.splash import SplashFrame, build_splash_frame

WIDE = (-10.0, 10.0, -10.0, 10.0)


def unit_field(region, func=None):
    return BulkVorticity.analytic("unit", func or (lambda p: np.ones(len(p))), bounds=WIDE, h=0.01,
                                  region=region)


def parabolic_frame(d, a=2.0, half_width=0.25, **kw):
    return SplashFrame.from_graphs(d, lambda r: -d / 2 - a * r ** 2, lambda r: d / 2 + a * r ** 2,
                                   half_width, half_height=half_width, **kw)


# approach rate ------------------------------------------------------------------------
def test_rigid_translation_has_no_approach():
    assert dtilde_from_velocities([0, 0], [0.1, 0.2], [1.0, -2.0], [1.0, -2.0]) == 0.0


def test_head_on_approach_rate_matches_finite_difference():
    c, d0, t = 0.7, 1e-2, 3e-3
    e = np.array([np.cos(0.4), np.sin(0.4)])

    def positions(s):
        return c * s * e, d0 * e

    z1, z2 = positions(t)
    rate = dtilde_from_velocities(z1, z2, c * e, np.zeros(2))
    d = d0 - c * t
    assert rate == pytest.approx(2 * c / d ** 3, rel=1e-12)
    h = 1e-7

    def Dt(s):
        a, b = positions(s)
        return 1.0 / float((a - b) @ (a - b))
    fd = (Dt(t + h) - Dt(t - h)) / (2 * h)
    assert rate == pytest.approx(fd, rel=1e-4)
    assert rate > 0


def test_interface_approach_rate_is_finite():
    frame, omega_v, state = keyhole_case(1e-2, n=128)
    val = dtilde_derivative(state, omega_v, frame.alpha1, frame.alpha2)
    assert np.isfinite(val)


# graded cells ----------------------------------------------------------------------------
@settings(max_examples=20, deadline=None)
@given(st.floats(1e-5, 0.1), st.sampled_from([8, 16, 32]))
def test_graded_cells_tile_the_window(d, n_core):
    L = 0.25
    c, hf = graded_cells(d, L, n_core)
    assert np.sum(4 * hf[:, 0] * hf[:, 1]) == pytest.approx((2 * L) ** 2, rel=1e-12)
    assert np.all(np.abs(c) + hf <= L * (1 + 1e-12))
    core = np.all(np.abs(c) < d, axis=1)
    np.testing.assert_allclose(hf[core], d / n_core / 2)


def test_graded_cells_reject_bad_sizes():
    with pytest.raises(ValueError):
        graded_cells(0.3, 0.25)


# bulk difference ----------------------------------------------------------------------------
def test_mirror_symmetric_bulk_gives_zero():
    fr = parabolic_frame(1e-2)
    region = BetweenGraphs.in_frame(fr, upper=fr.f1)
    res = v_difference(fr, unit_field(region))
    assert abs(res.value) < 1e-12 * max(1.0, abs(res.direct)) + 1e-14


def test_left_half_bulk_is_nonzero_and_routes_agree():
    fr = parabolic_frame(1e-2)
    region = BetweenGraphs.in_frame(fr, upper=fr.f1, rho_range=(-fr.half_width, 0.0))
    res = v_difference(fr, unit_field(region))
    assert abs(res.value) > 1e-4
    assert res.value == pytest.approx(res.direct, rel=1e-10)
    assert res.near + res.far == pytest.approx(res.value, rel=1e-12)


@settings(max_examples=8, deadline=None)
@given(st.floats(-np.pi, np.pi), st.floats(-3, 3), st.floats(-3, 3), st.floats(-3, -1.2))
def test_dual_route_on_moved_keyhole_frames(theta, tx, ty, logd):
    d = 10 ** logd
    curve = families.keyhole(128, d).moved(theta, (tx, ty))
    a1, a2 = families.keyhole_pair()
    fr = build_splash_frame(curve, a1, a2, half_width=0.25)
    region = BetweenGraphs.in_frame(fr, upper=fr.f1, rho_range=(-0.25, 0.1))
    field = unit_field(region, lambda p: 1.0 + 0.3 * np.sin(p[:, 0] + 2 * p[:, 1]))
    res = v_difference(fr, field)
    assert res.value == pytest.approx(res.direct, rel=1e-6)


def test_inconsistent_routes_are_reported(monkeypatch):
    fr = parabolic_frame(1e-2)
    region = BetweenGraphs.in_frame(fr, upper=fr.f1, rho_range=(-fr.half_width, 0.0))
    monkeypatch.setattr(SplashCells, "route_b", lambda self, normalization="paper": 1.0)
    with pytest.raises(InconsistentRepresentations):
        v_difference(fr, unit_field(region))


def test_standard_normalization_scales_difference():
    fr = parabolic_frame(1e-2)
    region = BetweenGraphs.in_frame(fr, upper=fr.f1, rho_range=(-fr.half_width, 0.0))
    f = unit_field(region)
    p = v_difference(fr, f).value
    s = v_difference(fr, f, normalization="standard").value
    assert s == pytest.approx(p / (2 * np.pi), rel=1e-12)


def test_near_part_scales_like_d():
    ratios = []
    for d in (1e-2, 1e-3, 1e-4):
        fr = parabolic_frame(d)
        region = BetweenGraphs.in_frame(fr, upper=fr.f1, rho_range=(-fr.half_width, 0.0))
        near, far = near_far_split(fr, unit_field(region))
        ratios.append(abs(near) / d)
    assert max(ratios) / min(ratios) < 3


# sheet difference --------------------------------------------------------------------------
def test_zero_sheet_gives_zero_difference():
    frame, _, state = keyhole_case(1e-2, n=128)
    assert w_difference(frame, state.replace(omega=np.zeros(128))) == 0.0


def test_sheet_difference_is_rotation_invariant():
    d = 1e-2
    frame, _, state = keyhole_case(d, n=128)
    base = w_difference(frame, state)
    moved = state.curve.moved(1.1, (0.4, -2.0))
    fr2 = build_splash_frame(moved, frame.alpha1, frame.alpha2, half_width=0.25)
    assert w_difference(fr2, state.replace(curve=moved)) == pytest.approx(base, rel=1e-9, abs=1e-13)


# sweep and report --------------------------------------------------------------------------
def test_default_sweep_values():
    d = default_d_values()
    assert len(d) == 9 and d[0] == pytest.approx(0.1) and d[-1] == pytest.approx(1e-5)
    assert np.all(np.diff(d) < 0)


def test_envelope_slope_of_linear_data():
    d = default_d_values()
    assert envelope_slope(d, 2.0 * np.log(d) + 1.0) == pytest.approx(2.0)
    assert envelope_slope(d, np.full(9, 3.0)) == pytest.approx(0.0, abs=1e-12)
    with pytest.raises(ValueError):
        envelope_slope(d[:1], [1.0])


def test_short_sweep_report(tmp_path):
    rep = d_sweep(lambda d: keyhole_case(d, n=128), [1e-2, 1e-3], threads=2)
    assert isinstance(rep, BoundReport)
    np.testing.assert_allclose(rep.v_diff, np.abs(rep.direct_v), rtol=1e-6)
    np.testing.assert_allclose(rep.near_far_parts.sum(axis=1), np.sign(rep.direct_v) * rep.v_diff, rtol=1e-9)
    s = rep.summary()
    assert {"slope_v", "slope_w", "envelope_ok", "near_ratio_median"} <= set(s)
    rep.to_csv(tmp_path / "b.csv")
    assert (tmp_path / "b.csv").read_text().splitlines()[0] == "d,v_diff,w_diff,ratio_v,ratio_w,I_near,I_far"
    rep.write_json(tmp_path / "b.json")
    assert json.loads((tmp_path / "b.json").read_text())["cutoff"].startswith("psi_r")


def test_sweep_rejects_out_of_range_values():
    with pytest.raises(ValueError):
        d_sweep(keyhole_case, [1.5])


# graph operators -----------------------------------------------------------------------------
def test_cutoff_profile():
    r = 1.0
    assert cutoff(0.3, r) == 1.0 and cutoff(0.5, r) == 1.0
    assert cutoff(1.0, r) == 0.0 and cutoff(2.0, r) == 0.0
    x = np.linspace(0.5, 1.0, 50)
    assert np.all(np.diff(cutoff(x, r)) <= 0)


def test_phi0_has_unit_mass_and_support():
    eps = 1e-4
    a = np.linspace(-2e-2, 2e-2, 200001)
    p = phi0(a, eps)
    assert np.trapezoid(p, a) == pytest.approx(1.0, rel=1e-8)
    assert np.all(p[np.abs(a) >= np.sqrt(eps)] == 0)


def test_operators_of_zero_input():
    ops = GraphOperators.build(1e-6, n=128)
    z = np.zeros(129)
    assert not ops.apply_M(z).any() and not ops.apply_H(z).any()


def test_operator_output_supported_under_cutoff():
    ops = GraphOperators.build(1e-6, n=256)
    out = ops.apply_M(np.ones(257))
    outside = np.abs(ops.alpha) >= ops.r
    assert np.all(out[outside] == 0)
    assert np.any(out[~outside] != 0)


def test_H_of_even_input_vanishes_at_origin():
    ops = GraphOperators.build(1e-6, n=256)
    even = np.exp(-(ops.alpha / ops.r) ** 2)
    assert abs(ops.apply_H(even)[128]) < 1e-12


def test_H_kernel_is_M_kernel_times_gap_quotient():
    f = lambda a: 1e-7 * np.cos(a * 1e4)
    ops = GraphOperators.build(1e-6, f=f, g=f, n=128)
    diff = ops.alpha[:, None] - ops.alpha[None, :]
    off = diff != 0
    expected = ops.kernel_M * ops.gap[:, None] / np.where(off, diff, 1.0)
    np.testing.assert_allclose(ops.kernel_H[off], expected[off], rtol=1e-12, atol=0)
    assert np.all(np.diag(ops.kernel_H) == 0)


def test_flat_mass_matches_poisson_oracle():
    ops = GraphOperators.build(1e-6, n=512)
    assert ops.apply_M(np.ones(513))[256] == pytest.approx(poisson_mass(1e-6), rel=1e-2)
    assert poisson_mass(1e-6) < 0.5


def test_operator_norms_stable_under_doubling():
    a = GraphOperators.build(1e-6, n=256)
    b = GraphOperators.build(1e-6, n=512)
    for name in ("M", "H"):
        na, nb = a.operator_norm(getattr(a, name)), b.operator_norm(getattr(b, name))
        assert abs(na - nb) <= 0.01 * nb


def test_adjoint_against_weighted_inner_product():
    ops = GraphOperators.build(1e-6, n=64)
    rng = np.random.default_rng(0)
    x, y = rng.normal(size=(2, 65))
    W = ops.weights
    lhs = np.sum(W * (ops.M @ x) * y)
    rhs = np.sum(W * x * (ops.adjoint(ops.M) @ y))
    assert lhs == pytest.approx(rhs, rel=1e-12)


def test_operators_from_keyhole_frame():
    frame, _, _ = keyhole_case(1e-2, n=128, window=0.25)
    ops = GraphOperators.from_frame(frame, n=64)
    assert ops.eps == pytest.approx(frame.d / 2)
    assert ops.gap[32] == pytest.approx(frame.d, rel=1e-9)
    img = ops.test_function_image()
    assert np.all(np.isfinite(img))


def test_operator_arguments_validated():
    with pytest.raises(ValueError):
        GraphOperators.build(-1.0)
    with pytest.raises(ValueError):
        GraphOperators.build(1e-6, n=63)


# log-Gronwall ------------------------------------------------------------------------------------
def test_gronwall_closed_form_example():
    res = gronwall_integrate(np.e, 1.0, 1.0)
    assert res.closed_form == pytest.approx(np.exp(np.e), rel=1e-15)
    assert res.numeric == pytest.approx(res.closed_form, rel=1e-8)
    assert res.steps == 10000


@settings(max_examples=20, deadline=None)
@given(st.floats(1.01, 1e6), st.floats(0.01, 3.0), st.floats(0.0, 1.5))
def test_gronwall_matches_closed_form(D0, C, dt):
    res = gronwall_integrate(D0, C, dt)
    assert res.numeric == pytest.approx(res.closed_form, rel=1e-8)


def test_gronwall_near_one_stays_near_one():
    res = gronwall_integrate(1 + 1e-9, 2.0, 1.0)
    assert res.numeric - 1 < 1e-8


def test_gronwall_domain():
    with pytest.raises(DomainError):
        gronwall_integrate(1.0, 1.0, 1.0)
    with pytest.raises(DomainError):
        gronwall_integrate(2.0, 0.0, 1.0)


def test_crude_envelope_can_fall_below_the_closed_form():
    # log D grows like e^{C t} log D0, which outruns D0 e^{e^{C t}} once log D0 is large
    res = gronwall_integrate(1e6, 1.0, 2.0)
    assert res.closed_form > res.crude_envelope


# certificate ---------------------------------------------------------------------------------------
def exact_trace(D0=10.0, C=0.8, n=201, span=1.0):
    t = np.linspace(0, span, n)
    D = np.exp(np.log(D0) * np.exp(C * t))
    return GronwallTrace(t, D, D, C)


def test_certificate_on_exact_flow():
    cert = splash_certificate(exact_trace(), 0.05)
    assert cert.passed and not cert.violations
    assert abs(cert.margin) < 1e-6


def test_certificate_flags_injected_jump():
    tr = exact_trace()
    D = tr.D.copy()
    D[120:] *= 5
    bad = GronwallTrace(tr.times, D, D, tr.C)
    cert = splash_certificate(bad, 0.05)
    assert not cert.passed and cert.violations == [120]


def test_certificate_on_constant_trace():
    t = np.arange(5.0)
    cert = splash_certificate(GronwallTrace(t, np.full(5, 9.0), np.full(5, 9.0), 1.0), 0.05)
    assert cert.passed
    assert cert.ca_lower_bound == pytest.approx(min(0.1, 0.1 / np.sqrt(cert.envelope)))
    assert set(cert.to_dict()) >= {"passed", "violations", "envelope", "crude_envelope", "c0"}


def test_trace_fitted_constant_and_sup_consistency():
    tr = exact_trace(C=0.5)
    free = GronwallTrace(tr.times, tr.D, tr.D)
    assert free.fitted_C() <= 0.5 + 1e-12
    assert free.fitted_C() == pytest.approx(0.5, rel=1e-3)
    assert free.sup_consistent()
    assert not GronwallTrace(tr.times, tr.D, 2 * tr.D).sup_consistent()
    with pytest.raises(ValueError):
        GronwallTrace(tr.times[::-1], tr.D, tr.D)
