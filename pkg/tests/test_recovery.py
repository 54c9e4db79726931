import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from splashguard import families
from splashguard.errors import IllConditioned
from splashguard.recovery import (
    RECOVERY_HEADER, AdmissibilitySnapshot, InterfaceData, PolynomialField, check_weak_admissibility,
    quadratic_field, recover_all, recover_gradient, recover_second_tangential, shear_field, stress_data,
    vorticity_max_principle,
)

NU = 0.3


def rotation(theta):
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, -s], [s, c]])


def rotated_field(field, theta):
    Q = rotation(theta)
    H = np.einsum("ab,bjk->ajk", Q, np.einsum("ij,bjk,lk->bil", Q, field.Hq, Q))
    return PolynomialField(field.name, Q @ field.b, Q @ field.L @ Q.T, H)


def max_errors(field, curve):
    rec = recover_all(field.interface_data(curve, NU))
    J = field.gradient(curve.z)
    ctt, ctn = field.exact_contractions(curve)
    return (np.abs(rec.G - J).max(), np.abs(rec.ctt - ctt).max(), np.abs(rec.ctn - ctn).max(),
            np.abs(rec.trace).max(), rec)


CURVES = {"flat": lambda n: families.flat(n), "perturbed": lambda n: families.sinusoid(n, 0.3, 2)}


@pytest.mark.parametrize("kind,tol,n", [("flat", 1e-8, 128), ("perturbed", 1e-6, 512)])
@pytest.mark.parametrize("make", [shear_field, quadratic_field])
def test_recovery_of_polynomial_fields(kind, tol, n, make):
    eg, ett, etn, tr, rec = max_errors(make(), CURVES[kind](n))
    assert eg < tol and ett < tol and etn < tol
    assert tr < 1e-10
    assert rec.residual.max() < 1e-10


def test_rigid_rotation_is_stress_free():
    w = 0.8
    field = PolynomialField("rot", np.zeros(2), np.array([[0.0, -w], [w, 0.0]]), np.zeros((2, 2, 2)))
    curve = families.sinusoid(64, 0.2, 1)
    data = field.interface_data(curve, NU)
    assert np.abs(data.s).max() < 1e-14 and np.abs(data.tau).max() < 1e-14
    J, res = recover_gradient(data, curve.alpha[5])
    np.testing.assert_allclose(J, field.L, atol=1e-12)


def test_linear_fields_have_zero_contractions():
    curve = families.sinusoid(64, 0.3, 1)
    data = shear_field(1.7).interface_data(curve, NU)
    for a in curve.alpha[::9]:
        np.testing.assert_allclose(recover_second_tangential(data, a), 0.0, atol=1e-10)


def test_inconsistent_stress_datum_gives_linear_residual():
    curve = families.sinusoid(64, 0.3, 1)
    base = quadratic_field().interface_data(curve, NU)
    res = []
    for delta in (1e-4, 2e-4, 4e-4):
        data = InterfaceData(base.alpha, base.v, base.v_a, base.v_aa, base.z_a, base.z_aa,
                             base.s + delta, base.s_a, NU, base.tau, base.tau_a)
        res.append(recover_gradient(data, curve.alpha[3])[1])
    assert res[0] > 1e-6
    assert res[1] / res[0] == pytest.approx(2.0, rel=1e-6)
    assert res[2] / res[1] == pytest.approx(2.0, rel=1e-6)


def test_degenerate_parametrisation_is_ill_conditioned():
    curve = families.flat(16)
    data = shear_field().interface_data(curve, NU)
    slow = InterfaceData(data.alpha, data.v, data.v_a * 1e-10, data.v_aa * 1e-20, data.z_a * 1e-10,
                         data.z_aa, data.s, data.s_a, NU, data.tau, data.tau_a)
    with pytest.raises(IllConditioned):
        recover_gradient(slow, data.alpha[0])


def test_non_sample_parameter_rejected():
    data = shear_field().interface_data(families.flat(16), NU)
    with pytest.raises(ValueError):
        recover_gradient(data, 0.123)


@settings(max_examples=15, deadline=None)
@given(st.floats(-np.pi, np.pi))
def test_recovery_is_rotation_covariant(theta):
    Q = rotation(theta)
    curve = families.sinusoid(64, 0.3, 1)
    field = quadratic_field()
    base = recover_all(field.interface_data(curve, NU))
    moved = curve.moved(theta, (0.0, 0.0))
    rec = recover_all(rotated_field(field, theta).interface_data(moved, NU))
    np.testing.assert_allclose(rec.G, np.einsum("ij,kjl,ml->kim", Q, base.G, Q), atol=1e-9)
    np.testing.assert_allclose(rec.ctt, base.ctt @ Q.T, atol=1e-9)
    np.testing.assert_allclose(rec.ctn, base.ctn @ Q.T, atol=1e-9)


def test_stress_data_matches_interface_data():
    curve = families.sinusoid(32, 0.3, 1)
    field = quadratic_field()
    data = field.interface_data(curve, NU)
    s, tau = stress_data(field.gradient(curve.z), curve.z_alpha, NU)
    np.testing.assert_allclose(s, data.s, atol=1e-13)
    np.testing.assert_allclose(tau, data.tau, atol=1e-13)


def test_non_solenoidal_field_rejected():
    with pytest.raises(ValueError):
        PolynomialField("bad", np.zeros(2), np.eye(2), np.zeros((2, 2, 2)))


def test_recovery_csv(tmp_path):
    curve = families.flat(16)
    rec = recover_all(quadratic_field().interface_data(curve, NU))
    rec.to_csv(tmp_path / "r.csv")
    lines = (tmp_path / "r.csv").read_text().splitlines()
    assert lines[0].startswith("#")
    assert lines[1] == ",".join(RECOVERY_HEADER)
    assert len(lines) == 2 + 16


# admissibility and max principle -------------------------------------------------------------
def snapshot(**kw):
    base = dict(ca0=0.5, u_sup0=1.0, v0_c3=1.0, z_c4=1.0, min_speed=0.5)
    base.update(kw)
    return AdmissibilitySnapshot(**base)


def test_admissibility_thresholds_are_closed():
    A = 4.0
    assert check_weak_admissibility(snapshot(ca0=1 / A, u_sup0=A, min_speed=1 / A), A).ok
    rep = check_weak_admissibility(snapshot(ca0=np.nextafter(1 / A, 0)), A)
    assert not rep.ok and rep.failed() == ["chord_arc"]
    assert check_weak_admissibility(snapshot(vtilde_c3=A + 1), A).failed() == ["vtilde_c3"]


def test_vorticity_max_principle():
    assert vorticity_max_principle(1.0, 2.0, 2.0)
    assert not vorticity_max_principle(1.0, 2.0, 2.5)
