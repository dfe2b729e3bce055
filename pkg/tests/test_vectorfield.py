import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from hardylab.barriers import BarrierSpec, barrier_eval
from hardylab.coefficients import CoefficientModel
from hardylab.errors import IncompatibleModel, OutOfLayer, ValidationError
from hardylab.geometry import Domain, layer_points
from hardylab.vectorfield import (
    AnsatzField,
    CutoffPsi,
    ansatz_eval,
    certificate_vs_barrier,
    numeric_certificate,
    remainder_audit,
    vf_certificate,
)

INTERVAL = Domain.interval(0.0, 1.0)
DISK = Domain.disk(1.0)


def test_cutoff_plateaus_and_smoothness():
    psi = CutoffPsi(0.2)
    d = np.array([0.01, 0.1, 0.125, 0.15, 0.19])
    assert np.allclose(psi.value(d), [1, 1, 0.5, 0, 0])
    h = 1e-7
    x = np.linspace(0.101, 0.149, 9)
    assert np.allclose(psi.derivative(x), (psi.value(x + h) - psi.value(x - h)) / (2 * h), atol=1e-5)


def test_f_cancels_exponent_at_inverse_e():
    # beta = gamma = 0: X0 is proportional to (beta + gamma - 1 + f) and f(1/e) = 1
    field = AnsatzField("X0", CoefficientModel(INTERVAL, 0.3))
    f, _ = field.f_and_tfp(np.array([math.exp(-1)]))
    assert f[0] - 1.0 == pytest.approx(0.0, abs=1e-15)


def test_field_vanishes_past_cutoff():
    m = CoefficientModel(INTERVAL, 0.3)
    field = AnsatzField("X0", m)
    assert np.all(ansatz_eval(field, [0.25]) == 0)
    assert vf_certificate(m, field, [0.25]).value == 0.0
    with pytest.raises(OutOfLayer):
        ansatz_eval(field, [0.4])


def test_flat_interval_certificate():
    m = CoefficientModel(INTERVAL, 0.3)
    c = vf_certificate(m, AnsatzField("X0", m), [math.exp(-2)])
    target = 0.25 * math.exp(4) * 1.25  # 1/4 delta^-2 [1 + (ln 1/delta)^-2]
    assert c.value == pytest.approx(target, rel=1e-4)
    assert c.closed_form == pytest.approx(target, rel=1e-12)
    assert c.value >= barrier_eval(BarrierSpec("base", m), [math.exp(-2)])


def test_variant_validation():
    m = CoefficientModel(INTERVAL, 0.3)
    with pytest.raises(ValidationError):
        AnsatzField("X9", m)
    with pytest.raises(ValidationError):
        AnsatzField("XN", m, N=0)
    with pytest.raises(IncompatibleModel):
        AnsatzField("X0", CoefficientModel(INTERVAL, 0.3, beta="1.5", log_alpha=0.25))


MODELS = {
    "flat-disk": CoefficientModel(DISK, 0.3, d22="1"),
    "aniso": CoefficientModel(DISK, 0.3, beta="1.2", gamma="-0.3", a="2 + x*y", r="1 + 0.5*x^2",
                              d12="0.2*delta^1.2", d22="delta^0.5 + 1"),
    "variable-beta": CoefficientModel(DISK, 0.3, beta="1.2 + 0.2*delta*x", gamma="0.1*y", d22="1",
                                      s=0.5, s_beta=0.0),
    "annulus": CoefficientModel(Domain.annulus(0.5, 1.0), 0.2, beta="0.7", d22="2"),
    "punctured": CoefficientModel(Domain.punctured_disk(1.0), 0.3, beta="0.5", d22="1"),
}


@pytest.mark.parametrize("name", sorted(MODELS))
@pytest.mark.parametrize("variant", ["X0", "XN"])
def test_closed_form_matches_finite_differences(name, variant):
    m = MODELS[name]
    field = AnsatzField(variant, m, N=2)
    rng = np.random.default_rng(3)
    for comp in range(len(m.domain.components)):
        d = np.geomspace(1e-6, 0.45 * m.nu0, 12)
        pts = layer_points(m.domain, comp, d, rng.uniform(-np.pi, np.pi, d.size))
        for p in pts:
            c = vf_certificate(m, field, p)
            assert c.value == pytest.approx(c.closed_form, rel=1e-6)


@pytest.mark.parametrize("name", ["aniso", "variable-beta", "annulus"])
def test_finite_difference_order_two(name):
    m = MODELS[name]
    field = AnsatzField("X0", m)
    p = layer_points(m.domain, 0, 0.05, 0.7)
    exact = vf_certificate(m, field, p[0]).closed_form
    errs = [abs(numeric_certificate(field, p, np.array([h]))[0] - exact) for h in (4e-3, 2e-3, 1e-3)]
    ratios = [errs[0] / errs[1], errs[1] / errs[2]]
    assert all(3.5 < r < 4.5 for r in ratios), ratios


@given(st.floats(1e-6, 0.14), st.floats(-math.pi, math.pi), st.floats(0.01, 100.0))
def test_density_gauge_invariance(d, th, c):
    base = CoefficientModel(DISK, 0.3, beta="1.2", gamma="0.5", r="1 + 0.3*x", d22="1")
    scaled = CoefficientModel(DISK, 0.3, beta="1.2", gamma="0.5", r=f"{c!r}*(1 + 0.3*x)", d22="1")
    p = layer_points(DISK, 0, d, th)
    v0 = numeric_certificate(AnsatzField("X0", base), p)[0]
    v1 = numeric_certificate(AnsatzField("X0", scaled), p)[0]
    assert v1 == pytest.approx(v0, rel=1e-10)


@pytest.mark.parametrize("beta, expected", [(1.5, 0.01875)])
def test_remainder_audit_disk(beta, expected):
    audit = remainder_audit(CoefficientModel(DISK, 0.3, beta=repr(beta), d22="1"))
    assert audit.status == "ok"
    assert audit.nu1 == pytest.approx(expected)
    inside = [row["min_margin"] for row in audit.margin_profile if row["shell_hi"] <= audit.nu1]
    assert inside and min(inside) >= 0
    assert list(audit.to_dict())[:4] == ["variant", "status", "scaled_sup_R0", "nu1"]


def test_remainder_audit_interval_is_full_half_layer():
    audit = remainder_audit(CoefficientModel(INTERVAL, 0.3))
    assert audit.nu1 == pytest.approx(0.15)
    assert audit.scaled_sup_R0 == 0.0


@pytest.mark.parametrize("name", ["flat-disk", "annulus", "punctured"])
def test_certificate_dominates_base_barrier(name):
    m = MODELS[name]
    nu1 = remainder_audit(m).nu1
    res = certificate_vs_barrier(m, nu1, n=2000)
    assert res["min_relative"] >= -1e-6
