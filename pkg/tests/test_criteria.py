import math

import numpy as np
import pytest
import sympy as sp
from hypothesis import given
from hypothesis import strategies as st

from hardylab.coefficients import CoefficientModel, rotate_model
from hardylab.criteria import (
    KINDS,
    AgmonProbe,
    EsaVerdict,
    agmon_arrays,
    agmon_probe,
    ars2_closed_form,
    ars2_curvature_expr,
    ars2_model,
    check_criterion,
    layer_infimum,
    log_critical_coefficients,
)
from hardylab.errors import IncompatibleModel, OutOfLayer, UnknownKind, ValidationError
from hardylab.expr import RADIUS
from hardylab.geometry import Domain, context_on_component
from hardylab.weyl import cross_check, euler_classify, log_euler_classify

INTERVAL = Domain.interval(0.0, 1.0)
DISK = Domain.disk(1.0)


def euler(beta, gamma=0.0, domain=INTERVAL, nu0=0.3, **kw):
    return CoefficientModel(domain, nu0, beta=repr(float(beta)), gamma=repr(float(gamma)), **kw)


# ----------------------------------------------------------------------
# frozen verdicts
# ----------------------------------------------------------------------
def test_const_beta_i_certified_with_frozen_margin():
    v = check_criterion("const-beta-i", euler(1.6))
    assert v.status == "Certified"
    assert v.margin == pytest.approx(1.25, rel=1e-9)
    assert v.exit_code == 0


def test_const_beta_i_not_certified():
    v = check_criterion("const-beta-i", euler(1.4))
    assert v.status == "NotCertified"
    assert v.infimum == pytest.approx(4 / 9, rel=1e-9)
    assert v.exit_code == 2


def test_boundary_exponent_is_certified_with_zero_margin():
    v = check_criterion("const-beta-i", euler(1.5))
    assert v.status == "Certified"
    assert v.margin == 0.0


def test_strong_degeneracy():
    v = check_criterion("strong", euler(2.0))
    assert v.status == "Certified"
    assert v.margin >= 0


def test_log_critical_threshold():
    ok = check_criterion("log-critical", euler(1.5, log_alpha=0.25))
    bad = check_criterion("log-critical", euler(1.5, log_alpha=0.3))
    assert ok.status == "Certified"
    assert bad.status == "NotCertified"
    c1, _ = log_critical_coefficients(0.25)
    assert c1 == 0.0


@pytest.mark.parametrize("beta,status", [(1.4, "NotCertified"), (1.5, "Certified"),
                                         (1.7, "Certified"), (2.3, "Certified")])
def test_iso_critical_threshold(beta, status):
    m = euler(beta, domain=DISK, d22=f"delta^{beta}")
    assert check_criterion("iso-critical", m).status == status


def test_iso_critical_flags_anisotropy():
    v = check_criterion("iso-critical", euler(1.7, domain=DISK, d22="1"))
    assert v.status == "HypothesisViolated"
    assert v.hypothesis == "isotropy"
    assert v.exit_code == 3


def test_variable_beta_crossing_two():
    # beta passes 2 at delta = 0.025, inside the default layer
    m = CoefficientModel(INTERVAL, 0.3, beta="1.5+20*delta")
    v = check_criterion("variable-beta", m)
    assert v.status == "Certified"
    assert min(v.witness[0], 1 - v.witness[0]) < 0.025


def test_variable_beta_needs_nonnegative_potential_where_beta_exceeds_two():
    m = CoefficientModel(INTERVAL, 0.3, beta="1.5+20*delta", V="-1")
    assert check_criterion("variable-beta", m).status == "HypothesisViolated"


def test_unknown_kind_and_incompatible_model():
    with pytest.raises(UnknownKind):
        check_criterion("nope", euler(1.6))
    with pytest.raises(IncompatibleModel):
        check_criterion("const-beta-i", CoefficientModel(INTERVAL, 0.3, beta="1+delta"))
    with pytest.raises(ValidationError):
        check_criterion("const-beta-i", euler(1.6), mu=0.2)


def test_verdict_invariants():
    with pytest.raises(ValueError):
        EsaVerdict("Certified", -0.1, "x")
    with pytest.raises(ValueError):
        EsaVerdict("NotCertified", 0.0, "x")
    with pytest.raises(ValueError):
        EsaVerdict("HypothesisViolated", 0.0, "x")


# ----------------------------------------------------------------------
# 2-ARS
# ----------------------------------------------------------------------
@pytest.mark.parametrize("alpha,c,status", [(1, 0, "Certified"), (0, 0, "NotCertified"),
                                            (1, 1, "NotCertified")])
def test_ars2_verdicts(alpha, c, status):
    _, v = ars2_model(alpha, c)
    assert v.status == status
    assert v.infimum == pytest.approx(ars2_closed_form(alpha, c), abs=1e-9)


@pytest.mark.parametrize("alpha", [0.0, 0.5, 1.0, 2.0])
def test_ars2_curvature_closed_form(alpha):
    K = sp.lambdify(RADIUS, ars2_curvature_expr(alpha), "numpy")
    r = np.linspace(0.01, 0.999, 200)
    ref = -alpha * (alpha + 1) / (1 - r) ** 2
    np.testing.assert_allclose(K(r) * np.ones_like(r), ref, rtol=1e-10, atol=1e-10)


def test_ars2_rejects_angle_free_symbols():
    with pytest.raises(ValidationError):
        ars2_curvature_expr(1.0, "x")


# ----------------------------------------------------------------------
# layer infimum
# ----------------------------------------------------------------------
def test_layer_infimum_constant():
    inf = layer_infimum(lambda ctx: np.ones(ctx.n), euler(1.0, domain=DISK), 0.075)
    assert inf.value == 1.0


def test_layer_infimum_constant_ratio():
    m = euler(1.5)
    f = lambda ctx: (m.beta.value(ctx) + m.gamma.value(ctx) - 1) ** 2 / (m.beta.value(ctx) - 2) ** 2
    assert layer_infimum(f, m, 0.075).value == 1.0


def test_layer_infimum_angular_minimum():
    m = euler(1.0, domain=DISK)
    inf = layer_infimum(lambda ctx: 1 + np.sin(ctx.values["theta"]) ** 2, m, 0.075)
    assert inf.value == pytest.approx(1.0, abs=1e-6)
    x, y = inf.witness
    assert abs(math.sin(math.atan2(y, x))) < 1e-3


def test_layer_infimum_is_deterministic():
    m = euler(1.0, domain=Domain.annulus(0.5, 1.0), nu0=0.2)
    f = lambda ctx: np.cos(3 * ctx.values["theta"]) + ctx.values["delta"]
    assert layer_infimum(f, m, 0.05) == layer_infimum(f, m, 0.05)


# ----------------------------------------------------------------------
# Agmon weights
# ----------------------------------------------------------------------
def test_agmon_const_beta_value():
    res = agmon_probe(AgmonProbe("const-beta"), euler(1.0), [0.1])
    assert res.gDg == pytest.approx(2.5, rel=1e-12)
    assert res.closed_form == pytest.approx(2.5, rel=1e-12)


def test_agmon_beta_two_is_trivial():
    res = agmon_probe(AgmonProbe("const-beta"), euler(2.0), [0.05])
    assert res.g == 0.0
    assert res.gDg == 0.0


@pytest.mark.parametrize("beta", [0.0, 1.0, 1.5])
def test_agmon_exponential_weight(beta):
    m = euler(beta)
    for d in (1e-6, 1e-3, 0.05):
        g = agmon_probe(AgmonProbe("const-beta"), m, [d]).g
        assert math.exp(2 * g) == pytest.approx(d ** (2 - beta), rel=1e-12)


@pytest.mark.parametrize("model", [
    euler(1.2, -0.5, domain=DISK, a="2", d22="delta^1.2"),
    euler(0.5, 0.0, domain=Domain.annulus(0.5, 1.0), nu0=0.2, d12="0.1*delta^0.5", d22="1"),
    euler(1.7, 0.3, domain=Domain.punctured_disk(1.0), a="1+x^2"),
])
def test_agmon_closed_form_matches_quadratic_form(model):
    rng = np.random.default_rng(3)
    comps = len(model.domain.components)
    for comp in range(comps):
        d = np.exp(rng.uniform(np.log(1e-7), np.log(0.45 * model.nu0), 1000 // comps))
        th = rng.uniform(0, 2 * np.pi, d.size)
        ctx = context_on_component(model.domain, comp, d, th)
        for res in agmon_arrays(AgmonProbe("const-beta"), model, ctx):
            assert res.gDg == pytest.approx(res.closed_form, rel=1e-8)


def test_variable_weight_is_nonpositive():
    m = CoefficientModel(INTERVAL, 0.3, beta="1.2+delta")
    d = np.geomspace(1e-8, 0.149, 50)
    for res in agmon_arrays(AgmonProbe("variable-beta"), m, m.context(d[:, None])):
        assert res.g <= 0
        assert 0 < res.lam <= 1


def test_agmon_out_of_layer():
    with pytest.raises(OutOfLayer):
        agmon_probe(AgmonProbe("const-beta"), euler(1.0), [0.2])
    with pytest.raises(ValidationError):
        AgmonProbe("wrong")


# ----------------------------------------------------------------------
# oracle soundness
# ----------------------------------------------------------------------
def test_cross_check_examples():
    assert cross_check(check_criterion("const-beta-i", euler(1.6)), euler_classify(1.6, 0)).passed
    r = cross_check(check_criterion("const-beta-i", euler(1.4)), euler_classify(1.4, 0))
    assert r.passed and r.note is None
    gap = cross_check(check_criterion("log-critical", euler(1.5, log_alpha=0.4)), log_euler_classify(0.4))
    assert gap.passed
    assert gap.note == "criterion gap: oracle stronger"


@given(st.floats(0.0, 1.99), st.floats(-2.0, 3.0))
def test_euler_criterion_matches_oracle(beta, gamma):
    v = check_criterion("const-beta-i", euler(beta, gamma))
    lp = euler_classify(beta, gamma).cls == "LimitPoint"
    assert (v.status == "Certified") == lp


# ----------------------------------------------------------------------
# scale and rotation invariance
# ----------------------------------------------------------------------
def _random_model(rng, scale=1.0):
    beta = round(float(rng.uniform(0.0, 2.4)), 3)
    gamma = round(float(rng.uniform(-1.5, 2.0)), 3)
    a = round(float(rng.uniform(0.5, 2.0)), 3)
    eps = round(float(rng.uniform(0.0, 0.3)), 3)
    return CoefficientModel(
        DISK, 0.3,
        r=f"{scale}*(1+{eps}*cos(theta))", gamma=repr(gamma), a=repr(a), beta=repr(beta),
        d12=f"{eps}*delta^{beta}*sin(theta)", d22=f"(1+{eps}*x)*delta^{beta}",
        v=f"{eps}*cos(theta)^2")


def test_verdicts_invariant_under_scaling_and_rotation():
    rng = np.random.default_rng(20)
    kinds = ("const-beta-i", "const-beta-ii", "strong", "variable-beta")
    for _ in range(20):
        state = rng.bit_generator.state
        base = _random_model(rng)
        rng.bit_generator.state = state
        scaled = _random_model(rng, scale=7.5)
        rotated = rotate_model(base, 0.7)
        for kind in kinds:
            try:
                ref = check_criterion(kind, base).status
            except IncompatibleModel:
                continue
            assert check_criterion(kind, scaled).status == ref
            assert check_criterion(kind, rotated).status == ref


def test_every_kind_is_dispatched():
    m = euler(1.6)
    for kind in KINDS:
        if kind in ("iso-critical", "log-critical"):
            continue
        assert check_criterion(kind, m).status in ("Certified", "NotCertified", "HypothesisViolated")
