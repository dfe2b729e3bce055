import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hardylab.coefficients import CoefficientModel
from hardylab.criteria import EsaVerdict, check_criterion
from hardylab.errors import NotReducible
from hardylab.geometry import Domain
from hardylab.weyl import (
    INCONCLUSIVE,
    LIMIT_CIRCLE,
    LIMIT_POINT,
    EndpointClass,
    SturmLiouville1D,
    cross_check,
    euler_classify,
    log_euler_classify,
    numeric_classify,
    reduce_to_1d,
)

OPPOSITE = {LIMIT_POINT: LIMIT_CIRCLE, LIMIT_CIRCLE: LIMIT_POINT}


@pytest.mark.parametrize("beta,gamma,cls", [
    (1.5, 0.0, LIMIT_POINT), (1.0, 0.0, LIMIT_CIRCLE), (0.0, -1.0, LIMIT_POINT),
    (1.0, 1.0, LIMIT_POINT), (0.0, 3.0, LIMIT_POINT), (0.5, 0.5, LIMIT_CIRCLE),
])
def test_euler_exact(beta, gamma, cls):
    assert euler_classify(beta, gamma).cls == cls


@pytest.mark.parametrize("alpha,cls", [(0.0, LIMIT_POINT), (0.25, LIMIT_POINT), (0.5, LIMIT_POINT),
                                       (0.75, LIMIT_CIRCLE)])
def test_log_euler_exact(alpha, cls):
    assert log_euler_classify(alpha).cls == cls


@given(st.floats(0.0, 2.0), st.floats(0.0, 2.0))
def test_log_euler_monotone(a, b):
    lo, hi = sorted((a, b))
    if log_euler_classify(hi).cls == LIMIT_POINT:
        assert log_euler_classify(lo).cls == LIMIT_POINT


def test_euler_exact_matches_power_counting():
    # psi_1 = 1 contributes t^gamma, psi_2 contributes t^(2 - 2 beta - gamma)
    for beta in np.linspace(0, 1.95, 14):
        for gamma in np.linspace(-2, 3, 15):
            ev = euler_classify(beta, gamma).evidence
            lc = ev["exponent_psi1"] > -1 and ev["exponent_psi2"] > -1
            if abs(gamma + 1) > 1e-9 and abs(gamma - 3 + 2 * beta) > 1e-9:
                assert (euler_classify(beta, gamma).cls == LIMIT_CIRCLE) == lc


@pytest.mark.parametrize("beta,cls", [(1.0, LIMIT_CIRCLE), (1.8, LIMIT_POINT)])
def test_numeric_euler(beta, cls):
    assert numeric_classify(SturmLiouville1D.euler(beta, 0.0), E=-1.0).cls == cls


def test_numeric_marginal_case():
    assert numeric_classify(SturmLiouville1D.euler(1.5, 0.0)).cls in (LIMIT_POINT, INCONCLUSIVE)


@pytest.mark.parametrize("beta,gamma", [(1.0, 0.0), (1.8, 0.0), (0.4, -1.6), (0.2, 2.0)])
def test_numeric_is_energy_independent(beta, gamma):
    p = SturmLiouville1D.euler(beta, gamma)
    assert numeric_classify(p, E=-1.0).cls == numeric_classify(p, E=-10.0).cls


@pytest.mark.parametrize("alpha", [0.0, 0.25, 0.75])
def test_numeric_log_euler_never_contradicts(alpha):
    got = numeric_classify(SturmLiouville1D.log_euler(alpha)).cls
    assert got != OPPOSITE[log_euler_classify(alpha).cls]


@pytest.mark.slow
def test_numeric_sweep_agrees_off_the_boundary():
    mismatches = []
    for beta in np.linspace(0, 2, 21):
        for gamma in np.linspace(-2, 3, 21):
            # perpendicular distance to the two classification lines
            if abs(gamma + 1) < 0.05 or abs(gamma + 2 * beta - 3) / np.sqrt(5) < 0.05:
                continue
            exact = euler_classify(beta, gamma).cls
            got = numeric_classify(SturmLiouville1D.euler(beta, gamma)).cls
            if got != exact:
                mismatches.append((beta, gamma, exact, got))
    assert mismatches == []


# ----------------------------------------------------------------------
# soundness cross check
# ----------------------------------------------------------------------
def _verdict(status):
    margin = {"Certified": 0.5, "NotCertified": -0.5, "HypothesisViolated": 0.0}[status]
    return EsaVerdict(status, margin, "const-beta-i",
                      hypothesis="E:DM" if status == "HypothesisViolated" else None)


def test_cross_check_table():
    lp, lc, inc = (EndpointClass(c) for c in (LIMIT_POINT, LIMIT_CIRCLE, INCONCLUSIVE))
    assert cross_check(_verdict("Certified"), lp).status == "PASS"
    fail = cross_check(_verdict("Certified"), lc)
    assert fail.status == "FAIL" and fail.context["oracle"]["class"] == LIMIT_CIRCLE
    warn = cross_check(_verdict("Certified"), inc)
    assert warn.passed and warn.warning
    assert cross_check(_verdict("NotCertified"), lc).passed
    assert cross_check(_verdict("NotCertified"), lp).note == "criterion gap: oracle stronger"
    assert cross_check(_verdict("HypothesisViolated"), lc).passed


def test_euler_soundness_sweep():
    dom = Domain.interval(0.0, 1.0)
    for beta in np.linspace(0, 1.95, 14):
        for gamma in np.linspace(-2, 3, 11):
            m = CoefficientModel(dom, 0.3, beta=repr(float(beta)), gamma=repr(float(gamma)))
            v = check_criterion("const-beta-i", m)
            assert cross_check(v, euler_classify(beta, gamma)).passed


# ----------------------------------------------------------------------
# reduction
# ----------------------------------------------------------------------
def test_reduce_interval_model():
    m = CoefficientModel(Domain.interval(0.0, 1.0), 0.3, beta="1.8")
    p = reduce_to_1d(m)
    t = np.array([1e-4, 1e-2])
    np.testing.assert_allclose(p.p(t), t ** 1.8, rtol=1e-12)
    np.testing.assert_allclose(p.w(t), 1.0)
    assert numeric_classify(p).cls == LIMIT_POINT


def test_reduce_disk_model_absorbs_jacobian():
    m = CoefficientModel(Domain.disk(1.0), 0.3, beta="1.0", d22="1")
    p = reduce_to_1d(m)
    t = np.array([1e-3, 0.1])
    np.testing.assert_allclose(p.w(t), 1 - t, rtol=1e-12)
    np.testing.assert_allclose(p.p(t), t * (1 - t), rtol=1e-12)
    assert numeric_classify(p).cls == LIMIT_CIRCLE


def test_reduce_rejects_angular_dependence():
    with pytest.raises(NotReducible):
        reduce_to_1d(CoefficientModel(Domain.disk(1.0), 0.3, a="1+0.1*cos(theta)"))
    with pytest.raises(NotReducible):
        reduce_to_1d(CoefficientModel(Domain.disk(1.0), 0.3, d12="0.1*delta"))
