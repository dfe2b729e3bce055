import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from hardylab.errors import ParseError
from hardylab.expr import ScalarField, as_field, parse_field_expr
from hardylab.geometry import Domain, point_context


@pytest.mark.parametrize("text", ["2x", "delta +", "foo(delta)", "import os", "delta.__class__", "z"])
def test_rejects_malformed_or_unknown(text):
    with pytest.raises(ParseError):
        parse_field_expr(text)


def test_caret_is_power_and_constants():
    f = ScalarField("2*delta^2 + pi - e")
    ctx = point_context(Domain.interval(0, 1), [0.25])
    assert f.value(ctx)[0] == pytest.approx(2 * 0.0625 + math.pi - math.e, rel=1e-15)


def test_constant_detection():
    assert ScalarField("1.5").is_constant and ScalarField("1.5").constant == 1.5
    assert not ScalarField("1 + delta").is_constant
    assert ScalarField("x*theta").variables == {"x", "theta"}
    assert as_field(2).constant == 2.0


def test_constant_raises_for_nonconstant():
    with pytest.raises(ValueError):
        ScalarField("delta").constant


@given(st.floats(0.05, 0.95), st.floats(-math.pi, math.pi))
def test_chain_rule_gradient_matches_finite_differences(r, th):
    dom = Domain.disk(1.0)
    f = ScalarField("delta^1.5*(1 + 0.3*cos(theta)) + x*y + log(radius)")
    p = np.array([r * math.cos(th), r * math.sin(th)])
    g = f.grad(point_context(dom, p))[0]
    h = 1e-6
    fd = np.array([
        (f.value(point_context(dom, p + h * e))[0] - f.value(point_context(dom, p - h * e))[0]) / (2 * h)
        for e in np.eye(2)
    ])
    assert np.allclose(g, fd, rtol=1e-6, atol=1e-6)
