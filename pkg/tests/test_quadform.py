import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hardylab.barriers import BarrierSpec
from hardylab.coefficients import CoefficientModel
from hardylab.errors import GridTooLarge, SupportViolation, ValidationError
from hardylab.geometry import Domain
from hardylab.quadform import (
    Grid,
    HardyGap,
    assemble_h,
    bump,
    hardy_gap,
    min_gap_eigen,
    random_bump,
)

INTERVAL = Domain.interval(0.0, 1.0)
DISK = Domain.disk(1.0)


def sine(p):
    x = p[:, 0]
    return np.sin(np.pi * x), (np.pi * np.cos(np.pi * x))[:, None]


def zero(p):
    return np.zeros(len(p)), np.zeros_like(p)


def test_sine_energy():
    m = CoefficientModel(INTERVAL, 0.3)
    h = assemble_h(m, Grid.line(INTERVAL, 400)).value(sine)
    assert h == pytest.approx(np.pi ** 2 / 2, rel=1e-6)


def test_zero_function():
    m = CoefficientModel(INTERVAL, 0.3)
    form = assemble_h(m, Grid.line(INTERVAL, 100), include_V=True)
    assert form.value(zero) == 0.0


def test_weights_measure():
    assert Grid.line(INTERVAL, 300).weights.sum() == pytest.approx(1.0, abs=1e-12)
    assert Grid.polar(DISK, 40, 32).weights.sum() == pytest.approx(np.pi, rel=1e-8)
    ann = Domain.annulus(0.5, 1.0)
    assert Grid.polar(ann, 40, 32).weights.sum() == pytest.approx(0.75 * np.pi, rel=1e-8)
    assert np.all(Grid.polar(ann, 20, 16).weights > 0)


def test_separable_diffusion_on_radial_bump():
    phi = random_bump(4, 0.2, domain=DISK)
    radial = type(phi)(phi.domain, phi.component,
                       tuple(b.__class__(b.center, b.half_width, b.amplitude) for b in phi.bumps),
                       phi.support)
    grid = Grid.shell(DISK, 0, *radial.support, n_r=256, n_theta=16)
    iso = assemble_h(CoefficientModel(DISK, 0.3), grid).value(radial)
    aniso = assemble_h(CoefficientModel(DISK, 0.3, a="2", d22="3"), grid).value(radial)
    assert aniso == pytest.approx(2 * iso, rel=1e-6)


def test_quadrature_convergence():
    m = CoefficientModel(INTERVAL, 0.3, r="1+x", a="2+x^2")
    ref = assemble_h(m, Grid.line(INTERVAL, nodes=np.linspace(0, 1, 257))).value(sine)
    errs = [abs(assemble_h(m, Grid.line(INTERVAL, nodes=np.linspace(0, 1, n + 1))).value(sine) - ref)
            for n in (2, 4, 8)]
    assert errs[-1] > 0
    for coarse, fine in zip(errs, errs[1:]):
        assert coarse >= 8 * fine


def test_symmetry():
    m = CoefficientModel(DISK, 0.3, beta="0.5", d12="0.2*delta^0.5*cos(theta)", d22="1+x^2")
    phi = random_bump(1, 0.2, domain=DISK)
    psi = random_bump(2, 0.2, domain=DISK)
    form = assemble_h(m, Grid.shell(DISK, 0, 0.05, 0.15), include_V=True)
    assert form.bilinear(phi, psi) == pytest.approx(form.bilinear(psi, phi), abs=1e-12)


# ----------------------------------------------------------------------
# Hardy gaps
# ----------------------------------------------------------------------
def _min_relative_gap(model, spec, nu, n=200):
    ev = HardyGap(model, spec, nu, (nu / 4, 3 * nu / 4))
    return min(ev.gap(random_bump(seed, nu, domain=model.domain)).relative for seed in range(n))


def test_flat_disk_gap():
    m = CoefficientModel(DISK, 0.3)
    assert _min_relative_gap(m, BarrierSpec("base", m), 0.05) >= -1e-6


def test_euler_hierarchy_gap():
    m = CoefficientModel(INTERVAL, 0.3, beta="1")
    assert _min_relative_gap(m, BarrierSpec("hierarchy", m, N=3), 0.02) >= -1e-6


def test_zero_function_gap():
    m = CoefficientModel(INTERVAL, 0.3)
    ev = HardyGap(m, BarrierSpec("base", m), 0.1, (0.025, 0.075))
    assert ev.form.value(zero) == 0.0
    assert ev.form.weighted_mass(zero, ev.weight) == 0.0


def test_support_violation():
    m = CoefficientModel(INTERVAL, 0.3)
    phi = random_bump(0, 0.2)
    with pytest.raises(SupportViolation):
        hardy_gap(m, BarrierSpec("base", m), phi, 0.1)


# ----------------------------------------------------------------------
# eigenvalue test
# ----------------------------------------------------------------------
@pytest.fixture(scope="module")
def line_setup():
    m = CoefficientModel(INTERVAL, 0.3)
    return m, Grid.line(INTERVAL, 2000), BarrierSpec("base", m, include_log=False)


def test_classical_constant_eigen(line_setup):
    m, grid, spec = line_setup
    assert min_gap_eigen(m, spec, grid, 0.1) >= -1e-8


def test_sharpness_eigen(line_setup):
    m, grid, spec = line_setup
    assert min_gap_eigen(m, spec.scaled(1.5), grid, 0.1) < 0


def test_zero_barrier_eigen(line_setup):
    m, grid, spec = line_setup
    assert min_gap_eigen(m, spec.scaled(0.0), grid, 0.1) >= 0


def test_eigen_monotone_in_scaling(line_setup):
    m, grid, spec = line_setup
    vals = [min_gap_eigen(m, spec.scaled(c), grid, 0.1) for c in (1.5, 1.2, 1.0, 0.7, 0.3, 0.0)]
    assert all(b >= a - 1e-12 for a, b in zip(vals, vals[1:]))


def test_polar_eigen_flat_disk():
    m = CoefficientModel(DISK, 0.3)
    assert min_gap_eigen(m, BarrierSpec("base", m), Grid.polar(DISK, 30, 16), 0.1) >= -1e-8


def test_grid_caps():
    m = CoefficientModel(INTERVAL, 0.3)
    with pytest.raises(GridTooLarge):
        min_gap_eigen(m, BarrierSpec("base", m), Grid.line(INTERVAL, 2001), 0.1)
    with pytest.raises(ValidationError):
        Grid.polar(INTERVAL)


# ----------------------------------------------------------------------
# random bumps
# ----------------------------------------------------------------------
def test_bump_profile():
    v, dv = bump(np.array([-1.0, 0.0, 1.0, 2.0]))
    assert v.tolist() == [0.0, np.exp(-1.0), 0.0, 0.0]
    assert dv[1] == 0.0


def test_random_bump_reproducible_and_vanishing_at_support_edges():
    a, b = random_bump(1, 0.2), random_bump(1, 0.2)
    assert a == b
    lo, hi = a.support
    val, _ = a.evaluate(np.array([[lo], [hi], [1 - lo], [1 - hi]]))
    assert np.all(val == 0.0)


@given(st.integers(0, 10 ** 6), st.sampled_from([INTERVAL, DISK]))
def test_random_bump_nonzero(seed, domain):
    phi = random_bump(seed, 0.2, domain=domain)
    grid = Grid.shell(domain, 0, *phi.support, n_r=128, n_theta=16)
    form = assemble_h(CoefficientModel(domain, 0.3), grid)
    assert form.weighted_mass(phi) > 0


def test_random_bump_norms_distinct():
    grid = Grid.shell(INTERVAL, 0, 0.05, 0.15)
    form = assemble_h(CoefficientModel(INTERVAL, 0.3), grid)
    norms = [form.weighted_mass(random_bump(s, 0.2)) for s in range(1, 201)]
    assert len(set(norms)) == 200
