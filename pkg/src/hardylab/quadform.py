"""Quadrature of the form h0[phi, phi] = int grad(phi) . D grad(phi) rho and Hardy checks.

Grids are composite 4-point Gauss-Legendre rules on line or polar meshes that
are geometrically graded toward the boundary.  The same meshes carry a
piecewise-linear (line) or bilinear (polar) nodal basis used for the dense
eigenvalue test of the discrete inequality.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sps

from . import geometry
from .barriers import BarrierSpec, barrier_arrays
from .coefficients import CoefficientModel, diffusion_arrays, potential_arrays, rho_arrays
from .errors import GridTooLarge, SingularQuadraturePoint, SupportViolation, ValidationError
from .geometry import Domain

DELTA_MIN = 1e-6
MAX_LINE_NODES = 2000
MAX_POLAR = (60, 64)
BLOWUP = 1e300

_GL_X, _GL_W = np.polynomial.legendre.leggauss(4)


def _gl_cells(nodes: np.ndarray):
    """Composite GL4 points, weights, owning cell and local coordinate in [0, 1]."""
    lo, hi = nodes[:-1], nodes[1:]
    h = hi - lo
    s = 0.5 * (_GL_X + 1.0)
    pts = lo[:, None] + h[:, None] * s[None, :]
    wts = 0.5 * h[:, None] * _GL_W[None, :]
    cell = np.repeat(np.arange(len(h)), 4)
    return pts.ravel(), wts.ravel(), cell, np.tile(s, len(h))


def graded_nodes(lo: float, hi: float, n: int, delta_min: float = DELTA_MIN,
                 grade_lo: bool = True, grade_hi: bool = True) -> np.ndarray:
    """``n`` nodes on ``[lo, hi]``, geometric toward the graded ends."""
    if n < 3:
        raise ValidationError("grid", "need at least 3 nodes")
    L = hi - lo
    if grade_lo and grade_hi:
        k = (n - 1) // 2
        half = np.concatenate([[0.0], np.geomspace(delta_min, 0.5 * L, k)])
        left = lo + half
        right = hi - half[::-1]
        nodes = np.concatenate([left, right[1:]])
        if len(nodes) < n:
            mid = 0.5 * (nodes[k - 1] + nodes[k])
            nodes = np.sort(np.append(nodes, mid))
        return nodes
    ramp = np.concatenate([[0.0], np.geomspace(delta_min, L, n - 1)])
    return lo + ramp if grade_lo else hi - ramp[::-1]


@dataclass(eq=False)
class Grid:
    """Quadrature points/weights plus nodal basis matrices.

    ``kind`` is ``line`` or ``polar``.  For polar grids ``r_nodes`` are radii and
    ``theta_nodes`` the periodic angles; node ``(i, j)`` has index ``i*n_theta + j``.
    """

    kind: str
    domain: Domain
    r_nodes: np.ndarray
    theta_nodes: np.ndarray | None
    points: np.ndarray
    weights: np.ndarray
    basis: sps.csr_matrix
    dbasis: tuple

    @property
    def n_nodes(self) -> int:
        return self.basis.shape[1]

    @property
    def node_points(self) -> np.ndarray:
        if self.kind == "line":
            return self.r_nodes.reshape(-1, 1)
        rr, tt = np.meshgrid(self.r_nodes, self.theta_nodes, indexing="ij")
        return np.stack([rr * np.cos(tt), rr * np.sin(tt)], axis=-1).reshape(-1, 2)

    def layer_mask(self, nu: float) -> np.ndarray:
        """Quadrature points with ``delta < nu``."""
        delta, _, _, _ = geometry.distance_arrays(self.domain, self.points, check_ties=False)
        return delta < nu

    # constructors ------------------------------------------------------
    @classmethod
    def line(cls, domain: Domain, n_nodes: int = 2000, delta_min: float = DELTA_MIN,
             nodes: np.ndarray | None = None) -> "Grid":
        if domain.dim != 1:
            raise ValidationError("grid", "line grids need a 1-D domain")
        if nodes is None:
            nodes = graded_nodes(domain.params[0], domain.params[1], n_nodes, delta_min)
        nodes = np.asarray(nodes, dtype=float)
        return cls._line_from_nodes(domain, nodes)

    @classmethod
    def _line_from_nodes(cls, domain, nodes):
        x, w, cell, s = _gl_cells(nodes)
        h = np.diff(nodes)[cell]
        nq, nn = len(x), len(nodes)
        rows = np.concatenate([np.arange(nq)] * 2)
        cols = np.concatenate([cell, cell + 1])
        basis = sps.csr_matrix((np.concatenate([1 - s, s]), (rows, cols)), shape=(nq, nn))
        dbasis = sps.csr_matrix((np.concatenate([-1 / h, 1 / h]), (rows, cols)), shape=(nq, nn))
        return cls("line", domain, nodes, None, x.reshape(-1, 1), w, basis, (dbasis,))

    @classmethod
    def polar(cls, domain: Domain, n_r: int = 60, n_theta: int = 64, delta_min: float = DELTA_MIN,
              r_nodes: np.ndarray | None = None) -> "Grid":
        if domain.dim != 2:
            raise ValidationError("grid", "polar grids need a 2-D domain")
        if r_nodes is None:
            lo, hi = domain.radial_range
            graded_lo = domain.kind != "disk"
            r_nodes = graded_nodes(lo, hi, n_r, delta_min, grade_lo=graded_lo, grade_hi=True)
        return cls._polar_from_nodes(domain, np.asarray(r_nodes, float), n_theta)

    @classmethod
    def _polar_from_nodes(cls, domain, r_nodes, n_theta):
        th_nodes = 2 * np.pi * np.arange(n_theta) / n_theta
        th_ext = 2 * np.pi * np.arange(n_theta + 1) / n_theta
        r, wr, cr, sr = _gl_cells(r_nodes)
        t, wt, ct, st = _gl_cells(th_ext)
        hr = np.diff(r_nodes)[cr]
        ht = np.diff(th_ext)[ct]
        nr_q, nt_q = len(r), len(t)
        R = np.repeat(r, nt_q)
        T = np.tile(t, nr_q)
        W = np.repeat(wr, nt_q) * np.tile(wt, nr_q) * R
        pts = np.stack([R * np.cos(T), R * np.sin(T)], axis=-1)
        ci = np.repeat(cr, nt_q)
        cj = np.tile(ct, nr_q)
        a = np.repeat(sr, nt_q)
        b = np.tile(st, nr_q)
        dr = np.repeat(hr, nt_q)
        dt = np.tile(ht, nr_q)
        nq = len(R)
        rows, cols, val, d_r, d_t = [], [], [], [], []
        for di, fa, ga in ((0, 1 - a, -1 / dr), (1, a, 1 / dr)):
            for dj, fb, gb in ((0, 1 - b, -1 / dt), (1, b, 1 / dt)):
                rows.append(np.arange(nq))
                cols.append((ci + di) * n_theta + (cj + dj) % n_theta)
                val.append(fa * fb)
                d_r.append(ga * fb)
                d_t.append(fa * gb)
        rows = np.concatenate(rows)
        cols = np.concatenate(cols)
        shape = (nq, len(r_nodes) * n_theta)
        basis = sps.csr_matrix((np.concatenate(val), (rows, cols)), shape=shape)
        Br = sps.csr_matrix((np.concatenate(d_r), (rows, cols)), shape=shape)
        Bt = sps.csr_matrix((np.concatenate(d_t), (rows, cols)), shape=shape)
        # grad = d_r e_r + (1/r) d_theta e_theta
        c, s_ = np.cos(T), np.sin(T)
        inv_r = 1.0 / R
        Gx = sps.diags(c) @ Br - sps.diags(s_ * inv_r) @ Bt
        Gy = sps.diags(s_) @ Br + sps.diags(c * inv_r) @ Bt
        return cls("polar", domain, r_nodes, th_nodes, pts, W, basis, (Gx.tocsr(), Gy.tocsr()))

    @classmethod
    def for_domain(cls, domain: Domain, **kw) -> "Grid":
        return cls.line(domain, **kw) if domain.dim == 1 else cls.polar(domain, **kw)

    @classmethod
    def shell(cls, domain: Domain, component: int, lo: float, hi: float,
              n_r: int = 256, n_theta: int = 16) -> "Grid":
        """Uniform grid on the shell ``lo <= delta <= hi`` around one component."""
        comp = domain.components[component]
        deltas = np.linspace(lo, hi, n_r + 1)
        if domain.dim == 1:
            nodes = np.sort(comp.center[0] + comp.side * deltas)
            return cls._line_from_nodes(domain, nodes)
        radii = deltas if comp.is_point else comp.radius + comp.side * deltas
        return cls._polar_from_nodes(domain, np.sort(radii), n_theta)

    # nodal interpolation -------------------------------------------------
    def interpolate(self, vec: np.ndarray):
        vec = np.asarray(vec, dtype=float)
        if vec.shape != (self.n_nodes,):
            raise ValidationError("phi", f"nodal vector must have {self.n_nodes} entries")
        val = self.basis @ vec
        grad = np.stack([G @ vec for G in self.dbasis], axis=-1)
        return val, grad


# ----------------------------------------------------------------------
# test functions
# ----------------------------------------------------------------------
def bump(t):
    """``exp(-1/(1-t^2))`` on ``|t| < 1``, zero elsewhere, and its derivative."""
    t = np.asarray(t, dtype=float)
    inside = np.abs(t) < 1.0
    val = np.zeros_like(t)
    der = np.zeros_like(t)
    ti = t[inside]
    one = 1.0 - ti * ti
    v = np.exp(-1.0 / one)
    val[inside] = v
    der[inside] = v * (-2.0 * ti / one ** 2)
    return val, der


@dataclass(frozen=True)
class Bump:
    center: float
    half_width: float
    amplitude: float
    eps: float = 0.0
    k: int = 0
    phase: float = 0.0


@dataclass(frozen=True)
class TestFunction:
    """Sum of bumps in ``delta`` with optional angular modulation ``1 + eps cos(k theta + phase)``."""

    __test__ = False  # keep pytest from collecting this class

    domain: Domain
    component: int
    bumps: tuple[Bump, ...]
    support: tuple[float, float]

    def __post_init__(self):
        if not self.bumps:
            raise ValidationError("phi", "test function needs at least one bump")
        lo, hi = self.support
        for b in self.bumps:
            if b.center - b.half_width < lo - 1e-15 or b.center + b.half_width > hi + 1e-15:
                raise SupportViolation("bump leaves the declared support shell")

    def geometry(self, pts) -> tuple:
        """Distance, angle and their gradients; reusable across test functions."""
        pts = geometry.as_points(pts, self.domain.dim)
        delta, gd = geometry.component_distance(self.domain, self.component, pts)
        if self.domain.dim == 1:
            return delta, gd, None, None
        theta = np.arctan2(pts[:, 1], pts[:, 0])
        r2 = np.sum(pts ** 2, axis=1)
        with np.errstate(all="ignore"):
            gtheta = np.stack([-pts[:, 1], pts[:, 0]], axis=-1) / r2[:, None]
        return delta, gd, theta, gtheta

    def evaluate(self, pts, geo: tuple | None = None):
        delta, gd, theta, gtheta = self.geometry(pts) if geo is None else geo
        val = np.zeros(len(delta))
        grad = np.zeros_like(gd)
        for b in self.bumps:
            t = (delta - b.center) / b.half_width
            live = np.abs(t) < 1.0
            if not np.any(live):
                continue
            v, dv = bump(t[live])
            if theta is not None and b.eps:
                arg = b.k * theta[live] + b.phase
                ang = 1.0 + b.eps * np.cos(arg)
                dang = -b.eps * b.k * np.sin(arg)
                val[live] += b.amplitude * v * ang
                grad[live] += b.amplitude * ((dv * ang / b.half_width)[:, None] * gd[live]
                                             + (v * dang)[:, None] * gtheta[live])
            else:
                val[live] += b.amplitude * v
                grad[live] += (b.amplitude * dv / b.half_width)[:, None] * gd[live]
        return val, grad


def random_bump(seed: int, nu: float, n_terms: int = 3, domain: Domain | None = None,
                component: int = 0) -> TestFunction:
    """Reproducible random superposition of bumps supported in ``[nu/4, 3nu/4]``."""
    if domain is None:
        domain = Domain.interval(0.0, 1.0)
    if not 0 < nu <= domain.nu_omega:
        raise ValidationError("nu", f"need 0 < nu <= {domain.nu_omega}")
    rng = np.random.default_rng(seed)
    lo, hi = 0.25 * nu, 0.75 * nu
    bumps = []
    for _ in range(max(1, n_terms)):
        w = rng.uniform(nu / 16, nu / 4)
        c = rng.uniform(lo + w, hi - w)
        amp = rng.uniform(0.5, 1.5) * rng.choice([-1.0, 1.0])
        if domain.dim == 2:
            bumps.append(Bump(c, w, amp, rng.uniform(0.0, 0.9), int(rng.integers(0, 5)),
                              rng.uniform(0, 2 * np.pi)))
        else:
            bumps.append(Bump(c, w, amp))
    return TestFunction(domain, component, tuple(bumps), (lo, hi))


# ----------------------------------------------------------------------
# forms
# ----------------------------------------------------------------------
def _finite_or_raise(name, arr, pts):
    bad = ~np.isfinite(arr) | (np.abs(arr) > BLOWUP)
    if arr.ndim > 1:
        bad = bad.reshape(len(arr), -1).any(axis=1)
    if np.any(bad):
        p = pts[np.flatnonzero(bad)[0]].tolist()
        raise SingularQuadraturePoint(f"{name} blows up at quadrature point {p}")


class QuadForm:
    """``h[phi, psi] = int grad(phi) . D grad(psi) rho (+ V phi psi rho)`` on a grid."""

    def __init__(self, model: CoefficientModel, grid: Grid, include_V: bool = False):
        if grid.domain != model.domain:
            raise ValidationError("grid", "grid and model live on different domains")
        self.model, self.grid, self.include_V = model, grid, include_V
        ctx = geometry.point_context(model.domain, grid.points, check_ties=False)
        self.ctx = ctx
        self._geo = {}
        rho, _ = rho_arrays(model, ctx)
        D = diffusion_arrays(model, ctx)
        _finite_or_raise("rho", rho, grid.points)
        _finite_or_raise("D", D, grid.points)
        self.w_rho = grid.weights * rho
        self.wD = self.w_rho[:, None, None] * D
        self.wV = None
        if include_V:
            V = potential_arrays(model, ctx)
            _finite_or_raise("V", V, grid.points)
            self.wV = self.w_rho * V

    def _eval(self, phi):
        if isinstance(phi, TestFunction):
            key = (phi.domain, phi.component)
            if key not in self._geo:
                self._geo[key] = phi.geometry(self.grid.points)
            return phi.evaluate(self.grid.points, self._geo[key])
        if callable(phi):
            return phi(self.grid.points)
        return self.grid.interpolate(phi)

    def bilinear(self, phi, psi) -> float:
        v1, g1 = self._eval(phi)
        v2, g2 = (v1, g1) if psi is phi else self._eval(psi)
        out = np.einsum("ni,nij,nj->", g1, self.wD, g2)
        if self.wV is not None:
            out += np.sum(self.wV * v1 * v2)
        return float(out)

    def value(self, phi) -> float:
        return self.bilinear(phi, phi)

    def weighted_mass(self, phi, weight: np.ndarray | None = None) -> float:
        """``int weight |phi|^2 rho`` (weight 1 by default)."""
        v, _ = self._eval(phi)
        w = self.w_rho if weight is None else self.w_rho * weight
        return float(np.sum(w * v * v))

    def stiffness(self) -> sps.csr_matrix:
        G = self.grid.dbasis
        A = None
        for i, Gi in enumerate(G):
            for j, Gj in enumerate(G):
                term = Gi.T @ sps.diags(self.wD[:, i, j]) @ Gj
                A = term if A is None else A + term
        if self.wV is not None:
            P = self.grid.basis
            A = A + P.T @ sps.diags(self.wV) @ P
        return A.tocsr()

    def mass(self, weight: np.ndarray | None = None) -> sps.csr_matrix:
        P = self.grid.basis
        w = self.w_rho if weight is None else self.w_rho * weight
        return (P.T @ sps.diags(w) @ P).tocsr()


def assemble_h(model: CoefficientModel, grid: Grid, include_V: bool = False) -> QuadForm:
    return QuadForm(model, grid, include_V)


def barrier_weight(spec: BarrierSpec, grid: Grid, nu: float) -> np.ndarray:
    """Barrier at the quadrature points of ``Gamma_nu`` (zero elsewhere)."""
    ctx = geometry.point_context(spec.model.domain, grid.points, check_ties=False)
    inside = ctx.values["delta"] < nu
    out = np.zeros(len(grid.weights))
    if np.any(inside):
        from .vectorfield import _subset

        sub = _subset(ctx, inside)
        out[inside] = barrier_arrays(spec, sub).barrier
    _finite_or_raise("barrier", out, grid.points)
    return out


# ----------------------------------------------------------------------
# Hardy gap
# ----------------------------------------------------------------------
@dataclass(frozen=True)
class GapResult:
    gap: float
    h0: float
    barrier_integral: float

    @property
    def relative(self) -> float:
        return self.gap / self.h0 if self.h0 > 0 else 0.0


class HardyGap:
    """Reusable evaluator of ``h0[phi,phi] - int H |phi|^2 rho`` on one support shell."""

    def __init__(self, model: CoefficientModel, spec: BarrierSpec, nu: float, support: tuple[float, float],
                 component: int = 0, grid: Grid | None = None, n_r: int = 256, n_theta: int = 16):
        cap = min(model.nu0, 1.0)
        if not 0 < nu <= cap:
            raise ValidationError("nu", f"need 0 < nu <= min(nu0, 1) = {cap}")
        lo, hi = support
        if not (0 < lo < hi <= nu):
            raise SupportViolation(f"support [{lo}, {hi}] is not inside Gamma_{nu}")
        self.nu, self.support, self.component = nu, (lo, hi), component
        if grid is None:
            grid = Grid.shell(model.domain, component, lo, hi, n_r, n_theta)
        self.grid = grid
        self.form = QuadForm(model, grid)
        self.weight = barrier_weight(spec, grid, nu)

    def gap(self, phi: TestFunction) -> GapResult:
        lo, hi = phi.support
        if phi.component != self.component or lo < self.support[0] - 1e-15 or hi > self.support[1] + 1e-15:
            raise SupportViolation("test function support is not covered by this evaluator")
        h0 = self.form.value(phi)
        bar = self.form.weighted_mass(phi, self.weight)
        return GapResult(h0 - bar, h0, bar)


def hardy_gap(model: CoefficientModel, spec: BarrierSpec, phi: TestFunction, nu: float,
              grid: Grid | None = None) -> GapResult:
    """``h0[phi,phi] - int_{Gamma_nu} H |phi|^2 rho`` by quadrature."""
    lo, hi = phi.support
    if hi > nu or lo <= 0:
        raise SupportViolation(f"support [{lo}, {hi}] exits Gamma_{nu}")
    return HardyGap(model, spec, nu, phi.support, phi.component, grid).gap(phi)


# ----------------------------------------------------------------------
# eigenvalue test
# ----------------------------------------------------------------------
def layer_dofs(grid: Grid, nu: float) -> np.ndarray:
    """Nodes whose basis function is supported in ``0 < delta <= nu``."""
    dom = grid.domain
    if grid.kind == "line":
        nodes = grid.r_nodes
        d = np.minimum(nodes - dom.params[0], dom.params[1] - nodes)
        keep = np.zeros(len(nodes), dtype=bool)
        keep[1:-1] = (d[1:-1] > 0) & (d[:-2] <= nu) & (d[2:] <= nu)
        return np.flatnonzero(keep)
    r = grid.r_nodes
    comps = dom.components
    dr = np.min(np.stack([np.abs(r - c.radius) if not c.is_point else r for c in comps]), axis=0)
    ok = np.zeros(len(r), dtype=bool)
    ok[1:-1] = (dr[1:-1] > 0) & (dr[:-2] <= nu) & (dr[2:] <= nu) & (r[1:-1] > 0)
    nt = len(grid.theta_nodes)
    return np.flatnonzero(np.repeat(ok, nt))


def min_gap_eigen(model: CoefficientModel, spec: BarrierSpec, grid: Grid, nu: float) -> float:
    """Smallest eigenvalue of ``A - B`` on nodal functions supported in ``Gamma_nu``."""
    if grid.kind == "line" and len(grid.r_nodes) > MAX_LINE_NODES:
        raise GridTooLarge(f"line grids are capped at {MAX_LINE_NODES} nodes")
    if grid.kind == "polar" and (len(grid.r_nodes) > MAX_POLAR[0] or len(grid.theta_nodes) > MAX_POLAR[1]):
        raise GridTooLarge(f"polar grids are capped at {MAX_POLAR[0]}x{MAX_POLAR[1]}")
    cap = min(model.nu0, 1.0)
    if not 0 < nu <= cap:
        raise ValidationError("nu", f"need 0 < nu <= min(nu0, 1) = {cap}")
    form = QuadForm(model, grid)
    K = form.stiffness() - form.mass(barrier_weight(spec, grid, nu))
    dofs = layer_dofs(grid, nu)
    if len(dofs) == 0:
        raise ValidationError("nu", "no nodal function fits inside the layer")
    Kr = K[dofs][:, dofs]
    if grid.kind == "line":
        diag = Kr.diagonal()
        off = Kr.diagonal(1)
        w = sla.eigh_tridiagonal(diag, off, eigvals_only=True, select="i", select_range=(0, 0))
        return float(w[0])
    dense = Kr.toarray()
    dense = 0.5 * (dense + dense.T)
    w = sla.eigh(dense, eigvals_only=True, subset_by_index=[0, 0])
    return float(w[0])

