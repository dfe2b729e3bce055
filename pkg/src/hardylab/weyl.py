"""Limit-point / limit-circle classification of the singular endpoint ``t = 0``.

The 1-D operator is ``-(1/w)(p psi')' + V psi`` on ``(0, t0]``.  The endpoint
is limit circle when every solution of ``(H - E) psi = 0`` is square
integrable against ``w`` near 0, and limit point otherwise.  For a single
power-law endpoint the alternative does not depend on ``E``, so the numeric
path integrates at a real ``E`` below the spectrum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.integrate import solve_ivp
from scipy.interpolate import CubicSpline

from . import geometry
from .coefficients import CoefficientModel, frame_blocks, potential_arrays, rho_arrays
from .errors import NotReducible, StiffnessFailure

LIMIT_POINT = "LimitPoint"
LIMIT_CIRCLE = "LimitCircle"
INCONCLUSIVE = "Inconclusive"
EXACT_TOL = 1e-12


@dataclass(frozen=True)
class EndpointClass:
    cls: str
    evidence: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"class": self.cls, "evidence": self.evidence}


# ----------------------------------------------------------------------
# exact oracles
# ----------------------------------------------------------------------
def euler_classify(beta: float, gamma: float) -> EndpointClass:
    """``p = t^(beta+gamma)``, ``w = t^gamma``: solutions ``1`` and ``t^(1-beta-gamma)``."""
    k = beta + gamma
    # |psi_1|^2 w = t^gamma;  |psi_2|^2 w = t^(2 - 2 beta - gamma)  (ln^2 t when k = 1)
    e1 = gamma
    e2 = 2.0 - 2.0 * beta - gamma
    lp = gamma >= 3.0 - 2.0 * beta - EXACT_TOL or gamma <= -1.0 + EXACT_TOL
    ev = {"beta": beta, "gamma": gamma, "exponent_psi1": e1,
          "exponent_psi2": e2, "log_solution": abs(k - 1.0) <= EXACT_TOL,
          "rule": "LimitPoint iff gamma >= 3 - 2 beta or gamma <= -1"}
    return EndpointClass(LIMIT_POINT if lp else LIMIT_CIRCLE, ev)


def log_euler_classify(alpha: float) -> EndpointClass:
    """``p = t^(3/2) ln(1/t)^alpha``, ``w = 1``: ``psi_2 ~ t^(-1/2) ln(1/t)^(-alpha)``."""
    lp = alpha <= 0.5 + EXACT_TOL
    ev = {"alpha": alpha, "psi2_square": "t^-1 ln(1/t)^(-2 alpha)",
          "rule": "LimitPoint iff 2 alpha <= 1"}
    return EndpointClass(LIMIT_POINT if lp else LIMIT_CIRCLE, ev)


# ----------------------------------------------------------------------
# numeric path
# ----------------------------------------------------------------------
@dataclass(frozen=True)
class SturmLiouville1D:
    """``p``, ``w`` and ``V`` on ``(0, t0]``.

    The integrator works in ``s = -ln t`` and only needs ``t p'/p``,
    ``ln(t^2 w / p)`` and ``ln w``; supplying these in closed form keeps power
    laws representable far below the float range of ``p`` itself.
    """

    p: Callable[[np.ndarray], np.ndarray]
    w: Callable[[np.ndarray], np.ndarray]
    V: Callable[[np.ndarray], np.ndarray] | None = None
    dlogp: Callable[[float], float] | None = None
    t0: float = 0.5
    label: str = ""
    log_w_s: Callable[[float], float] | None = None
    log_c_s: Callable[[float], float] | None = None
    V_s: Callable[[float], float] | None = None

    @classmethod
    def euler(cls, beta: float, gamma: float, t0: float = 0.5) -> "SturmLiouville1D":
        k = beta + gamma
        return cls(lambda t: t ** k, lambda t: t ** gamma, None, lambda s: k, t0,
                   f"euler(beta={beta!r}, gamma={gamma!r})",
                   log_w_s=lambda s: -gamma * s, log_c_s=lambda s: -(2.0 - beta) * s)

    @classmethod
    def log_euler(cls, alpha: float, t0: float = 0.3) -> "SturmLiouville1D":
        return cls(lambda t: t ** 1.5 * np.log(1 / t) ** alpha, lambda t: np.ones_like(t), None,
                   lambda s: 1.5 - alpha / s, t0, f"log_euler(alpha={alpha!r})",
                   log_w_s=lambda s: 0.0, log_c_s=lambda s: -0.5 * s - alpha * math.log(s))

    # quantities in s = -ln t ---------------------------------------------
    def kp(self, s: float) -> float:
        if self.dlogp is not None:
            return float(self.dlogp(s))
        h = 1e-5
        t = np.array([math.exp(-s - h), math.exp(-s + h)])
        lp = np.log(self.p(t))
        return float((lp[1] - lp[0]) / (2 * h))

    def log_w(self, s: float) -> float:
        if self.log_w_s is not None:
            return float(self.log_w_s(s))
        return float(math.log(self.w(np.array([math.exp(-s)]))[0]))

    def log_c(self, s: float) -> float:
        """``ln(t^2 w / p)``."""
        if self.log_c_s is not None:
            return float(self.log_c_s(s))
        t = np.array([math.exp(-s)])
        return float(math.log(t[0] ** 2 * self.w(t)[0] / self.p(t)[0]))

    def potential(self, s: float) -> float:
        if self.V_s is not None:
            return float(self.V_s(s))
        if self.V is None:
            return 0.0
        return float(self.V(np.array([math.exp(-s)]))[0])


def _rhs(problem: SturmLiouville1D, E: float, offset: list):
    # s = -ln t, y = psi, z = t psi'; with kp = t p'/p and c = t^2 w (V - E)/p,
    # dy/ds = -z and dz/ds = (kp - 1) z - c y, which stays non-stiff for power laws.
    # The shell integral of |psi|^2 w dt is accumulated relative to exp(offset[0]).
    def f(s, Y):
        kp = problem.kp(s)
        c = math.exp(problem.log_c(s)) * (problem.potential(s) - E)
        ww = math.exp(problem.log_w(s) - s - offset[0])
        out = np.empty(6)
        for j in (0, 3):
            y, z = Y[j], Y[j + 1]
            out[j] = -z
            out[j + 1] = (kp - 1.0) * z - c * y
            out[j + 2] = y * y * ww
        return out

    return f


def _slope(vals) -> float:
    k = np.arange(len(vals))
    return float(np.polyfit(k, vals, 1)[0])


def numeric_classify(problem: SturmLiouville1D, E: float = -1.0, t_min: float = 1e-8,
                     n_fit: int = 20, band: float = 0.05, rtol: float = 1e-8,
                     atol: float = 1e-11, max_shells: int = 400,
                     settle: float = 0.01) -> EndpointClass:
    """Integrate two solutions toward ``t = 0`` and fit the shell-integral ratio.

    Two independent solutions are followed through dyadic shells
    ``[2^-(k+1) t0, 2^-k t0]``, renormalized after every shell.  Past
    ``t_min`` integration continues, up to ``max_shells``, until the fitted log
    ratio over the last ``n_fit`` shells moves by less than ``settle`` from
    the previous window; near-degenerate exponents need this.
    """
    step = math.log(2.0)
    s = -math.log(problem.t0)
    n_min = max(n_fit + 1, int(math.ceil(math.log2(problem.t0 / t_min))))
    Y = np.array([1.0, 0.0, 0.0, 0.0, 1.0, 0.0])
    scales = [0.0, 0.0]
    logs: list[list[float]] = [[], []]
    offset = [0.0]
    f = _rhs(problem, E, offset)
    settled = False
    n = 0
    while n < max_shells:
        offset[0] = problem.log_w(s) - s
        sol = solve_ivp(f, (s, s + step), Y, method="RK45", rtol=rtol, atol=atol)
        if not sol.success:
            raise StiffnessFailure(f"integration failed near ln t = {-s:.3f}: {sol.message}")
        if len(sol.t) > 2 and np.min(np.diff(sol.t)) < 1e-14:
            raise StiffnessFailure(f"step collapse near ln t = {-s:.3f}")
        Yn = sol.y[:, -1].copy()
        for j, base in enumerate((0, 3)):
            I = Yn[base + 2]
            logs[j].append(math.log(max(I, 1e-300)) + offset[0] + 2.0 * scales[j])
            nrm = math.hypot(Yn[base], Yn[base + 1])
            if not math.isfinite(nrm) or nrm == 0:
                raise StiffnessFailure("solution lost all magnitude")
            scales[j] += math.log(nrm)
            Yn[base:base + 2] /= nrm
            Yn[base + 2] = 0.0
        Y = Yn
        s += step
        n += 1
        if n >= max(n_min, 2 * n_fit):
            drift = max(abs(_slope(L[-n_fit:]) - _slope(L[-2 * n_fit:-n_fit])) for L in logs)
            if drift < settle:
                settled = True
                break
    ratios = [math.exp(_slope(L[-n_fit:])) for L in logs]
    if all(r < 1.0 - band for r in ratios):
        cls = LIMIT_CIRCLE
    elif any(r > 1.0 + band for r in ratios):
        cls = LIMIT_POINT
    else:
        cls = INCONCLUSIVE
    ev = {"E": E, "shells": n, "t_final": math.exp(-s) if s < 700 else 0.0,
          "log_t_final": -s, "settled": settled, "fit_shells": n_fit,
          "ratios": ratios, "band": band, "problem": problem.label}
    return EndpointClass(cls, ev)


# ----------------------------------------------------------------------
# cross check against a verdict
# ----------------------------------------------------------------------
@dataclass(frozen=True)
class SoundnessResult:
    status: str
    warning: str | None = None
    note: str | None = None
    context: dict | None = None

    @property
    def passed(self) -> bool:
        return self.status == "PASS"

    def to_dict(self) -> dict:
        return {"status": self.status, "warning": self.warning, "note": self.note,
                "context": self.context}


def cross_check(verdict, oracle: EndpointClass) -> SoundnessResult:
    """Certified must imply limit point; anything else is vacuous or informative."""
    certified = verdict.status == "Certified"
    if certified and oracle.cls == LIMIT_CIRCLE:
        ctx = {"verdict": verdict.to_dict(), "oracle": oracle.to_dict()}
        return SoundnessResult("FAIL", None, "criterion certified a limit-circle endpoint", ctx)
    if certified and oracle.cls == INCONCLUSIVE:
        return SoundnessResult("PASS", "oracle inconclusive at a certified model")
    if not certified and verdict.status == "NotCertified" and oracle.cls == LIMIT_POINT:
        return SoundnessResult("PASS", None, "criterion gap: oracle stronger")
    return SoundnessResult("PASS")


def reduce_to_1d(model: CoefficientModel, component: int = 0, t0: float | None = None) -> SturmLiouville1D:
    """Radial reduction near one boundary component.

    Allowed when the coefficients depend on ``delta``/``radius`` only and the
    normal and tangential blocks decouple (``d12 = 0``).  The Jacobian
    ``radius^(d-1)`` is absorbed into ``p`` and ``w``.
    """
    dom = model.domain
    radial = {"delta", "radius"} if dom.dim == 2 else {"delta", "x"}
    for name, f in model.fields().items():
        extra = f.variables - radial
        if extra:
            raise NotReducible(f"{name} depends on {sorted(extra)}")
    if dom.dim == 2 and not (model.d12.is_constant and model.d12.constant == 0):
        raise NotReducible("normal and tangential blocks are coupled (d12 != 0)")
    comp = dom.components[component]
    t0 = min(0.5, 0.5 * model.nu0) if t0 is None else t0

    def ctx_at(t):
        t = np.atleast_1d(np.asarray(t, dtype=float))
        ctx = geometry.context_on_component(dom, component, t, np.zeros_like(t))
        ctx.values["delta"] = t  # exact; 1 - |x| loses digits near a circle
        return ctx

    def jac(ctx):
        if dom.dim == 1:
            return np.ones(ctx.n)
        return ctx.values["radius"]

    def p(t):
        ctx = ctx_at(t)
        rho, _ = rho_arrays(model, ctx)
        d, _, _ = frame_blocks(model, ctx)
        return rho * d * jac(ctx)

    def w(t):
        ctx = ctx_at(t)
        rho, _ = rho_arrays(model, ctx)
        return rho * jac(ctx)

    def V(t):
        return potential_arrays(model, ctx_at(t))

    # tabulate once in s = -ln t; the integrator then never touches the model
    s_grid = np.linspace(-math.log(t0), -math.log(TABLE_T_MIN), TABLE_SIZE)
    t_grid = np.exp(-s_grid)
    with np.errstate(all="ignore"):
        lnp = np.log(p(t_grid))
        lnw = np.log(w(t_grid))
    Vt = np.asarray(V(t_grid), dtype=float)
    if not (np.all(np.isfinite(lnp)) and np.all(np.isfinite(lnw)) and np.all(np.isfinite(Vt))):
        raise NotReducible(f"coefficients are not positive and finite down to t = {TABLE_T_MIN:g}")
    lnp_s = _PowerTail(s_grid, lnp)
    lnw_s = _PowerTail(s_grid, lnw)
    V_s = _potential_tail(s_grid, Vt)
    return SturmLiouville1D(
        p, w, V, lambda s: -lnp_s.deriv(s), t0, f"reduced(component={comp.id})",
        log_w_s=lnw_s, log_c_s=lambda s: -2.0 * s + lnw_s(s) - lnp_s(s), V_s=V_s)


TABLE_T_MIN = 1e-12
TABLE_SIZE = 2048


class _PowerTail:
    """Cubic spline in ``s`` continued linearly (a power law in ``t``) past the table."""

    def __init__(self, s, y):
        self.spline = CubicSpline(s, y)
        self.s_end = float(s[-1])
        self.y_end = float(y[-1])
        self.slope = float(self.spline(self.s_end, 1))

    def __call__(self, s: float) -> float:
        if s <= self.s_end:
            return float(self.spline(s))
        return self.y_end + self.slope * (s - self.s_end)

    def deriv(self, s: float) -> float:
        return float(self.spline(s, 1)) if s <= self.s_end else self.slope


def _potential_tail(s, V):
    if not np.any(V):
        return lambda _s: 0.0
    if np.all(V > 0) or np.all(V < 0):
        sign = float(np.sign(V[0]))
        tail = _PowerTail(s, np.log(np.abs(V)))
        return lambda x: sign * math.exp(tail(x))
    spline = CubicSpline(s, V)
    end = float(V[-1])
    return lambda x: float(spline(x)) if x <= s[-1] else end
