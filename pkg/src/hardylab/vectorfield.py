"""Normal vector-field ansatze and the pointwise Hardy certificate.

For a real vector field ``X`` and ``phi`` supported in the layer,

    h0[phi, phi] >= int (div X - X . (rho D)^{-1} X) |phi|^2,

so ``c = div X - X . (rho D)^{-1} X`` divided by ``rho`` is a pointwise
barrier.  The ansatze are normal fields

    X = 1/2 (1-q) a r delta^(beta+gamma-1) [m + f(delta)] grad(delta) Psi,

with ``m = beta + gamma - 1 + (d - k - 1)`` and ``f`` one of
``1/ln(1/t)`` (X0), ``f_{e,N+1}`` (XN) or ``1/L + 1/(L ln L)`` with an extra
``L^alpha`` factor (Xalpha, ``L = ln(1/delta)``).  Where ``Psi = 1`` one finds

    c/rho = (1-q) a delta^(beta-2) [m^2/4 + delta f'/2 - f^2/4 + R0],
    R0 = (delta/2) {(1 + u ln delta) grad(beta+gamma) + u grad ln((1-q) a r)} . grad(delta)
         + (u/2) (delta Lap(delta) - (d - k - 1)),      u = m + f.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import geometry
from .barriers import BarrierSpec, barrier_arrays, component_shift, f_chain
from .coefficients import (
    CoefficientModel,
    diffusion_arrays,
    dyadic_shells,
    merge_contexts,
    q_arrays,
    rho_arrays,
    shell_samples,
)
from .errors import IncompatibleModel, OutOfLayer, StepUnderflow, ValidationError
from .expr import PointContext

VARIANTS = ("X0", "XN", "Xalpha")
STEP_FLOOR = 1e-12
REL_STEP = 1e-4


@dataclass(frozen=True)
class CutoffPsi:
    """Cubic-smoothstep cutoff: 1 below ``nu0/2``, 0 above ``3 nu0/4``."""

    nu0: float

    def _s(self, delta):
        return np.clip((np.asarray(delta, float) - 0.5 * self.nu0) / (0.25 * self.nu0), 0.0, 1.0)

    def value(self, delta) -> np.ndarray:
        s = self._s(delta)
        return 1.0 - s * s * (3.0 - 2.0 * s)

    def derivative(self, delta) -> np.ndarray:
        """``dPsi/d delta``; bounded by ``6/nu0``."""
        s = self._s(delta)
        return -6.0 * s * (1.0 - s) / (0.25 * self.nu0)


@dataclass(frozen=True, eq=False)
class AnsatzField:
    variant: str
    model: CoefficientModel
    N: int = 1
    alpha: float = 0.0

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValidationError("variant", f"unknown ansatz {self.variant!r}")
        if self.variant == "XN" and self.N < 1:
            raise ValidationError("variant", "XN needs N >= 1")
        if self.variant == "Xalpha":
            if not math.isclose(self.alpha, self.model.log_alpha, rel_tol=0, abs_tol=1e-14):
                raise IncompatibleModel("Xalpha needs the model's log_alpha to match alpha")
        elif self.model.log_alpha != 0:
            raise IncompatibleModel(f"{self.variant} needs a model without the logarithmic factor")

    @property
    def layer_width(self) -> float:
        if self.variant == "Xalpha":
            return min(self.model.nu0, math.exp(-math.e))
        return self.model.nu0

    @property
    def cutoff(self) -> CutoffPsi:
        return CutoffPsi(self.layer_width)

    def f_and_tfp(self, delta: np.ndarray):
        """``f(delta)`` and ``delta f'(delta)``."""
        with np.errstate(all="ignore"):
            if self.variant == "X0":
                f = 1.0 / np.log(1.0 / delta)
                return f, f * f
            if self.variant == "XN":
                return f_chain(math.e, self.N + 1, delta)
            L = np.log(1.0 / delta)
            lL = np.log(L)
            f = 1.0 / L + 1.0 / (L * lL)
            tfp = 1.0 / L ** 2 + (lL + 1.0) / (L * lL) ** 2
            return f, tfp


def _amplitude(field: AnsatzField, ctx: PointContext):
    """Pieces of the normal field at a batch of points."""
    model = field.model
    delta = ctx.values["delta"]
    q = q_arrays(model, ctx)
    a = model.a.value(ctx)
    r = model.r.value(ctx)
    kp = model.beta.value(ctx) + model.gamma.value(ctx)
    sigma = component_shift(model, ctx)
    m = kp - 1.0 + sigma
    f, tfp = field.f_and_tfp(delta)
    u = m + f
    A = (1.0 - q) * a * r
    with np.errstate(all="ignore"):
        scal = 0.5 * A * delta ** (kp - 1.0) * u
        if field.variant == "Xalpha":
            scal = scal * np.log(1.0 / delta) ** field.alpha
    return dict(delta=delta, q=q, a=a, m=m, f=f, tfp=tfp, u=u, sigma=sigma, scal=scal)


def ansatz_arrays(field: AnsatzField, ctx: PointContext) -> np.ndarray:
    delta = ctx.values["delta"]
    X = np.zeros((ctx.n, ctx.dim))
    psi = field.cutoff.value(delta)
    live = psi > 0
    if np.any(live):
        sub = _subset(ctx, live)
        amp = _amplitude(field, sub)
        X[live] = (amp["scal"] * psi[live])[:, None] * sub.grads["delta"]
    return X


def ansatz_eval(field: AnsatzField, x) -> np.ndarray:
    """The vector field ``X(x)`` (zero outside ``3/4`` of the layer)."""
    ctx = field.model.context(x)
    if ctx.values["delta"][0] >= field.model.nu0:
        raise OutOfLayer("ansatz fields live in the boundary layer")
    return ansatz_arrays(field, ctx)[0]


def _subset(ctx: PointContext, mask: np.ndarray) -> PointContext:
    return PointContext(ctx.points[mask], {k: v[mask] for k, v in ctx.values.items()},
                        {k: v[mask] for k, v in ctx.grads.items()},
                        {k: v[mask] for k, v in ctx.extra.items()})


# ----------------------------------------------------------------------
# closed form
# ----------------------------------------------------------------------
def remainder_arrays(field: AnsatzField, ctx: PointContext) -> dict:
    """``R0`` and the bracket pieces of the closed-form certificate."""
    model = field.model
    amp = _amplitude(field, ctx)
    delta, u = amp["delta"], amp["u"]
    gd = ctx.grads["delta"]
    grad_k = model.beta.grad(ctx) + model.gamma.grad(ctx)
    grad_lnA = model.log_one_minus_q.grad(ctx) + model.log_a.grad(ctx) + model.log_r.grad(ctx)
    with np.errstate(all="ignore"):
        drift = ((1.0 + u * np.log(delta))[:, None] * grad_k + u[:, None] * grad_lnA)
        R0 = 0.5 * delta * np.sum(drift * gd, axis=1) \
            + 0.5 * u * (delta * ctx.extra["laplacian_delta"] - amp["sigma"])
        pref = (1.0 - amp["q"]) * amp["a"] * delta ** (model.beta.value(ctx) - 2.0)
    return dict(amp, R0=R0, pref=pref)


def closed_form_arrays(field: AnsatzField, ctx: PointContext) -> np.ndarray:
    if field.variant == "Xalpha":
        raise ValidationError("variant", "no closed form is provided for Xalpha")
    d = remainder_arrays(field, ctx)
    bracket = 0.25 * d["m"] ** 2 + 0.5 * d["tfp"] - 0.25 * d["f"] ** 2 + d["R0"]
    return d["pref"] * bracket


# ----------------------------------------------------------------------
# numeric certificate
# ----------------------------------------------------------------------
def numeric_certificate(field: AnsatzField, pts: np.ndarray, h: np.ndarray | None = None) -> np.ndarray:
    """``(div X - X.(rho D)^{-1} X)/rho`` by central differences on ``X``."""
    model = field.model
    dom = model.domain
    pts = geometry.as_points(pts, dom.dim)
    ctx = geometry.point_context(dom, pts, check_ties=False)
    delta = ctx.values["delta"]
    if np.any(delta < STEP_FLOOR):
        raise StepUnderflow(f"delta below {STEP_FLOOR}")
    if h is None:
        h = REL_STEP * delta
    h = np.broadcast_to(np.asarray(h, float), delta.shape)
    n, dim = pts.shape
    shifted = []
    for i in range(dim):
        e = np.zeros(dim)
        e[i] = 1.0
        shifted.append(pts + h[:, None] * e)
        shifted.append(pts - h[:, None] * e)
    big = np.concatenate(shifted)
    Xs = ansatz_arrays(field, geometry.point_context(dom, big, check_ties=False))
    div = np.zeros(n)
    for i in range(dim):
        plus = Xs[(2 * i) * n:(2 * i + 1) * n, i]
        minus = Xs[(2 * i + 1) * n:(2 * i + 2) * n, i]
        div += (plus - minus) / (2.0 * h)
    X = ansatz_arrays(field, ctx)
    rho, _ = rho_arrays(model, ctx)
    D = diffusion_arrays(model, ctx)
    sol = np.linalg.solve(D, X[:, :, None])[:, :, 0]
    quad = np.sum(X * sol, axis=1) / rho
    return (div - quad) / rho


@dataclass(frozen=True)
class Certificate:
    value: float
    closed_form: float | None
    delta: float


def vf_certificate(model: CoefficientModel, field: AnsatzField, x, h: float | None = None) -> Certificate:
    """Pointwise certificate ``c(x)/rho(x)`` with the closed form when available."""
    if field.model is not model:
        raise ValidationError("field", "ansatz was built for a different model")
    ctx = model.context(x)
    delta = float(ctx.values["delta"][0])
    if delta >= model.nu0:
        raise OutOfLayer("certificate is evaluated inside the layer")
    value = float(numeric_certificate(field, ctx.points, None if h is None else np.array([h]))[0])
    closed = None
    if field.variant != "Xalpha" and delta < 0.5 * field.layer_width:
        closed = float(closed_form_arrays(field, ctx)[0])
    return Certificate(value, closed, delta)


# ----------------------------------------------------------------------
# remainder audit
# ----------------------------------------------------------------------
@dataclass
class RemainderAudit:
    variant: str
    scaled_sup_R0: float
    nu1: float | None
    worst_point: list[float] | None
    worst_margin: float
    margin_profile: list[dict]

    @property
    def status(self) -> str:
        return "ok" if self.nu1 is not None else "NoValidLayer"

    def to_dict(self) -> dict:
        return {"variant": self.variant, "status": self.status,
                "scaled_sup_R0": self.scaled_sup_R0, "nu1": self.nu1,
                "worst_point": self.worst_point, "worst_margin": self.worst_margin,
                "margin_profile": self.margin_profile}


def margin_arrays(field: AnsatzField, ctx: PointContext) -> tuple[np.ndarray, np.ndarray]:
    """``R0`` and the sign-deciding margin ``c/rho - barrier`` in bracket units."""
    d = remainder_arrays(field, ctx)
    if field.variant == "X0":
        margin = 0.125 * d["f"] ** 2 + d["R0"]
    elif field.variant == "XN":
        _, M = _chain_M(field, d["delta"])
        margin = 0.25 * M[-1] ** 2 + d["R0"]
    else:
        raise ValidationError("variant", "remainder audit covers X0 and XN")
    return d["R0"], margin


def _chain_M(field, delta):
    from .barriers import chain_arrays
    return chain_arrays(math.e, field.N + 1, delta)


def remainder_audit(model: CoefficientModel, variant: str = "X0", N: int = 1,
                    n_per_shell: int = 256, rng_seed: int = 0, floor: float = 1e-8) -> RemainderAudit:
    """Scaled sup of ``|R0|`` and the widest dyadic ``nu1`` with a nonnegative margin."""
    field = AnsatzField(variant, model, N=N)
    rng = np.random.default_rng(rng_seed)
    shells = dyadic_shells(0.5 * model.nu0, floor)
    profile, scaled_sup, worst = [], 0.0, (math.inf, None)
    for lo, hi in shells:
        ctx = shell_samples(model, lo, hi, n_per_shell, rng)
        R0, margin = margin_arrays(field, ctx)
        delta = ctx.values["delta"]
        scaled = np.abs(R0) * delta ** (0.5 * (model.s - 1.0))
        scaled_sup = max(scaled_sup, float(np.max(scaled)))
        i = int(np.argmin(margin))
        profile.append({"shell_lo": lo, "shell_hi": hi, "min_margin": float(margin[i])})
        if margin[i] < worst[0]:
            worst = (float(margin[i]), ctx.points[i].tolist())
    nu1 = None
    for k in range(len(profile) - 1, -1, -1):
        if profile[k]["min_margin"] < 0:
            break
        nu1 = profile[k]["shell_hi"]
    return RemainderAudit(variant, scaled_sup, nu1, worst[1], worst[0], profile)


def certificate_samples(model: CoefficientModel, nu: float, n: int, rng_seed: int = 0) -> PointContext:
    """``n`` log-uniform sample points of the layer ``delta < nu`` (all components)."""
    rng = np.random.default_rng(rng_seed)
    comps = len(model.domain.components)
    per = max(1, n // comps)
    parts = [shell_samples(model, 1e-8, nu, per, rng, components=[c]) for c in range(comps)]
    return merge_contexts(parts)


def certificate_vs_barrier(model: CoefficientModel, nu: float, n: int = 10_000,
                           rng_seed: int = 0) -> dict:
    """Minimum of ``c/rho - barrier(Base)`` over ``n`` sampled points of ``Gamma_nu``."""
    field = AnsatzField("X0", model)
    ctx = certificate_samples(model, nu, n, rng_seed)
    cert = numeric_certificate(field, ctx.points)
    bar = barrier_arrays(BarrierSpec("base", model), ctx).barrier
    rel = (cert - bar) / np.abs(bar).clip(min=1e-300)
    i = int(np.argmin(cert - bar))
    return {"n": int(ctx.n), "min_difference": float((cert - bar)[i]),
            "min_relative": float(np.min(rel)), "worst_point": ctx.points[i].tolist()}
