"""Coefficient model for weighted anisotropic drift-diffusion operators.

Near the boundary (``delta < nu0``) the density and the normal diffusion are

    rho = r * delta**gamma,     d = a * delta**beta * log(1/delta)**log_alpha,

and the diffusion matrix is assembled in the frame (grad delta, tangent) from
the blocks ``d``, ``d12`` and ``d22``.  The anisotropy ratio
``q = d12 d22^-1 d21 / d`` comes from the Schur complement of that block
structure.  Away from the boundary the model uses explicit bulk descriptors
when given and otherwise freezes the layer formulas at ``delta = nu0``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import sympy as sp

from . import geometry
from .errors import (
    DegenerateTangentBlock,
    ModelConstructionError,
    NonpositiveDensity,
    NotPositiveDefinite,
    ValidationError,
)
from .expr import DELTA, THETA, X, Y, PointContext, ScalarField, as_field
from .geometry import Domain

SEAM_POINTS = 64
SEAM_RTOL = 1e-6
BULK_KEYS = ("rho", "d", "d12", "d22", "V")


@dataclass(frozen=True, eq=False)
class CoefficientModel:
    domain: Domain
    nu0: float
    r: ScalarField = field(default_factory=lambda: ScalarField("1"))
    gamma: ScalarField = field(default_factory=lambda: ScalarField("0"))
    a: ScalarField = field(default_factory=lambda: ScalarField("1"))
    beta: ScalarField = field(default_factory=lambda: ScalarField("0"))
    d12: ScalarField = field(default_factory=lambda: ScalarField("0"))
    d22: ScalarField | None = None
    log_alpha: float = 0.0
    s: float = 0.0
    s_beta: float = 0.0
    v: ScalarField = field(default_factory=lambda: ScalarField("0"))
    w_mu: float | None = None
    mu: float | None = None
    V: ScalarField | None = None
    bulk: dict = field(default_factory=dict)
    check: bool = True

    def __post_init__(self):
        for name in ("r", "gamma", "a", "beta", "d12", "v"):
            object.__setattr__(self, name, as_field(getattr(self, name)))
        if self.d22 is not None:
            object.__setattr__(self, "d22", as_field(self.d22))
        if self.V is not None:
            object.__setattr__(self, "V", as_field(self.V))
        object.__setattr__(self, "bulk", {k: as_field(v) for k, v in self.bulk.items()})
        errors = self.validation_errors()
        if errors:
            raise errors[0]
        if self.check:
            check_model(self)

    # ------------------------------------------------------------------
    def validation_errors(self) -> list[ValidationError]:
        errs = []
        if not self.s_beta <= self.s < 1:
            errs.append(ValidationError("s_beta", "violates the constraint s_β ≤ s < 1"))
        cap = min(self.domain.nu_omega, math.exp(-1.0))
        if not 0 < self.nu0 < cap:
            errs.append(ValidationError(
                "nu0", f"need 0 < nu0 < min(nu_Omega, 1/e) = {cap:.6g}, got {self.nu0}"))
        if self.mu is not None and not 0 < self.mu < self.nu0 / 2:
            errs.append(ValidationError("mu", "need 0 < mu < nu0/2"))
        if self.w_mu is not None and self.w_mu < 0:
            errs.append(ValidationError("w_mu", "must be nonnegative"))
        unknown = set(self.bulk) - set(BULK_KEYS)
        if unknown:
            errs.append(ValidationError("bulk", f"unknown keys {sorted(unknown)}"))
        if self.domain.dim == 1:
            for name, f in self.fields().items():
                bad = f.variables - {"delta", "x"}
                if bad:
                    errs.append(ValidationError(name, f"1-D models only use delta and x, got {sorted(bad)}"))
        return errs

    def fields(self) -> dict[str, ScalarField]:
        out = {k: getattr(self, k) for k in ("r", "gamma", "a", "beta", "d12", "v")}
        out["d22"] = self.tangent_block
        if self.V is not None:
            out["V"] = self.V
        out.update({f"bulk.{k}": v for k, v in self.bulk.items()})
        return out

    @property
    def tangent_block(self) -> ScalarField:
        return self.d22 if self.d22 is not None else ScalarField("1")

    @property
    def default_mu(self) -> float:
        return self.mu if self.mu is not None else self.nu0 / 4

    @property
    def has_constant_exponents(self) -> bool:
        return self.beta.is_constant and self.gamma.is_constant

    # symbolic derived quantities -------------------------------------
    @property
    def normal_expr(self) -> sp.Expr:
        """Normal diffusion ``d`` as an expression (layer formula)."""
        e = self.a.expr * DELTA ** self.beta.expr
        if self.log_alpha != 0:
            e = e * sp.log(1 / DELTA) ** sp.nsimplify(self.log_alpha)
        return e

    @property
    def q_field(self) -> ScalarField:
        if self.domain.dim == 1:
            return ScalarField("0")
        return _cached(self, "_q", lambda: ScalarField(
            self.d12.expr ** 2 / (self.normal_expr * self.tangent_block.expr)))

    @property
    def log_one_minus_q(self) -> ScalarField:
        return _cached(self, "_l1q", lambda: ScalarField(sp.log(1 - self.q_field.expr)))

    @property
    def log_r(self) -> ScalarField:
        return _cached(self, "_lr", lambda: ScalarField(sp.log(self.r.expr)))

    @property
    def log_a(self) -> ScalarField:
        return _cached(self, "_la", lambda: ScalarField(sp.log(self.a.expr)))

    @property
    def potential_layer(self) -> ScalarField:
        if self.V is not None:
            return self.V
        return _cached(self, "_Vl", lambda: ScalarField(DELTA ** (self.beta.expr - 2) * self.v.expr))

    # contexts ----------------------------------------------------------
    def context(self, x, check_ties: bool = True) -> PointContext:
        return geometry.point_context(self.domain, x, check_ties=check_ties)

    def clamp(self, ctx: PointContext) -> PointContext:
        """Freeze ``delta`` at ``nu0`` outside the layer (bulk continuation)."""
        delta = ctx.values["delta"]
        outside = delta >= self.nu0
        if not np.any(outside):
            return ctx
        out = ctx.with_delta(np.minimum(delta, self.nu0), freeze_gradient=False)
        g = out.grads["delta"].copy()
        g[outside] = 0.0
        out.grads["delta"] = g
        return out

    def in_layer(self, ctx: PointContext) -> np.ndarray:
        return ctx.values["delta"] < self.nu0


_CACHE_ATTR = "_derived_cache"


def _cached(model, key, make):
    cache = model.__dict__.setdefault(_CACHE_ATTR, {})
    if key not in cache:
        cache[key] = make()
    return cache[key]


# ----------------------------------------------------------------------
# vectorized evaluation
# ----------------------------------------------------------------------
def _layer_blocks(model: CoefficientModel, ctx: PointContext):
    delta = ctx.values["delta"]
    a = model.a.value(ctx)
    beta = model.beta.value(ctx)
    with np.errstate(all="ignore"):
        d = a * delta ** beta
        if model.log_alpha != 0:
            d = d * np.log(1.0 / delta) ** model.log_alpha
    if model.domain.dim == 1:
        return d, np.zeros_like(d), np.ones_like(d)
    return d, model.d12.value(ctx), model.tangent_block.value(ctx)


def frame_blocks(model: CoefficientModel, ctx: PointContext):
    """Blocks ``(d, d12, d22)`` of the diffusion matrix in the normal frame."""
    cctx = model.clamp(ctx)
    d, d12, d22 = _layer_blocks(model, cctx)
    if model.bulk and {"d", "d12", "d22"} & set(model.bulk):
        out = ~model.in_layer(ctx)
        if np.any(out):
            d, d12, d22 = d.copy(), d12.copy(), d22.copy()
            for key, arr in (("d", d), ("d12", d12), ("d22", d22)):
                if key in model.bulk:
                    arr[out] = model.bulk[key].value(ctx)[out]
    return d, d12, d22


def rho_arrays(model: CoefficientModel, ctx: PointContext):
    """Density and its gradient, shapes ``(n,)`` and ``(n, dim)``."""
    cctx = model.clamp(ctx)
    delta = cctx.values["delta"]
    r = model.r.value(cctx)
    gamma = model.gamma.value(cctx)
    if np.any(~(r > 0)):
        raise NonpositiveDensity("prefactor r must be positive")
    with np.errstate(all="ignore"):
        rho = r * delta ** gamma
        grad = rho[:, None] * (model.log_r.grad(cctx)
                               + np.log(delta)[:, None] * model.gamma.grad(cctx)
                               + (gamma / delta)[:, None] * cctx.grads["delta"])
    if "rho" in model.bulk:
        out = ~model.in_layer(ctx)
        if np.any(out):
            rho = rho.copy()
            rho[out] = model.bulk["rho"].value(ctx)[out]
            grad[out] = model.bulk["rho"].grad(ctx)[out]
    if np.any(~(rho > 0)):
        raise NonpositiveDensity("density must be positive")
    return rho, grad


def assemble_matrix(d, d12, d22, grad_delta) -> np.ndarray:
    """Rotate frame blocks to ambient coordinates; returns ``(n, dim, dim)``."""
    n, dim = grad_delta.shape
    if dim == 1:
        return d.reshape(n, 1, 1).copy()
    frame = geometry.tangent_frame(grad_delta)
    blk = np.empty((n, 2, 2))
    blk[:, 0, 0] = d
    blk[:, 0, 1] = blk[:, 1, 0] = d12
    blk[:, 1, 1] = d22
    return frame @ blk @ np.swapaxes(frame, 1, 2)


def diffusion_arrays(model: CoefficientModel, ctx: PointContext) -> np.ndarray:
    d, d12, d22 = frame_blocks(model, ctx)
    if np.any(~(d > 0)) or np.any(~(d22 > 0)) or np.any(~(d * d22 - d12 ** 2 > 0)):
        raise NotPositiveDefinite("diffusion matrix is not positive definite at a sampled point")
    return assemble_matrix(d, d12, d22, ctx.grads["delta"])


def q_arrays(model: CoefficientModel, ctx: PointContext) -> np.ndarray:
    d, d12, d22 = frame_blocks(model, ctx)
    if model.domain.dim == 1:
        return np.zeros_like(d)
    return d12 ** 2 / (d * d22)


def potential_arrays(model: CoefficientModel, ctx: PointContext) -> np.ndarray:
    cctx = model.clamp(ctx)
    V = model.potential_layer.value(cctx)
    if "V" in model.bulk:
        out = ~model.in_layer(ctx)
        if np.any(out):
            V = V.copy()
            V[out] = model.bulk["V"].value(ctx)[out]
    return V


# ----------------------------------------------------------------------
# public point operations
# ----------------------------------------------------------------------
def rho_eval(model: CoefficientModel, x):
    """Density ``rho`` and its gradient at one interior point."""
    ctx = model.context(x)
    rho, grad = rho_arrays(model, ctx)
    return float(rho[0]), grad[0]


def diffusion_eval(model: CoefficientModel, x) -> np.ndarray:
    """Diffusion matrix ``D(x)`` in ambient coordinates at one interior point."""
    ctx = model.context(x)
    return diffusion_arrays(model, ctx)[0]


@dataclass(frozen=True)
class SchurData:
    d: float
    d12: np.ndarray
    d21: np.ndarray
    d22: np.ndarray
    q: float
    d_tilde: float
    D_inv: np.ndarray


def schur_decompose(D, P) -> SchurData:
    """Split ``D`` along the rank-one projector ``P`` and invert blockwise.

    With ``n`` the unit vector spanning ``P`` and ``T`` an orthonormal basis of
    its complement, ``d = n^T D n``, ``d12 = n^T D T``, ``d22 = T^T D T``.  The
    inverse is assembled from ``d_tilde = 1 / (d (1 - q))`` and checked against
    a direct inverse.
    """
    D = np.asarray(D, dtype=float)
    P = np.asarray(P, dtype=float)
    dim = D.shape[0]
    w, vecs = np.linalg.eigh(P)
    normal = vecs[:, -1]
    if not (abs(w[-1] - 1.0) < 1e-10 and np.all(np.abs(w[:-1]) < 1e-10)):
        raise ValueError("P must be a rank-one orthogonal projector")
    eig = np.linalg.eigvalsh(0.5 * (D + D.T))
    if eig[0] <= 0:
        raise NotPositiveDefinite(f"smallest eigenvalue {eig[0]:.3e} <= 0")
    frame = geometry.tangent_frame(normal)
    B = frame.T @ D @ frame
    d = float(B[0, 0])
    if dim == 1:
        return SchurData(d, np.zeros((1, 0)), np.zeros((0, 1)), np.zeros((0, 0)),
                         0.0, 1.0 / d, np.array([[1.0 / d]]))
    d12 = B[:1, 1:]
    d21 = B[1:, :1]
    d22 = B[1:, 1:]
    if abs(np.linalg.det(d22)) < 1e-12 * max(1.0, np.linalg.norm(d22)) ** (dim - 1):
        raise DegenerateTangentBlock("tangential block is singular")
    d22_inv = np.linalg.inv(d22)
    q = float((d12 @ d22_inv @ d21)[0, 0]) / d
    d_tilde = 1.0 / (d * (1.0 - q))
    blk = np.empty_like(B)
    blk[0, 0] = d_tilde
    blk[:1, 1:] = -d_tilde * d12 @ d22_inv
    blk[1:, :1] = -d_tilde * d22_inv @ d21
    blk[1:, 1:] = d22_inv + d_tilde * d22_inv @ d21 @ d12 @ d22_inv
    D_inv = frame @ blk @ frame.T
    direct = np.linalg.inv(D)
    if not np.allclose(D_inv, direct, rtol=1e-8, atol=1e-10 * np.abs(direct).max()):
        raise NotPositiveDefinite("block inverse disagrees with direct inverse")
    return SchurData(d, d12.copy(), d21.copy(), d22.copy(), q, d_tilde, D_inv)


# ----------------------------------------------------------------------
# sampling helpers
# ----------------------------------------------------------------------
def dyadic_shells(width: float, floor: float = 1e-8) -> list[tuple[float, float]]:
    """Dyadic shells ``[width 2^-(k+1), width 2^-k)`` down to ``floor``."""
    shells = []
    hi = width
    while hi > floor:
        shells.append((max(hi / 2, floor), hi))
        hi /= 2
    return shells


def shell_samples(model: CoefficientModel, lo: float, hi: float, n: int,
                  rng: np.random.Generator | None = None, components=None) -> PointContext:
    """``n`` points per component with ``lo <= delta < hi`` (log-uniform)."""
    dom = model.domain
    comps = range(len(dom.components)) if components is None else components
    ctxs = []
    for c in comps:
        if rng is None:
            u = (np.arange(n) + 0.5) / n
            ang = 2 * np.pi * ((np.arange(n) * 0.6180339887498949) % 1.0)
        else:
            u = rng.uniform(0.0, 1.0, n)
            ang = rng.uniform(0.0, 2 * np.pi, n)
        delta = lo * (hi / lo) ** u
        ctxs.append(geometry.context_on_component(dom, c, delta, ang))
    return merge_contexts(ctxs)


def merge_contexts(ctxs: list[PointContext]) -> PointContext:
    if len(ctxs) == 1:
        return ctxs[0]
    pts = np.concatenate([c.points for c in ctxs])
    values = {k: np.concatenate([c.values[k] for c in ctxs]) for k in ctxs[0].values}
    grads = {k: np.concatenate([c.grads[k] for c in ctxs]) for k in ctxs[0].grads}
    extra = {k: np.concatenate([c.extra[k] for c in ctxs]) for k in ctxs[0].extra}
    return PointContext(pts, values, grads, extra)


def check_model(model: CoefficientModel) -> None:
    """Construction-time positivity and seam-continuity checks."""
    ctx = merge_contexts([shell_samples(model, lo, hi, 16)
                          for lo, hi in dyadic_shells(model.nu0 * (1 - 1e-12), 1e-8)])
    a = model.a.value(ctx)
    r = model.r.value(ctx)
    if np.any(~(a > 0)):
        raise ModelConstructionError("a must be positive on the layer")
    if np.any(~(r > 0)):
        raise ModelConstructionError("r must be positive on the layer")
    d, d12, d22 = _layer_blocks(model, ctx)
    if np.any(~(d22 > 0)):
        raise ModelConstructionError("d22 must be positive definite on the layer")
    if np.any(~(d * d22 - d12 ** 2 > 0)):
        raise ModelConstructionError("q = d12^2/(d d22) must stay below 1 on the layer")
    if not model.bulk:
        return
    n = SEAM_POINTS
    ang = 2 * np.pi * np.arange(n) / n
    for comp in model.domain.components:
        ctx = geometry.context_on_component(model.domain, comp.id, np.full(n, model.nu0), ang)
        r = model.r.value(ctx)
        rho_layer = r * model.nu0 ** model.gamma.value(ctx)
        dl, d12l, d22l = _layer_blocks(model, ctx)
        checks = [("rho", rho_layer), ("d", dl), ("d12", d12l), ("d22", d22l)]
        for key, layer_val in checks:
            if key not in model.bulk:
                continue
            bulk_val = model.bulk[key].value(ctx)
            scale = np.maximum(np.abs(layer_val), 1e-300)
            if model.domain.dim == 1 and key in ("d12", "d22"):
                continue
            if np.any(np.abs(bulk_val - layer_val) > SEAM_RTOL * np.maximum(scale, 1.0 if key == "d12" else 0.0)):
                raise ModelConstructionError(
                    f"bulk '{key}' is discontinuous at the seam delta = nu0 (component {comp.id})")


# ----------------------------------------------------------------------
# audit of the sup-bound hypotheses
# ----------------------------------------------------------------------
GROWTH_SHELLS = 6
GROWTH_FACTOR = 2.0


def grows_without_bound(shell_max: list[float]) -> bool:
    """True when the last shells show monotone growth by more than 2x each."""
    vals = [v for v in shell_max]
    if any(not np.isfinite(v) for v in vals):
        return True
    if len(vals) < GROWTH_SHELLS + 1:
        return False
    tail = vals[-(GROWTH_SHELLS + 1):]
    return all(b > GROWTH_FACTOR * a and b > 0 for a, b in zip(tail[:-1], tail[1:]))


@dataclass
class AuditReport:
    suprema: dict[str, float]
    shell_maxima: dict[str, list[float]]
    flags: dict[str, str]
    shells: list[tuple[float, float]]

    @property
    def clean(self) -> bool:
        return all(f == "Clean" for f in self.flags.values())

    @property
    def summary(self) -> str:
        if self.clean:
            return "no violation detected"
        bad = sorted(k for k, f in self.flags.items() if f != "Clean")
        return "violation detected: " + ", ".join(bad)

    def to_dict(self) -> dict:
        return {"summary": self.summary, "flags": dict(self.flags),
                "suprema": dict(self.suprema),
                "shell_maxima": {k: list(v) for k, v in self.shell_maxima.items()}}


def audit_quantities(model: CoefficientModel, ctx: PointContext) -> dict[str, np.ndarray]:
    delta = ctx.values["delta"]
    ds = delta ** model.s
    norm = lambda g: np.linalg.norm(g, axis=1)  # noqa: E731
    out = {
        "rho": (norm(model.log_r.grad(ctx)) + norm(model.gamma.grad(ctx))) * ds,
        "a": norm(model.log_a.grad(ctx)) * ds,
        "beta": norm(model.beta.grad(ctx)) * delta ** model.s_beta,
        "q": norm(model.log_one_minus_q.grad(ctx)) * ds,
    }
    return out


def assumption_audit(model: CoefficientModel, n_samples: int = 256, rng_seed: int = 0) -> AuditReport:
    """Sample the sup-bounds of the layer hypotheses over dyadic shells.

    Sampling can only falsify a supremum bound, never establish it, so a clean
    report reads "no violation detected".
    """
    rng = np.random.default_rng(rng_seed)
    shells = dyadic_shells(model.nu0, 1e-8)
    shell_max: dict[str, list[float]] = {k: [] for k in ("rho", "a", "beta", "q")}
    sources = {"rho": (model.log_r, model.gamma), "a": (model.log_a,), "beta": (model.beta,),
               "q": (model.log_one_minus_q,)}
    if all(f.is_constant for fs in sources.values() for f in fs):
        # every gradient vanishes identically
        zeros = [0.0] * len(shells)
        return AuditReport({k: 0.0 for k in shell_max}, {k: list(zeros) for k in shell_max},
                           {k: "Clean" for k in shell_max}, shells)
    for lo, hi in shells:
        ctx = shell_samples(model, lo, hi, n_samples, rng)
        with np.errstate(all="ignore"):
            vals = audit_quantities(model, ctx)
        for k, arr in vals.items():
            shell_max[k].append(float(np.max(arr)) if np.all(np.isfinite(arr)) else math.inf)
    flags = {k: ("Violated" if grows_without_bound(v) else "Clean") for k, v in shell_max.items()}
    suprema = {k: max(v) for k, v in shell_max.items()}
    return AuditReport(suprema, shell_max, flags, shells)


def rotate_model(model: CoefficientModel, phi: float) -> CoefficientModel:
    """The model pushed forward by the rotation of the plane by ``phi``.

    Only radially symmetric domains are closed under rotation, so the domain
    is reused unchanged and every descriptor is composed with the inverse map.
    """
    if model.domain.dim != 2:
        raise ValidationError("domain", "rotation needs a two-dimensional domain")
    c, s = sp.cos(sp.Float(phi)), sp.sin(sp.Float(phi))
    sub = {X: c * X + s * Y, Y: -s * X + c * Y, THETA: THETA - sp.Float(phi)}

    def rot(f):
        return None if f is None else ScalarField(f.expr.xreplace(sub))

    return CoefficientModel(
        model.domain, model.nu0, r=rot(model.r), gamma=rot(model.gamma), a=rot(model.a),
        beta=rot(model.beta), d12=rot(model.d12), d22=rot(model.d22), log_alpha=model.log_alpha,
        s=model.s, s_beta=model.s_beta, v=rot(model.v), w_mu=model.w_mu, mu=model.mu,
        V=rot(model.V), bulk={k: rot(v) for k, v in model.bulk.items()}, check=model.check)
