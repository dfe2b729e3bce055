"""Hardy barrier families and the iterated-logarithm machinery.

The iterated logarithms with base ``a`` are

    L_{a,1}(t) = 1/ln(a/t),   L_{a,p} = L_{a,1} o L_{a,p-1},
    M_{a,p} = L_{a,1} ... L_{a,p},   f_{a,N} = M_{a,1} + ... + M_{a,N},

defined for ``0 < t < t_{a,N}`` with ``t_{a,1} = a/e`` and
``t_{a,p} = a exp(-1/t_{a,p-1})``.  They satisfy

    t f'_{a,N} - f_{a,N}^2 / 2 = (M_{a,1}^2 + ... + M_{a,N}^2) / 2,

which is what generates the sub-leading terms of the hierarchy barriers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .coefficients import CoefficientModel, q_arrays
from .errors import IncompatibleModel, OutOfDomain, OutOfLayer, ValidationError
from .expr import PointContext

T_INFINITE = 1e300
FAMILIES = ("base", "hierarchy", "log", "multi")


# ----------------------------------------------------------------------
# iterated logarithms
# ----------------------------------------------------------------------
def t_threshold(a: float, p: int) -> float:
    """Upper end ``t_{a,p}`` of the domain of ``L_{a,p}``; ``inf`` past 1e300."""
    if not a > 0:
        raise ValueError("base a must be positive")
    if p < 1:
        raise ValueError("depth p must be >= 1")
    if a == math.e:
        return 1.0
    t = a / math.e
    for _ in range(p - 1):
        if t > T_INFINITE:
            return math.inf
        if t == 0.0:
            return 0.0  # below the smallest float: no representable t
        t = a * math.exp(-1.0 / t)
    return math.inf if t > T_INFINITE else t


@dataclass(frozen=True)
class IterLogChain:
    a: float
    N: int
    threshold: float
    t: float
    L: tuple[float, ...]
    M: tuple[float, ...]

    @property
    def f(self) -> float:
        return math.fsum(self.M)

    def f_partial(self, n: int) -> float:
        return math.fsum(self.M[:n])

    def f_prime(self) -> float:
        """Exact derivative ``f'_{a,N}(t)`` from ``M'_l = M_l f_l / t``."""
        return math.fsum(self.M[l] * self.f_partial(l + 1) for l in range(self.N)) / self.t


def chain_arrays(a: float, N: int, t: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized ``L`` and ``M`` of shape ``(N, n)``; no domain checks."""
    t = np.asarray(t, dtype=float)
    L = np.empty((N,) + t.shape)
    M = np.empty_like(L)
    arg = t
    prod = np.ones_like(t)
    with np.errstate(all="ignore"):
        for p in range(N):
            arg = 1.0 / np.log(a / arg)
            L[p] = arg
            prod = prod * arg
            M[p] = prod
    return L, M


def iterlog_chain(a: float, N: int, t: float) -> IterLogChain:
    thr = t_threshold(a, N)
    if not 0 < t < thr:
        raise OutOfDomain(f"t={t} outside (0, t_(a,N)={thr})")
    L, M = chain_arrays(a, N, np.array([t]))
    return IterLogChain(a, N, thr, float(t), tuple(L[:, 0]), tuple(M[:, 0]))


def magic_identity_residual(a: float, N: int, t: float) -> float:
    """``|t f' - f^2/2 - sum(M^2)/2|`` evaluated with the exact recursion."""
    ch = iterlog_chain(a, N, t)
    f = ch.f
    lhs = ch.t * ch.f_prime() - 0.5 * f * f
    rhs = 0.5 * math.fsum(m * m for m in ch.M)
    return abs(lhs - rhs)


def f_chain(a: float, N: int, t: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """``f_{a,N}(t)`` and ``t f'_{a,N}(t)`` (vectorized)."""
    _, M = chain_arrays(a, N, t)
    partial = np.cumsum(M, axis=0)
    return partial[-1], np.sum(M * partial, axis=0)


# ----------------------------------------------------------------------
# barriers
# ----------------------------------------------------------------------
@dataclass(frozen=True, eq=False)
class BarrierSpec:
    family: str
    model: CoefficientModel
    N: int = 1
    alpha: float = 0.0
    scale: float = 1.0
    include_log: bool = True

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValidationError("barrier", f"unknown barrier family {self.family!r}")
        if self.family == "hierarchy" and self.N < 1:
            raise ValidationError("barrier", "hierarchy depth N must be >= 1")
        if self.family == "log" and not math.isclose(self.alpha, self.model.log_alpha,
                                                     rel_tol=0, abs_tol=1e-14):
            raise IncompatibleModel(
                f"log barrier alpha={self.alpha} but the model declares log_alpha={self.model.log_alpha}")

    @classmethod
    def parse(cls, text: str, model: CoefficientModel) -> "BarrierSpec":
        """``base``, ``multi``, ``hierarchy:N`` or ``log:ALPHA``."""
        name, _, arg = text.partition(":")
        try:
            if name == "hierarchy":
                return cls("hierarchy", model, N=int(arg) if arg else 1)
            if name == "log":
                return cls("log", model, alpha=float(arg) if arg else model.log_alpha)
        except ValueError:
            raise ValidationError("barrier", f"bad barrier argument in {text!r}") from None
        if arg:
            raise ValidationError("barrier", f"barrier {name!r} takes no argument")
        return cls(name, model)

    @property
    def label(self) -> str:
        if self.family == "hierarchy":
            return f"hierarchy:{self.N}"
        if self.family == "log":
            return f"log:{self.alpha!r}"
        return self.family

    def scaled(self, c: float) -> "BarrierSpec":
        return BarrierSpec(self.family, self.model, self.N, self.alpha, self.scale * c, self.include_log)


@dataclass(frozen=True)
class BarrierParts:
    barrier: np.ndarray
    leading: np.ndarray
    log_term: np.ndarray


def component_shift(model: CoefficientModel, ctx: PointContext) -> np.ndarray:
    """``d - k_j - 1`` for the nearest component (zero for hypersurfaces)."""
    dims = np.array([c.dimension for c in model.domain.components])
    return model.domain.dim - dims[ctx.extra["component"]] - 1.0


def barrier_arrays(spec: BarrierSpec, ctx: PointContext, check: bool = True) -> BarrierParts:
    """Leading and logarithmic parts of the barrier at a batch of points."""
    model = spec.model
    delta = ctx.values["delta"]
    if check:
        cap = min(model.nu0, 1.0)
        if np.any(delta >= cap):
            raise OutOfLayer(f"barrier needs delta < min(nu0, 1) = {cap}")
    q = q_arrays(model, ctx)
    a = model.a.value(ctx)
    k = model.beta.value(ctx) + model.gamma.value(ctx) - 1.0
    beta = model.beta.value(ctx)
    with np.errstate(all="ignore"):
        pref = 0.25 * (1.0 - q) * a * delta ** (beta - 2.0) * spec.scale
        inv_L = 1.0 / np.log(1.0 / delta)
        if spec.family == "base":
            lead, tail = k ** 2, 0.5 * inv_L ** 2
        elif spec.family == "multi":
            lead, tail = (k + component_shift(model, ctx)) ** 2, 0.5 * inv_L ** 2
        elif spec.family == "hierarchy":
            _, M = chain_arrays(math.e, spec.N, delta)
            lead, tail = k ** 2, np.sum(M ** 2, axis=0)
        else:
            al = spec.alpha
            pref = pref * np.log(1.0 / delta) ** al
            lead = (k - al * inv_L) ** 2
            tail = (1.0 - 2.0 * al - al * al) * inv_L ** 2
    if not spec.include_log:
        tail = np.zeros_like(delta)
    leading = pref * lead
    log_term = pref * tail
    return BarrierParts(leading + log_term, leading, log_term)


def barrier_eval(spec: BarrierSpec, x) -> float:
    """Barrier value at one interior point of the layer."""
    ctx = spec.model.context(x)
    return float(barrier_arrays(spec, ctx).barrier[0])


def barrier_profile(spec: BarrierSpec, deltas, component: int = 0, angle: float = 0.0) -> list[dict]:
    """Rows ``delta, barrier, leading_term, log_term, component_id`` along a normal ray."""
    from .geometry import context_on_component

    deltas = np.asarray(deltas, dtype=float)
    ctx = context_on_component(spec.model.domain, component, deltas, np.full(deltas.shape, angle))
    parts = barrier_arrays(spec, ctx)
    return [
        {"delta": float(d), "barrier": float(b), "leading_term": float(l),
         "log_term": float(g), "component_id": int(component)}
        for d, b, l, g in zip(deltas, parts.barrier, parts.leading, parts.log_term)
    ]
