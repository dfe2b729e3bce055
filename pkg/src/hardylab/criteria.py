"""Essential-self-adjointness criteria, Agmon weight diagnostics and the 2-ARS model.

Every criterion is a sufficient condition.  A verdict is *Certified* when all
sampled hypotheses pass and the sampled infimum of the criterion ratio is at
least ``1 - 1e-9``; sampling can refute a hypothesis but never prove it, so a
certificate is numerical evidence rather than a proof.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import sympy as sp

from . import geometry
from .barriers import BarrierSpec, barrier_arrays, component_shift
from .coefficients import (
    CoefficientModel,
    assumption_audit,
    diffusion_arrays,
    dyadic_shells,
    frame_blocks,
    grows_without_bound,
    potential_arrays,
    q_arrays,
    shell_samples,
)
from .errors import IncompatibleModel, OutOfLayer, UnknownKind, ValidationError
from .expr import RADIUS, PointContext, ScalarField, parse_field_expr
from .geometry import Domain
from .vectorfield import CutoffPsi

CERT_TOL = 1e-9
FLOOR = 1e-8
KINDS = ("const-beta-i", "const-beta-ii", "variable-beta", "strong",
         "iso-critical", "log-critical", "ars2")

CERTIFIED = "Certified"
NOT_CERTIFIED = "NotCertified"
HYPOTHESIS_VIOLATED = "HypothesisViolated"


@dataclass
class EsaVerdict:
    status: str
    margin: float
    criterion: str
    witness: list[float] | None = None
    infimum: float | None = None
    mu: float | None = None
    hypothesis: str | None = None
    audit: list[dict] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)

    def __post_init__(self):
        if self.status == CERTIFIED and self.margin < 0:
            raise ValueError("a certified verdict carries a nonnegative margin")
        if self.status == NOT_CERTIFIED and not self.margin < 0:
            raise ValueError("a non-certified verdict carries a negative margin")
        if self.status == HYPOTHESIS_VIOLATED and not self.hypothesis:
            raise ValueError("a hypothesis violation names the hypothesis")

    @property
    def certified(self) -> bool:
        return self.status == CERTIFIED

    @property
    def exit_code(self) -> int:
        return {CERTIFIED: 0, NOT_CERTIFIED: 2, HYPOTHESIS_VIOLATED: 3}[self.status]

    def to_dict(self) -> dict:
        return {"criterion": self.criterion, "status": self.status, "margin": self.margin,
                "infimum": self.infimum, "witness": self.witness, "mu": self.mu,
                "hypothesis": self.hypothesis, "audit": self.audit, "notes": self.notes}


def _ratio_verdict(kind, inf, witness, mu, audit, notes=()) -> EsaVerdict:
    margin = inf - 1.0
    if abs(margin) <= CERT_TOL:
        margin = 0.0
    status = CERTIFIED if margin >= 0 else NOT_CERTIFIED
    return EsaVerdict(status, margin, kind, witness, inf, mu, None, audit, list(notes))


# ----------------------------------------------------------------------
# layer infimum
# ----------------------------------------------------------------------
@dataclass(frozen=True)
class Infimum:
    value: float
    witness: list[float] | None
    delta: float | None
    component: int | None


def _grid_ctx(domain: Domain, comp: int, deltas: np.ndarray, angles: np.ndarray):
    dd, aa = np.meshgrid(deltas, angles, indexing="ij")
    return geometry.context_on_component(domain, comp, dd.ravel(), aa.ravel()), dd.ravel(), aa.ravel()


def layer_infimum(f, model: CoefficientModel, mu: float, components=None,
                  n_shells: int = 64, n_tangent: int = 128, rounds: int = 3,
                  floor: float = FLOOR) -> Infimum:
    """Infimum of ``f(ctx)`` over ``floor <= delta <= mu`` by grid scan plus refinement.

    NaN values are ignored.  Ties are broken by the lexicographically smallest
    witness so the result does not depend on evaluation order.
    """
    dom = model.domain
    comps = range(len(dom.components)) if components is None else components
    n_ang = 1 if dom.dim == 1 else n_tangent
    deltas = np.geomspace(floor, mu, n_shells)
    angles = 2 * np.pi * np.arange(n_ang) / n_ang
    best = (math.inf, (), None, None, None)

    def scan(comp, ds, angs):
        nonlocal best
        ctx, dd, aa = _grid_ctx(dom, comp, ds, angs)
        vals = np.asarray(f(ctx), dtype=float)
        vals = np.where(np.isnan(vals), np.inf, vals)
        if vals.size == 0:
            return
        vmin = vals.min()
        idx = np.flatnonzero(vals == vmin)
        cands = [(float(vmin), tuple(ctx.points[i].tolist()), float(dd[i]), float(aa[i]), comp) for i in idx]
        cand = min(cands, key=lambda c: (c[0], c[1]))
        if (cand[0], cand[1]) < (best[0], best[1]):
            best = cand

    for comp in comps:
        scan(comp, deltas, angles)
    if not math.isfinite(best[0]):
        return Infimum(best[0], list(best[1]) or None, best[2], best[4])
    step = (mu / floor) ** (1.0 / max(n_shells - 1, 1))
    dang = 2 * np.pi / n_ang
    for _ in range(rounds):
        _, _, d0, a0, comp = best
        ds = np.clip(np.geomspace(d0 / step, d0 * step, 17), floor, mu)
        angs = np.array([a0]) if dom.dim == 1 else a0 + np.linspace(-dang, dang, 17)
        scan(comp, ds, angs)
        step = step ** 0.125
        dang /= 8.0
    return Infimum(best[0], list(best[1]), best[2], best[4])


# ----------------------------------------------------------------------
# hypothesis checks
# ----------------------------------------------------------------------
def _shell_check(model, width, quantity, name, n=64, mask=None, rng_seed=0):
    """Growth test of ``quantity(ctx)`` over dyadic shells of ``Gamma_width``."""
    rng = np.random.default_rng(rng_seed)
    maxima, where = [], None
    worst = -math.inf
    for lo, hi in dyadic_shells(width, FLOOR):
        ctx = shell_samples(model, lo, hi, n, rng)
        with np.errstate(all="ignore"):
            vals = np.asarray(quantity(ctx), dtype=float)
        if mask is not None:
            vals = np.where(mask(ctx), vals, -math.inf)
        vals = np.where(np.isnan(vals), math.inf, vals)
        i = int(np.argmax(vals))
        maxima.append(max(float(vals[i]), 0.0))
        if vals[i] > worst:
            worst, where = float(vals[i]), ctx.points[i].tolist()
    ok = not grows_without_bound(maxima)
    return {"hypothesis": name, "status": "pass" if ok else "fail",
            "sampled_sup": worst if math.isfinite(worst) else None,
            "where": None if ok else where}


def _audit_check(model) -> dict:
    rep = assumption_audit(model, n_samples=64)
    bad = sorted(k for k, v in rep.flags.items() if v != "Clean")
    return {"hypothesis": "assumption_bounds", "status": "fail" if bad else "pass",
            "summary": rep.summary}


def _v_lower_bound(model, mu, mask=None, name="V_lower_bound") -> dict:
    if model.V is None:
        return {"hypothesis": name, "status": "pass", "detail": "V = delta^(beta-2) v"}
    s = model.s

    def excess(ctx):
        delta = ctx.values["delta"]
        beta = model.beta.value(ctx)
        base = delta ** (beta - 2.0)
        return (base * model.v.value(ctx) - potential_arrays(model, ctx)) / (
            base * delta ** (0.5 * (1.0 - s)))

    res = _shell_check(model, mu, excess, name, mask=mask)
    if model.w_mu is not None and res["sampled_sup"] is not None:
        ok = res["sampled_sup"] <= model.w_mu * (1 + 1e-9) + 1e-12
        res["status"] = "pass" if ok else "fail"
        res["w_mu"] = model.w_mu
    return res


def _q_small(model) -> dict:
    s = model.s
    return _shell_check(model, 0.5 * model.nu0,
                        lambda ctx: q_arrays(model, ctx) * ctx.values["delta"] ** (0.5 * (s - 1.0)),
                        "q_small")


def _isotropy(model, mu, alpha) -> dict:
    s = model.s

    def dev(ctx):
        delta = ctx.values["delta"]
        D = diffusion_arrays(model, ctx)
        scale = delta ** (-model.beta.value(ctx)) * np.log(1.0 / delta) ** (-alpha)
        M = D * scale[:, None, None] - model.a.value(ctx)[:, None, None] * np.eye(ctx.dim)
        return np.linalg.norm(M, ord=2, axis=(1, 2)) / delta ** (1.0 - s)

    return _shell_check(model, mu, dev, "isotropy")


# ----------------------------------------------------------------------
# criterion ratios
# ----------------------------------------------------------------------
def _shifted_exponent(model, ctx):
    return model.beta.value(ctx) + model.gamma.value(ctx) - 1.0 + component_shift(model, ctx)


def ratio_field(model: CoefficientModel, with_q: bool = True):
    """``[(1-q) m^2 + 4 v/a] / (beta-2)^2``; ``+inf`` where ``beta >= 2``."""

    def f(ctx):
        m = _shifted_exponent(model, ctx)
        beta = model.beta.value(ctx)
        one_q = 1.0 - q_arrays(model, ctx) if with_q else 1.0
        num = one_q * m ** 2 + 4.0 * model.v.value(ctx) / model.a.value(ctx)
        with np.errstate(all="ignore"):
            out = num / (beta - 2.0) ** 2
        return np.where(beta < 2.0, out, np.inf)

    return f


def _require_constant_beta(model, kind):
    if not model.beta.is_constant:
        raise IncompatibleModel(f"{kind} needs a constant beta")
    if model.beta.constant >= 2:
        raise IncompatibleModel(f"{kind} needs beta < 2; use the strong criterion")


def _with_mu_retries(model, mu, hypotheses):
    """First ``mu`` in ``mu, mu/2, mu/4`` whose hypotheses all pass."""
    audit = []
    for m in (mu, mu / 2, mu / 4):
        checks = hypotheses(m)
        audit = [dict(c, mu=m) for c in checks]
        if all(c["status"] == "pass" for c in checks):
            return m, audit, None
    failed = next(c for c in audit if c["status"] != "pass")
    return None, audit, failed


def _violation(kind, mu, audit, failed) -> EsaVerdict:
    sup = failed.get("sampled_sup")
    margin = float(sup) if sup is not None and math.isfinite(sup) else 0.0
    return EsaVerdict(HYPOTHESIS_VIOLATED, margin, kind,
                      failed.get("where"), None, mu, failed["hypothesis"], audit)


def _check_const_beta(kind, model, mu):
    _require_constant_beta(model, kind)
    with_q = kind == "const-beta-i"

    def hyps(m):
        out = [_audit_check(model), _v_lower_bound(model, m)]
        if not with_q:
            out.append(_q_small(model))
        return out

    m, audit, failed = _with_mu_retries(model, mu, hyps)
    if failed:
        return _violation(kind, mu, audit, failed)
    inf = layer_infimum(ratio_field(model, with_q), model, m)
    return _ratio_verdict(kind, inf.value, inf.witness, m, audit)


def _strong(model, mu):
    def hyps(m):
        def pdp(ctx):
            d, _, _ = frame_blocks(model, ctx)
            return d * ctx.values["delta"] ** (-model.beta.value(ctx))

        return [
            _audit_check(model),
            _shell_check(model, m, pdp, "normal_block_bound"),
            _shell_check(model, m, lambda ctx: -potential_arrays(model, ctx), "V_bounded_below"),
        ]

    m, audit, failed = _with_mu_retries(model, mu, hyps)
    if failed:
        return _violation("strong", mu, audit, failed)
    if model.beta.is_constant:
        inf = Infimum(model.beta.constant, None, None, None)
    else:
        inf = layer_infimum(lambda ctx: model.beta.value(ctx), model, m)
    margin = inf.value - 2.0
    if abs(margin) <= CERT_TOL:
        margin = 0.0
    status = CERTIFIED if margin >= 0 else NOT_CERTIFIED
    return EsaVerdict(status, margin, "strong", inf.witness, inf.value, m, None, audit,
                      ["margin is inf beta - 2"])


def _variable_beta(model, mu):
    s, sb = model.s, model.s_beta
    minus = lambda ctx: model.beta.value(ctx) < 2.0  # noqa: E731
    plus = lambda ctx: ~minus(ctx)  # noqa: E731

    def hyps(m):
        def dm(ctx):
            D = diffusion_arrays(model, ctx)
            nrm = np.linalg.norm(D, ord=2, axis=(1, 2))
            return nrm * ctx.values["delta"] ** (-(model.beta.value(ctx) + sb - s))

        return [
            _audit_check(model),
            _shell_check(model, m, dm, "diffusion_bound", mask=minus),
            _v_lower_bound(model, m, mask=minus),
        ]

    m, audit, failed = _with_mu_retries(model, mu, hyps)
    if failed:
        return _violation("variable-beta", mu, audit, failed)
    # V >= 0 on the plus region is a pointwise sign condition, not a growth bound
    neg = _sampled_min(model, m, lambda ctx: potential_arrays(model, ctx), plus)
    if neg is not None and neg[0] < 0:
        audit.append({"hypothesis": "V_nonnegative_plus", "status": "fail", "where": neg[1], "mu": m})
        return _violation("variable-beta", mu, audit, audit[-1])
    inf = layer_infimum(ratio_field(model, True), model, m)
    if not math.isfinite(inf.value):
        return EsaVerdict(CERTIFIED, 0.0, "variable-beta", None, None, m, None, audit,
                          ["beta >= 2 on the whole sampled layer"])
    return _ratio_verdict("variable-beta", inf.value, inf.witness, m, audit)


def _sampled_min(model, width, quantity, mask):
    rng = np.random.default_rng(1)
    best = None
    for lo, hi in dyadic_shells(width, FLOOR):
        ctx = shell_samples(model, lo, hi, 64, rng)
        sel = mask(ctx)
        if not np.any(sel):
            continue
        vals = np.where(sel, quantity(ctx), np.inf)
        i = int(np.argmin(vals))
        if best is None or vals[i] < best[0]:
            best = (float(vals[i]), ctx.points[i].tolist())
    return best


def _critical_requirements(model, kind):
    if not model.beta.is_constant:
        raise IncompatibleModel(f"{kind} needs a constant beta")
    if not (model.gamma.is_constant and model.gamma.constant == 0):
        raise IncompatibleModel(f"{kind} needs gamma = 0 (constant density)")
    if not model.r.is_constant:
        raise IncompatibleModel(f"{kind} needs a constant density prefactor r")
    v_zero = model.v.is_constant and model.v.constant == 0
    V_zero = model.V is None or (model.V.is_constant and model.V.constant == 0)
    if not (v_zero and V_zero):
        raise IncompatibleModel(f"{kind} needs V = 0")


def _iso_critical(model, mu):
    _critical_requirements(model, "iso-critical")
    beta = model.beta.constant

    def hyps(m):
        return [_audit_check(model), _isotropy(model, m, model.log_alpha)]

    m, audit, failed = _with_mu_retries(model, mu, hyps)
    if failed:
        return _violation("iso-critical", mu, audit, failed)
    if beta >= 2:
        return EsaVerdict(CERTIFIED, beta - 2.0, "iso-critical", None, None, m, None, audit,
                          ["beta >= 2: strongly degenerate"])
    inf = layer_infimum(ratio_field(model, True), model, m)
    return _ratio_verdict("iso-critical", inf.value, inf.witness, m, audit)


def log_critical_coefficients(alpha: float) -> tuple[float, float]:
    """Coefficients of ``num - den = c1 u + c2 u^2`` in ``u = 1/ln(1/delta)``.

    ``num`` is four times the log-corrected barrier bracket at ``beta = 3/2``
    and ``den`` is ``(1 - u/2)^2`` from the Agmon weight with ``lambda = 1/2``.
    """
    return 1.0 - 4.0 * alpha, 3.75 - 8.0 * alpha


def _log_critical(model, mu):
    _critical_requirements(model, "log-critical")
    if not math.isclose(model.beta.constant, 1.5, rel_tol=0, abs_tol=1e-14):
        raise IncompatibleModel("log-critical needs beta = 3/2")
    if any(c.dimension != model.domain.dim - 1 for c in model.domain.components):
        raise IncompatibleModel("log-critical covers hypersurface boundary components only")
    alpha = model.log_alpha

    def hyps(m):
        return [_audit_check(model), _isotropy(model, m, alpha)]

    m, audit, failed = _with_mu_retries(model, mu, hyps)
    if failed:
        return _violation("log-critical", mu, audit, failed)
    c1, c2 = log_critical_coefficients(alpha)
    lead = c1 if abs(c1) > 1e-12 else c2

    def ratio(ctx):
        u = 1.0 / np.log(1.0 / ctx.values["delta"])
        return (1 - 4 * alpha * u + 4 * (1 - 2 * alpha) * u * u) / (1 - 0.5 * u) ** 2

    inf = layer_infimum(ratio, model, m)
    status = CERTIFIED if lead >= 0 else NOT_CERTIFIED
    notes = [f"decided by the leading coefficient of num - den = ({c1:.6g}) u + ({c2:.6g}) u^2 "
             "as delta -> 0; margin is that coefficient"]
    return EsaVerdict(status, float(lead), "log-critical", inf.witness, inf.value, m, None, audit, notes)


def check_criterion(kind: str, model: CoefficientModel, mu: float | None = None) -> EsaVerdict:
    """Decide one criterion on ``model`` (``mu`` defaults to ``nu0/4``)."""
    if kind not in KINDS:
        raise UnknownKind(f"unknown criterion {kind!r}; expected one of {', '.join(KINDS)}")
    mu = model.default_mu if mu is None else mu
    if not 0 < mu < 0.5 * model.nu0:
        raise ValidationError("mu", "need 0 < mu < nu0/2")
    if kind in ("const-beta-i", "const-beta-ii"):
        return _check_const_beta(kind, model, mu)
    if kind == "strong":
        return _strong(model, mu)
    if kind == "variable-beta":
        return _variable_beta(model, mu)
    if kind == "iso-critical":
        return _iso_critical(model, mu)
    if kind == "log-critical":
        return _log_critical(model, mu)
    v = _check_const_beta("const-beta-ii", model, mu)
    v.criterion = "ars2"
    return v


# ----------------------------------------------------------------------
# Agmon weights
# ----------------------------------------------------------------------
AGMON_VARIANTS = ("const-beta", "variable-beta", "iso-critical", "log-critical")


@dataclass(frozen=True)
class AgmonProbe:
    variant: str
    lam: float | None = None
    E: float = 0.0
    E0: float = 0.0

    def __post_init__(self):
        if self.variant not in AGMON_VARIANTS:
            raise ValidationError("variant", f"unknown Agmon weight {self.variant!r}")


@dataclass(frozen=True)
class AgmonResult:
    g: float
    gDg: float
    B: float
    slack: float
    closed_form: float | None
    lam: float | None


def lambda_cap(model: CoefficientModel) -> float:
    """``min(1, 1/(1 + sup|beta - 2|))`` with the sup sampled over ``Gamma_{nu0/2}``."""
    if model.beta.is_constant:
        sup = abs(model.beta.constant - 2.0)
    else:
        inf = layer_infimum(lambda ctx: -np.abs(model.beta.value(ctx) - 2.0), model,
                            0.5 * model.nu0, n_shells=32, n_tangent=32, rounds=1)
        sup = -inf.value
    return min(1.0, 1.0 / (1.0 + sup))


def agmon_probe(probe: AgmonProbe, model: CoefficientModel, x) -> AgmonResult:
    """Weight ``g``, ``grad g . D grad g``, ``B`` and the slack of the Agmon condition."""
    ctx = model.context(x)
    return agmon_arrays(probe, model, ctx)[0]


def agmon_arrays(probe: AgmonProbe, model: CoefficientModel, ctx: PointContext) -> list[AgmonResult]:
    delta = ctx.values["delta"]
    if np.any(delta >= 0.5 * model.nu0):
        raise OutOfLayer("Agmon probes live in Gamma_(nu0/2)")
    beta = model.beta.value(ctx)
    a = model.a.value(ctx)
    alpha = model.log_alpha
    L = np.log(1.0 / delta)
    Lal = L ** alpha
    gd = ctx.grads["delta"]
    lam = None
    if probe.variant == "const-beta":
        if not model.beta.is_constant:
            raise IncompatibleModel("const-beta weight needs a constant beta")
        c = 0.5 * (2.0 - beta)
        g = c * np.log(delta) * CutoffPsi(model.nu0).value(delta)
        grad = (c / delta)[:, None] * gd
        closed = a * c ** 2 * delta ** (beta - 2.0) * Lal
    else:
        if probe.variant == "variable-beta":
            cap = lambda_cap(model)
            lam = cap if probe.lam is None else probe.lam
            if not 0 < lam <= cap * (1 + 1e-12):
                raise ValidationError("lambda", f"need 0 < lambda <= {cap:.6g}")
        else:
            lam = 0.5 if probe.lam is None else probe.lam
        c = 0.5 * (2.0 - beta)
        inner = np.log(delta) + lam * np.log(L)
        gt = c * inner
        grad = (-0.5 * inner)[:, None] * model.beta.grad(ctx) + (c / delta * (1.0 - lam / L))[:, None] * gd
        neg = gt <= 0
        g = np.where(neg, gt, 0.0)
        grad = np.where(neg[:, None], grad, 0.0)
        closed = None
        if model.beta.is_constant:
            closed = np.where(neg, a * c ** 2 * delta ** (beta - 2.0) * (1.0 - lam / L) ** 2 * Lal, 0.0)
    # contract in the normal frame: the ambient matrix loses the tiny normal
    # block to cancellation when d22 >> d
    d, d12, d22 = frame_blocks(model, ctx)
    if model.domain.dim == 1:
        gDg = d * grad[:, 0] ** 2
    else:
        frame = geometry.tangent_frame(gd)
        gn = np.einsum("ni,ni->n", grad, frame[:, :, 0])
        gtan = np.einsum("ni,ni->n", grad, frame[:, :, 1])
        gDg = d * gn ** 2 + 2.0 * d12 * gn * gtan + d22 * gtan ** 2
    q = q_arrays(model, ctx)
    if probe.variant == "log-critical":
        B = barrier_arrays(BarrierSpec("log", model, alpha=alpha), ctx).barrier
    else:
        m = _shifted_exponent(model, ctx)
        B = a * delta ** (beta - 2.0) * Lal * ((1.0 - q) * (0.5 * m) ** 2 + model.v.value(ctx) / a)
    slack = B + 0.5 * abs(probe.E - probe.E0) - gDg
    out = []
    for i in range(ctx.n):
        cf = None if closed is None else float(closed[i])
        out.append(AgmonResult(float(g[i]), float(gDg[i]), float(B[i]), float(slack[i]), cf, lam))
    return out


# ----------------------------------------------------------------------
# 2-ARS
# ----------------------------------------------------------------------
def ars2_curvature_expr(alpha: float, phi: str | sp.Expr = "0") -> sp.Expr:
    """``K = (f f_rr - 2 f_r^2)/f^2`` with ``f = (1-r)^alpha e^Phi``."""
    phi_e = parse_field_expr(phi) if isinstance(phi, str) else sp.sympify(phi)
    bad = {s.name for s in phi_e.free_symbols} - {"radius", "theta"}
    if bad:
        raise ValidationError("phi", f"Phi may depend on radius and theta only, got {sorted(bad)}")
    al = sp.nsimplify(alpha)
    f = (1 - RADIUS) ** al * sp.exp(phi_e)
    fr = sp.diff(f, RADIUS)
    frr = sp.diff(fr, RADIUS)
    return sp.simplify((f * frr - 2 * fr ** 2) / f ** 2)


def ars2_closed_form(alpha: float, c: float) -> float:
    """``((1+alpha)/2)^2 - 2 c alpha (1+alpha)``; certified when ``>= 1``."""
    return (0.5 * (1.0 + alpha)) ** 2 - 2.0 * c * alpha * (1.0 + alpha)


def ars2_build(alpha: float, c: float, phi: str = "0", nu0: float = 0.3) -> CoefficientModel:
    phi_e = parse_field_expr(phi)
    al = sp.nsimplify(alpha)
    K = ars2_curvature_expr(alpha, phi_e)
    rho = (1 - RADIUS) ** (-al) / (RADIUS * sp.exp(phi_e))
    d22 = sp.Rational(1, 2) * (1 - RADIUS) ** (2 * al) * RADIUS ** 2 * sp.exp(2 * phi_e)
    V = sp.nsimplify(c) * K
    bulk = {"rho": ScalarField(rho), "d": ScalarField("0.5"), "d12": ScalarField("0"),
            "d22": ScalarField(d22), "V": ScalarField(V)}
    return CoefficientModel(
        Domain.disk(1.0), nu0,
        r=ScalarField(1 / (RADIUS * sp.exp(phi_e))),
        gamma=ScalarField(-al), a=ScalarField("0.5"), beta=ScalarField("0"),
        d12=ScalarField("0"), d22=ScalarField(d22),
        v=ScalarField(-sp.nsimplify(c) * al * (al + 1)), V=ScalarField(V), bulk=bulk)


def ars2_model(alpha: float, c: float, phi: str = "0") -> tuple[CoefficientModel, EsaVerdict]:
    """Build the 2-ARS model on the unit disk and decide its criterion."""
    model = ars2_build(alpha, c, phi)
    verdict = check_criterion("ars2", model)
    closed = ars2_closed_form(alpha, c)
    verdict.notes.append(f"closed form ((1+alpha)/2)^2 - 2 c alpha (1+alpha) = {closed!r}")
    if verdict.infimum is not None and not math.isclose(verdict.infimum, closed, rel_tol=1e-9, abs_tol=1e-12):
        verdict.notes.append("warning: sampled infimum differs from the closed form")
    return model, verdict
