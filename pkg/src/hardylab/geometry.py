"""Exact distance-to-boundary geometry for a catalog of analytic domains.

All domains are centered at the origin.  The catalog covers the interval,
the disk, the annulus and the punctured disk; each has closed-form distance,
gradient and Laplacian of the distance on every boundary layer.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import AmbiguousNearest, PointOutsideDomain, ValidationError
from .expr import PointContext

TIE_TOL = 1e-14


@dataclass(frozen=True)
class BoundaryComponent:
    id: int
    dimension: int
    # point components: ``center``; circle components: ``center`` and ``radius``
    center: tuple[float, ...]
    radius: float = 0.0
    # +1 if the domain lies outside the circle (inner annulus wall), -1 inside
    side: int = -1

    @property
    def is_point(self) -> bool:
        return self.radius == 0.0


@dataclass(frozen=True)
class Domain:
    kind: str
    params: tuple[float, ...]

    def __post_init__(self):
        p = self.params
        if self.kind == "interval":
            if not p[0] < p[1]:
                raise ValidationError("domain", "interval needs a_lo < a_hi")
        elif self.kind in ("disk", "punctured_disk"):
            if not p[0] > 0:
                raise ValidationError("domain", "radius must be positive")
        elif self.kind == "annulus":
            if not 0 < p[0] < p[1]:
                raise ValidationError("domain", "annulus needs 0 < r_in < r_out")
        else:
            raise ValidationError("domain.kind", f"unknown domain kind {self.kind!r}")

    # constructors -------------------------------------------------------
    @classmethod
    def interval(cls, a_lo: float, a_hi: float) -> "Domain":
        return cls("interval", (float(a_lo), float(a_hi)))

    @classmethod
    def disk(cls, radius: float = 1.0) -> "Domain":
        return cls("disk", (float(radius),))

    @classmethod
    def annulus(cls, r_in: float, r_out: float) -> "Domain":
        return cls("annulus", (float(r_in), float(r_out)))

    @classmethod
    def punctured_disk(cls, radius: float = 1.0) -> "Domain":
        return cls("punctured_disk", (float(radius),))

    @classmethod
    def from_dict(cls, spec: dict) -> "Domain":
        kind = spec.get("kind")
        try:
            if kind == "interval":
                return cls.interval(spec["a_lo"], spec["a_hi"])
            if kind == "disk":
                return cls.disk(spec.get("radius", 1.0))
            if kind == "annulus":
                return cls.annulus(spec["r_in"], spec["r_out"])
            if kind == "punctured_disk":
                return cls.punctured_disk(spec.get("radius", 1.0))
        except KeyError as exc:
            raise ValidationError(f"domain.{exc.args[0]}", "missing") from None
        raise ValidationError("domain.kind", f"unknown domain kind {kind!r}")

    def to_dict(self) -> dict:
        names = {"interval": ("a_lo", "a_hi"), "disk": ("radius",),
                 "annulus": ("r_in", "r_out"), "punctured_disk": ("radius",)}[self.kind]
        return {"kind": self.kind, **dict(zip(names, self.params))}

    # structure ------------------------------------------------------------
    @property
    def dim(self) -> int:
        return 1 if self.kind == "interval" else 2

    @property
    def components(self) -> tuple[BoundaryComponent, ...]:
        p = self.params
        if self.kind == "interval":
            return (BoundaryComponent(0, 0, (p[0],), side=+1),
                    BoundaryComponent(1, 0, (p[1],), side=-1))
        if self.kind == "disk":
            return (BoundaryComponent(0, 1, (0.0, 0.0), p[0], side=-1),)
        if self.kind == "annulus":
            return (BoundaryComponent(0, 1, (0.0, 0.0), p[0], side=+1),
                    BoundaryComponent(1, 1, (0.0, 0.0), p[1], side=-1))
        return (BoundaryComponent(0, 1, (0.0, 0.0), p[0], side=-1),
                BoundaryComponent(1, 0, (0.0, 0.0)))

    @property
    def separation(self) -> float:
        """Minimal distance between boundary components (medial distance for one)."""
        p = self.params
        if self.kind == "interval":
            return p[1] - p[0]
        if self.kind == "annulus":
            return p[1] - p[0]
        return p[0]

    @property
    def nu_omega(self) -> float:
        """Validity radius of the distance bundle."""
        return 0.5 * self.separation

    @property
    def measure(self) -> float:
        p = self.params
        if self.kind == "interval":
            return p[1] - p[0]
        if self.kind == "annulus":
            return math.pi * (p[1] ** 2 - p[0] ** 2)
        return math.pi * p[0] ** 2

    @property
    def radial_range(self) -> tuple[float, float]:
        p = self.params
        if self.kind == "interval":
            return p
        if self.kind == "annulus":
            return p
        return (0.0, p[0])

    def contains(self, x) -> np.ndarray:
        pts = as_points(x, self.dim)
        p = self.params
        if self.kind == "interval":
            return (pts[:, 0] > p[0]) & (pts[:, 0] < p[1])
        rr = np.hypot(pts[:, 0], pts[:, 1])
        if self.kind == "disk":
            return rr < p[0]
        if self.kind == "annulus":
            return (rr > p[0]) & (rr < p[1])
        return (rr > 0) & (rr < p[0])


@dataclass(frozen=True)
class DistanceBundle:
    delta: float
    grad_delta: np.ndarray
    laplacian_delta: float
    nearest_component: int


def as_points(x, dim: int) -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    if dim == 1:
        return arr.reshape(-1, 1)
    return arr.reshape(-1, 2)


def _component_distances(domain: Domain, pts: np.ndarray):
    """Per-component (delta, grad, laplacian) arrays of shape (m, n[, d])."""
    comps = domain.components
    n = pts.shape[0]
    deltas = np.empty((len(comps), n))
    grads = np.empty((len(comps), n, domain.dim))
    laps = np.empty((len(comps), n))
    if domain.kind == "interval":
        for c in comps:
            deltas[c.id] = c.side * (pts[:, 0] - c.center[0])
            grads[c.id, :, 0] = c.side
            laps[c.id] = 0.0
        return deltas, grads, laps
    rr = np.hypot(pts[:, 0], pts[:, 1])
    with np.errstate(all="ignore"):
        unit = pts / rr[:, None]
        inv_r = 1.0 / rr
    for c in comps:
        if c.is_point:
            deltas[c.id] = rr
            grads[c.id] = unit
            laps[c.id] = inv_r  # (d - k - 1) / delta with d=2, k=0
        else:
            deltas[c.id] = c.side * (rr - c.radius)
            grads[c.id] = c.side * unit
            laps[c.id] = c.side * inv_r
    return deltas, grads, laps


def distance_arrays(domain: Domain, x, check_ties: bool = True):
    """Vectorized distance bundle: (delta, grad, laplacian, component id)."""
    pts = as_points(x, domain.dim)
    inside = domain.contains(pts)
    if not np.all(inside):
        bad = pts[~inside][0]
        raise PointOutsideDomain(f"point {bad.tolist()} is not strictly inside {domain.kind}")
    deltas, grads, laps = _component_distances(domain, pts)
    order = np.argsort(deltas, axis=0, kind="stable")
    nearest = order[0]
    idx = np.arange(pts.shape[0])
    delta = deltas[nearest, idx]
    if check_ties:
        if len(domain.components) > 1:
            second = deltas[order[1], idx]
            tied = np.abs(second - delta) <= TIE_TOL
            if np.any(tied):
                raise AmbiguousNearest(
                    f"point {pts[tied][0].tolist()} is equidistant to two boundary components")
        if domain.dim == 2 and domain.kind == "disk":
            if np.any(np.hypot(pts[:, 0], pts[:, 1]) <= TIE_TOL):
                raise AmbiguousNearest("disk center has no unique nearest boundary point")
    return delta, grads[nearest, idx], laps[nearest, idx], nearest


def distance_bundle(domain: Domain, x) -> DistanceBundle:
    """Exact distance, its gradient and Laplacian at a single interior point."""
    delta, grad, lap, comp = distance_arrays(domain, x)
    if delta.shape[0] != 1:
        raise ValueError("distance_bundle takes a single point; use distance_arrays")
    return DistanceBundle(float(delta[0]), grad[0].copy(), float(lap[0]), int(comp[0]))


def normal_projection(bundle: DistanceBundle | np.ndarray) -> np.ndarray:
    """Orthogonal projector onto the normal direction, ``grad_delta grad_delta^T``."""
    g = bundle.grad_delta if isinstance(bundle, DistanceBundle) else np.asarray(bundle, float)
    return np.outer(g, g)


def tangent_frame(grad_delta: np.ndarray) -> np.ndarray:
    """Orthonormal frame with the normal first.

    Accepts ``(d,)`` or ``(n, d)``; returns ``(d, d)`` or ``(n, d, d)`` whose
    columns are (normal, tangents).  In 2-D the tangent is the normal rotated by
    +pi/2.  Higher dimensions are completed by Householder reflection.
    """
    g = np.asarray(grad_delta, dtype=float)
    single = g.ndim == 1
    g = np.atleast_2d(g)
    n, d = g.shape
    if d == 1:
        frame = g[:, :, None].copy()
    elif d == 2:
        frame = np.empty((n, 2, 2))
        frame[:, :, 0] = g
        frame[:, 0, 1] = -g[:, 1]
        frame[:, 1, 1] = g[:, 0]
    else:
        frame = np.empty((n, d, d))
        e1 = np.zeros(d)
        e1[0] = 1.0
        for i in range(n):
            v = g[i] - e1
            if np.linalg.norm(v) < 1e-14:
                h = np.eye(d)
            else:
                v = v / np.linalg.norm(v)
                h = np.eye(d) - 2.0 * np.outer(v, v)
            frame[i] = h
            frame[i][:, 0] = g[i]
    return frame[0] if single else frame


def tangent_angle(domain: Domain, pts: np.ndarray) -> np.ndarray:
    if domain.dim == 1:
        return np.zeros(pts.shape[0])
    return np.arctan2(pts[:, 1], pts[:, 0])


def layer_points(domain: Domain, component: int, delta, angle=None) -> np.ndarray:
    """Points at distance ``delta`` from one boundary component.

    ``angle`` is the polar angle about the origin (ignored in 1-D).  Inputs
    broadcast against each other.
    """
    comp = domain.components[component]
    delta = np.asarray(delta, dtype=float)
    if domain.dim == 1:
        return (comp.center[0] + comp.side * delta).reshape(-1, 1)
    angle = np.zeros_like(delta) if angle is None else np.asarray(angle, dtype=float)
    delta, angle = np.broadcast_arrays(delta, angle)
    if comp.is_point:
        rr = delta
    else:
        rr = comp.radius + comp.side * delta
    return np.stack([rr * np.cos(angle), rr * np.sin(angle)], axis=-1).reshape(-1, 2)


def point_context(domain: Domain, x, check_ties: bool = True) -> PointContext:
    """Evaluate every position variable (and gradient) used by field descriptors."""
    pts = as_points(x, domain.dim)
    delta, grad, lap, comp = distance_arrays(domain, pts, check_ties=check_ties)
    return _context(domain, pts, delta, grad, lap, comp)


def context_on_component(domain: Domain, component: int, delta, angle=None) -> PointContext:
    """Context at layer points, with the distance taken to ``component`` exactly.

    Unlike :func:`point_context` this never looks at the other components, so
    it can be used past the medial axis (1-D reductions).
    """
    pts = layer_points(domain, component, delta, angle)
    deltas, grads, laps = _component_distances(domain, pts)
    comp = np.full(pts.shape[0], component)
    return _context(domain, pts, deltas[component], grads[component], laps[component], comp)


def _context(domain, pts, delta, grad, lap, comp) -> PointContext:
    n, d = pts.shape
    zero = np.zeros((n, d))
    values = {"delta": delta, "x": pts[:, 0].copy()}
    grads = {"delta": grad, "x": zero.copy()}
    grads["x"][:, 0] = 1.0
    if d == 2:
        values["y"] = pts[:, 1].copy()
        grads["y"] = zero.copy()
        grads["y"][:, 1] = 1.0
        rr = np.hypot(pts[:, 0], pts[:, 1])
        values["radius"] = rr
        values["theta"] = np.arctan2(pts[:, 1], pts[:, 0])
        with np.errstate(all="ignore"):
            grads["radius"] = pts / rr[:, None]
            grads["theta"] = np.stack([-pts[:, 1], pts[:, 0]], axis=-1) / (rr ** 2)[:, None]
    else:
        values["y"] = np.zeros(n)
        grads["y"] = zero.copy()
        values["radius"] = np.abs(pts[:, 0])
        grads["radius"] = np.sign(pts[:, 0])[:, None] * np.ones((n, 1))
        values["theta"] = np.zeros(n)
        grads["theta"] = zero.copy()
    return PointContext(pts, values, grads, {"laplacian_delta": lap, "component": comp})


def sampled_c_delta(domain: Domain, nu: float, n: int = 4096, seed: int = 0) -> float:
    """Sampled sup of |Laplacian(delta) - (d-k-1)/delta| over the layer of width ``nu``."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for comp in domain.components:
        delta = nu * rng.uniform(1e-6, 1.0, n)
        ang = rng.uniform(0, 2 * np.pi, n)
        ctx = context_on_component(domain, comp.id, delta, ang)
        singular = (domain.dim - comp.dimension - 1) / delta
        worst = max(worst, float(np.max(np.abs(ctx.extra["laplacian_delta"] - singular))))
    return worst


def component_distance(domain: Domain, component: int, x):
    """Distance to one component and its gradient, ignoring the others."""
    pts = as_points(x, domain.dim)
    deltas, grads, _ = _component_distances(domain, pts)
    return deltas[component], grads[component]
