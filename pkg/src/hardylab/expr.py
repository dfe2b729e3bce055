"""Closed-form scalar field descriptors.

A field is a small expression over the position variables ``delta`` (distance
to the boundary), ``x``, ``y``, ``radius`` and ``theta`` (polar coordinates
about the origin).  Expressions are parsed into sympy trees so that partial
derivatives are exact; ambient gradients follow from the chain rule using the
gradients of the position variables supplied by a :class:`PointContext`.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
import sympy as sp
from sympy.parsing.sympy_parser import (
    convert_xor,
    parse_expr,
    standard_transformations,
)

from .errors import ParseError

SYMBOLS = {name: sp.Symbol(name, real=True) for name in ("delta", "x", "y", "radius", "theta")}
DELTA = SYMBOLS["delta"]
X, Y, RADIUS, THETA = SYMBOLS["x"], SYMBOLS["y"], SYMBOLS["radius"], SYMBOLS["theta"]

_FUNCTIONS = {
    "log": sp.log,
    "ln": sp.log,
    "exp": sp.exp,
    "sin": sp.sin,
    "cos": sp.cos,
    "sqrt": sp.sqrt,
}
_CONSTANTS = {"pi": sp.pi, "e": sp.E}
_ALLOWED_NAMES = set(SYMBOLS) | set(_FUNCTIONS) | set(_CONSTANTS)
_IDENT = re.compile(r"[A-Za-z_][A-Za-z_0-9]*")
_TRANSFORMS = standard_transformations + (convert_xor,)


def parse_field_expr(source: str) -> sp.Expr:
    """Parse an expression string; raise :class:`ParseError` when malformed."""
    if not isinstance(source, str):
        source = repr(source)
    text = source.strip()
    if not text:
        raise ParseError(None, "empty expression")
    # identifiers are checked before anything reaches sympy's evaluator
    for name in _IDENT.findall(re.sub(r"\d+\.?\d*[eE][+-]?\d+", "0", text)):
        if name not in _ALLOWED_NAMES:
            raise ParseError(None, f"unknown name {name!r} in expression {source!r}")
    local = dict(SYMBOLS)
    local.update(_FUNCTIONS)
    local.update(_CONSTANTS)
    try:
        expr = parse_expr(text, local_dict=local, global_dict={"Integer": sp.Integer,
                          "Float": sp.Float, "Rational": sp.Rational, "Symbol": sp.Symbol},
                          transformations=_TRANSFORMS)
    except Exception as exc:  # sympy raises a zoo of exception types here
        raise ParseError(None, f"malformed expression {source!r}: {exc}") from None
    expr = sp.sympify(expr)
    if not isinstance(expr, sp.Expr) or expr.has(sp.zoo, sp.nan, sp.oo, -sp.oo):
        raise ParseError(None, f"expression {source!r} is not a finite scalar")
    return expr


@dataclass
class PointContext:
    """Position variables and their ambient gradients at a batch of points.

    ``values[name]`` has shape ``(n,)``; ``grads[name]`` has shape ``(n, dim)``.
    """

    points: np.ndarray
    values: dict[str, np.ndarray]
    grads: dict[str, np.ndarray]
    extra: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def with_delta(self, delta: np.ndarray, freeze_gradient: bool = True) -> "PointContext":
        """Copy with ``delta`` replaced (used to clamp the bulk to the seam)."""
        values = dict(self.values)
        grads = dict(self.grads)
        values["delta"] = np.asarray(delta, dtype=float)
        if freeze_gradient:
            grads["delta"] = np.zeros_like(self.grads["delta"])
        return PointContext(self.points, values, grads, dict(self.extra))


@lru_cache(maxsize=4096)
def _compile(expr: sp.Expr):
    args = [SYMBOLS[k] for k in SYMBOLS]
    return sp.lambdify(args, expr, modules="numpy")


class ScalarField:
    """A scalar expression with exact partial derivatives."""

    __slots__ = ("source", "expr", "_partials", "_const")

    def __init__(self, source: str | float | sp.Expr):
        if isinstance(source, sp.Expr):
            self.expr = source
            self.source = str(source)
        else:
            self.source = source if isinstance(source, str) else repr(float(source))
            self.expr = parse_field_expr(self.source)
        self._partials: dict[str, sp.Expr] = {}
        self._const = float(self.expr) if not self.expr.free_symbols else None

    def __repr__(self) -> str:
        return f"ScalarField({self.source!r})"

    @property
    def is_constant(self) -> bool:
        return self._const is not None

    @property
    def constant(self) -> float:
        if self._const is None:
            raise ValueError(f"{self.source!r} is not constant")
        return self._const

    @property
    def variables(self) -> set[str]:
        return {s.name for s in self.expr.free_symbols}

    def partial_expr(self, name: str) -> sp.Expr:
        if name not in self._partials:
            self._partials[name] = sp.diff(self.expr, SYMBOLS[name])
        return self._partials[name]

    def derived(self, expr: sp.Expr) -> "ScalarField":
        return ScalarField(sp.sympify(expr))

    def value(self, ctx: PointContext) -> np.ndarray:
        if self._const is not None:
            return np.full(ctx.n, self._const)
        return _evaluate(self.expr, ctx)

    def grad(self, ctx: PointContext) -> np.ndarray:
        out = np.zeros((ctx.n, ctx.dim))
        if self._const is not None:
            return out
        for sym in self.expr.free_symbols:
            d = self.partial_expr(sym.name)
            if d == 0:
                continue
            out += _evaluate(d, ctx)[:, None] * ctx.grads[sym.name]
        return out


def _evaluate(expr: sp.Expr, ctx: PointContext) -> np.ndarray:
    if not expr.free_symbols:
        return np.full(ctx.n, float(expr))
    fn = _compile(expr)
    with np.errstate(all="ignore"):
        val = fn(*(ctx.values[k] for k in SYMBOLS))
    return np.broadcast_to(np.asarray(val, dtype=float), (ctx.n,)).copy()


def as_field(value) -> ScalarField:
    return value if isinstance(value, ScalarField) else ScalarField(value)
