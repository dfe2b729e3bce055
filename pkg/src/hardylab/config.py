"""Problem configuration files (JSON with expression-string coefficients).

Example::

    {
      "domain": {"kind": "disk", "radius": 1.0},
      "nu0": 0.3,
      "beta": "1.5", "gamma": "0", "a": "1", "d22": "1", "d12": "0.3*delta^1.0"
    }

All problems are collected before reporting, so one run lists every error.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field
from pathlib import Path

from .coefficients import BULK_KEYS, CoefficientModel
from .errors import ConfigError, HardyLabError, ParseError, ValidationError
from .expr import ScalarField
from .geometry import Domain

FIELD_KEYS = ("r", "gamma", "a", "beta", "d12", "d22", "v", "V")
NUMBER_KEYS = ("nu0", "s", "s_beta", "log_alpha", "w_mu", "mu")
TOP_KEYS = ("domain", *FIELD_KEYS, *NUMBER_KEYS, "bulk", "seed", "options")
DOMAIN_KEYS = {
    "interval": ("a_lo", "a_hi"),
    "disk": ("radius",),
    "annulus": ("r_in", "r_out"),
    "punctured_disk": ("radius",),
}
DEFAULTS = {"r": "1", "gamma": "0", "a": "1", "beta": "0", "d12": "0", "v": "0",
            "s": 0.0, "s_beta": 0.0, "log_alpha": 0.0, "seed": 0}


@dataclass
class ProblemConfig:
    domain: Domain
    nu0: float
    fields: dict[str, ScalarField]
    s: float = 0.0
    s_beta: float = 0.0
    log_alpha: float = 0.0
    w_mu: float | None = None
    mu: float | None = None
    bulk: dict[str, ScalarField] = field(default_factory=dict)
    seed: int = 0
    options: dict = field(default_factory=dict)
    model: CoefficientModel | None = None

    def build_model(self) -> CoefficientModel:
        if self.model is None:
            f = self.fields
            self.model = CoefficientModel(
                self.domain, self.nu0, r=f["r"], gamma=f["gamma"], a=f["a"], beta=f["beta"],
                d12=f["d12"], d22=f.get("d22"), log_alpha=self.log_alpha, s=self.s,
                s_beta=self.s_beta, v=f["v"], w_mu=self.w_mu, mu=self.mu, V=f.get("V"),
                bulk=self.bulk)
        return self.model

    def to_dict(self) -> dict:
        out = {"domain": self.domain.to_dict(), "nu0": self.nu0}
        for k in FIELD_KEYS:
            if k in self.fields:
                out[k] = self.fields[k].source
        out.update({"s": self.s, "s_beta": self.s_beta, "log_alpha": self.log_alpha,
                    "w_mu": self.w_mu, "mu": self.mu if self.mu is not None else self.nu0 / 4})
        if self.bulk:
            out["bulk"] = {k: self.bulk[k].source for k in BULK_KEYS if k in self.bulk}
        out["seed"] = self.seed
        if self.options:
            out["options"] = self.options
        return out


def _line_of(text: str, key: str) -> int | None:
    m = re.search(r'"%s"\s*:' % re.escape(key), text)
    return text.count("\n", 0, m.start()) + 1 if m else None


def _number(errors, raw, key, *, positive=False, allow_none=False):
    val = raw.get(key)
    if val is None:
        if allow_none:
            return None
        errors.append(ValidationError(key, "missing"))
        return None
    if isinstance(val, bool) or not isinstance(val, (int, float)):
        errors.append(ValidationError(key, f"expected a number, got {type(val).__name__}"))
        return None
    val = float(val)
    if not math.isfinite(val):
        errors.append(ValidationError(key, "must be finite"))
        return None
    if positive and val <= 0:
        errors.append(ValidationError(key, "must be positive"))
        return None
    return val


def _field(errors, text, key, val):
    if isinstance(val, bool) or not isinstance(val, (str, int, float)):
        errors.append(ValidationError(key, "expected an expression string or a number"))
        return None
    if isinstance(val, float) and not math.isfinite(val):
        errors.append(ValidationError(key, "must be finite"))
        return None
    try:
        return ScalarField(val if isinstance(val, str) else repr(float(val)))
    except ParseError as exc:
        errors.append(ParseError(_line_of(text, key), f"{key}: {exc.message}"))
        return None


def parse_config_text(text: str) -> ProblemConfig:
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError([ParseError(exc.lineno, exc.msg)]) from None
    if not isinstance(raw, dict):
        raise ConfigError([ParseError(1, "top level must be an object")])
    errors: list[HardyLabError] = []
    for k in raw:
        if k not in TOP_KEYS:
            errors.append(ValidationError(k, "unknown key"))

    domain = None
    dspec = raw.get("domain")
    if not isinstance(dspec, dict):
        errors.append(ValidationError("domain", "missing or not an object"))
    else:
        kind = dspec.get("kind")
        allowed = DOMAIN_KEYS.get(kind)
        if allowed is None:
            errors.append(ValidationError("domain.kind", f"unknown domain kind {kind!r}"))
        else:
            for k in dspec:
                if k != "kind" and k not in allowed:
                    errors.append(ValidationError(f"domain.{k}", "unknown key"))
            nums = {k: _number(errors, dspec, k, allow_none=k == "radius") for k in allowed}
            if all(nums[k] is not None or k == "radius" for k in allowed):
                try:
                    domain = Domain.from_dict({"kind": kind, **{k: v for k, v in nums.items() if v is not None}})
                except ValidationError as exc:
                    errors.append(exc)

    nu0 = _number(errors, raw, "nu0", positive=True)
    nums = {}
    for k in ("s", "s_beta", "log_alpha"):
        nums[k] = _number(errors, raw, k, allow_none=True)
        if nums[k] is None:
            nums[k] = DEFAULTS[k]
    w_mu = _number(errors, raw, "w_mu", allow_none=True)
    mu = _number(errors, raw, "mu", positive=True, allow_none=True)
    if nums["s"] is not None and nums["s_beta"] is not None and not nums["s_beta"] <= nums["s"] < 1:
        errors.append(ValidationError("s_beta", "violates the constraint s_β ≤ s < 1"))

    fields = {}
    for k in FIELD_KEYS:
        if k in raw and raw[k] is not None:
            fields[k] = _field(errors, text, k, raw[k])
        elif k in DEFAULTS:
            fields[k] = ScalarField(DEFAULTS[k])

    bulk = {}
    braw = raw.get("bulk", {})
    if not isinstance(braw, dict):
        errors.append(ValidationError("bulk", "must be an object"))
        braw = {}
    for k, v in braw.items():
        if k not in BULK_KEYS:
            errors.append(ValidationError(f"bulk.{k}", "unknown key"))
            continue
        bulk[k] = _field(errors, text, k, v)

    seed = raw.get("seed", 0)
    if isinstance(seed, bool) or not isinstance(seed, int) or seed < 0:
        errors.append(ValidationError("seed", "must be a nonnegative integer"))
        seed = 0
    options = raw.get("options", {})
    if not isinstance(options, dict):
        errors.append(ValidationError("options", "must be an object"))
        options = {}

    if errors:
        raise ConfigError(errors)
    cfg = ProblemConfig(domain, nu0, fields, nums["s"], nums["s_beta"], nums["log_alpha"],
                        w_mu, mu, bulk, seed, options)
    try:
        cfg.build_model()
    except HardyLabError as exc:
        raise ConfigError([exc]) from None
    return cfg


def parse_config(path) -> ProblemConfig:
    """Parse and validate a configuration file; raises :class:`ConfigError`."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError([ParseError(None, f"cannot read {path}: {exc.strerror}")]) from None
    return parse_config_text(text)
