"""Experiment configuration: a flat `key = value` text format with defaults.

Lists are comma separated; booleans/absent keys fall back to the documented
defaults. parse(serialize(cfg)) round-trips exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields

import numpy as np

from .errors import ParseError, ValidationError

EULER_DEFAULT_LADDER = (0.2, 0.1, 0.05, 0.025)
EM_DEFAULT_LADDER = (0.2, 0.1, 0.05)


@dataclass
class ExperimentConfig:
    system: str = "euler"          # euler | em
    d: int = 1
    N: int = 256
    L: float = 2.0 * np.pi
    a: float = 1.0
    gamma: float = 2.0
    m: int = 3
    eps_ladder: tuple = EULER_DEFAULT_LADDER
    dt: float = 0.0                # 0 means auto (CFL-based)
    T: float = 2.0
    family: str = "cosine"         # cosine | bump
    delta: float = 0.05
    mode: int = 1
    preparedness: str = "ill"      # ill | well
    rho1_scenario: str = "zero"    # zero | mode2 (well-prepared runs)
    u_amp: float = 1.0
    Be: tuple = (0.0, 0.0, 1.0)
    nsamples: int = 50
    seed: int = 0
    scheme_order: int = 2

    def validate(self):
        if self.system not in ("euler", "em"):
            raise ValidationError(f"unknown system {self.system!r}")
        if self.system == "em" and self.d != 3:
            raise ValidationError("em requires d=3")
        if self.d not in (1, 2, 3):
            raise ValidationError(f"d must be 1, 2 or 3, got {self.d}")
        if self.N < 8 or (self.N & (self.N - 1)) != 0:
            raise ValidationError(f"N must be a power of two >= 8, got {self.N}")
        if self.L <= 0:
            raise ValidationError("L must be positive")
        if self.m < self.d // 2 + 2:
            raise ValidationError(
                f"m = {self.m} too small for d = {self.d}: need m >= {self.d // 2 + 2}")
        lad = tuple(self.eps_ladder)
        if any(not (0.0 < e <= 1.0) for e in lad):
            raise ValidationError("eps ladder values must lie in (0, 1]")
        if any(lad[i] <= lad[i + 1] for i in range(len(lad) - 1)):
            raise ValidationError("eps ladder must be strictly decreasing")
        if self.delta <= 0:
            raise ValidationError("delta must be positive")
        if self.T <= 0 or self.dt < 0:
            raise ValidationError("T must be positive and dt non-negative")
        if self.nsamples < 2:
            raise ValidationError("nsamples must be >= 2")
        if self.family not in ("cosine", "bump"):
            raise ValidationError(f"unknown family {self.family!r}")
        if self.preparedness not in ("ill", "well"):
            raise ValidationError(f"unknown preparedness {self.preparedness!r}")
        if self.rho1_scenario not in ("zero", "mode2"):
            raise ValidationError(f"unknown rho1 scenario {self.rho1_scenario!r}")
        if self.scheme_order not in (1, 2):
            raise ValidationError("scheme_order must be 1 or 2")
        if len(self.Be) != 3:
            raise ValidationError("Be must have three components")
        return self


_FIELD_TYPES = {f.name: f.type for f in fields(ExperimentConfig)}
_TUPLE_KEYS = {"eps_ladder", "Be"}
_INT_KEYS = {"d", "N", "m", "mode", "nsamples", "seed", "scheme_order"}
_FLOAT_KEYS = {"L", "a", "gamma", "dt", "T", "delta", "u_amp"}
_STR_KEYS = {"system", "family", "preparedness", "rho1_scenario"}


def default_config(system: str = "euler") -> ExperimentConfig:
    if system == "em":
        return ExperimentConfig(
            system="em", d=3, N=32, m=3, eps_ladder=EM_DEFAULT_LADDER, T=1.0,
            delta=0.02, u_amp=0.1, nsamples=50)
    return ExperimentConfig()


def _parse_value(key: str, raw: str, lineno: int):
    raw = raw.strip()
    try:
        if key in _TUPLE_KEYS:
            parts = [p for p in raw.replace(",", " ").split() if p]
            return tuple(float(p) for p in parts)
        if key in _INT_KEYS:
            return int(raw)
        if key in _FLOAT_KEYS:
            return float(raw)
        if key in _STR_KEYS:
            return raw
    except ValueError as exc:
        raise ParseError(f"bad value for {key!r} on line {lineno}: {raw!r}",
                         line=lineno, key=key) from exc
    raise ParseError(f"unknown key {key!r} on line {lineno}", line=lineno, key=key)


def parse_config_text(text: str) -> ExperimentConfig:
    data = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ParseError(f"expected 'key = value' on line {lineno}: {line!r}",
                             line=lineno)
        key, raw = (s.strip() for s in stripped.split("=", 1))
        if key not in _FIELD_TYPES:
            raise ParseError(f"unknown key {key!r} on line {lineno}",
                             line=lineno, key=key)
        data[key] = _parse_value(key, raw, lineno)

    system = data.get("system", "euler")
    cfg = default_config(system)
    for key, val in data.items():
        setattr(cfg, key, val)
    return cfg.validate()


def parse_config(path) -> ExperimentConfig:
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ParseError(f"cannot read config {path}: {exc}") from exc
    return parse_config_text(text)


def serialize_config(cfg: ExperimentConfig) -> str:
    lines = []
    for f in fields(ExperimentConfig):
        val = getattr(cfg, f.name)
        if f.name in _TUPLE_KEYS:
            rendered = ", ".join(repr(float(v)) for v in val)
        elif f.name in _FLOAT_KEYS:
            rendered = repr(float(val))
        else:
            rendered = str(val)
        lines.append(f"{f.name} = {rendered}")
    return "\n".join(lines) + "\n"


def config_dict(cfg: ExperimentConfig) -> dict:
    out = {}
    for f in fields(ExperimentConfig):
        val = getattr(cfg, f.name)
        if isinstance(val, tuple):
            val = list(val)
        out[f.name] = val
    return out
