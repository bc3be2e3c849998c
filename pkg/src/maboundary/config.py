"""Plain-text experiment configuration (INI sections, documented in README).

Experiments carry 15+ parameters, so configuration lives in a sectioned
key-value file rather than positional flags.  Unknown sections or keys are
rejected; type errors report the offending section and key.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError
from .exponents import ExponentContext
from .geometry import AnisotropyProfile, Ball, Box, Domain, ModelRegion, Superellipse

_SCHEMA: dict[str, set[str]] = {
    "context": {"n", "k", "q", "a", "eta", "h"},
    "domain": {"kind", "radius", "center", "lows", "highs", "semi_axes", "powers", "h_grid"},
    "solve": {"problem", "rhs", "tol", "inner_tol", "max_outer", "damping", "c_init", "fit"},
    "fit": {"d_min", "d_max", "depths", "x0", "predicted", "snapshot"},
    "barrier": {"mode", "d0", "diam", "sample_count", "lam", "m_rhs"},
    "iterate": {"lambda0", "steps", "target"},
    "sweep": {"mode", "a_values", "k_values", "q_values", "h_grids"},
}


def _floats(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(v) for v in text.replace(";", ",").split(",") if v.strip())
    except ValueError as exc:
        raise ConfigError(f"expected a comma-separated number list, got {text!r}") from exc


def _float_lists(text: str) -> list[tuple[float, ...]]:
    out = []
    for chunk in text.split(";"):
        if chunk.strip():
            out.append(tuple(float(v) for v in chunk.split(",") if v.strip()))
    return out


@dataclass
class ExperimentConfig:
    """Parsed and validated experiment configuration."""

    command: str
    sections: dict[str, dict[str, str]] = field(default_factory=dict)
    path: str = ""

    # -- raw access helpers -------------------------------------------------
    def has(self, section: str, key: str) -> bool:
        return key in self.sections.get(section, {})

    def get(self, section: str, key: str, default=None) -> str:
        try:
            return self.sections[section][key]
        except KeyError:
            if default is not None:
                return default
            raise ConfigError(f"missing required key [{section}] {key}")

    def get_float(self, section, key, default=None) -> float:
        raw = self.get(section, key, default if default is None else str(default))
        try:
            return float(raw)
        except (TypeError, ValueError):
            raise ConfigError(f"[{section}] {key} = {raw!r} is not a number")

    def get_int(self, section, key, default=None) -> int:
        raw = self.get(section, key, default if default is None else str(default))
        try:
            return int(raw)
        except (TypeError, ValueError):
            raise ConfigError(f"[{section}] {key} = {raw!r} is not an integer")

    def get_bool(self, section, key, default="false") -> bool:
        raw = self.get(section, key, default).strip().lower()
        if raw in ("true", "yes", "on", "1"):
            return True
        if raw in ("false", "no", "off", "0"):
            return False
        raise ConfigError(f"[{section}] {key} = {raw!r} is not a boolean")

    # -- typed builders ------------------------------------------------------
    def context(self) -> ExponentContext:
        n = self.get_int("context", "n")
        a = _floats(self.get("context", "a"))
        k = self.get_float("context", "k") if self.has("context", "k") else None
        q = self.get_float("context", "q") if self.has("context", "q") else None
        try:
            return ExponentContext(n=n, a=a, k=k, q=q)
        except Exception as exc:
            raise ConfigError(f"invalid [context]: {exc}") from exc

    def profile(self) -> AnisotropyProfile:
        a = _floats(self.get("context", "a"))
        eta = _floats(self.get("context", "eta")) if self.has("context", "eta") else (1.0,) * len(a)
        h = self.get_float("context", "h") if self.has("context", "h") else None
        try:
            return AnisotropyProfile(a=a, eta=eta, h=h)
        except Exception as exc:
            raise ConfigError(f"invalid profile in [context]: {exc}") from exc

    def domain_kind(self) -> Domain:
        kind = self.get("domain", "kind").strip().lower()
        try:
            if kind == "ball":
                radius = self.get_float("domain", "radius", 1.0)
                center = (
                    np.array(_floats(self.get("domain", "center")))
                    if self.has("domain", "center")
                    else None
                )
                dim = self.get_int("context", "n", 2)
                return Ball(radius, center=center, dim=dim)
            if kind == "box":
                return Box(_floats(self.get("domain", "lows")), _floats(self.get("domain", "highs")))
            if kind == "model":
                return ModelRegion(self.profile())
            if kind == "superellipse":
                return Superellipse(
                    _floats(self.get("domain", "semi_axes")),
                    _floats(self.get("domain", "powers")),
                )
        except ConfigError:
            raise
        except Exception as exc:
            raise ConfigError(f"invalid [domain]: {exc}") from exc
        raise ConfigError(f"unknown domain kind {kind!r}")

    def h_grid(self) -> float:
        return self.get_float("domain", "h_grid")

    def echo(self) -> dict:
        return {s: dict(kv) for s, kv in self.sections.items()}


def load_config(path: str, command: str) -> ExperimentConfig:
    """Parse and validate against the schema; unknown keys are rejected."""
    parser = configparser.ConfigParser(interpolation=None)
    try:
        with open(path, "r", encoding="utf-8") as fh:
            parser.read_file(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except configparser.Error as exc:
        # configparser reports the offending line for syntax errors
        raise ConfigError(f"malformed config {path}: {exc}") from exc

    sections: dict[str, dict[str, str]] = {}
    for section in parser.sections():
        if section not in _SCHEMA:
            raise ConfigError(f"unknown section [{section}] in {path}")
        allowed = _SCHEMA[section]
        body = {}
        for key, value in parser.items(section):
            if key not in allowed:
                raise ConfigError(f"unknown key {key!r} in section [{section}] of {path}")
            body[key] = value
        sections[section] = body
    return ExperimentConfig(command=command, sections=sections, path=path)
