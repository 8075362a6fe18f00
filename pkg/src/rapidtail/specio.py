"""TOML serialization of skew-elliptical specs.

Schema (documented for the CLI): a table with keys

* ``mu``        -- array of d floats,
* ``sigma``     -- row-major array of d arrays of d floats,
* ``delta``     -- array of d floats,
* ``generator`` -- string tag, currently only "normal".

The serialization is canonical (shortest round-trip float formatting), so
its SHA-256 digest identifies a spec in report metadata, and a spec survives
a serialize/parse round trip value-identically.
"""

from __future__ import annotations

import hashlib

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from .errors import DomainError
from .generators import make_normal_generator
from .skewell import SkewEllipticalSpec, build_spec

__all__ = ["spec_digest", "spec_from_dict", "spec_from_toml", "spec_to_toml"]


def _fmt_floats(values) -> str:
    return "[" + ", ".join(repr(float(v)) for v in values) + "]"


def spec_to_toml(spec: SkewEllipticalSpec) -> str:
    """Canonical TOML text for a spec (builtin normal generator only)."""
    if not spec.is_normal:
        raise DomainError("only specs with the builtin normal generator serialize")
    rows = ", ".join(_fmt_floats(row) for row in np.asarray(spec.sigma))
    return (
        f"mu = {_fmt_floats(spec.mu)}\n"
        f"sigma = [{rows}]\n"
        f"delta = {_fmt_floats(spec.delta)}\n"
        f'generator = "normal"\n'
    )


def spec_from_dict(data: dict) -> SkewEllipticalSpec:
    """Build a spec from a parsed TOML table, validating the schema."""
    missing = [k for k in ("mu", "sigma", "delta", "generator") if k not in data]
    if missing:
        raise DomainError(f"spec table is missing keys: {missing}")
    tag = data["generator"]
    if tag != "normal":
        raise DomainError(f"unknown generator tag {tag!r}; only \"normal\" is supported")
    mu = np.asarray(data["mu"], dtype=float)
    return build_spec(
        mu,
        np.asarray(data["sigma"], dtype=float),
        np.asarray(data["delta"], dtype=float),
        make_normal_generator(mu.shape[0] + 1),
    )


def spec_from_toml(text: str) -> SkewEllipticalSpec:
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise DomainError(f"invalid TOML: {exc}") from exc
    return spec_from_dict(data)


def spec_digest(spec: SkewEllipticalSpec) -> str:
    """SHA-256 hex digest of the canonical serialization."""
    return hashlib.sha256(spec_to_toml(spec).encode("utf-8")).hexdigest()
