"""Serializable scalar functions of time used as chain parameters.

A controller is one of a few closed-form kinds, so that chain specifications
stay reproducible and JSON-serializable:

========  ==========  ==========================
kind      params      value at ``t``
========  ==========  ==========================
exp       k           ``exp(k t)``
affine    c0, c1      ``c0 + c1 t``
poly      c0, c1, ..  ``c0 + c1 t + c2 t^2 + ..``
cosPlus   c           ``cos t + c``
const     c           ``c``
recip     (none)      ``1 / of(t)``
========  ==========  ==========================
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Mapping

import numpy as np

from .errors import SpecError

_ARITY = {"exp": 1, "affine": 2, "cosPlus": 1, "const": 1, "recip": 0}


@dataclass(frozen=True)
class ControllerFn:
    kind: str
    params: tuple[float, ...] = ()
    of: "ControllerFn | None" = None

    def __post_init__(self) -> None:
        if self.kind not in _ARITY and self.kind != "poly":
            raise SpecError(f"unknown controller kind {self.kind!r}")
        params = tuple(float(p) for p in self.params)
        if not all(math.isfinite(p) for p in params):
            raise SpecError(f"controller {self.kind} has non-finite parameters")
        if self.kind == "poly":
            if not params:
                raise SpecError("poly needs at least one coefficient")
        elif len(params) != _ARITY[self.kind]:
            raise SpecError(f"{self.kind} takes {_ARITY[self.kind]} parameter(s), got {len(params)}")
        if (self.kind == "recip") != (self.of is not None):
            raise SpecError("'of' is required for recip and only allowed there")
        object.__setattr__(self, "params", params)

    def __call__(self, t):
        """Evaluate at a scalar or array of times (vectorized)."""
        t = np.asarray(t, dtype=float)
        p = self.params
        with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
            if self.kind == "exp":
                out = np.exp(p[0] * t)
            elif self.kind == "affine":
                out = p[0] + p[1] * t
            elif self.kind == "poly":
                out = np.polynomial.polynomial.polyval(t, p)
            elif self.kind == "cosPlus":
                out = np.cos(t) + p[0]
            elif self.kind == "const":
                out = np.full_like(t, p[0])
            else:
                out = 1.0 / np.asarray(self.of(t), dtype=float)
        out = np.asarray(out, dtype=float)
        return out if out.ndim else float(out)

    def to_dict(self) -> dict[str, Any]:
        d: dict[str, Any] = {"kind": self.kind, "params": list(self.params)}
        if self.of is not None:
            d["of"] = self.of.to_dict()
        return d

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "ControllerFn":
        if not isinstance(d, Mapping):
            raise SpecError(f"controller must be an object, got {type(d).__name__}")
        unknown = set(d) - {"kind", "params", "of"}
        if unknown:
            raise SpecError(f"unknown controller keys: {sorted(unknown)}")
        if "kind" not in d:
            raise SpecError("controller is missing 'kind'")
        params = d.get("params", [])
        if not isinstance(params, (list, tuple)) or not all(
            isinstance(p, (int, float)) and not isinstance(p, bool) for p in params
        ):
            raise SpecError("controller 'params' must be a list of numbers")
        of = cls.from_dict(d["of"]) if "of" in d else None
        return cls(str(d["kind"]), tuple(params), of)

    def is_constant(self, tmax: float, points: int = 1001) -> bool:
        """True when the controller does not vary on ``[0, tmax]``.

        Every kind is real-analytic wherever it is finite, so it is either
        constant everywhere or constant on no interval at all.
        """
        return _flat(self(np.linspace(0.0, tmax, points)))


def _flat(values: np.ndarray) -> bool:
    scale = max(1.0, float(np.max(np.abs(values))))
    return float(np.ptp(values)) <= 1e-12 * scale


def exp(k: float) -> ControllerFn:
    return ControllerFn("exp", (k,))


def affine(c0: float, c1: float) -> ControllerFn:
    return ControllerFn("affine", (c0, c1))


def poly(*coeffs: float) -> ControllerFn:
    return ControllerFn("poly", tuple(coeffs))


def cos_plus(c: float) -> ControllerFn:
    return ControllerFn("cosPlus", (c,))


def const(c: float) -> ControllerFn:
    return ControllerFn("const", (c,))


def recip(of: ControllerFn) -> ControllerFn:
    return ControllerFn("recip", (), of)
