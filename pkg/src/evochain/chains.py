"""The 25 closed-form chain families, the two-state Markov preset, and CK checks.

A chain assigns a structural matrix ``M[s, t]`` to every time pair
``0 <= s <= t``; it is a chain when ``M[s, t] = M[s, tau] M[tau, t]`` for all
``s <= tau <= t``. Matrices are evaluated in vectorized form
(:func:`matrix_batch`); :func:`matrix_at` is the scalar wrapper.

Piecewise families switch branch at a cutoff ``c`` with the first branch on
``t < c`` and the second on ``t >= c``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Mapping

import numpy as np

from .controllers import ControllerFn
from .core import StructMatrix2
from .errors import DomainError, SpecError
from .sampling import uniforms

NONVANISHING_TOL = 1e-12
VALIDATION_POINTS = 10_001
MARKOV = "markov2"

_SLOT_ALIASES = {"Φ": "Phi", "Ψ": "Psi", "ψ": "psi", "θ": "theta"}
_SPEC_KEYS = {"family", "controllers", "a", "b", "lambda", "mu", "Q"}


@dataclass(frozen=True)
class FamilyInfo:
    family: int | str
    slots: tuple[str, ...] = ()
    nonvanishing: tuple[str, ...] = ()
    cutoffs: tuple[str, ...] = ()
    shape: bool = False
    rates: bool = False

    def to_dict(self) -> dict[str, Any]:
        params = list(self.cutoffs)
        if self.family == 19:
            params = ["b (or a)"]
        if self.shape:
            params += ["lambda", "mu"]
        if self.rates:
            params.append("Q")
        return {
            "family": self.family,
            "slots": list(self.slots),
            "nonvanishing": list(self.nonvanishing),
            "parameters": params,
        }


def _info(fam, slots="", nonzero="", cutoffs="", **kw) -> FamilyInfo:
    return FamilyInfo(fam, tuple(slots.split()), tuple(nonzero.split()), tuple(cutoffs.split()), **kw)


FAMILIES: dict[int | str, FamilyInfo] = {
    f.family: f
    for f in [
        _info(0),
        _info(1, "Psi", "Psi"),
        _info(2, cutoffs="b"),
        _info(3, "Phi", "Phi"),
        _info(4, "Phi Psi", "Phi Psi"),
        _info(5, "Phi", "Phi", "b"),
        _info(6, cutoffs="a"),
        _info(7, "Psi", "Psi", "a"),
        _info(8, cutoffs="a b"),
        _info(9),
        _info(10, "h g", "h"),
        _info(11, "psi", "", "a"),
        _info(12, "h g", "h"),
        _info(13, "psi", "", "a"),
        _info(14, "Phi psi", "Phi"),
        _info(15, "psi", "", "a"),
        _info(16, "g psi", "psi"),
        _info(17, "Phi psi g", "Phi psi"),
        _info(18, "h psi", "psi", "a"),
        _info(19, "h", "", "b"),
        _info(20, "Phi v w", "Phi", "b"),
        _info(21, "v", "", "a b"),
        _info(22, "f"),
        _info(23, "theta", "theta", shape=True),
        _info(24, "g", "", "a"),
        _info(MARKOV, rates=True),
    ]
}


@dataclass(frozen=True)
class Violation:
    kind: str
    slot: str | None = None
    time: float | None = None
    detail: str = ""

    def to_dict(self) -> dict[str, Any]:
        return {"kind": self.kind, "slot": self.slot, "time": self.time, "detail": self.detail}


@dataclass(frozen=True)
class ChainSpec:
    """Family id plus controllers and scalar parameters.

    ``tmax`` is the range the spec was validated on (``None`` when it was
    not); matrices requested beyond it raise :class:`DomainError`.
    """

    family: int | str
    controllers: Mapping[str, ControllerFn] = field(default_factory=dict)
    a: float | None = None
    b: float | None = None
    lam: float | None = None
    mu: float | None = None
    Q: tuple[tuple[float, float], tuple[float, float]] | None = None
    tmax: float | None = None

    def __post_init__(self) -> None:
        if self.family not in FAMILIES:
            raise SpecError(f"unknown family {self.family!r}")
        slots = {}
        for name, fn in dict(self.controllers).items():
            name = _SLOT_ALIASES.get(name, name)
            if not isinstance(fn, ControllerFn):
                raise SpecError(f"slot {name} is not a controller")
            slots[name] = fn
        object.__setattr__(self, "controllers", slots)
        for name in ("a", "b", "lam", "mu"):
            value = getattr(self, name)
            if value is not None:
                object.__setattr__(self, name, float(value))
        if self.Q is not None:
            q = np.asarray(self.Q, dtype=float)
            if q.shape != (2, 2):
                raise SpecError("Q must be a 2x2 matrix")
            object.__setattr__(self, "Q", tuple(tuple(float(v) for v in row) for row in q))

    @property
    def info(self) -> FamilyInfo:
        return FAMILIES[self.family]

    @property
    def cutoff(self) -> float | None:
        """Family 19's single cutoff, accepted under either name."""
        return self.b if self.b is not None else self.a

    def cutoff_values(self) -> list[float]:
        if self.family == 19:
            return [] if self.cutoff is None else [self.cutoff]
        return [v for v in (getattr(self, c) for c in self.info.cutoffs) if v is not None]

    def with_tmax(self, tmax: float | None) -> "ChainSpec":
        return ChainSpec(self.family, self.controllers, self.a, self.b, self.lam, self.mu, self.Q, tmax)

    def to_dict(self) -> dict[str, Any]:
        d: dict[str, Any] = {"family": self.family}
        if self.controllers:
            d["controllers"] = {k: fn.to_dict() for k, fn in self.controllers.items()}
        for key, attr in (("a", "a"), ("b", "b"), ("lambda", "lam"), ("mu", "mu")):
            if getattr(self, attr) is not None:
                d[key] = getattr(self, attr)
        if self.Q is not None:
            d["Q"] = [list(row) for row in self.Q]
        return d

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "ChainSpec":
        if not isinstance(d, Mapping):
            raise SpecError("spec must be a JSON object")
        unknown = set(d) - _SPEC_KEYS
        if unknown:
            raise SpecError(f"unknown spec keys: {sorted(unknown)}")
        if "family" not in d:
            raise SpecError("spec is missing 'family'")
        family = d["family"]
        if isinstance(family, bool) or not (isinstance(family, int) or family == MARKOV):
            raise SpecError(f"family must be an integer 0..24 or {MARKOV!r}")
        ctrl = d.get("controllers", {})
        if not isinstance(ctrl, Mapping):
            raise SpecError("'controllers' must be an object")
        scalars = {}
        for key in ("a", "b", "lambda", "mu"):
            value = d.get(key)
            if value is not None and (isinstance(value, bool) or not isinstance(value, (int, float))):
                raise SpecError(f"'{key}' must be a number")
            scalars[key] = value
        return cls(
            family,
            {name: ControllerFn.from_dict(fn) for name, fn in ctrl.items()},
            scalars["a"],
            scalars["b"],
            scalars["lambda"],
            scalars["mu"],
            d.get("Q"),
        )


def validate(spec: ChainSpec, tmax: float) -> list[Violation]:
    """All violated invariants of ``spec`` on ``[0, tmax]``; empty when valid."""
    if not tmax > 0:
        raise ValueError("tmax must be positive")
    info = spec.info
    out: list[Violation] = []
    for slot in info.slots:
        if slot not in spec.controllers:
            out.append(Violation("MissingSlot", slot, detail=f"family {spec.family} needs {slot}"))
    for slot in spec.controllers:
        if slot not in info.slots:
            out.append(Violation("UnexpectedSlot", slot, detail=f"family {spec.family} has no slot {slot}"))
    grid = np.linspace(0.0, tmax, VALIDATION_POINTS)
    for slot in info.slots:
        fn = spec.controllers.get(slot)
        if fn is None:
            continue
        values = fn(grid)
        bad = ~np.isfinite(values)
        if bad.any():
            out.append(Violation("NonFiniteController", slot, float(grid[np.argmax(bad)])))
            continue
        if slot in info.nonvanishing:
            small = np.abs(values) <= NONVANISHING_TOL
            if small.any():
                out.append(Violation("VanishingController", slot, float(grid[np.argmax(small)])))
    if spec.family == 19:
        if spec.a is not None and spec.b is not None and spec.a != spec.b:
            out.append(Violation("BadCutoff", "b", detail="family 19 has one cutoff; a and b differ"))
        names = ["b"]
        values = [spec.cutoff]
    else:
        names = list(info.cutoffs)
        values = [getattr(spec, c) for c in names]
    for name, value in zip(names, values):
        if value is None:
            out.append(Violation("BadCutoff", name, detail="missing"))
        elif not (math.isfinite(value) and value > 0):
            out.append(Violation("BadCutoff", name, detail=f"must be positive, got {value}"))
    if info.shape:
        if spec.lam is None or spec.mu is None:
            out.append(Violation("MissingSlot", "lambda/mu", detail="family 23 needs lambda and mu"))
        elif spec.lam == spec.mu:
            out.append(Violation("LambdaEqualsMu", detail=f"lambda = mu = {spec.lam}"))
    if info.rates:
        out.extend(_check_rates(spec.Q))
    return out


def _check_rates(Q) -> list[Violation]:
    if Q is None:
        return [Violation("BadRateMatrix", "Q", detail="missing")]
    q = np.asarray(Q, dtype=float)
    if not np.all(np.isfinite(q)):
        return [Violation("BadRateMatrix", "Q", detail="non-finite entry")]
    out = []
    if q[0, 1] < 0 or q[1, 0] < 0:
        out.append(Violation("BadRateMatrix", "Q", detail="negative off-diagonal rate"))
    if np.any(np.abs(q.sum(axis=1)) > 1e-12 * max(1.0, float(np.abs(q).max()))):
        out.append(Violation("BadRateMatrix", "Q", detail="rows must sum to zero"))
    return out


def validated(spec: ChainSpec, tmax: float) -> ChainSpec:
    """``spec`` bound to ``[0, tmax]``; raises :class:`SpecError` listing violations."""
    problems = validate(spec, tmax)
    if problems:
        text = "; ".join(f"{v.kind}({v.slot or ''}{'' if v.time is None else f' @ {v.time:g}'}) {v.detail}".strip() for v in problems)
        raise SpecError(text)
    return spec.with_tmax(tmax)


def check_times(spec: ChainSpec, s, t) -> tuple[np.ndarray, np.ndarray]:
    s, t = np.broadcast_arrays(np.atleast_1d(np.asarray(s, dtype=float)), np.atleast_1d(np.asarray(t, dtype=float)))
    bad = ~(np.isfinite(s) & np.isfinite(t) & (s >= 0) & (s <= t))
    if spec.tmax is not None:
        bad |= t > spec.tmax * (1 + 1e-12)
    if bad.any():
        i = int(np.argmax(bad))
        rng = "" if spec.tmax is None else f" within [0, {spec.tmax:g}]"
        raise DomainError(f"time pair (s={float(s[i])!r}, t={float(t[i])!r}) is not 0 <= s <= t{rng}")
    return s.astype(float), t.astype(float)


class Slots:
    """Controller values with the nonvanishing check applied on access."""

    def __init__(self, spec: ChainSpec):
        self.spec = spec

    def __call__(self, slot: str, x: np.ndarray) -> np.ndarray:
        fn = self.spec.controllers.get(slot)
        if fn is None:
            raise SpecError(f"family {self.spec.family} needs controller {slot}")
        v = np.asarray(fn(x), dtype=float)
        bad = ~np.isfinite(v)
        if slot in self.spec.info.nonvanishing:
            bad |= np.abs(v) <= NONVANISHING_TOL
        if bad.any():
            i = int(np.argmax(bad))
            raise DomainError(f"controller {slot} is zero or non-finite at t={x[i]!r}")
        return v

    def cut(self, name: str) -> float:
        value = self.spec.cutoff if self.spec.family == 19 else getattr(self.spec, name)
        if value is None:
            raise SpecError(f"family {self.spec.family} needs cutoff {name}")
        return value


def _m(a11, a12, a21, a22) -> np.ndarray:
    a11, a12, a21, a22 = np.broadcast_arrays(a11, a12, a21, a22)
    return np.stack([np.stack([a11, a12], -1), np.stack([a21, a22], -1)], -2).astype(float)


def _sym(d, o) -> np.ndarray:
    return _m(d, o, o, d)


def matrix_batch(spec: ChainSpec, s, t) -> np.ndarray:
    """Structural matrices at the pairs ``(s[k], t[k])``, shape ``(n, 2, 2)``."""
    s, t = check_times(spec, s, t)
    F = Slots(spec)
    fam = spec.family
    zero = np.zeros_like(t)
    one = np.ones_like(t)
    with np.errstate(over="ignore", invalid="ignore"):
        if fam == 0:
            out = _m(zero, zero, zero, zero)
        elif fam == 1:
            q = F("Psi", t) / F("Psi", s)
            out = 0.5 * _sym(q, -q)
        elif fam == 2:
            out = np.where((t < F.cut("b"))[:, None, None], 0.5 * _sym(one, -one), 0.0)
        elif fam == 3:
            r = F("Phi", t) / F("Phi", s)
            out = 0.5 * _sym(r, r)
        elif fam == 4:
            r = F("Phi", t) / F("Phi", s)
            q = F("Psi", t) / F("Psi", s)
            out = 0.5 * _sym(r + q, r - q)
        elif fam == 5:
            r = F("Phi", t) / F("Phi", s)
            early = (t < F.cut("b"))[:, None, None]
            out = np.where(early, 0.5 * _sym(r + 1, r - 1), 0.5 * _sym(r, r))
        elif fam == 6:
            out = np.where((t < F.cut("a"))[:, None, None], 0.5 * _sym(one, one), 0.0)
        elif fam == 7:
            q = F("Psi", t) / F("Psi", s)
            early = (t < F.cut("a"))[:, None, None]
            out = np.where(early, 0.5 * _sym(1 + q, 1 - q), 0.5 * _sym(q, -q))
        elif fam == 8:
            out = _piecewise8(t, F.cut("a"), F.cut("b"), one, zero)
        elif fam == 9:
            c, sn = np.cos(t - s), np.sin(t - s)
            out = _m(c, sn, -sn, c)
        elif fam == 10:
            h, g = F("h", t), F("g", t)
            hs = F("h", s)
            p, q = (h + g) / hs, (h - g) / hs
            out = 0.5 * _m(p, q, p, q)
        elif fam == 11:
            psi = F("psi", t)
            out = np.where((t < F.cut("a"))[:, None, None], 0.5 * _m(1 + psi, 1 - psi, 1 + psi, 1 - psi), 0.0)
        elif fam == 12:
            ht, hs, gs = F("h", t), F("h", s), F("g", s)
            p, q = ht * (1 / hs + gs), ht * (1 / hs - gs)
            out = 0.5 * _m(p, p, q, q)
        elif fam == 13:
            psi = F("psi", s)
            out = np.where((t < F.cut("a"))[:, None, None], 0.5 * _m(1 + psi, 1 + psi, 1 - psi, 1 - psi), 0.0)
        elif fam == 14:
            phit = F("Phi", t)
            out = _m(phit / F("Phi", s), zero, phit * F("psi", s), zero)
        elif fam == 15:
            out = np.where((t < F.cut("a"))[:, None, None], _m(one, zero, F("psi", s), zero), 0.0)
        elif fam == 16:
            ps = F("psi", s)
            out = _m(zero, zero, F("g", t) / ps, F("psi", t) / ps)
        elif fam == 17:
            phit, ps = F("Phi", t), F("psi", s)
            out = _m(phit / F("Phi", s), zero, phit * (F("g", t) - F("g", s)) / ps, F("psi", t) / ps)
        elif fam == 18:
            ps, ht = F("psi", s), F("h", t)
            sig = F("psi", t) / ps
            early = (t < F.cut("a"))[:, None, None]
            out = np.where(early, _m(one, zero, (ht - F("h", s)) / ps, sig), _m(zero, zero, ht / ps, sig))
        elif fam == 19:
            out = np.where((t < F.cut("b"))[:, None, None], _m(zero, zero, F("h", t), one), 0.0)
        elif fam == 20:
            phit = F("Phi", t)
            r = phit / F("Phi", s)
            early = (t < F.cut("b"))[:, None, None]
            out = np.where(
                early,
                _m(r, zero, phit * (F("v", t) - F("v", s)), one),
                _m(r, zero, phit * F("w", s), zero),
            )
        elif fam == 21:
            out = _piecewise21(t, F.cut("a"), F.cut("b"), F("v", s), F("v", t), one, zero)
        elif fam == 22:
            f = F("f", t)
            out = _m(f, 1 - f, f, 1 - f)
        elif fam == 23:
            if spec.lam is None or spec.mu is None or spec.lam == spec.mu:
                raise DomainError("family 23 needs lambda != mu")
            lam, mu = spec.lam, spec.mu
            k = 1 - F("theta", t) / F("theta", s)
            a1 = (lam - 2 * mu) / (2 * (lam - mu)) * k
            a2 = lam / (2 * (lam - mu)) * k
            out = _m(1 - a1, a1, a2, 1 - a2)
        elif fam == 24:
            g = F("g", t)
            out = np.where((t < F.cut("a"))[:, None, None], _m(one, zero, zero, one), _m(g, 1 - g, g, 1 - g))
        else:
            out = markov_matrix(spec.Q, t - s)
    out = np.asarray(out, dtype=float).reshape(len(t), 2, 2)
    bad = ~np.isfinite(out).all(axis=(1, 2))
    if bad.any():
        i = int(np.argmax(bad))
        raise DomainError(f"non-finite structural matrix at (s={s[i]!r}, t={t[i]!r})")
    return out


def _piecewise8(t, a, b, one, zero) -> np.ndarray:
    m = t[:, None, None]
    out = np.zeros((len(t), 2, 2))
    out = np.where(m < min(a, b), _sym(one, zero), out)
    if a < b:
        out = np.where((m >= a) & (m < b), 0.5 * _sym(one, -one), out)
    elif b < a:
        out = np.where((m >= b) & (m < a), 0.5 * _sym(one, one), out)
    return out


def _piecewise21(t, a, b, vs, vt, one, zero) -> np.ndarray:
    m = t[:, None, None]
    out = np.zeros((len(t), 2, 2))
    out = np.where(m < min(a, b), _m(one, zero, vt - vs, one), out)
    if b < a:
        out = np.where((m >= b) & (m < a), _m(one, zero, vs, zero), out)
    elif a < b:
        out = np.where((m >= a) & (m < b), _m(zero, zero, vt, one), out)
    return out


def markov_matrix(Q, tau) -> np.ndarray:
    """``exp(tau Q)`` for a two-state rate matrix, via ``I + Q (1 - exp(-c tau)) / c``.

    ``c = q12 + q21`` is the total rate, and ``Q^2 = -c Q`` gives the closed form.
    """
    q = np.asarray(Q, dtype=float)
    tau = np.atleast_1d(np.asarray(tau, dtype=float))
    c = q[0, 1] + q[1, 0]
    factor = -np.expm1(-c * tau) / c if c > 0 else tau
    return np.eye(2)[None] + factor[:, None, None] * q[None]


def markov2(Q) -> ChainSpec:
    """Spec of the homogeneous chain ``M[s, t] = exp((t - s) Q)``."""
    return ChainSpec(MARKOV, Q=Q)


def matrix_at(spec: ChainSpec, s: float, t: float) -> StructMatrix2:
    return StructMatrix2.from_array(matrix_batch(spec, s, t)[0])


def ck_residual_batch(spec: ChainSpec, s, tau, t) -> np.ndarray:
    s, tau, t = np.broadcast_arrays(*(np.atleast_1d(np.asarray(x, dtype=float)) for x in (s, tau, t)))
    bad = ~(tau >= s) | ~(tau <= t)
    if bad.any():
        i = int(np.argmax(bad))
        raise DomainError(f"triple ({s[i]!r}, {tau[i]!r}, {t[i]!r}) is not ordered")
    whole = matrix_batch(spec, s, t)
    left = matrix_batch(spec, s, tau)
    right = matrix_batch(spec, tau, t)
    return np.abs(whole - left @ right).max(axis=(1, 2))


def ck_residual(spec: ChainSpec, s: float, tau: float, t: float) -> float:
    """Max-entry size of ``M[s, t] - M[s, tau] M[tau, t]``."""
    return float(ck_residual_batch(spec, s, tau, t)[0])


@dataclass(frozen=True)
class CKReport:
    max_residual: float
    worst_triple: tuple[float, float, float]
    triples: int

    def to_dict(self) -> dict[str, Any]:
        return {"maxResidual": self.max_residual, "worstTriple": list(self.worst_triple), "triples": self.triples}


def ck_triples(spec: ChainSpec, tmax: float, trials: int, seed: int) -> np.ndarray:
    """Sorted uniform triples on ``[0, tmax]`` plus triples around each cutoff.

    For a cutoff ``c`` inside ``(0, tmax)`` three extra groups of
    ``max(1, trials // 4)`` triples are added: ``s < c <= t`` with ``tau``
    uniform in between, ``tau == c`` exactly, and ``t == c`` exactly.
    """
    u = np.sort(uniforms(seed, 0, trials, 3) * tmax, axis=1)
    groups = [u]
    m = max(1, trials // 4)
    for j, c in enumerate(sorted(c for c in spec.cutoff_values() if 0 < c < tmax)):
        w = uniforms(seed, 0, m, 3, stream=1 + j)
        s = c * w[:, 0]
        t = c + (tmax - c) * w[:, 1]
        groups.append(np.column_stack([s, s + (t - s) * w[:, 2], t]))
        groups.append(np.column_stack([s, np.full(m, c), t]))
        groups.append(np.column_stack([s, s + (c - s) * w[:, 2], np.full(m, c)]))
    return np.concatenate(groups)


def ck_verify(spec: ChainSpec, tmax: float, trials: int, seed: int) -> CKReport:
    if trials < 1:
        raise ValueError("trials must be at least 1")
    if not tmax > 0:
        raise ValueError("tmax must be positive")
    triples = ck_triples(spec, tmax, trials, seed)
    res = ck_residual_batch(spec, triples[:, 0], triples[:, 1], triples[:, 2])
    i = int(np.argmax(res))
    return CKReport(float(res[i]), tuple(float(v) for v in triples[i]), len(triples))


def period_check(spec: ChainSpec, P: float, samples: int, tmax: float = 10.0, seed: int = 0) -> float:
    """Max over sampled pairs ``s <= t <= tmax`` of ``|M[s, t + P] - M[s, t]|``."""
    if P == 0:
        raise ValueError("period must be nonzero")
    if samples < 1:
        raise ValueError("samples must be at least 1")
    st = np.sort(uniforms(seed, 0, samples, 2) * tmax, axis=1)
    s, t = st[:, 0], st[:, 1]
    shifted = matrix_batch(spec, s, t + P)
    return float(np.abs(shifted - matrix_batch(spec, s, t)).max())
