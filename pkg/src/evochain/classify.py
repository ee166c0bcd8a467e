"""Time classification of a chain: baric status, nilpotents, idempotents.

Two modes are offered. ``Mode.DERIVED`` builds the structural matrix and
runs the generic solvers of :mod:`evochain.core`; it is the ground truth.
``Mode.PAPER`` evaluates the published duration sets and idempotent tables
as printed, so that they can be tested against the derived answers. Known
disagreements live in :mod:`evochain.registry`.

Equalities in the tables are tested with tolerance ``eps * max(1, |x|, |y|)``
and cutoffs ``t < c`` are fragile within ``eps`` of ``c``; a predicate within
twice its tolerance of flipping sets the ``boundary`` flag.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Any

import numpy as np

from . import core
from .chains import MARKOV, ChainSpec, Slots, check_times, matrix_at, matrix_batch
from .core import ZERO_TOL, NilpotentClass, StructMatrix2
from .errors import UnsupportedFamily

LABELS = ("origin", "z1", "z2", "z3", "xstar", "xplus", "xminus", "unlabeled")
D_FAMILIES = (4, 5, 7, 17, 18, 20, 21, 23)
MATCH_RADIUS = 1e-7


class Mode(str, Enum):
    PAPER = "paper"
    DERIVED = "derived"


def _mode(mode) -> Mode:
    return Mode(mode.value if isinstance(mode, Mode) else mode)


# ---------------------------------------------------------------- predicates


@dataclass(frozen=True)
class Pred:
    """Boolean array ``v`` with a fragility mask ``f`` (could flip under a tolerance-sized nudge)."""

    v: np.ndarray
    f: np.ndarray

    def __and__(self, o: "Pred") -> "Pred":
        f = (self.f & (o.v | o.f)) | (o.f & (self.v | self.f))
        return Pred(self.v & o.v, f)

    def __or__(self, o: "Pred") -> "Pred":
        f = (self.f & (~o.v | o.f)) | (o.f & (~self.v | self.f))
        return Pred(self.v | o.v, f)

    def __invert__(self) -> "Pred":
        return Pred(~self.v, self.f)


def _const(value: bool, n: int) -> Pred:
    return Pred(np.full(n, value), np.zeros(n, dtype=bool))


def _band(diff, tol) -> tuple[np.ndarray, np.ndarray]:
    d = np.abs(diff)
    return d <= tol, (d > 0) & (d <= 2 * tol)


def _eq(x, y, eps) -> Pred:
    x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    tol = eps * np.maximum(1.0, np.maximum(np.abs(x), np.abs(y)))
    v, f = _band(x - y, tol)
    return Pred(v, f)


def _lt(t, c, eps) -> Pred:
    t = np.asarray(t, dtype=float)
    return Pred(t < c, np.abs(t - c) <= eps)


def _pos(x, eps) -> Pred:
    """``x > 0`` with values within ``eps * max(1, |x|)`` of zero treated as zero."""
    x = np.asarray(x, dtype=float)
    tol = eps * np.maximum(1.0, np.abs(x))
    zero, frag = _band(x, tol)
    return Pred((x > 0) & ~zero, frag)


def _le(x, y, eps) -> Pred:
    x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    tol = eps * np.maximum(1.0, np.maximum(np.abs(x), np.abs(y)))
    _, frag = _band(x - y, tol)
    return Pred(x <= y + tol, frag)


def _lt_val(x, y, eps) -> Pred:
    return ~_le(y, x, eps)


def _multiple_of_pi(d, eps) -> tuple[Pred, np.ndarray]:
    """Whether ``d`` is ``k pi``, with ``k`` returned."""
    d = np.asarray(d, dtype=float)
    k = np.round(d / math.pi)
    tol = eps * np.maximum(1.0, np.abs(d))
    v, f = _band(d - k * math.pi, tol)
    return Pred(v, f), k


def _tables(spec: ChainSpec) -> None:
    if spec.family == MARKOV:
        raise UnsupportedFamily("the printed tables do not cover the Markov preset")


# ----------------------------------------------------------- printed tables


def paper_baric_batch(spec: ChainSpec, s, t, eps: float = ZERO_TOL) -> Pred:
    """Membership of ``(s, t)`` in the printed baric duration set."""
    _tables(spec)
    s, t = check_times(spec, s, t)
    F = Slots(spec)
    n = len(t)
    fam = spec.family
    if fam in (0, 1, 2, 3, 6, 10, 11, 14, 22):
        return _const(False, n)
    if fam in (16, 17, 18):
        return _const(True, n)
    if fam == 4:
        return _eq(F("Phi", s) / F("Psi", s), F("Phi", t) / F("Psi", t), eps)
    if fam == 5:
        return _lt(t, F.cut("b"), eps) & _eq(F("Phi", s), F("Phi", t), eps)
    if fam == 7:
        return _lt(t, F.cut("a"), eps) & _eq(F("Psi", s), F("Psi", t), eps)
    if fam == 8:
        return _lt(t, min(F.cut("a"), F.cut("b")), eps)
    if fam == 9:
        return _multiple_of_pi(t - s, eps)[0]
    if fam == 12:
        gs, inv = F("g", s), 1.0 / F("h", s)
        return _eq(gs, inv, eps) | _eq(gs, -inv, eps)
    if fam == 13:
        ps = F("psi", s)
        return _lt(t, F.cut("a"), eps) & (_eq(ps, 1.0, eps) | _eq(ps, -1.0, eps))
    if fam == 15:
        return _lt(t, F.cut("a"), eps) & _eq(F("psi", s), 0.0, eps)
    if fam == 19:
        return _lt(t, F.cut("b"), eps)
    if fam == 20:
        early = _lt(t, F.cut("b"), eps)
        return early | (~early & _eq(F("w", s), 0.0, eps))
    if fam == 21:
        return _lt(t, max(F.cut("a"), F.cut("b")), eps)
    if fam == 23:
        if _special_shape(spec) is not None:
            return _const(True, n)
        return _eq(F("theta", t), F("theta", s), eps)
    if fam == 24:
        return _lt(t, F.cut("a"), eps)
    raise UnsupportedFamily(f"no printed baric table for family {fam}")


def paper_nilpotent_batch(spec: ChainSpec, s, t, eps: float = ZERO_TOL) -> Pred:
    """Membership in the printed set of times with a unique nilpotent."""
    _tables(spec)
    s, t = check_times(spec, s, t)
    F = Slots(spec)
    n = len(t)
    fam = spec.family
    if fam in (3, 4, 5, 9, 10, 17, 22, 23, 24):
        return _const(True, n)
    if fam in (0, 1, 2, 16, 19):
        return _const(False, n)
    if fam in (6, 7, 8, 11, 18):
        return _lt(t, F.cut("a"), eps)
    if fam == 12:
        return _le(F("g", t) ** 2, 1.0 / F("h", s) ** 2, eps)
    if fam == 13:
        return _lt(t, F.cut("a"), eps) & _le(F("psi", s) ** 2, 1.0, eps)
    if fam == 14:
        return _pos(F("Phi", s) * F("psi", s), eps)
    if fam == 15:
        return _lt(t, F.cut("a"), eps) & _pos(F("psi", s), eps)
    if fam == 20:
        early = _lt(t, F.cut("b"), eps)
        return early | (~early & _pos(F("w", s) / F("Phi", s), eps))
    if fam == 21:
        a, b = F.cut("a"), F.cut("b")
        first = _lt(t, min(a, b), eps)
        if b < a:
            first = first | (~_lt(t, b, eps) & _lt(t, a, eps) & _pos(F("v", s), eps))
        return first
    raise UnsupportedFamily(f"no printed nilpotent table for family {fam}")


def discriminant_batch(spec: ChainSpec, s, t) -> np.ndarray:
    """The printed discriminant ``D(s, t)`` (``d`` for family 7)."""
    if spec.family not in D_FAMILIES:
        raise UnsupportedFamily(f"no discriminant is defined for family {spec.family}")
    s, t = check_times(spec, s, t)
    F = Slots(spec)
    fam = spec.family
    if fam == 4:
        r = F("Phi", t) / F("Phi", s)
        return r * (2 * F("Psi", t) / F("Psi", s) - r)
    if fam == 5:
        r = F("Phi", t) / F("Phi", s)
        return r * (2 - r)
    if fam == 7:
        return 2 * F("Psi", t) / F("Psi", s) - 1
    if fam == 17:
        return 4 * F("Phi", t) ** 2 * F("psi", s) * (F("g", t) - F("g", s)) / (F("Phi", s) * F("psi", t) ** 2) - 1
    if fam == 18:
        return 1 - 4 * F("psi", s) * (F("h", t) - F("h", s)) / F("psi", t) ** 2
    if fam == 20:
        return 1 - 4 * F("Phi", t) ** 2 * (F("v", t) - F("v", s)) / F("Phi", s)
    if fam == 21:
        return 1 - 4 * (F("v", t) - F("v", s))
    rho = F("theta", s) / F("theta", t)
    return 1 - 4 * rho * (rho - 1)


def discriminant(spec: ChainSpec, s: float, t: float) -> float:
    return float(discriminant_batch(spec, s, t)[0])


def _special_shape(spec: ChainSpec) -> str | None:
    """``"zero"`` for lambda = 0, ``"double"`` for lambda = 2 mu, else None."""
    if spec.lam is None or spec.mu is None:
        return None
    if spec.lam == 0:
        return "zero"
    if spec.lam == 2 * spec.mu:
        return "double"
    return None


def _sign(D: float, eps: float) -> tuple[int, bool]:
    zero, frag = _band(D, eps * max(1.0, abs(D)))
    return (0 if zero else (1 if D > 0 else -1)), bool(frag)


def _roots_pm(D: float, center: float, scale: float) -> list[tuple[str, float]]:
    """``(center +- sqrt(D)) / scale`` labelled xplus / xminus."""
    sq = math.sqrt(max(D, 0.0))
    return [("xplus", (center + sq) / scale), ("xminus", (center - sq) / scale)]


def _family4_like(r: float, q: float, D: float, sgn: int, z: float) -> list[tuple[str, float, float]]:
    """Points of the symmetric two-ratio families; ``z`` is the z-point coordinate used."""
    pts = [("origin", 0.0, 0.0), ("z3", z, z)]
    if sgn == 0:
        pts.append(("xstar", 1 / r, 1 / q - 1 / r))
    elif sgn > 0:
        pts.extend(_xpm(r, q, D))
    return pts


def _xpm(r: float, q: float, D: float) -> list[tuple[str, float, float]]:
    sq = math.sqrt(max(D, 0.0))
    out = []
    for label, sgn in (("xplus", 1.0), ("xminus", -1.0)):
        den = r + sgn * sq
        if abs(den) < ZERO_TOL or abs(q * den) < ZERO_TOL:
            continue
        out.append((label, (1 + sgn * sq / q) / den, (r - q) / (q * den)))
    return out


@dataclass(frozen=True)
class _Table:
    points: list[tuple[str, float, float]]
    tabulated: bool = True
    boundary: bool = False


def paper_idempotents(spec: ChainSpec, s: float, t: float, eps: float = ZERO_TOL) -> _Table:
    """The printed idempotent set at one time pair."""
    _tables(spec)
    sa, ta = check_times(spec, s, t)
    s, t = float(sa[0]), float(ta[0])
    F = Slots(spec)

    def val(slot, x):
        return float(F(slot, np.array([x]))[0])

    def lt(c):
        return t < c, abs(t - c) <= eps

    def eq(x, y):
        p = _eq(x, y, eps)
        return bool(p.v), bool(p.f)

    O = ("origin", 0.0, 0.0)
    fam = spec.family
    if fam in (0, 1, 2):
        return _Table([O])
    if fam == 3:
        r = val("Phi", t) / val("Phi", s)
        return _Table([O, ("unlabeled", 1 / r, 1 / r)])
    if fam in (10, 22):
        if fam == 10:
            hs = val("h", s)
            p, q = (val("h", t) + val("g", t)) / (2 * hs), (val("h", t) - val("g", t)) / (2 * hs)
        else:
            p = val("f", t)
            q = 1 - p
        n2 = p * p + q * q
        return _Table([O, ("unlabeled", p / n2, q / n2)])
    if fam == 12:
        x = val("h", s) / val("h", t)
        return _Table([O, ("unlabeled", x, x)])
    if fam == 14:
        return _Table([O, ("unlabeled", val("Phi", s) / val("Phi", t), 0.0)])
    if fam == 16:
        ps, pt = val("psi", s), val("psi", t)
        return _Table([O, ("unlabeled", val("g", t) * ps / pt**2, ps / pt)])
    if fam in (4, 5, 7):
        if fam == 4:
            r, q = val("Phi", t) / val("Phi", s), val("Psi", t) / val("Psi", s)
            early, near = True, False
        elif fam == 5:
            r, q = val("Phi", t) / val("Phi", s), 1.0
            early, near = lt(spec.b)
        else:
            r, q = 1.0, val("Psi", t) / val("Psi", s)
            early, near = lt(spec.a)
        if not early:
            return _Table([O, ("z3", r, r)] if fam == 5 else [O], True, near)
        same, frag = eq(r, q)
        D = discriminant(spec, s, t)
        sgn, dfrag = _sign(D, eps)
        if same:
            pts = [O, ("z1", 0.0, r), ("z2", r, 0.0), ("z3", r, r)]
        else:
            pts = _family4_like(r, q, D, sgn, r)
        return _Table(pts, True, near or frag or dfrag)
    if fam in (6, 11, 13, 15, 19):
        early, near = lt(spec.cutoff if fam == 19 else spec.a)
        if not early:
            return _Table([O], True, near)
        if fam in (6, 13):
            p = (1.0, 1.0)
        elif fam == 11:
            psi = val("psi", t)
            p = ((1 + psi) / (1 + psi * psi), (1 - psi) / (1 + psi * psi))
        elif fam == 15:
            p = (1.0, 0.0)
        else:
            p = (val("h", t), 1.0)
        return _Table([O, ("unlabeled", *p)], True, near)
    if fam == 8:
        a, b = spec.a, spec.b
        four = [O, ("unlabeled", 0.0, 1.0), ("unlabeled", 1.0, 0.0), ("unlabeled", 1.0, 1.0)]
        near = abs(t - a) <= eps or abs(t - b) <= eps
        if a <= b:
            return _Table(four if t < a else [O], True, near)
        if t < b:
            return _Table(four, True, near)
        return _Table([O, ("unlabeled", 1.0, 1.0)] if t < a else [O], True, near)
    if fam == 9:
        on, k = _multiple_of_pi(np.array([t - s]), eps)
        if not bool(on.v[0]):
            return _Table([O], False, bool(on.f[0]))
        sign = 1.0 if int(k[0]) % 2 == 0 else -1.0
        return _Table([O, ("unlabeled", sign, 0.0), ("unlabeled", 0.0, sign)], True, bool(on.f[0]))
    if fam in (17, 18, 20, 21):
        D = discriminant(spec, s, t)
        sgn, dfrag = _sign(D, eps)
        if fam == 17:
            r = val("Phi", t) / val("Phi", s)
            y = val("psi", s) / val("psi", t)
            base, near, early = [O, ("z2", r, 0.0)], False, True
            center, scale = 1.0, 2 * r
        elif fam == 18:
            y = val("psi", s) / val("psi", t)
            early, near = lt(spec.a)
            if not early:
                return _Table([O, ("unlabeled", val("h", t) * val("psi", s) / val("psi", t) ** 2, y)], True, near)
            base, center, scale = [O, ("unlabeled", 1.0, 0.0)], 1.0, 2.0
        elif fam == 20:
            r = val("Phi", t) / val("Phi", s)
            early, near = lt(spec.b)
            base = [O, ("z2", r, 0.0)]
            if not early:
                return _Table(base, True, near)
            y, center, scale = 1.0, 1.0, 2 * r
        else:
            a, b = spec.a, spec.b
            near = abs(t - a) <= eps or abs(t - b) <= eps
            if t >= max(a, b):
                return _Table([O], True, near)
            if t >= min(a, b):
                if b < a:
                    return _Table([O, ("unlabeled", 1.0, 0.0)], True, near)
                return _Table([O, ("unlabeled", val("v", t), 1.0)], True, near)
            base, y, center, scale = [O, ("unlabeled", 1.0, 0.0)], 1.0, 1.0, 2.0
        if sgn < 0:
            pts = base
        elif sgn == 0:
            pts = base + [("xstar", center / scale, y)]
        else:
            pts = base + [(lab, x, y) for lab, x in _roots_pm(D, center, scale)]
        return _Table(pts, True, near or dfrag)
    if fam == 23:
        shape = _special_shape(spec)
        if shape is None:
            return _Table([O], False)
        rho = val("theta", s) / val("theta", t)
        D = discriminant(spec, s, t)
        sgn, dfrag = _sign(D, eps)
        if shape == "zero":
            base = [O, ("unlabeled", 0.0, 1.0)]
            extra = [("xstar", rho, 0.5)] if sgn == 0 else [(lab, rho, y) for lab, y in _roots_pm(D, 1.0, 2.0)]
        else:
            base = [O, ("unlabeled", 1.0, 0.0)]
            extra = [("xstar", 0.5, rho)] if sgn == 0 else [(lab, x, rho) for lab, x in _roots_pm(D, 1.0, 2.0)]
        return _Table(base + (extra if sgn >= 0 else []), True, dfrag)
    if fam == 24:
        early, near = lt(spec.a)
        if early:
            return _Table([O, ("unlabeled", 0.0, 1.0), ("unlabeled", 1.0, 0.0), ("unlabeled", 1.0, 1.0)], True, near)
        g = val("g", t)
        n2 = g * g + (1 - g) ** 2
        return _Table([O, ("unlabeled", g / n2, (1 - g) / n2)], True, near)
    raise UnsupportedFamily(f"no printed idempotent table for family {fam}")


# ------------------------------------------------------- derived labelling


def closed_form_points(spec: ChainSpec, s: float, t: float, eps: float = ZERO_TOL) -> list[tuple[str, float, float]]:
    """Named idempotents that solve the equations, where the family has them.

    These use the ratio that actually solves the system (for instance
    ``Phi(s)/Phi(t)`` in the z points). Candidates are not filtered here.
    """
    fam = spec.family
    if fam not in (4, 5, 7, 17, 18, 20, 21, 23):
        return []
    F = Slots(spec)

    def val(slot, x):
        return float(F(slot, np.array([x]))[0])

    if fam in (4, 5, 7):
        if fam == 4:
            r, q = val("Phi", t) / val("Phi", s), val("Psi", t) / val("Psi", s)
        elif fam == 5:
            r, q = val("Phi", t) / val("Phi", s), 1.0
            if t >= spec.b:
                return [("z3", 1 / r, 1 / r)]
        else:
            if t >= spec.a:
                return []
            r, q = 1.0, val("Psi", t) / val("Psi", s)
        D = r * (2 * q - r)
        pts = [("z1", 0.0, 1 / r), ("z2", 1 / r, 0.0), ("z3", 1 / r, 1 / r), ("xstar", 1 / r, 1 / q - 1 / r)]
        return pts + (_xpm(r, q, D) if D > 0 else [])
    if fam == 17:
        r = val("Phi", t) / val("Phi", s)
        y = val("psi", s) / val("psi", t)
        disc = -discriminant(spec, s, t)
        pts = [("z2", 1 / r, 0.0), ("xstar", 1 / (2 * r), y)]
        return pts + ([(lab, x, y) for lab, x in _roots_pm(disc, 1.0, 2 * r)] if disc > 0 else [])
    D = discriminant(spec, s, t)
    if fam == 18:
        if t >= spec.a:
            return []
        y, center, scale, pts = val("psi", s) / val("psi", t), 1.0, 2.0, []
    elif fam == 20:
        r = val("Phi", t) / val("Phi", s)
        pts = [("z2", 1 / r, 0.0)]
        if t >= spec.b:
            return pts
        y, center, scale = 1.0, 1.0, 2 * r
    elif fam == 21:
        if t >= min(spec.a, spec.b):
            return []
        y, center, scale, pts = 1.0, 1.0, 2.0, []
    else:
        shape = _special_shape(spec)
        if shape is None:
            return []
        rho = val("theta", s) / val("theta", t)
        ys = [("xstar", 0.5)] + (_roots_pm(D, 1.0, 2.0) if D > 0 else [])
        if shape == "zero":
            return [(lab, rho, y) for lab, y in ys]
        return [(lab, x, rho) for lab, x in ys]
    pts = pts + [("xstar", center / scale, y)]
    return pts + ([(lab, x, y) for lab, x in _roots_pm(D, center, scale)] if D > 0 else [])


def _residual(M: StructMatrix2, x: float, y: float) -> float:
    p = core.square(core.AlgebraElement(x, y), M)
    return max(abs(p.x1 - x), abs(p.x2 - y))


def _close(p, q) -> bool:
    return max(abs(p[0] - q[0]), abs(p[1] - q[1])) <= MATCH_RADIUS * max(1.0, abs(q[0]), abs(q[1]))


# ----------------------------------------------------------------- reports


@dataclass(frozen=True)
class BaricReport:
    baric: bool
    i0: int | None = None
    sigma: float | None = None
    boundary: bool = False

    def to_dict(self) -> dict[str, Any]:
        return {
            "status": "Baric" if self.baric else "NotBaric",
            "i0": self.i0,
            "sigma": self.sigma,
            "boundary": self.boundary,
        }


@dataclass(frozen=True)
class LabeledPoint:
    x: float
    y: float
    label: str
    residual: float

    def to_dict(self) -> dict[str, Any]:
        return {"x": self.x, "y": self.y, "label": self.label, "residual": self.residual}


@dataclass(frozen=True)
class IdempotentReport:
    """Labelled idempotents plus the printed discriminant where one exists.

    ``tabulated`` is False in table mode when the tables give no set for
    this time pair; ``complete`` mirrors the solver flag in derived mode.
    """

    points: tuple[LabeledPoint, ...]
    discriminant: float | None = None
    boundary: bool = False
    tabulated: bool = True
    complete: bool = True

    def __len__(self) -> int:
        return len(self.points)

    def as_tuples(self) -> list[tuple[float, float]]:
        return [(p.x, p.y) for p in self.points]


@dataclass(frozen=True)
class PropertyReport:
    family: int | str
    s: float
    t: float
    mode: Mode
    baric: BaricReport
    nilpotent: NilpotentClass
    idempotents: IdempotentReport

    def to_dict(self) -> dict[str, Any]:
        nil = self.nilpotent
        return {
            "family": self.family,
            "s": self.s,
            "t": self.t,
            "baric": self.baric.to_dict(),
            "nilpotent": {
                "kind": nil.kind,
                "unique": nil.unique,
                "direction": None if nil.direction is None else list(nil.direction),
                "boundary": nil.boundary,
            },
            "idempotents": [p.to_dict() for p in self.idempotents.points],
            "idempotentsTabulated": self.idempotents.tabulated,
            "idempotentsComplete": self.idempotents.complete,
            "D": self.idempotents.discriminant,
            "mode": self.mode.value,
        }


def baric_at(spec: ChainSpec, s: float, t: float, mode=Mode.DERIVED, eps: float = ZERO_TOL) -> BaricReport:
    if _mode(mode) is Mode.DERIVED:
        st = core.baric_weight(matrix_at(spec, s, t), eps)
        return BaricReport(st.baric, st.index, st.weight, st.boundary)
    p = paper_baric_batch(spec, s, t, eps)
    return BaricReport(bool(p.v[0]), boundary=bool(p.f[0]))


def nilpotent_at(spec: ChainSpec, s: float, t: float, mode=Mode.DERIVED, eps: float = ZERO_TOL) -> NilpotentClass:
    """Derived: the generic linear classifier. Table mode: ``only_zero`` or ``infinite``."""
    if _mode(mode) is Mode.DERIVED:
        return core.nilpotent_class(matrix_at(spec, s, t), eps)
    p = paper_nilpotent_batch(spec, s, t, eps)
    return NilpotentClass("only_zero" if p.v[0] else "infinite", None, bool(p.f[0]))


def idempotent_set_at(spec: ChainSpec, s: float, t: float, mode=Mode.DERIVED, eps: float = ZERO_TOL) -> IdempotentReport:
    M = matrix_at(spec, s, t)
    D = discriminant(spec, s, t) if spec.family in D_FAMILIES else None
    table = paper_idempotents(spec, s, t, eps) if spec.family != MARKOV else None
    boundary = table.boundary if table is not None else False
    if _mode(mode) is Mode.PAPER:
        if table is None:
            raise UnsupportedFamily("the printed tables do not cover the Markov preset")
        pts = tuple(LabeledPoint(x, y, lab, _residual(M, x, y)) for lab, x, y in table.points)
        return IdempotentReport(pts, D, boundary, table.tabulated)
    found = core.idempotents(M, eps)
    scale = max(1.0, M.max_abs())
    named = [
        (lab, x, y)
        for lab, x, y in closed_form_points(spec, s, t, eps)
        if math.isfinite(x) and math.isfinite(y) and _residual(M, x, y) <= 1e-9 * scale * max(1.0, abs(x), abs(y)) ** 2
    ]
    pts = []
    for (x, y), res in zip(found.as_tuples(), found.residuals):
        label = "origin" if x == 0.0 and y == 0.0 else "unlabeled"
        if label != "origin":
            label = next((lab for lab, cx, cy in named if _close((x, y), (cx, cy))), "unlabeled")
        pts.append(LabeledPoint(x, y, label, res))
    return IdempotentReport(tuple(pts), D, boundary, True, found.complete)


def classify(spec: ChainSpec, s: float, t: float, mode=Mode.DERIVED, eps: float = ZERO_TOL) -> PropertyReport:
    mode = _mode(mode)
    return PropertyReport(
        spec.family,
        float(s),
        float(t),
        mode,
        baric_at(spec, s, t, mode, eps),
        nilpotent_at(spec, s, t, mode, eps),
        idempotent_set_at(spec, s, t, mode, eps),
    )


# ------------------------------------------------------ vectorized kernels


def baric_codes(spec: ChainSpec, s, t, mode=Mode.DERIVED, eps: float = ZERO_TOL) -> tuple[np.ndarray, np.ndarray]:
    """``(member, boundary)`` arrays for the baric property."""
    if _mode(mode) is Mode.DERIVED:
        index, _, boundary = core.baric_batch(matrix_batch(spec, s, t), eps)
        return index > 0, boundary
    p = paper_baric_batch(spec, s, t, eps)
    return p.v, p.f


def nilpotent_codes(spec: ChainSpec, s, t, mode=Mode.DERIVED, eps: float = ZERO_TOL) -> tuple[np.ndarray, np.ndarray]:
    """``(code, boundary)`` using :data:`evochain.core.NILPOTENT_CODES` (3 = table says infinite)."""
    if _mode(mode) is Mode.DERIVED:
        return core.nilpotent_batch(matrix_batch(spec, s, t), eps)
    p = paper_nilpotent_batch(spec, s, t, eps)
    return np.where(p.v, 0, 3), p.f


def idempotent_counts(spec: ChainSpec, s, t, mode=Mode.DERIVED, eps: float = ZERO_TOL) -> tuple[np.ndarray, np.ndarray]:
    """``(count, boundary)`` arrays; one solver call per pair."""
    s, t = check_times(spec, s, t)
    counts = np.empty(len(t), dtype=int)
    boundary = np.zeros(len(t), dtype=bool)
    if _mode(mode) is Mode.DERIVED:
        mats = matrix_batch(spec, s, t)
        for k, A in enumerate(mats):
            counts[k] = len(core.idempotents(StructMatrix2.from_array(A), eps))
        if spec.family in D_FAMILIES:
            D = discriminant_batch(spec, s, t)
            boundary = np.abs(D) <= 2 * eps * np.maximum(1.0, np.abs(D))
        return counts, boundary
    for k in range(len(t)):
        table = paper_idempotents(spec, float(s[k]), float(t[k]), eps)
        counts[k] = len(table.points) if table.tabulated else -2
        boundary[k] = table.boundary
    return counts, boundary
