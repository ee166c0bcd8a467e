"""Arithmetic of two-dimensional evolution algebras and their fixed-point solvers.

An evolution algebra on ``R^2`` is fixed by its 2x2 matrix of structural
constants ``a_ij``: ``e_i e_i = a_i1 e_1 + a_i2 e_2`` and ``e_1 e_2 = 0``.
Everything here is time-free; the chains module supplies matrices.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, Literal

import numpy as np

from .errors import SolverInconclusive
from .polynomial import quadratic_roots, real_roots

ZERO_TOL = 1e-9
SOLVER_TOL = 1e-10
DEDUPE_RADIUS = 1e-7
OVERFLOW_GUARD = 1e12

# a priori norm bound on idempotents is capped here when it is huge or infinite
_BOUND_CAP = 1e6


@dataclass(frozen=True)
class StructMatrix2:
    a11: float
    a12: float
    a21: float
    a22: float

    def __post_init__(self) -> None:
        for name in ("a11", "a12", "a21", "a22"):
            value = float(getattr(self, name))
            if not math.isfinite(value):
                raise ValueError(f"structural constant {name} is not finite: {value}")
            object.__setattr__(self, name, value)

    @classmethod
    def from_array(cls, arr) -> "StructMatrix2":
        a = np.asarray(arr, dtype=float).reshape(2, 2)
        return cls(a[0, 0], a[0, 1], a[1, 0], a[1, 1])

    @classmethod
    def zero(cls) -> "StructMatrix2":
        return cls(0.0, 0.0, 0.0, 0.0)

    @classmethod
    def identity(cls) -> "StructMatrix2":
        return cls(1.0, 0.0, 0.0, 1.0)

    def as_array(self) -> np.ndarray:
        return np.array([[self.a11, self.a12], [self.a21, self.a22]])

    @property
    def entries(self) -> tuple[float, float, float, float]:
        return (self.a11, self.a12, self.a21, self.a22)

    @property
    def det(self) -> float:
        return self.a11 * self.a22 - self.a12 * self.a21

    def max_abs(self) -> float:
        return max(abs(v) for v in self.entries)

    def __matmul__(self, other: "StructMatrix2") -> "StructMatrix2":
        return StructMatrix2(
            self.a11 * other.a11 + self.a12 * other.a21,
            self.a11 * other.a12 + self.a12 * other.a22,
            self.a21 * other.a11 + self.a22 * other.a21,
            self.a21 * other.a12 + self.a22 * other.a22,
        )

    def distance(self, other: "StructMatrix2") -> float:
        """Max-entry absolute difference."""
        return max(abs(p - q) for p, q in zip(self.entries, other.entries))


@dataclass(frozen=True)
class AlgebraElement:
    x1: float
    x2: float

    def __post_init__(self) -> None:
        for name in ("x1", "x2"):
            value = float(getattr(self, name))
            if not math.isfinite(value):
                raise ValueError(f"coordinate {name} is not finite: {value}")
            object.__setattr__(self, name, value)

    def __iter__(self) -> Iterator[float]:
        yield self.x1
        yield self.x2

    def max_abs(self) -> float:
        return max(abs(self.x1), abs(self.x2))


@dataclass(frozen=True)
class BaricStatus:
    """Outcome of the column criterion; ``index`` is None when not baric.

    ``weight`` is the coefficient of the character ``sigma(x) = weight * x_index``.
    """

    index: int | None = None
    weight: float | None = None
    boundary: bool = False

    @property
    def baric(self) -> bool:
        return self.index is not None


NilpotentKind = Literal["only_zero", "curve", "all", "infinite"]


@dataclass(frozen=True)
class NilpotentClass:
    """Solution set of ``x^2 = 0``.

    For ``curve`` the direction ``(u, v)`` is the ray of squared coordinates
    ``(x1^2, x2^2)``, normalised so that ``max(u, v) == 1``. The ``infinite``
    kind is produced only by the printed tables, which do not say which of
    ``curve`` / ``all`` applies.
    """

    kind: NilpotentKind
    direction: tuple[float, float] | None = None
    boundary: bool = False

    @property
    def unique(self) -> bool:
        return self.kind == "only_zero"


@dataclass(frozen=True)
class IdempotentSet:
    points: tuple[AlgebraElement, ...]
    residuals: tuple[float, ...]
    complete: bool

    def __len__(self) -> int:
        return len(self.points)

    def as_tuples(self) -> list[tuple[float, float]]:
        return [(p.x1, p.x2) for p in self.points]


@dataclass(frozen=True)
class Trajectory:
    points: tuple[AlgebraElement, ...]
    diverged_at: int | None = None

    @property
    def diverged(self) -> bool:
        return self.diverged_at is not None


def multiply(x: AlgebraElement, y: AlgebraElement, M: StructMatrix2) -> AlgebraElement:
    p = x.x1 * y.x1
    q = x.x2 * y.x2
    return AlgebraElement(M.a11 * p + M.a21 * q, M.a12 * p + M.a22 * q)


def square(x: AlgebraElement, M: StructMatrix2) -> AlgebraElement:
    """The evolution operator ``V(x) = x^2``."""
    return multiply(x, x, M)


def iterate(x0: AlgebraElement, M: StructMatrix2, n: int, guard: float = OVERFLOW_GUARD) -> Trajectory:
    """Orbit ``x0, V(x0), ..., V^n(x0)``, cut short once a coordinate exceeds ``guard``.

    ``diverged_at`` is the power ``k`` whose iterate tripped the guard; that
    iterate is not included.
    """
    if n < 0:
        raise ValueError("n must be non-negative")
    points = [x0]
    if x0.max_abs() > guard:
        return Trajectory(tuple(points), diverged_at=0)
    x = x0
    for k in range(1, n + 1):
        x = square(x, M)
        if x.max_abs() > guard:
            return Trajectory(tuple(points), diverged_at=k)
        points.append(x)
    return Trajectory(tuple(points))


def _zero_band(q: float, eps: float) -> tuple[bool, bool]:
    """(treated as zero, fragile) for a decisive quantity.

    Fragile means within ``eps`` of the threshold ``eps`` without being an
    exact zero, i.e. ``0 < |q| <= 2 eps``.
    """
    a = abs(q)
    return a <= eps, 0.0 < a <= 2.0 * eps


def baric_weight(M: StructMatrix2, eps: float = ZERO_TOL) -> BaricStatus:
    """Column criterion: column ``i`` with nonzero diagonal and zero off-diagonal.

    Column 1 wins when both columns qualify.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    d1_zero, d1_frag = _zero_band(M.a11, eps)
    o1_zero, o1_frag = _zero_band(M.a21, eps)
    d2_zero, d2_frag = _zero_band(M.a22, eps)
    o2_zero, o2_frag = _zero_band(M.a12, eps)
    q1, f1 = (not d1_zero) and o1_zero, d1_frag or o1_frag
    q2, f2 = (not d2_zero) and o2_zero, d2_frag or o2_frag
    robust = (q1 and not f1) or (q2 and not f2) or (not f1 and not f2)
    if q1:
        return BaricStatus(1, M.a11, not robust)
    if q2:
        return BaricStatus(2, M.a22, not robust)
    return BaricStatus(None, None, not robust)


def nilpotent_class(M: StructMatrix2, eps: float = ZERO_TOL) -> NilpotentClass:
    """Classify the non-negative solutions ``(u, v) = (x1^2, x2^2)`` of
    ``a11 u + a21 v = 0``, ``a12 u + a22 v = 0``."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    scale = M.max_abs()
    if scale <= eps:
        return NilpotentClass("all", None, scale > 0.0)
    det = M.det
    det_zero, det_frag = _zero_band(det, eps)
    if not det_zero:
        return NilpotentClass("only_zero", None, det_frag)
    rows = ((M.a11, M.a21), (M.a12, M.a22))
    (p, q), other = (rows[0], rows[1]) if max(map(abs, rows[0])) >= max(map(abs, rows[1])) else (rows[1], rows[0])
    p_zero, p_frag = _zero_band(p, eps)
    q_zero, q_frag = _zero_band(q, eps)
    boundary = det_frag or p_frag or q_frag
    if p_zero:
        u, v = 1.0, 0.0
    elif q_zero:
        u, v = 0.0, 1.0
    elif p * q < 0:
        top = max(abs(p), abs(q))
        u, v = abs(q) / top, abs(p) / top
    else:
        return NilpotentClass("only_zero", None, boundary)
    if abs(other[0] * u + other[1] * v) > eps * (u + v) * max(1.0, scale):
        return NilpotentClass("only_zero", None, boundary)
    return NilpotentClass("curve", (u, v), boundary)


def _residual(m: tuple[float, float, float, float], x: float, y: float) -> float:
    a11, a12, a21, a22 = m
    xx, yy = x * x, y * y
    return max(abs(a11 * xx + a21 * yy - x), abs(a12 * xx + a22 * yy - y))


def _newton(m: tuple[float, float, float, float], x: float, y: float, max_iter: int = 60) -> tuple[float, float, float]:
    """Undamped Newton on ``V(p) - p``, stopping when the residual stops improving."""
    a11, a12, a21, a22 = m
    res = _residual(m, x, y)
    for _ in range(max_iter):
        if res == 0.0:
            break
        xx, yy = x * x, y * y
        f1 = a11 * xx + a21 * yy - x
        f2 = a12 * xx + a22 * yy - y
        j11 = 2.0 * a11 * x - 1.0
        j12 = 2.0 * a21 * y
        j21 = 2.0 * a12 * x
        j22 = 2.0 * a22 * y - 1.0
        jdet = j11 * j22 - j12 * j21
        if jdet == 0.0:
            break
        dx = (f1 * j22 - f2 * j12) / jdet
        dy = (j11 * f2 - j21 * f1) / jdet
        nx, ny = x - dx, y - dy
        if not (math.isfinite(nx) and math.isfinite(ny)):
            break
        nres = _residual(m, nx, ny)
        if nres > res:
            break
        step = max(abs(dx), abs(dy))
        x, y, res = nx, ny, nres
        if step <= 1e-16 * max(1.0, abs(x), abs(y)):
            break
    return x, y, res


def idempotent_bound(M: StructMatrix2) -> float:
    """Euclidean norm bound on every idempotent (``inf`` if none exists).

    For ``p = r * w`` with ``|w| = 1``, ``V(p) = r^2 V(w)`` so an idempotent has
    ``r = 1 / |V(w)|``; ``V(w)`` ranges over the segment between the rows
    ``(a11, a12)`` and ``(a21, a22)``, hence ``r <= 1 / dist(0, segment)``.
    """
    p = np.array([M.a11, M.a12])
    q = np.array([M.a21, M.a22])
    d = q - p
    dd = float(d @ d)
    lam = 0.0 if dd == 0.0 else min(1.0, max(0.0, -float(p @ d) / dd))
    dist = float(np.hypot(*(p + lam * d)))
    return math.inf if dist == 0.0 else 1.0 / dist


def _trim_scaled(coeffs: list[float], radius: float) -> list[float]:
    """Drop leading coefficients that are negligible on ``|x| <= radius``."""
    n = len(coeffs) - 1
    mags = [abs(c) * radius ** (n - k) for k, c in enumerate(coeffs)]
    while len(coeffs) > 1 and mags[0] <= 1e-15 * max(mags[1:]):
        coeffs = coeffs[1:]
        mags = mags[1:]
    return coeffs


def _eliminate(m: tuple[float, float, float, float], radius: float) -> list[tuple[float, float]]:
    """Candidates via ``x2 = (a22 x1 - det x1^2) / a21``; requires ``a21 != 0``.

    Substitution into the first equation leaves
    ``det^2 x^4 - 2 a22 det x^3 + (a22^2 + a11 a21) x^2 - a21 x = 0``.
    """
    a11, a12, a21, a22 = m
    det = a11 * a22 - a12 * a21
    coeffs = [det * det, -2.0 * a22 * det, a22 * a22 + a11 * a21, -a21, 0.0]
    coeffs = _trim_scaled(coeffs, min(radius, _BOUND_CAP))
    out = []
    for x in real_roots(coeffs):
        out.append((x, (a22 * x - det * x * x) / a21))
    return out


def _diagonal(m: tuple[float, float, float, float], eps: float) -> list[tuple[float, float]]:
    """Candidates when both off-diagonal entries are treated as zero."""
    a11, a12, _, a22 = m
    xs = [0.0]
    if abs(a11) > eps:
        xs.append(1.0 / a11)
    out = []
    for x in xs:
        c = a12 * x * x
        if abs(a22) > eps:
            ys = [z.real for z in quadratic_roots(a22, -1.0, c) if z.imag == 0.0]
        else:
            ys = [c]
        out.extend((x, y) for y in ys)
    return out


def _multistart(m: tuple[float, float, float, float], radius: float, grid: int = 21, iters: int = 80) -> np.ndarray:
    """Damped Newton from a ``grid x grid`` lattice of starts; returns end points."""
    a11, a12, a21, a22 = m
    g = np.linspace(-radius, radius, grid)
    x, y = (arr.ravel().copy() for arr in np.meshgrid(g, g))

    def resid(x, y):
        return np.maximum(np.abs(a11 * x * x + a21 * y * y - x), np.abs(a12 * x * x + a22 * y * y - y))

    res = resid(x, y)
    with np.errstate(all="ignore"):
        for _ in range(iters):
            f1 = a11 * x * x + a21 * y * y - x
            f2 = a12 * x * x + a22 * y * y - y
            j11 = 2 * a11 * x - 1
            j12 = 2 * a21 * y
            j21 = 2 * a12 * x
            j22 = 2 * a22 * y - 1
            jdet = j11 * j22 - j12 * j21
            ok = jdet != 0
            jdet = np.where(ok, jdet, 1.0)
            dx = np.where(ok, (f1 * j22 - f2 * j12) / jdet, 0.0)
            dy = np.where(ok, (j11 * f2 - j21 * f1) / jdet, 0.0)
            step = np.ones_like(x)
            nx, ny = x - dx, y - dy
            nres = resid(nx, ny)
            for _ in range(30):
                worse = ~(nres < res)
                if not worse.any():
                    break
                step = np.where(worse, step / 2, step)
                nx, ny = x - step * dx, y - step * dy
                nres = resid(nx, ny)
            better = nres < res
            x = np.where(better, nx, x)
            y = np.where(better, ny, y)
            res = np.where(better, nres, res)
    return np.column_stack([x, y, res])


def _merge(cands: list[tuple[float, float, float]], radius: float) -> list[tuple[float, float, float]]:
    kept: list[tuple[float, float, float]] = []
    for x, y, r in sorted(cands, key=lambda c: c[2]):
        for i, (kx, ky, kr) in enumerate(kept):
            if max(abs(x - kx), abs(y - ky)) <= radius * max(1.0, abs(kx), abs(ky)):
                break
        else:
            kept.append((x, y, r))
    return kept


def _accept_tol(tol: float, scale: float, x: float, y: float) -> float:
    # absolute for O(1) data; grows with the size of the terms being cancelled
    size = max(abs(x), abs(y))
    return tol * max(1.0, size, scale * size * size)


def idempotents(
    M: StructMatrix2,
    eps: float = ZERO_TOL,
    tol: float = SOLVER_TOL,
    dedupe: float = DEDUPE_RADIUS,
) -> IdempotentSet:
    """All real solutions of ``x1 = a11 x1^2 + a21 x2^2``, ``x2 = a12 x1^2 + a22 x2^2``.

    The larger of ``a21`` / ``a12`` is used to eliminate one coordinate
    linearly, leaving a univariate quartic solved in closed form. When both are
    within ``eps`` of zero the system decouples. Candidates are Newton-polished
    on the original system; if any candidate fails the residual test a
    multi-start Newton search is added and the result is marked incomplete.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    m = M.entries
    a11, a12, a21, a22 = m
    scale = M.max_abs()
    if scale <= eps:
        return IdempotentSet((AlgebraElement(0.0, 0.0),), (0.0,), True)
    bound = idempotent_bound(M)
    if abs(a21) >= abs(a12) and abs(a21) > eps:
        raw = _eliminate(m, bound)
    elif abs(a12) > eps:
        swapped = (a22, a21, a12, a11)
        raw = [(x, y) for y, x in _eliminate(swapped, bound)]
    else:
        raw = _diagonal(m, eps)
    limit = bound * (1.0 + 1e-6) + 1e-9
    cands = [(0.0, 0.0, 0.0)]
    failed = False
    for x, y in raw:
        if math.hypot(x, y) > limit:
            continue
        x, y, res = _newton(m, x, y)
        if res <= _accept_tol(tol, scale, x, y):
            cands.append((x, y, res))
        else:
            failed = True
    complete = not failed
    if failed:
        radius = 2.0 * (1.0 + 1.0 / max(scale, eps))
        if math.isfinite(bound):
            radius = min(bound * 1.01, _BOUND_CAP)
        ends = _multistart(m, radius)
        hits = 0
        for x, y, res in ends:
            if math.isfinite(res):
                x, y, res = _newton(m, float(x), float(y))
                if res <= _accept_tol(tol, scale, x, y):
                    cands.append((x, y, res))
                    hits += 1
        if hits == 0:
            raise SolverInconclusive(f"no multi-start Newton run converged for {M}")
    kept = sorted(_merge(cands, dedupe), key=lambda c: (c[0], c[1]))
    return IdempotentSet(
        tuple(AlgebraElement(0.0 if x == 0 else x, 0.0 if y == 0 else y) for x, y, _ in kept),
        tuple(r for _, _, r in kept),
        complete,
    )


def baric_batch(A: np.ndarray, eps: float = ZERO_TOL) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Vectorized :func:`baric_weight` over matrices of shape ``(n, 2, 2)``.

    Returns ``(index, weight, boundary)`` with ``index`` 0 when not baric and
    ``weight`` NaN there.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    A = np.asarray(A, dtype=float)
    a11, a12, a21, a22 = A[:, 0, 0], A[:, 0, 1], A[:, 1, 0], A[:, 1, 1]

    def band(q):
        m = np.abs(q)
        return m <= eps, (m > 0.0) & (m <= 2.0 * eps)

    d1_zero, d1_frag = band(a11)
    o1_zero, o1_frag = band(a21)
    d2_zero, d2_frag = band(a22)
    o2_zero, o2_frag = band(a12)
    q1, f1 = ~d1_zero & o1_zero, d1_frag | o1_frag
    q2, f2 = ~d2_zero & o2_zero, d2_frag | o2_frag
    robust = (q1 & ~f1) | (q2 & ~f2) | (~f1 & ~f2)
    index = np.where(q1, 1, np.where(q2, 2, 0))
    weight = np.where(q1, a11, np.where(q2, a22, np.nan))
    return index, weight, ~robust


NILPOTENT_CODES = {"only_zero": 0, "curve": 1, "all": 2, "infinite": 3}


def nilpotent_batch(A: np.ndarray, eps: float = ZERO_TOL) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized :func:`nilpotent_class`; returns ``(code, boundary)``.

    Codes follow :data:`NILPOTENT_CODES` (0 only zero, 1 curve, 2 all).
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    A = np.asarray(A, dtype=float)
    a11, a12, a21, a22 = A[:, 0, 0], A[:, 0, 1], A[:, 1, 0], A[:, 1, 1]
    scale = np.max(np.abs(A), axis=(1, 2))
    det = a11 * a22 - a12 * a21
    det_abs = np.abs(det)
    det_zero, det_frag = det_abs <= eps, (det_abs > 0.0) & (det_abs <= 2.0 * eps)
    first = np.maximum(np.abs(a11), np.abs(a21)) >= np.maximum(np.abs(a12), np.abs(a22))
    p = np.where(first, a11, a12)
    q = np.where(first, a21, a22)
    o0 = np.where(first, a12, a11)
    o1 = np.where(first, a22, a21)
    pa, qa = np.abs(p), np.abs(q)
    p_zero, p_frag = pa <= eps, (pa > 0.0) & (pa <= 2.0 * eps)
    q_zero, q_frag = qa <= eps, (qa > 0.0) & (qa <= 2.0 * eps)
    top = np.maximum(np.maximum(pa, qa), np.finfo(float).tiny)
    u = np.where(p_zero, 1.0, np.where(q_zero, 0.0, qa / top))
    v = np.where(p_zero, 0.0, np.where(q_zero, 1.0, pa / top))
    ray = p_zero | q_zero | (p * q < 0)
    fits = np.abs(o0 * u + o1 * v) <= eps * (u + v) * np.maximum(1.0, scale)
    code = np.where(ray & fits, 1, 0)
    boundary = np.where(det_zero, det_frag | p_frag | q_frag, det_frag)
    code = np.where(det_zero, code, 0)
    everything = scale <= eps
    code = np.where(everything, 2, code)
    boundary = np.where(everything, scale > 0.0, boundary)
    return code, boundary
