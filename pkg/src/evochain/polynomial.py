"""Closed-form roots of real polynomials of degree at most four.

Quartics are solved by Ferrari's method through the resolvent cubic, cubics by
Cardano / the trigonometric form. Every root is polished with two complex
Newton steps on the original polynomial; a root whose imaginary part is then
below ``IMAG_TOL`` (relative to its magnitude) is reported as real.
"""

from __future__ import annotations

import cmath
import math
from typing import Sequence

import numpy as np

IMAG_TOL = 1e-8
NEWTON_STEPS = 2


def _horner(coeffs: Sequence[complex], z: complex) -> tuple[complex, complex]:
    """Value and derivative at ``z`` (coefficients highest degree first)."""
    p = 0j
    dp = 0j
    for c in coeffs:
        dp = dp * z + p
        p = p * z + c
    return p, dp


def _relative(coeffs: Sequence[float], z: complex, p: complex) -> float:
    n = len(coeffs) - 1
    az = abs(z)
    size = sum(abs(c) * az ** (n - k) for k, c in enumerate(coeffs))
    return abs(p) / size if size > 0.0 else 0.0


def _polish(coeffs: Sequence[float], z: complex, steps: int = NEWTON_STEPS) -> complex:
    p, dp = _horner(coeffs, z)
    for _ in range(steps):
        if dp == 0 or p == 0:
            break
        z_new = z - p / dp
        p_new, dp_new = _horner(coeffs, z_new)
        # never accept a step that worsens the residual relative to the
        # term sizes (multiple roots, jumps across scales)
        if _relative(coeffs, z_new, p_new) > _relative(coeffs, z, p):
            break
        z, p, dp = z_new, p_new, dp_new
    return z


def quadratic_roots(a: float, b: float, c: float) -> list[complex]:
    """Both roots of ``a z^2 + b z + c`` with ``a != 0``, cancellation-free."""
    disc = b * b - 4.0 * a * c
    if disc >= 0.0:
        sq = math.sqrt(disc)
        q = -0.5 * (b + math.copysign(sq, b))
        if q == 0.0:
            return [0j, 0j]
        return [complex(q / a), complex(c / q)]
    sq = cmath.sqrt(disc)
    return [(-b + sq) / (2.0 * a), (-b - sq) / (2.0 * a)]


def _cbrt(x: float) -> float:
    return math.copysign(abs(x) ** (1.0 / 3.0), x)


def cubic_roots(a: float, b: float, c: float, d: float) -> list[complex]:
    """All three roots of ``a z^3 + b z^2 + c z + d`` with ``a != 0``."""
    b, c, d = b / a, c / a, d / a
    shift = b / 3.0
    p = c - b * b / 3.0
    q = 2.0 * b**3 / 27.0 - b * c / 3.0 + d
    half_q = q / 2.0
    third_p = p / 3.0
    disc = half_q * half_q + third_p**3
    if p == 0.0 and q == 0.0:
        roots = [0j, 0j, 0j]
    elif disc > 0.0 or p > 0.0:
        u = -math.copysign(_cbrt(abs(half_q) + math.sqrt(disc)), half_q)
        v = -third_p / u if u != 0.0 else 0.0
        re = -(u + v) / 2.0
        im = math.sqrt(3.0) / 2.0 * (u - v)
        roots = [complex(u + v), complex(re, im), complex(re, -im)]
    else:
        m = 2.0 * math.sqrt(-third_p)
        arg = max(-1.0, min(1.0, 3.0 * q / (p * m)))
        phi = math.acos(arg) / 3.0
        roots = [complex(m * math.cos(phi - 2.0 * math.pi * k / 3.0)) for k in range(3)]
    return [r - shift for r in roots]


def _expand(lead: float, roots: Sequence[complex]) -> list[complex]:
    out = [complex(lead)]
    for z in roots:
        out = [a - z * b for a, b in zip(out + [0j], [0j] + out)]
    return out


def _backward_error(coeffs: Sequence[float], roots: Sequence[complex]) -> float:
    """Normwise error of the polynomial rebuilt from ``roots``.

    Per-root residuals relative to the local term sizes are unreliable near
    tiny roots (an exact zero in place of a 1e-17 root scores as a total
    miss while clusters of spurious tiny roots score perfectly); rebuilding
    the coefficients judges the root set as a whole.
    """
    top = max(abs(c) for c in coeffs)
    rebuilt = _expand(coeffs[0], roots)
    err = max(abs(a - b) for a, b in zip(rebuilt, coeffs)) / top
    return err if math.isfinite(err) else math.inf


def _ferrari(b: float, c: float, d: float, e: float) -> list[complex]:
    """Roots of the monic quartic ``z^4 + b z^3 + c z^2 + d z + e``."""
    shift = b / 4.0
    p = c - 3.0 * b * b / 8.0
    q = d - b * c / 2.0 + b**3 / 8.0
    r = e - b * d / 4.0 + b * b * c / 16.0 - 3.0 * b**4 / 256.0
    scale = max(1.0, abs(p), math.sqrt(abs(r)))
    if abs(q) <= 1e-14 * scale**1.5:
        ys = []
        for z in quadratic_roots(1.0, p, r):
            w = cmath.sqrt(z)
            ys.extend([w, -w])
        return [y - shift for y in ys]
    resolvent = [1.0, p, p * p / 4.0 - r, -q * q / 8.0]
    monic = [1.0, b, c, d, e]
    best: list[complex] = []
    best_err = math.inf
    for z in cubic_roots(*resolvent):
        m = _polish(resolvent, z).real
        if m <= 0.0 or abs(z.imag) > 1e-8 * max(1.0, abs(z)):
            continue
        s = math.sqrt(2.0 * m)
        k = q / (2.0 * s)
        ys = quadratic_roots(1.0, -s, p / 2.0 + m + k) + quadratic_roots(1.0, s, p / 2.0 + m - k)
        roots = [y - shift for y in ys]
        err = _backward_error(monic, roots)
        if err < best_err:
            best, best_err = roots, err
    if not best:
        # cubic(0) = -q^2/8 < 0 guarantees a positive root; rounding can lose it
        m = max(abs(_polish(resolvent, z).real) for z in cubic_roots(*resolvent)) or 1e-300
        s = math.sqrt(2.0 * m)
        k = q / (2.0 * s)
        ys = quadratic_roots(1.0, -s, p / 2.0 + m + k) + quadratic_roots(1.0, s, p / 2.0 + m - k)
        best = [y - shift for y in ys]
    return best


def quartic_roots(a: float, b: float, c: float, d: float, e: float) -> list[complex]:
    """All four roots of ``a z^4 + ... + e`` with ``a != 0`` via the resolvent cubic.

    When ``e != 0`` the reversed polynomial (roots ``1/z``) is solved as well
    and the root set with the smaller backward error is kept; this rescues
    quartics with a tiny leading coefficient.
    """
    return _pick(_monic_quartic, [a, b, c, d, e])


def _monic_quartic(a: float, b: float, c: float, d: float, e: float) -> list[complex]:
    return _ferrari(b / a, c / a, d / a, e / a)


def _attempt(solver, coeffs: Sequence[float]) -> list[complex] | None:
    try:
        roots = solver(*coeffs)
    except (OverflowError, ZeroDivisionError):
        return None
    return roots if all(cmath.isfinite(z) for z in roots) else None


def _pick(solver, coeffs: Sequence[float]) -> list[complex]:
    """Roots from the direct or the reversed polynomial, whichever fits better.

    Falls back to the companion-matrix eigenvalues when both closed forms
    overflow (extreme coefficient ratios).
    """
    direct = _attempt(solver, coeffs)
    flipped = None
    if coeffs[-1] != 0.0:
        rev = _attempt(solver, coeffs[::-1])
        if rev is not None and all(w != 0 for w in rev):
            flipped = [1.0 / w for w in rev]
    options = [r for r in (direct, flipped) if r is not None]
    if not options:
        return [complex(z) for z in np.roots(coeffs)]
    return min(options, key=lambda r: _backward_error(coeffs, r))


def trim(coeffs: Sequence[float]) -> list[float]:
    """Drop exactly-zero leading coefficients."""
    out = list(coeffs)
    while out and out[0] == 0.0:
        out.pop(0)
    return out


def all_roots(coeffs: Sequence[float]) -> list[complex]:
    """Polished complex roots of a degree <= 4 polynomial, highest degree first.

    Exact zero roots (vanishing trailing coefficients) are factored out before
    the closed form is applied, so they come back as exact zeros.
    """
    coeffs = trim([float(c) for c in coeffs])
    if not coeffs:
        raise ValueError("the zero polynomial has no isolated roots")
    zeros = 0
    while len(coeffs) > 1 and coeffs[-1] == 0.0:
        coeffs.pop()
        zeros += 1
    degree = len(coeffs) - 1
    if degree > 4:
        raise ValueError("degree above four")
    if degree == 0:
        found: list[complex] = []
    elif degree == 1:
        found = [complex(-coeffs[1] / coeffs[0])]
    elif degree == 2:
        found = quadratic_roots(*coeffs)
    elif degree == 3:
        found = _pick(cubic_roots, coeffs)
    else:
        found = quartic_roots(*coeffs)
    found = [_polish(coeffs, z) for z in found]
    return [0j] * zeros + found


def real_roots(coeffs: Sequence[float]) -> list[float]:
    """Real roots (with multiplicity, ascending) of a degree <= 4 polynomial."""
    out = []
    for z in all_roots(coeffs):
        if abs(z.imag) < IMAG_TOL * max(1.0, abs(z)):
            out.append(z.real)
    return sorted(out)
