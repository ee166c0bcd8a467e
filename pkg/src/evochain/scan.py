"""Property diagrams over the time triangle and Monte Carlo duration measures.

The triangle ``{0 <= s <= t <= tmax}`` is covered by an ``n x n`` grid whose
cell ``(i, j)`` spans ``s`` in row ``i`` and ``t`` in column ``j``; cells with
``j < i`` lie outside. Off-diagonal cells are classified at their centre,
diagonal cells at the centroid of their upper triangle, so no cell is
evaluated on the edge ``s = t``.
"""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Any

import numpy as np

from .chains import ChainSpec, Slots
from .classify import Mode, _mode, _special_shape, baric_codes, idempotent_counts, nilpotent_codes
from .controllers import _flat
from .core import ZERO_TOL
from .errors import EvoChainError, PreconditionViolated, UnsupportedFamily
from .sampling import chunks, uniforms

OUTSIDE = -1
NOT_TABULATED = -2
PROPERTIES = ("baric", "nilpotent", "idempotent")
_ALIASES = {"idempotents": "idempotent", "idempotent-count": "idempotent", "nilpotents": "nilpotent"}
BARIC_LABELS = {0: "not_baric", 1: "baric", 2: "boundary"}
NILPOTENT_LABELS = {0: "only_zero", 1: "curve", 2: "all", 3: "infinite"}
CHUNK = 1 << 15


def property_name(prop: str) -> str:
    name = _ALIASES.get(prop, prop)
    if name not in PROPERTIES:
        raise ValueError(f"property must be one of {PROPERTIES}, got {prop!r}")
    return name


def cell_label(prop: str, code: int) -> str:
    if code == OUTSIDE:
        return "outside"
    if prop == "baric":
        return BARIC_LABELS[code]
    if prop == "nilpotent":
        return NILPOTENT_LABELS[code]
    return "not_tabulated" if code == NOT_TABULATED else f"count={code}"


def codes_at(spec: ChainSpec, prop: str, s, t, mode=Mode.DERIVED, eps: float = ZERO_TOL) -> np.ndarray:
    """Per-point classification codes for one property.

    baric: 0 not baric, 1 baric, 2 boundary. nilpotent: 0 only zero, 1 curve,
    2 all, 3 infinite (table mode). idempotent: the number of points, or
    ``NOT_TABULATED`` in table mode where no set is printed.
    """
    prop = property_name(prop)
    if prop == "baric":
        member, boundary = baric_codes(spec, s, t, mode, eps)
        return np.where(boundary, 2, member.astype(int))
    if prop == "nilpotent":
        return nilpotent_codes(spec, s, t, mode, eps)[0].astype(int)
    return idempotent_counts(spec, s, t, mode, eps)[0]


def cell_points(tmax: float, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Evaluation points ``(s, t)`` of all ``n x n`` cells, each of shape ``(n, n)``."""
    h = tmax / n
    i, j = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
    s = (i + 0.5) * h
    t = (j + 0.5) * h
    diag = i == j
    s = np.where(diag, (i + 1 / 3) * h, s)
    t = np.where(diag, (i + 2 / 3) * h, t)
    return s, t


@dataclass(frozen=True)
class Diagram:
    tmax: float
    n: int
    property: str
    mode: str
    codes: np.ndarray

    def to_csv(self) -> str:
        s, t = cell_points(self.tmax, self.n)
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["s", "t", "code", "label"])
        for i in range(self.n):
            for j in range(self.n):
                code = int(self.codes[i, j])
                w.writerow([f"{s[i, j]:.12g}", f"{t[i, j]:.12g}", code, cell_label(self.property, code)])
        return buf.getvalue()

    def to_dict(self) -> dict[str, Any]:
        return {
            "tmax": self.tmax,
            "n": self.n,
            "property": self.property,
            "mode": self.mode,
            "cells": self.codes.tolist(),
        }

    @classmethod
    def from_csv(cls, text: str, tmax: float, prop: str, mode: str = "derived") -> "Diagram":
        rows = list(csv.DictReader(io.StringIO(text)))
        n = math.isqrt(len(rows))
        if n * n != len(rows):
            raise ValueError("row count is not a square")
        codes = np.array([int(r["code"]) for r in rows], dtype=int).reshape(n, n)
        return cls(float(tmax), n, property_name(prop), mode, codes)

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "Diagram":
        return cls(float(d["tmax"]), int(d["n"]), d["property"], d["mode"], np.array(d["cells"], dtype=int))


def _run(tasks, workers: int):
    if workers <= 1 or len(tasks) <= 1:
        return [task() for task in tasks]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda task: task(), tasks))


def grid_scan(
    spec: ChainSpec,
    prop: str,
    tmax: float,
    n: int,
    mode=Mode.DERIVED,
    workers: int = 1,
    eps: float = ZERO_TOL,
) -> Diagram:
    if n < 2:
        raise ValueError("n must be at least 2")
    if not tmax > 0:
        raise ValueError("tmax must be positive")
    prop = property_name(prop)
    mode = _mode(mode)
    s, t = cell_points(tmax, n)
    inside = np.flatnonzero((t >= s).ravel())
    ss, tt = s.ravel()[inside], t.ravel()[inside]

    def task(lo, cnt):
        def go():
            try:
                return codes_at(spec, prop, ss[lo : lo + cnt], tt[lo : lo + cnt], mode, eps)
            except EvoChainError as exc:
                k = lo + _first_failure(spec, prop, ss[lo : lo + cnt], tt[lo : lo + cnt], mode, eps)
                cell = divmod(int(inside[k]), n)
                raise type(exc)(f"cell {cell}: {exc}") from exc
        return go

    size = CHUNK if prop != "idempotent" else 2048
    parts = _run([task(lo, cnt) for lo, cnt in chunks(len(inside), size)], workers)
    codes = np.full(n * n, OUTSIDE, dtype=int)
    if parts:
        codes[inside] = np.concatenate(parts)
    return Diagram(float(tmax), n, prop, mode.value, codes.reshape(n, n))


def _first_failure(spec, prop, s, t, mode, eps) -> int:
    for k in range(len(s)):
        try:
            codes_at(spec, prop, s[k : k + 1], t[k : k + 1], mode, eps)
        except EvoChainError:
            return k
    return 0


def transition_boundary(
    spec: ChainSpec,
    tmax: float,
    n: int,
    prop: str,
    mode=Mode.DERIVED,
    workers: int = 1,
    diagram: Diagram | None = None,
) -> list[tuple[tuple[int, int], tuple[int, int]]]:
    """Adjacent in-triangle cell pairs whose codes differ."""
    d = diagram if diagram is not None else grid_scan(spec, prop, tmax, n, mode, workers)
    return diagram_edges(d.codes)


def diagram_edges(codes: np.ndarray) -> list[tuple[tuple[int, int], tuple[int, int]]]:
    out = []
    n = codes.shape[0]
    for i in range(n):
        for j in range(i, n):
            c = codes[i, j]
            if j + 1 < n and codes[i, j + 1] != c:
                out.append(((i, j), (i, j + 1)))
            if i + 1 <= j and codes[i + 1, j] != c:
                out.append(((i, j), (i + 1, j)))
    return out


@dataclass(frozen=True)
class MeasureEstimate:
    estimate: float
    stderr: float
    samples: int
    seed: int

    def to_dict(self) -> dict[str, Any]:
        return {"estimate": self.estimate, "stderr": self.stderr, "samples": self.samples, "seed": self.seed}


def sample_pairs(seed: int, start: int, count: int, tmax: float) -> tuple[np.ndarray, np.ndarray]:
    """Uniform points of the triangle: the sorted pair of two uniforms on ``[0, tmax]``."""
    u = uniforms(seed, start, count, 2) * tmax
    return np.minimum(u[:, 0], u[:, 1]), np.maximum(u[:, 0], u[:, 1])


def strict_members(spec: ChainSpec, prop: str, s, t, mode=Mode.DERIVED, count: int | None = None, eps: float = ZERO_TOL) -> np.ndarray:
    """Pairs that have the property and are not flagged boundary.

    nilpotent means a unique nilpotent; idempotent means exactly ``count`` points.
    """
    prop = property_name(prop)
    if prop == "baric":
        member, boundary = baric_codes(spec, s, t, mode, eps)
    elif prop == "nilpotent":
        code, boundary = nilpotent_codes(spec, s, t, mode, eps)
        member = code == 0
    else:
        if count is None:
            raise ValueError("the idempotent property needs a target count")
        n, boundary = idempotent_counts(spec, s, t, mode, eps)
        member = n == count
    return member & ~boundary


def measure_estimate(
    spec: ChainSpec,
    prop: str,
    tmax: float,
    samples: int,
    seed: int,
    mode=Mode.DERIVED,
    workers: int = 1,
    count: int | None = None,
    eps: float = ZERO_TOL,
) -> MeasureEstimate:
    """Monte Carlo area of the strict duration set; sample ``k`` depends only on ``(seed, k)``."""
    if samples < 100:
        raise ValueError("samples must be at least 100")
    if not tmax > 0:
        raise ValueError("tmax must be positive")

    def task(lo, cnt):
        def go():
            s, t = sample_pairs(seed, lo, cnt, tmax)
            return int(np.count_nonzero(strict_members(spec, prop, s, t, mode, count, eps)))
        return go

    hits = sum(_run([task(lo, cnt) for lo, cnt in chunks(samples, CHUNK)], workers))
    area = tmax * tmax / 2
    p = hits / samples
    return MeasureEstimate(p * area, area * math.sqrt(p * (1 - p) / samples), samples, seed)


def _probe_controller(spec: ChainSpec, tmax: float):
    F = Slots(spec)
    grid = np.linspace(0.0, tmax, 1001)
    fam = spec.family
    if fam == 4:
        return F("Phi", grid) / F("Psi", grid)
    if fam == 5:
        return F("Phi", grid)
    if fam == 7:
        return F("Psi", grid)
    if fam == 23:
        if _special_shape(spec) is not None:
            raise PreconditionViolated("family 23 with lambda in {0, 2 mu} is baric at every time")
        return F("theta", grid)
    raise UnsupportedFamily(f"the zero-measure probe covers families 4, 5, 7, 23, not {fam}")


def countable_variation_probe(spec: ChainSpec, tmax: float, samples: int, seed: int, workers: int = 1) -> MeasureEstimate:
    """Baric measure when the controlling function varies everywhere.

    Every controller kind is analytic, hence either constant or of countable
    variation; a constant controlling function is rejected.
    """
    if _flat(_probe_controller(spec, tmax)):
        raise PreconditionViolated("the controlling function is constant on [0, tmax]")
    return measure_estimate(spec, "baric", tmax, samples, seed, Mode.DERIVED, workers)


def diagram_json(d: Diagram) -> str:
    return json.dumps(d.to_dict())
