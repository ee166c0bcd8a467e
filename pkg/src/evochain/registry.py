"""Known disagreements between the printed classification tables and the
classification that follows from the defining equations.

Each entry names the family, the table it concerns (``baric``,
``nilpotent``, ``idempotent`` or ``chain``), what the table states, what
solving the equations gives, and which of the two the derived mode follows.
The derived mode always solves the equations directly.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

TABLES = ("baric", "nilpotent", "idempotent", "chain")

FOLLOW_EQUATIONS = "derived mode follows the equations; table mode reproduces the printed claim"


@dataclass(frozen=True)
class DiscrepancyEntry:
    family: int
    table: str
    location: str
    paper_claim: str
    derived_behavior: str
    decision: str = FOLLOW_EQUATIONS

    def to_dict(self) -> dict:
        return asdict(self)


def _e(family, table, location, claim, derived, decision=FOLLOW_EQUATIONS) -> DiscrepancyEntry:
    return DiscrepancyEntry(family, table, location, claim, derived, decision)


_UNPRINTED = (
    "table gives the count but no explicit formula for the nontrivial point",
    "point computed in closed form from the equations",
    "table mode uses the hand-derived closed form; counts are as printed",
)

REGISTRY: tuple[DiscrepancyEntry, ...] = (
    _e(9, "idempotent", "rotation family, t - s = 2 pi n",
       "three idempotents (0,0), (1,0), (0,1)",
       "M is the identity, so x = x^2, y = y^2 gives four points including (1,1)"),
    _e(9, "idempotent", "rotation family, t - s = (2n+1) pi",
       "three idempotents (0,0), (-1,0), (0,-1)",
       "M = -I gives four points including (-1,-1)"),
    _e(9, "idempotent", "rotation family, t - s not a multiple of pi",
       "at least one idempotent; count not stated",
       "four points while t - s is within about 0.2233 of a multiple of pi "
       "(the four idempotents of +-I persist), two points farther away",
       "table mode marks the set as not tabulated"),
    _e(4, "idempotent", "points z1, z2, z3",
       "z coordinates written as Phi(t)/Phi(s)",
       "the system is solved by Phi(s)/Phi(t); the printed ratio is its reciprocal"),
    _e(5, "idempotent", "points z1, z2, z3 (borrowed from family 4)",
       "z coordinates written as Phi(t)/Phi(s)",
       "the system is solved by Phi(s)/Phi(t)"),
    _e(17, "idempotent", "point z2",
       "z2 = (Phi(t)/Phi(s), 0)",
       "the system is solved by (Phi(s)/Phi(t), 0)"),
    _e(20, "idempotent", "point z2",
       "z2 = (Phi(t)/Phi(s), 0)",
       "the system is solved by (Phi(s)/Phi(t), 0)"),
    _e(17, "idempotent", "discriminant",
       "D = 4 Phi(t)^2 psi(s) (g(t) - g(s)) / (Phi(s) psi(t)^2) - 1",
       "the quadratic for x on y = psi(s)/psi(t) has discriminant -D; two extra points exist when -D > 0"),
    _e(4, "idempotent", "D = 0 branch",
       "three idempotents {0, z3, (x*, y*)}",
       "at D = 0 the point (x*, y*) equals z3, so there are two"),
    _e(5, "idempotent", "D = 0 branch",
       "three idempotents {0, z3, (x*, y*)}",
       "at D = 0 the point (x*, y*) equals z3, so there are two"),
    _e(7, "idempotent", "d = 0 branch",
       "three idempotents {0, z3, (x*, y*)}",
       "at d = 0 the point (x*, y*) equals z3, so there are two"),
    _e(7, "idempotent", "points z1, z2, z3",
       "z points defined through Phi, which family 7 does not have",
       "read with Phi(t) = Phi(s): z1 = (0,1), z2 = (1,0), z3 = (1,1)",
       "both modes use the ratio 1"),
    _e(17, "idempotent", "symbol of the second controller",
       "table written with Psi",
       "the matrix uses psi; read as psi", "both modes use psi"),
    _e(18, "idempotent", "symbol of the second controller",
       "table written with Psi",
       "the matrix uses psi; read as psi", "both modes use psi"),
    _e(20, "idempotent", "D > 0 branch",
       "branch condition written s <= t < a",
       "the matrix switches at b; the other branches of the same table use b",
       "both modes use b"),
    _e(23, "idempotent", "general shape, lambda not in {0, 2 mu}",
       "idempotent sets printed only for lambda = 0 and lambda = 2 mu",
       "the system is solved for every lambda != mu",
       "table mode marks the set as not tabulated"),
    _e(12, "nilpotent", "uniqueness set",
       "unique nilpotent iff g(t)^2 <= 1/h(s)^2",
       "both equations reduce to (1/h(s) + g(s)) u + (1/h(s) - g(s)) v = 0; unique iff g(s)^2 < 1/h(s)^2"),
    _e(13, "nilpotent", "uniqueness set",
       "unique nilpotent iff t < a and psi(s)^2 <= 1",
       "unique iff t < a and psi(s)^2 < 1; at psi(s)^2 = 1 a ray of nilpotents exists"),
    _e(14, "baric", "never-baric list",
       "family 14 is never baric",
       "column 1 qualifies whenever psi(s) = 0 (a11 = Phi(t)/Phi(s) != 0, a21 = Phi(t) psi(s) = 0)"),
    _e(21, "baric", "duration set",
       "baric iff s <= t < max(a, b)",
       "on b <= t < a (a > b) the matrix is [[1,0],[v(s),0]], baric only when v(s) = 0",
       "table mode is implemented as printed; derived mode adds the v(s) = 0 condition"),
    _e(19, "baric", "cutoff symbol",
       "duration set and measure written with cutoff a",
       "the matrix is defined with cutoff b",
       "a single cutoff parameter, accepted under either name"),
    _e(20, "chain", "chain law across t = b",
       "the piecewise matrix is a chain for arbitrary v and w",
       "for s < tau < b <= t the law needs w(s) = v(tau) - v(s) + w(tau), i.e. v + w constant on [0, b)",
       "presets use v = t, w = 0.5 - t"),
    _e(21, "chain", "chain law across t = b when a > b",
       "the piecewise matrix is a chain for arbitrary v",
       "for s < tau < b <= t < a the law needs v(s) = v(tau), i.e. v constant on [0, b)",
       "presets use a < b, where the law holds for any v"),
) + tuple(_e(f, "idempotent", "nontrivial point", *_UNPRINTED) for f in (3, 6, 10, 11, 12, 13, 14, 15, 16, 19, 22))


def discrepancy_registry() -> list[DiscrepancyEntry]:
    return list(REGISTRY)


def lookup(family: int, table: str | None = None) -> list[DiscrepancyEntry]:
    """Registry entries for ``family``, optionally restricted to one table."""
    if table is not None and table not in TABLES:
        raise ValueError(f"table must be one of {TABLES}")
    return [e for e in REGISTRY if e.family == family and (table is None or e.table == table)]
