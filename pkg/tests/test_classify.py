import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from evochain.chains import ChainSpec, matrix_at
from evochain.classify import (
    D_FAMILIES,
    Mode,
    baric_at,
    baric_codes,
    classify,
    closed_form_points,
    discriminant,
    idempotent_counts,
    idempotent_set_at,
    nilpotent_at,
    nilpotent_codes,
)
from evochain.controllers import const, exp, poly
from evochain.core import AlgebraElement, baric_weight, idempotents, nilpotent_class, square
from evochain.errors import UnsupportedFamily
from evochain.registry import TABLES, discrepancy_registry, lookup
from evochain.sampling import uniforms
from oracles import same_point_sets
from presets import preset

TMAX = 5.0


def triangle(n, seed, tmax=TMAX):
    u = np.sort(uniforms(seed, 0, n, 2) * tmax, axis=1)
    return u[:, 0], u[:, 1]


def test_classify_json_shape():
    d = classify(preset(16), 0.2, 1.1).to_dict()
    assert set(d) >= {"s", "t", "baric", "nilpotent", "idempotents", "D", "mode"}
    assert d["baric"]["status"] == "Baric" and d["baric"]["i0"] == 2
    assert set(d["baric"]) == {"status", "i0", "sigma", "boundary"}
    for p in d["idempotents"]:
        assert set(p) == {"x", "y", "label", "residual"}


def test_zero_family_report():
    d = classify(preset(0), 0.0, 0.0).to_dict()
    assert d["baric"]["status"] == "NotBaric"
    assert d["nilpotent"]["kind"] == "all"
    assert [(p["x"], p["y"]) for p in d["idempotents"]] == [(0, 0)]


def test_markov_has_no_table_mode():
    spec = preset("markov2")
    # every transition probability is positive, so no column qualifies
    assert not classify(spec, 0.0, 1.0).baric.baric
    with pytest.raises(UnsupportedFamily):
        classify(spec, 0.0, 1.0, Mode.PAPER)


def test_mode_strings_are_accepted():
    assert classify(preset(8), 0, 0.5, "paper").mode is Mode.PAPER
    with pytest.raises(ValueError):
        classify(preset(8), 0, 0.5, "table")


# ------------------------------------------------------ registry witnesses


def test_family9_full_turn():
    spec = preset(9)
    derived = idempotent_set_at(spec, 0.0, 2 * math.pi)
    table = idempotent_set_at(spec, 0.0, 2 * math.pi, Mode.PAPER)
    assert len(derived) == 4 and len(table) == 3
    assert same_point_sets(derived.as_tuples(), [(0, 0), (1, 0), (0, 1), (1, 1)], 1e-9)


def test_family9_half_turn():
    derived = idempotent_set_at(preset(9), 0.0, math.pi)
    assert same_point_sets(derived.as_tuples(), [(0, 0), (-1, 0), (0, -1), (-1, -1)], 1e-9)


def test_family9_generic_angle_is_not_tabulated():
    rep = idempotent_set_at(preset(9), 0.0, 1.0, Mode.PAPER)
    assert not rep.tabulated
    assert len(idempotent_set_at(preset(9), 0.0, 1.0)) == 2


def test_family14_baric_when_psi_vanishes():
    spec = preset(14)  # psi = 1 - t
    assert baric_at(spec, 1.0, 2.0).baric
    assert not baric_at(spec, 1.0, 2.0, Mode.PAPER).baric
    assert lookup(14, "baric")


def test_family21_branch_needs_v_zero():
    spec = preset(21, a=2.0, b=1.0)  # v = t
    assert not baric_at(spec, 0.5, 1.5).baric
    assert baric_at(spec, 0.5, 1.5, Mode.PAPER).baric
    assert baric_at(spec, 0.0, 1.5).baric
    assert lookup(21, "baric")


def test_family12_strict_inequality():
    # g(s) h(s) = 1 exactly: a ray of nilpotents, printed as unique
    spec = ChainSpec(12, {"h": const(2.0), "g": const(0.5)})
    assert nilpotent_at(spec, 0.3, 0.3).kind == "curve"
    assert nilpotent_at(spec, 0.3, 0.3, Mode.PAPER).unique


def test_family19_accepts_cutoff_under_either_name():
    a = ChainSpec(19, {"h": poly(1, 1)}, a=1.0)
    b = ChainSpec(19, {"h": poly(1, 1)}, b=1.0)
    for t in (0.5, 1.5):
        assert baric_at(a, 0.2, t) == baric_at(b, 0.2, t)


def test_registry_fields():
    entries = discrepancy_registry()
    assert entries
    for e in entries:
        assert e.table in TABLES
        assert e.paper_claim and e.derived_behavior and e.decision
        assert set(e.to_dict()) == {"family", "table", "location", "paper_claim", "derived_behavior", "decision"}
    with pytest.raises(ValueError):
        lookup(4, "trajectory")


# ------------------------------------------------------------ agreement


@pytest.mark.parametrize("family", range(25))
def test_modes_disagree_only_on_registry_or_boundary(family):
    spec = preset(family)
    s, t = triangle(200, 5)
    for table, kernel in (("baric", baric_codes), ("nilpotent", nilpotent_codes)):
        dv, db = kernel(spec, s, t, Mode.DERIVED)
        pv, pb = kernel(spec, s, t, Mode.PAPER)
        if table == "nilpotent":
            dv, pv = dv == 0, pv == 0
        differ = (dv != pv) & ~db & ~pb
        assert not differ.any() or lookup(family, table), (table, s[differ][:3], t[differ][:3])
    dc, db = idempotent_counts(spec, s[:60], t[:60], Mode.DERIVED)
    pc, pb = idempotent_counts(spec, s[:60], t[:60], Mode.PAPER)
    differ = (dc != pc) & ~db & ~pb
    assert not differ.any() or lookup(family, "idempotent")


@pytest.mark.parametrize("family", D_FAMILIES)
def test_named_points_are_found_and_labelled(family):
    spec = preset(family)
    s, t = triangle(40, 9, 3.0)
    for si, ti in zip(s, t):
        rep = idempotent_set_at(spec, si, ti)
        M = matrix_at(spec, si, ti)
        for p in rep.points:
            assert p.residual < 1e-10 * max(1.0, abs(p.x), abs(p.y)) ** 2
        for label, x, y in closed_form_points(spec, si, ti):
            if not (math.isfinite(x) and math.isfinite(y)):
                continue
            v = square(AlgebraElement(x, y), M)
            if max(abs(v.x1 - x), abs(v.x2 - y)) > 1e-9 * max(1.0, abs(x), abs(y)) ** 2:
                continue
            hits = [p for p in rep.points if max(abs(p.x - x), abs(p.y - y)) < 1e-7 * max(1.0, abs(x), abs(y))]
            assert len(hits) == 1 and hits[0].label == label, (family, si, ti, label)


def test_family4_extra_points_match_hand_algebra():
    # with r = Phi(t)/Phi(s), q = Psi(t)/Psi(s): either x = y = 1/r, or
    # x + y = 1/q and x^2 + y^2 = 1/(r q); the latter is real iff r (2q - r) > 0
    spec = ChainSpec(4, {"Phi": exp(3), "Psi": exp(1)})
    for tau in (0.05, 0.2, 0.3, 0.6):
        r, q = math.exp(3 * tau), math.exp(tau)
        D = r * (2 * q - r)
        assert discriminant(spec, 0.0, tau) == pytest.approx(D)
        want = [(0.0, 0.0), (1 / r, 1 / r)]
        if D > 0:
            h = math.sqrt(D) / (r * q)
            want += [((1 / q + h) / 2, (1 / q - h) / 2), ((1 / q - h) / 2, (1 / q + h) / 2)]
        rep = idempotent_set_at(spec, 0.0, tau)
        assert same_point_sets(rep.as_tuples(), want, 1e-10)
        labels = {p.label for p in rep.points}
        assert labels == ({"origin", "z3", "xplus", "xminus"} if D > 0 else {"origin", "z3"})


@pytest.mark.parametrize("lam", [0.0, 2.0])
def test_family23_special_shapes_always_baric(lam):
    spec = preset(23, lam=lam, mu=1.0)
    s, t = triangle(300, 2)
    member, boundary = baric_codes(spec, s, t)
    assert member.all()


def test_family23_general_shape_needs_equal_theta():
    spec = preset(23)
    assert not baric_at(spec, 0.2, 1.0).baric
    spec = preset(23, controllers={"theta": const(2.0)})
    assert baric_at(spec, 0.2, 1.0).baric


@settings(max_examples=100, deadline=None)
@given(st.sampled_from(range(25)), st.floats(0, TMAX), st.floats(0, TMAX))
def test_derived_mode_is_the_core_classifier(family, a, b):
    s, t = min(a, b), max(a, b)
    spec = preset(family)
    M = matrix_at(spec, s, t)
    rep = classify(spec, s, t)
    assert len(rep.idempotents) == len(idempotents(M))
    b = baric_weight(M)
    assert (rep.baric.baric, rep.baric.i0, rep.baric.boundary) == (b.baric, b.index, b.boundary)
    assert rep.nilpotent == nilpotent_class(M)


def test_batch_idempotent_counts_match_scalar():
    spec = preset(17)
    s, t = triangle(30, 4, 3.0)
    counts, _ = idempotent_counts(spec, s, t)
    for k in range(30):
        assert counts[k] == len(idempotent_set_at(spec, s[k], t[k]))
