import math
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st
from mpmath import mp

from carpetbench.catalog import A, sc8
from carpetbench.exactnum import QuadNumber
from carpetbench.geometry import (
    GROUP,
    ISOMETRY_TAGS,
    IFSFormatError,
    IFSystem,
    Isometry,
    MalformedSystemError,
    Segment,
    Similarity,
    Square,
    UNIT_SQUARE,
    apply_isometry,
    cell_square,
    classify_contact,
    dump_ifs,
    hausdorff_dimension,
    load_ifs,
    point,
    unit_edge,
    validate_lsc,
)

F = Fraction


def Q(x):
    return QuadNumber.coerce(F(x))


# -- the symmetry group -------------------------------------------------------

ACTIONS = {
    "id": lambda x, y: (x, y),
    "v": lambda x, y: (x, 1 - y),
    "h": lambda x, y: (1 - x, y),
    "d1": lambda x, y: (y, x),
    "d2": lambda x, y: (1 - y, 1 - x),
    "r1": lambda x, y: (1 - y, x),
    "r2": lambda x, y: (1 - x, 1 - y),
    "r3": lambda x, y: (y, 1 - x),
}


@pytest.mark.parametrize("tag", ISOMETRY_TAGS)
def test_isometry_action(tag):
    g = Isometry(tag)
    for x, y in [(F(1, 3), F(1, 7)), (F(0), F(1)), (F(2, 5), F(9, 10))]:
        assert g(point(x, y)) == point(*ACTIONS[tag](x, y))


def test_group_closure_and_inverses():
    tags = {g.tag for g in GROUP}
    for g in GROUP:
        assert (g @ g.inverse()).tag == "id"
        for h in GROUP:
            assert (g @ h).tag in tags
            p = point(F(1, 5), F(2, 7))
            assert (g @ h)(p) == g(h(p))


def test_rotation_powers():
    r1 = Isometry("r1")
    assert (r1 @ r1).tag == "r2"
    assert (r1 @ r1 @ r1).tag == "r3"
    assert (r1 @ r1 @ r1 @ r1).tag == "id"


def test_unknown_isometry():
    with pytest.raises(ValueError):
        Isometry("x")


def test_unit_edges():
    assert unit_edge(1) == Segment(point(0, 0), point(1, 0))
    assert unit_edge(2) == Segment(point(1, 0), point(1, 1))
    assert unit_edge(4) == Segment(point(0, 0), point(0, 1))


# -- contacts ---------------------------------------------------------------------


def sq(x, y, s):
    return Square(Q(x), Q(y), Q(s))


def test_classify_contact_kinds():
    a = sq(0, 0, F(1, 2))
    assert classify_contact(a, sq(F(1, 2), 0, F(1, 2)))[0] == "segment"
    assert classify_contact(a, sq(F(1, 2), F(1, 2), F(1, 2)))[0] == "point"
    assert classify_contact(a, sq(F(1, 4), F(1, 4), F(1, 2)))[0] == "overlap"
    assert classify_contact(a, sq(F(3, 4), 0, F(1, 4)))[0] == "none"
    kind, seg = classify_contact(a, sq(F(1, 2), F(1, 4), F(1, 8)))
    assert kind == "segment" and seg == Segment(point(F(1, 2), F(1, 4)), point(F(1, 2), F(3, 8)))


def test_classify_contact_irrational_touch():
    # squares meeting at x = a exactly: float rounding must not matter
    left = Square(Q(0), Q(0), A)
    right = Square(A, Q(0), A * A)
    assert classify_contact(left, right)[0] == "segment"
    gap = Square(A + A * A * A, Q(0), A * A)
    assert classify_contact(left, gap)[0] == "none"


@given(
    st.sampled_from(ISOMETRY_TAGS),
    st.fractions(F(1, 20), F(1, 2), max_denominator=20),
    st.fractions(0, F(1, 2), max_denominator=20),
)
def test_isometry_preserves_contact(tag, side, y):
    g = Isometry(tag)
    a = sq(0, 0, F(1, 2))
    b = sq(F(1, 2), y, side)
    assert classify_contact(a, b)[0] == classify_contact(apply_isometry(g, a), apply_isometry(g, b))[0]


def test_conjugation_matches_pointwise_definition():
    m = Similarity(A, Q(F(1, 24)), Q(0))
    p = point(F(1, 3), F(2, 3))
    for g in GROUP:
        c = m.conjugate(g)
        assert c(p) == g(m(g.inverse()(p)))


# -- validation -------------------------------------------------------------------


def test_carpet104_passes_all_axioms(carpet):
    rep = validate_lsc(carpet)
    assert rep.passed
    assert [a.passed for a in rep.axioms.values()] == [True] * 4
    assert rep.sum_sq_ratio == QuadNumber(158, -24, 3, 42)
    assert rep.sum_sq_ratio < 1
    assert len(rep.lines()) == 5


def test_sc8_passes(carpet_sc8):
    assert validate_lsc(carpet_sc8).passed


def test_dropping_center_cell_breaks_symmetry(carpet):
    broken = IFSystem("broken", 42, carpet.maps[:100] + carpet.maps[101:])
    rep = validate_lsc(broken)
    sym = rep.axioms["symmetry"]
    assert not sym.passed and sym.witness == "r1"
    assert rep.axioms["non-overlapping"].passed


def test_overlap_detected():
    s = sc8()
    bad = IFSystem("bad", 2, s.maps + (Similarity(Q(F(1, 3)), Q(F(1, 6)), Q(0)),))
    rep = validate_lsc(bad)
    assert not rep.axioms["non-overlapping"].passed


def test_disconnected_detected():
    maps = (Similarity(Q(F(1, 4)), Q(0), Q(0)), Similarity(Q(F(1, 4)), Q(F(3, 4)), Q(F(3, 4))))
    rep = validate_lsc(IFSystem("far", 2, maps))
    assert not rep.axioms["connectivity"].passed
    assert not rep.axioms["boundary-included"].passed


def test_malformed_systems():
    with pytest.raises(MalformedSystemError):
        validate_lsc(IFSystem("one", 2, (Similarity(Q(F(1, 2)), Q(0), Q(0)),)))
    with pytest.raises(MalformedSystemError):
        validate_lsc(IFSystem("big", 2, (Similarity(Q(1), Q(0), Q(0)),) * 2))
    other = QuadNumber(0, 1, 10, 3)
    with pytest.raises(MalformedSystemError):
        validate_lsc(IFSystem("field", 2, (Similarity(other, Q(0), Q(0)),) * 2))


# -- cells ------------------------------------------------------------------------


def test_cell_square_composition(carpet):
    s = cell_square(carpet, (13, 2))
    f13, f2 = carpet.map(13), carpet.map(2)
    assert s == f13.compose(f2).square()
    assert UNIT_SQUARE.contains_square(s)
    assert cell_square(carpet, ()) == UNIT_SQUARE


# -- dimension ---------------------------------------------------------------------


def moran_oracle(ratios, prec=200):
    """Independent root of sum r^s = 1 via mpmath's secant iteration."""
    with mp.workprec(prec):
        rs = [mp.mpf(r.p) / r.s + (mp.mpf(r.q) * mp.sqrt(r.d) / r.s if r.q else 0) for r in ratios]
        return mp.findroot(lambda s: mp.fsum(r**s for r in rs) - 1, 1.8)


def test_sc8_dimension():
    r = hausdorff_dimension(sc8())
    assert abs(r.dimension - math.log(8) / math.log(3)) < 1e-9
    assert r.bracket[0] <= math.log(8) / math.log(3) <= r.bracket[1] + 1e-15


def test_carpet104_dimension(carpet):
    r = hausdorff_dimension(carpet)
    assert 1.87 < r.dimension < 1.88
    assert abs(r.residual) <= 1e-9
    assert abs(r.dimension - float(moran_oracle([m.ratio for m in carpet.maps]))) < 1e-12


def test_dimension_two_for_tiling():
    maps = tuple(Similarity(Q(F(1, 2)), Q(F(i, 2)), Q(F(j, 2))) for i in (0, 1) for j in (0, 1))
    assert abs(hausdorff_dimension(IFSystem("tiles", 2, maps)).dimension - 2) < 1e-12


# -- text format --------------------------------------------------------------------


def test_ifs_roundtrip(carpet):
    again = load_ifs(dump_ifs(carpet))
    assert again == carpet
    assert again.k == 4


def test_ifs_errors_report_line():
    text = "ifs t\nradicand 2\nmap 1/3 0 0\nmap 1/3 zz 0\n"
    with pytest.raises(IFSFormatError) as e:
        load_ifs(text)
    assert e.value.line == 4
    with pytest.raises(IFSFormatError) as e:
        load_ifs("ifs t\nmap 1/3 0 0\n")
    assert e.value.line == 2
    with pytest.raises(IFSFormatError):
        load_ifs("# nothing\n")
