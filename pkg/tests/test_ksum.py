"""Exact integer calculus of circle/surface K-classes.

Every numeric expectation below is re-derived by hand from the two facts
that pin the coordinates: the Dolbeault class of the genus-g surface has
Chern coordinates (1-g, 1), and the circle's Dirac class has coordinate -1.
Nothing here re-runs the library's own identity grid to produce expected
values.
"""

import time

import pytest

from extlab.errors import StructuralError, ValidationError
from extlab.ksum import (
    CanonicalMap,
    KClassVector,
    SurfaceSpace,
    basepoint_inclusion,
    basepoint_unit,
    chern_dolbeault,
    constant_map,
    crunch,
    dirac_circle_class,
    disjoint_pair,
    euler_characteristic,
    even_class,
    fundamental_k_class,
    identification_to_union,
    identification_to_wedge,
    identity_map,
    odd_class,
    pinch_circle_sum,
    pinch_connected_sum,
    pinch_natural_sum,
    pushforward,
    unit_point_class,
    verify_identities,
)


def det3(rows):
    (a, b, c), (d, e, f), (g, h, i) = rows
    return a * (e * i - f * h) - b * (d * i - f * g) + c * (d * h - e * g)


# ---------------------------------------------------------------------------
# spaces


def test_space_ranks():
    pt, ci = SurfaceSpace.point(), SurfaceSpace.circle()
    s2 = SurfaceSpace.surface(2)
    assert (pt.h0_rank, pt.h1_rank, pt.h2_rank) == (1, 0, 0)
    assert (ci.h0_rank, ci.h1_rank, ci.h2_rank) == (1, 1, 0)
    assert (s2.h0_rank, s2.h1_rank, s2.h2_rank) == (1, 4, 1)
    w = SurfaceSpace.wedge(s2, SurfaceSpace.surface(0))
    assert (w.h0_rank, w.h2_rank) == (1, 2)
    assert w.h1_rank is None  # no preferred surface H1 basis
    cc = SurfaceSpace.wedge(ci, ci)
    assert cc.h1_rank == 2
    d = SurfaceSpace.disjoint(s2, ci)
    assert (d.h0_rank, d.h2_rank) == (2, 1)
    u = SurfaceSpace.circle_union(1, 3)
    assert (u.h0_rank, u.h2_rank) == (1, 2)


def test_formal_genus_minus_one():
    # the natural sum of two spheres pinches a genus -1 surface: chi = 4
    s = SurfaceSpace.surface(-1)
    assert euler_characteristic(-1) == 4
    assert chern_dolbeault(-1).coordinates == (2, 1)
    assert s.h1_rank == 0


@pytest.mark.parametrize(
    "bad",
    [
        lambda: SurfaceSpace.surface(-2),
        lambda: SurfaceSpace.circle_union(-1, 0),
        lambda: SurfaceSpace.wedge(SurfaceSpace.point(), SurfaceSpace.circle()),
        lambda: SurfaceSpace("wedge", parts=(SurfaceSpace.circle(),)),
        lambda: SurfaceSpace("torus"),
    ],
)
def test_space_validation(bad):
    with pytest.raises(ValidationError):
        bad()


def test_describe_mentions_the_genus():
    assert "2" in SurfaceSpace.surface(2).describe()


# ---------------------------------------------------------------------------
# classes


def test_distinguished_class_coordinates():
    assert unit_point_class().coordinates == (1,)
    assert dirac_circle_class().coordinates == (-1,)
    assert chern_dolbeault(0).coordinates == (1, 1)
    assert chern_dolbeault(1).coordinates == (0, 1)
    assert chern_dolbeault(3).coordinates == (-2, 1)
    assert fundamental_k_class(SurfaceSpace.circle()).coordinates == (1,)
    assert fundamental_k_class(SurfaceSpace.surface(5)).coordinates == (0, 1)


def test_fundamental_class_needs_a_fundamental_cycle():
    with pytest.raises(ValidationError):
        fundamental_k_class(SurfaceSpace.point())
    with pytest.raises(ValidationError):
        fundamental_k_class(SurfaceSpace.wedge(SurfaceSpace.surface(1), SurfaceSpace.surface(1)))


def test_class_arithmetic():
    a = chern_dolbeault(2)
    assert (a + a).coordinates == (-2, 2)
    assert (a - a).coordinates == (0, 0)
    assert (3 * a).coordinates == (-3, 3)
    assert (-a).coordinates == (1, -1)
    assert a.h0_part == (-1,) and a.h2_part == (1,)


def test_class_validation():
    s = SurfaceSpace.surface(1)
    with pytest.raises(ValidationError):
        KClassVector(s, "even", (1,))  # needs 2 coordinates
    with pytest.raises(ValidationError):
        KClassVector(s, "sideways", (0, 0))
    with pytest.raises(ValidationError):
        KClassVector(s, "even", (0.5, 1))
    with pytest.raises(ValidationError):
        odd_class(SurfaceSpace.wedge(s, s), (1,))  # no odd basis there
    with pytest.raises(ValidationError):
        2.5 * chern_dolbeault(0)
    with pytest.raises(StructuralError):
        chern_dolbeault(1) + chern_dolbeault(2)
    with pytest.raises(StructuralError):
        disjoint_pair(unit_point_class(), dirac_circle_class())


# ---------------------------------------------------------------------------
# pushforwards, one hand-computed example per map


def test_identity_map_fixes_classes():
    s = SurfaceSpace.surface(2)
    x = even_class(s, (3,), (-1,))
    assert pushforward(identity_map(s), x) == x
    y = odd_class(SurfaceSpace.circle(), (4,))
    assert pushforward(identity_map(SurfaceSpace.circle()), y) == y


def test_collapse_to_point_reads_the_index():
    # (q0)_* [Dolbeault_g] = (1 - g) [unit]: for g = 4 that is -3
    got = pushforward(constant_map(SurfaceSpace.surface(4)), chern_dolbeault(4))
    assert got == (-3) * unit_point_class()


def test_basepoint_unit_hits_the_first_h0_slot():
    w = SurfaceSpace.wedge(SurfaceSpace.surface(1), SurfaceSpace.surface(2))
    assert basepoint_unit(w).coordinates == (1, 0, 0)
    assert basepoint_unit(SurfaceSpace.surface(3)).coordinates == (1, 0)


def test_wedge_identification_of_dolbeault_classes():
    # j_*(dol_1, dol_2) on wedge coordinates (H0; H2_left, H2_right):
    # H0 adds the two indices, H2 passes through
    j = identification_to_wedge(SurfaceSpace.surface(1), SurfaceSpace.surface(2))
    got = pushforward(j, disjoint_pair(chern_dolbeault(1), chern_dolbeault(2)))
    assert got.coordinates == (0 + (-1), 1, 1)


def test_wedge_basis_is_unimodular_by_hand():
    g1, g2 = 2, 5
    s1, s2 = SurfaceSpace.surface(g1), SurfaceSpace.surface(g2)
    j = identification_to_wedge(s1, s2)
    w = SurfaceSpace.wedge(s1, s2)
    rows = (
        basepoint_unit(w).coordinates,
        pushforward(j, disjoint_pair(chern_dolbeault(g1), 0 * chern_dolbeault(g2))).coordinates,
        pushforward(j, disjoint_pair(0 * chern_dolbeault(g1), chern_dolbeault(g2))).coordinates,
    )
    assert rows == ((1, 0, 0), (1 - g1, 1, 0), (1 - g2, 0, 1))
    assert det3(rows) == 1


def test_crunch_keeps_left_and_counts_right():
    g1, g2 = 3, 2
    q = crunch(g1, g2)
    s1 = SurfaceSpace.surface(g1)
    j = identification_to_wedge(s1, SurfaceSpace.surface(g2))
    left = pushforward(j, disjoint_pair(chern_dolbeault(g1), 0 * chern_dolbeault(g2)))
    right = pushforward(j, disjoint_pair(0 * chern_dolbeault(g1), chern_dolbeault(g2)))
    assert pushforward(q, left) == chern_dolbeault(g1)
    assert pushforward(q, right) == (1 - g2) * basepoint_unit(s1)


def test_pinch_costs_one_point_unit():
    # p_* [Dolbeault_{g1+g2}] = dol_1 + dol_2 - iota[1] on the wedge;
    # for (g1, g2) = (1, 2): (0,1,0) + (-1,0,1) - (1,0,0) = (-2, 1, 1)
    p = pinch_connected_sum(1, 2)
    got = pushforward(p, chern_dolbeault(3))
    assert got.coordinates == (-2, 1, 1)


def test_crunch_pinch_composite_drops_g2_units():
    # (q o p)_* [Dolbeault_{g1+g2}] = [Dolbeault_{g1}] - g2 iota[1]
    g1, g2 = 1, 2
    q, p = crunch(g1, g2), pinch_connected_sum(g1, g2)
    qp = q.compose(p)
    assert qp.kind == "composite"
    via_composite = pushforward(qp, chern_dolbeault(g1 + g2))
    via_stages = pushforward(q, pushforward(p, chern_dolbeault(g1 + g2)))
    assert via_composite == via_stages
    assert via_composite.coordinates == (0 - 2, 1)


def test_stabilization_for_a_concrete_pair():
    # adding (g1+g2-1) point units to the crunched class recovers the
    # normalized genus-g1 combination; hand values for (2, 3):
    g1, g2 = 2, 3
    s1 = SurfaceSpace.surface(g1)
    qp = crunch(g1, g2).compose(pinch_connected_sum(g1, g2))
    lhs = pushforward(qp, chern_dolbeault(g1 + g2)) + (g1 + g2 - 1) * basepoint_unit(s1)
    rhs = chern_dolbeault(g1) + (g1 - 1) * basepoint_unit(s1)
    assert lhs.coordinates == rhs.coordinates == (0, 1)


def test_circle_sum_of_dirac_classes():
    d = dirac_circle_class()
    j = identification_to_wedge(SurfaceSpace.circle(), SurfaceSpace.circle())
    both = pushforward(j, disjoint_pair(d, d))
    pinched = pushforward(pinch_circle_sum(), d)
    assert both.coordinates == pinched.coordinates == (-1, -1)


def test_natural_sum_addition_at_genus_zero():
    # (0, 0) exercises the formal genus -1 source: chi(-1) = 4 and the
    # H0 coordinate 2 matches the two sphere indices 1 + 1
    j = identification_to_union(0, 0)
    lhs = pushforward(j, disjoint_pair(chern_dolbeault(0), chern_dolbeault(0)))
    rhs = pushforward(pinch_natural_sum(0, 0), chern_dolbeault(-1))
    assert lhs == rhs
    assert lhs.coordinates == (2, 1, 1)


def test_natural_sum_euler_counts():
    for g1 in range(0, 5):
        for g2 in range(0, 5):
            assert euler_characteristic(g1 + g2 - 1) == euler_characteristic(
                g1
            ) + euler_characteristic(g2)
            # the ordinary connected sum misses by exactly 2
            assert (
                euler_characteristic(g1)
                + euler_characteristic(g2)
                - euler_characteristic(g1 + g2)
            ) == 2


def test_pushforward_rejects_wrong_space():
    with pytest.raises(StructuralError):
        pushforward(crunch(1, 2), chern_dolbeault(3))


def test_pushforward_without_odd_matrix():
    odd = odd_class(SurfaceSpace.surface(2), (1, 0, 0, 0))
    with pytest.raises(StructuralError):
        pushforward(pinch_connected_sum(1, 1), odd)


def test_compose_requires_matching_spaces():
    with pytest.raises(StructuralError):
        pinch_connected_sum(1, 1).compose(pinch_connected_sum(1, 1))


def test_canonical_map_shape_validation():
    with pytest.raises(StructuralError):
        CanonicalMap(
            "identity",
            SurfaceSpace.surface(1),
            SurfaceSpace.surface(1),
            ((1,),),
            ((1, 1),),  # wrong H2 shape
        )


# ---------------------------------------------------------------------------
# the full identity grid


def test_identity_grid_all_pass_quickly():
    t0 = time.perf_counter()
    report = verify_identities(genus_bound=6)
    dt = time.perf_counter() - t0
    assert report.passed
    assert report.failures == ()
    assert len(report.checks) == 604
    assert dt < 1.0


def test_identity_grid_names_cover_the_suite():
    report = verify_identities(genus_bound=2)
    names = {c.name for c in report.checks}
    assert names == {
        "circle-dirac-addition",
        "circle-fundamental-vs-dirac",
        "fundamental-class-normalization",
        "constant-map-index",
        "wedge-basis-unimodular",
        "crunch-left-dolbeault",
        "crunch-right-dolbeault",
        "pinch-dolbeault-defect",
        "crunch-pinch-functoriality",
        "crunch-pinch-composite",
        "stabilization-well-defined",
        "natural-sum-euler-additivity",
        "connected-sum-euler-defect",
        "connected-sum-fundamental-class",
        "dolbeault-natural-sum-addition",
        "natural-sum-fundamental-class",
    }


def test_inequality_checks_assert_strict_difference():
    report = verify_identities(genus_bound=1)
    defects = [c for c in report.checks if c.name == "connected-sum-euler-defect"]
    assert defects
    for c in defects:
        assert not c.expect_equal
        assert c.ok
        assert c.lhs != c.rhs
