"""Permutation groups, transition systems, holonomy, pro-pi1."""

import pytest

from toposforge.errors import ValidationFailure
from toposforge.holonomy import (
    CayleyTable,
    PermutationGroup,
    cayley_of_perm_group,
    check_cayley,
    chord_transports_in_tree_gauge,
    closed_walk_transports,
    compare_holonomy,
    enumerate_homomorphisms,
    exhaustive_holonomy_group,
    find_isomorphism,
    gauge_conjugate,
    holonomy_group,
    holonomy_of_walk,
    is_simply_connected_bounded,
    minimal_generators,
    pro_pi1_presentation,
    refinement_invariance_check,
    system_holonomy_group,
    table_closure,
    transition_isos,
)
from toposforge.site import CoveringFamily

from fixtures import (
    all_objects_family,
    bigon_category,
    const_sheaf,
    cycle_category,
    double_swap_sheaf,
    edges_family,
    interval_category,
    local_system,
    rot3_sheaf,
    site_fine,
    site_min,
    swap_sheaf,
)

SWAP = {"a": "b", "b": "a"}


@pytest.fixture(scope="module")
def c4():
    return cycle_category(4)


@pytest.fixture(scope="module")
def jmin(c4):
    return site_min(c4)


@pytest.fixture(scope="module")
def swap_system(c4, jmin):
    return transition_isos(swap_sheaf(c4), jmin, edges_family(4))


# ---------------------------------------------------------------------------
# permutation groups and Cayley tables


def test_permutation_group_basics():
    g = PermutationGroup(("a", "b"), [SWAP])
    assert g.order() == 2
    assert g.labels() == ("e", "(a b)")
    assert g.contains(SWAP)
    assert g.element_order(g.elements[1]) == 2
    assert not g.is_trivial()
    assert g.is_cyclic()


def test_symmetric_group_closure():
    s3 = PermutationGroup(
        ("x", "y", "z"),
        [{"x": "y", "y": "x", "z": "z"}, {"x": "x", "y": "z", "z": "y"}],
    )
    assert s3.order() == 6
    assert s3.orders_multiset() == (1, 2, 2, 2, 3, 3)
    assert not s3.is_cyclic()


def test_duplicate_ground_label():
    with pytest.raises(ValidationFailure) as e:
        PermutationGroup(("a", "a"), [])
    assert e.value.code == "DUPLICATE_LABEL"


def test_oversized_ground():
    with pytest.raises(ValidationFailure) as e:
        PermutationGroup(tuple(f"g{i:03d}" for i in range(256)), [])
    assert e.value.code == "CLOSURE_CAP_EXCEEDED"


def test_closure_cap_env(monkeypatch):
    monkeypatch.setenv("TOPOSFORGE_CLOSURE_CAP", "4")
    with pytest.raises(ValidationFailure) as e:
        PermutationGroup(
            ("x", "y", "z"),
            [{"x": "y", "y": "x", "z": "z"}, {"x": "x", "y": "z", "z": "y"}],
        )
    assert e.value.code == "CLOSURE_CAP_EXCEEDED"


def test_cayley_of_perm_group():
    g = PermutationGroup(("a", "b"), [SWAP])
    table = cayley_of_perm_group(g)
    assert check_cayley(table)
    assert table.identity == "e"
    assert table.times("(a b)", "(a b)") == "e"
    assert table.inverse("(a b)") == "(a b)"
    assert table.orders_multiset() == (1, 2)


def z4_table():
    names = ("e", "r", "r2", "r3")
    mult = {}
    for i in range(4):
        for j in range(4):
            mult[(names[i], names[j])] = names[(i + j) % 4]
    return CayleyTable(names, "e", mult)


def test_check_cayley_rejections():
    t = z4_table()
    assert check_cayley(t)

    broken = CayleyTable(t.names, "zz", t.mult)
    assert check_cayley(broken).code == "DANGLING_REFERENCE"

    hole = dict(t.mult)
    del hole[("r", "r")]
    assert check_cayley(CayleyTable(t.names, "e", hole)).code == "BAD_FUNCTION_SHAPE"

    skew = dict(t.mult)
    skew[("r", "e")] = "r2"
    assert check_cayley(CayleyTable(t.names, "e", skew)).code == "IDENTITY_LAW"

    # constant-but-for-identity row breaks left translation bijectivity
    flat = dict(t.mult)
    flat[("r", "r")] = "r"
    flat[("r", "r2")] = "r"
    flat[("r", "r3")] = "r"
    verdict = check_cayley(CayleyTable(t.names, "e", flat))
    assert verdict.code in ("ASSOCIATIVITY", "BAD_FUNCTION_SHAPE")


def test_table_closure_and_generators():
    t = z4_table()
    assert table_closure(t, ["r"]) == {"e", "r", "r2", "r3"}
    assert table_closure(t, ["r2"]) == {"e", "r2"}
    assert minimal_generators(t) == ["r"]


def z2_table(names=("e", "s")):
    e, s = names
    return CayleyTable(names, e, {(e, e): e, (e, s): s, (s, e): s, (s, s): e})


def test_enumerate_homomorphisms():
    homs = enumerate_homomorphisms(z4_table(), z2_table())
    assert len(homs) == 2  # trivial and the quotient by r2
    onto = enumerate_homomorphisms(z4_table(), z2_table(), surjective=True)
    assert len(onto) == 1
    assert onto[0]["r"] == "s" and onto[0]["r2"] == "e"
    # nothing from Z2 onto Z4
    assert enumerate_homomorphisms(z2_table(), z4_table(), surjective=True) == []


def test_order_bound():
    with pytest.raises(ValidationFailure) as e:
        enumerate_homomorphisms(z4_table(), z2_table(), bound=2)
    assert e.value.code == "ORDER_BOUND_EXCEEDED"


def test_find_isomorphism():
    iso = find_isomorphism(z2_table(), z2_table(("1", "t")))
    assert iso == {"e": "1", "s": "t"}
    klein = PermutationGroup(
        ("a", "b", "c", "d"),
        [{"a": "b", "b": "a", "c": "d", "d": "c"}, {"a": "c", "c": "a", "b": "d", "d": "b"}],
    )
    assert find_isomorphism(z4_table(), cayley_of_perm_group(klein)) is None


# ---------------------------------------------------------------------------
# transition systems


def test_transition_system_fibers_and_transports(swap_system):
    assert swap_system.fiber(0) == ("a", "b")
    assert swap_system.transport(0, 1) == {"a": "a", "b": "b"}
    assert swap_system.transport(0, 3) == SWAP  # the twisted overlap
    with pytest.raises(ValidationFailure) as e:
        swap_system.transport(0, 2)
    assert e.value.code == "INVALID_WALK"


def test_transition_isos_requires_covering(c4, jmin):
    with pytest.raises(ValidationFailure) as e:
        transition_isos(swap_sheaf(c4), jmin, CoveringFamily(("e1", "e3")))
    assert e.value.code == "NOT_COVERING"


def test_transition_isos_requires_slice_constancy(c4, jmin):
    from toposforge.sheaf import validate_presheaf

    values = {x: ("a", "b") for x in c4.objects}
    values["e1"] = ("a",)
    lopsided = validate_presheaf(
        c4, values, {"v1-e1": {"a": "a"}, "v4-e1": {"a": "a"}}
    )
    with pytest.raises(ValidationFailure) as e:
        transition_isos(lopsided, jmin, all_objects_family(c4))
    assert e.value.code == "NOT_TRIVIALIZING"
    assert e.value.witness == "e1"


def test_overlap_not_trivial_on_bigon():
    cat = bigon_category()
    site = site_min(cat)
    sheaf = local_system(cat, ("a", "b"), {"u2-d1": SWAP})
    with pytest.raises(ValidationFailure) as e:
        transition_isos(sheaf, site, CoveringFamily(("d1", "d2")))
    assert e.value.code == "OVERLAP_NOT_TRIVIAL"
    assert e.value.witness == (("d1", "d2"), 2, 2, 4)


def test_holonomy_of_walk(swap_system):
    assert holonomy_of_walk(swap_system, (0, 1, 2, 3, 0)) == SWAP
    assert holonomy_of_walk(swap_system, (0, 1, 0)) == {"a": "a", "b": "b"}
    assert holonomy_of_walk(swap_system, (0,)) == {"a": "a", "b": "b"}
    with pytest.raises(ValidationFailure) as e:
        holonomy_of_walk(swap_system, (0, 2))
    assert e.value.code == "INVALID_WALK"


def test_holonomy_groups(c4, jmin):
    edges = edges_family(4)
    assert holonomy_group(swap_sheaf(c4), jmin, edges).order() == 2
    assert holonomy_group(rot3_sheaf(c4), jmin, edges).order() == 3
    assert holonomy_group(const_sheaf(c4), jmin, edges).is_trivial()
    labels = holonomy_group(swap_sheaf(c4), jmin, edges).labels()
    assert labels == ("e", "(a b)")


def test_holonomy_base_independence(swap_system):
    for base in range(4):
        assert system_holonomy_group(swap_system, base).order() == 2


def test_replace_transport_mutates_both_directions(c4, jmin, swap_system):
    system = transition_isos(swap_sheaf(c4), jmin, edges_family(4))
    system.replace_transport(0, 1, SWAP)
    assert system.transport(1, 0) == SWAP
    # the inserted twist cancels the original one around the cycle
    assert system_holonomy_group(system).order() == 1
    with pytest.raises(ValidationFailure):
        system.replace_transport(0, 2, SWAP)
    with pytest.raises(ValidationFailure) as e:
        system.replace_transport(0, 1, {"a": "a", "b": "a"})
    assert e.value.code == "BAD_FUNCTION_SHAPE"


def test_gauge_conjugation_preserves_class(c4, jmin, swap_system):
    conj = gauge_conjugate(swap_system, 1, SWAP)
    report = compare_holonomy(
        system_holonomy_group(swap_system), system_holonomy_group(conj)
    )
    assert report.isomorphic
    # the underlying transports did change
    assert conj.transport(0, 1) != swap_system.transport(0, 1)


def test_closed_walk_transports(swap_system):
    transports = closed_walk_transports(swap_system)
    assert {"a": "a", "b": "b"} in transports
    assert SWAP in transports
    assert len(transports) == 2
    assert exhaustive_holonomy_group(swap_system).order() == 2


def test_chord_transports_in_tree_gauge(swap_system):
    assert chord_transports_in_tree_gauge(swap_system, 0) == {(2, 3): (1, 0)}


def test_compare_holonomy(c4, jmin):
    edges = edges_family(4)
    sw = holonomy_group(swap_sheaf(c4), jmin, edges)
    r3 = holonomy_group(rot3_sheaf(c4), jmin, edges)
    report = compare_holonomy(sw, r3)
    assert not report.isomorphic
    assert (report.order_first, report.order_second) == (2, 3)


def test_refinement_invariance(c4, jmin):
    report = refinement_invariance_check(
        swap_sheaf(c4), jmin, edges_family(4), all_objects_family(c4)
    )
    assert report.isomorphic
    assert (report.order_first, report.order_second) == (2, 2)


def test_refinement_check_catches_corrupted_table(c4, jmin):
    sheaf = double_swap_sheaf(c4)
    edges = edges_family(4)
    good = transition_isos(sheaf, jmin, edges)
    assert system_holonomy_group(good).order() == 2
    corrupt = transition_isos(sheaf, jmin, edges)
    corrupt.replace_transport(1, 2, {"x0": "x0", "x1": "x2", "x2": "x1", "x3": "x3"})
    report = refinement_invariance_check(
        sheaf, jmin, edges, edges, system_b=corrupt
    )
    assert not report.isomorphic
    assert (report.order_first, report.order_second) == (2, 4)


def test_pro_pi1_presentation(c4, jmin):
    pres = pro_pi1_presentation(
        jmin, edges_family(4), [("swap", swap_sheaf(c4)), ("rot3", rot3_sheaf(c4))]
    )
    assert pres.order("swap") == 2
    assert pres.order("rot3") == 3
    assert pres.order("joint") == 6
    assert len(pres.surjections[("joint", "rot3")]) == 2
    assert len(pres.surjections[("joint", "swap")]) == 1
    assert pres.surjections[("rot3", "swap")] == ()
    assert pres.surjections[("swap", "rot3")] == ()


def test_pro_pi1_name_hygiene(c4, jmin):
    with pytest.raises(ValidationFailure) as e:
        pro_pi1_presentation(jmin, edges_family(4), [("joint", swap_sheaf(c4))])
    assert e.value.code == "DUPLICATE_LABEL"
    with pytest.raises(ValidationFailure) as e:
        pro_pi1_presentation(jmin, edges_family(4), [])
    assert e.value.code == "EMPTY_J"


def test_simply_connected_interval():
    cat = interval_category(2)
    verdict = is_simply_connected_bounded(site_min(cat), edges_family(2), 3)
    assert verdict
    assert "tree" in verdict.detail


def test_cycle_is_not_simply_connected(c4, jmin):
    verdict = is_simply_connected_bounded(jmin, edges_family(4), 2)
    assert not verdict
    assert verdict.code == "NOT_SIMPLY_CONNECTED"
    assert verdict.witness == {
        "fiber": 2,
        "chords": (("e3", "e4"),),
        "assignment": ((1, 0),),
        "order": 2,
    }
    # with fibers capped at one point nothing can move
    assert is_simply_connected_bounded(jmin, edges_family(4), 1)


def test_simply_connected_preconditions(c4, jmin):
    with pytest.raises(ValidationFailure) as e:
        is_simply_connected_bounded(jmin, CoveringFamily(("e1", "e3")), 2)
    assert e.value.code == "NOT_COVERING"
    fine = site_fine(c4, 4)
    with pytest.raises(ValidationFailure) as e:
        is_simply_connected_bounded(fine, CoveringFamily(("e1", "e3")), 2)
    assert e.value.code == "NOT_CONNECTED"
