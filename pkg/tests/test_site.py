"""Sieves, Grothendieck topologies, covering families."""

import pytest

from toposforge.errors import ValidationFailure
from toposforge.fincat import validate_category
from toposforge.site import (
    CoveringFamily,
    Site,
    all_sieves_on,
    check_sieve,
    empty_sieve,
    family_sieve,
    generate_sieve,
    is_connected_family,
    is_connected_object,
    is_covering_family,
    maximal_sieve,
    minimal_topology,
    pullback_sieve,
    validate_topology,
)

from fixtures import cycle_category, site_degenerate, site_fine, site_min


@pytest.fixture(scope="module")
def c4():
    return cycle_category(4)


def test_generate_sieve_closes_under_precomposition(c4):
    s = generate_sieve(c4, "e1", ["id:e1"])
    assert s == maximal_sieve(c4, "e1")
    s = generate_sieve(c4, "e1", ["v1-e1"])
    assert sorted(s.arrows) == ["v1-e1"]
    check_sieve(c4, s)


def test_generate_sieve_rejects_bad_generators(c4):
    with pytest.raises(ValidationFailure) as e:
        generate_sieve(c4, "e1", ["zz"])
    assert e.value.code == "DANGLING_REFERENCE"
    with pytest.raises(ValidationFailure) as e:
        generate_sieve(c4, "e1", ["v1-e2"])
    assert e.value.code == "WRONG_CODOMAIN"


def test_check_sieve_rejects_unclosed_set(c4):
    from toposforge.site import Sieve

    with pytest.raises(ValidationFailure) as e:
        check_sieve(c4, Sieve("e1", frozenset(["id:e1"])))
    assert e.value.code == "NOT_CLOSED"


def test_pullback_sieve(c4):
    pair = generate_sieve(c4, "e1", ["v1-e1", "v4-e1"])
    back = pullback_sieve(c4, pair, "v1-e1")
    assert back == maximal_sieve(c4, "v1")
    assert pullback_sieve(c4, pair, "id:e1") == pair


def test_all_sieves_on_edge(c4):
    sieves = all_sieves_on(c4, "e1")
    assert len(sieves) == 5  # empty, two singletons, the pair, maximal
    assert sieves[0] == empty_sieve("e1")
    assert sieves[-1] == maximal_sieve(c4, "e1")
    assert len(all_sieves_on(c4, "v1")) == 2


def test_all_sieves_guard():
    n = 14
    raw = {
        "objects": ["hub"] + [f"s{i}" for i in range(n)],
        "arrows": [(f"a{i}", f"s{i}", "hub") for i in range(n)],
    }
    cat = validate_category(raw)
    with pytest.raises(ValidationFailure) as e:
        all_sieves_on(cat, "hub")
    assert e.value.code == "SITE_TOO_LARGE"


def test_minimal_topology_is_clean(c4):
    top = minimal_topology(c4)
    assert top.warnings == ()
    for x in c4.objects:
        assert top.on(x) == (maximal_sieve(c4, x),)
    assert not Site(c4, top).is_degenerate()


def test_fine_topology_validates(c4):
    site = site_fine(c4, 4)
    assert len(site.covers("e1")) == 2
    assert len(site.covers("v1")) == 1
    assert not site.is_degenerate()


def test_degenerate_topology_flagged(c4):
    site = site_degenerate(c4)
    assert site.is_degenerate()
    assert ("DEGENERATE", "e1") in site.topology.warnings
    assert len(site.covers("e1")) == 5


def test_empty_j(c4):
    covers = {x: [maximal_sieve(c4, x)] for x in c4.objects}
    del covers["e2"]
    with pytest.raises(ValidationFailure) as e:
        validate_topology(c4, covers)
    assert e.value.code == "EMPTY_J"
    assert e.value.witness == "e2"


def test_wrong_codomain_listing(c4):
    covers = {x: [maximal_sieve(c4, x)] for x in c4.objects}
    covers["e2"] = [maximal_sieve(c4, "e1")]
    with pytest.raises(ValidationFailure) as e:
        validate_topology(c4, covers)
    assert e.value.code == "WRONG_CODOMAIN"


def test_covers_for_unknown_object(c4):
    covers = {x: [maximal_sieve(c4, x)] for x in c4.objects}
    covers["ghost"] = []
    with pytest.raises(ValidationFailure) as e:
        validate_topology(c4, covers)
    assert e.value.code == "DANGLING_REFERENCE"


def test_stability_failure_witness(c4):
    covers = {x: [maximal_sieve(c4, x)] for x in c4.objects}
    covers["e1"].append(generate_sieve(c4, "e1", ["v1-e1"]))
    with pytest.raises(ValidationFailure) as e:
        validate_topology(c4, covers)
    assert e.value.code == "NOT_STABLE"
    assert e.value.witness == ("e1", ("v1-e1",), "v4-e1")


def test_local_character_failure(c4):
    covers = {x: [maximal_sieve(c4, x)] for x in c4.objects}
    for x in ("e1", "v1", "v4"):
        covers[x].append(empty_sieve(x))
    with pytest.raises(ValidationFailure) as e:
        validate_topology(c4, covers)
    assert e.value.code == "NOT_LOCAL"
    s, cover_arrows, candidate = e.value.witness
    assert s == "e1" and cover_arrows == ()


def test_family_sieve_and_covering(c4):
    site = site_min(c4)
    edges = CoveringFamily(("e1", "e2", "e3", "e4"))
    assert family_sieve(site, edges, "e1") == maximal_sieve(c4, "e1")
    assert is_covering_family(site, edges)

    sparse = CoveringFamily(("e1", "e3"))
    verdict = is_covering_family(site, sparse)
    assert not verdict
    assert verdict.code == "NOT_COVERING"
    assert verdict.witness == "e2"
    # under the finer topology the vertex pair over each edge is a cover
    assert is_covering_family(site_fine(c4, 4), sparse)


def test_covering_family_rejects_unknown_member(c4):
    with pytest.raises(ValidationFailure) as e:
        is_covering_family(site_min(c4), CoveringFamily(("e1", "e9")))
    assert e.value.code == "DANGLING_REFERENCE"


def test_connectivity(c4):
    for x in c4.objects:
        assert is_connected_object(c4, x)
    site = site_min(c4)
    assert is_connected_family(site, CoveringFamily(("e1", "v2")))
