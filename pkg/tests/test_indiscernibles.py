import itertools
import json
import random
from fractions import Fraction

import pytest

from treekit.indiscernibles import (
    AtomicDiagram,
    IndexedFamily,
    LinearPredicates,
    LinearRelation,
    RelStructure,
    check_cone_indiscernible,
    check_indexed_indiscernible,
    check_side_sets,
    check_treetop_collapse,
    extract_copy,
    load_family,
    side_sets,
)
from treekit.tree_core import LanguageTag, MeetTree, TreeError, balanced_tree, fan_tree, meet, parse_node, qftp
from treekit.witnesses import interval_sop2, multigraph_family, oag_family

N = parse_node
LESS = LinearRelation("x0<x1", (Fraction(1), Fraction(-1)), "<")


def constant_family(tree):
    return IndexedFamily(tree, {v: (Fraction(0),) for v in tree.nodes}, LinearPredicates((LESS,), "all"))


def unary_family(tree, bits):
    s = RelStructure((0, 1), {"U": (1, frozenset({(1,)}))})
    return IndexedFamily(tree, dict(zip(tree.nodes, ((b,) for b in bits))), AtomicDiagram(s), 1, s)


def test_relstructure_validation_and_json():
    s = RelStructure(("a", "b"), {"R": (2, frozenset({("a", "b")}))})
    assert s.holds("R", ("a", "b")) and not s.holds("R", ("b", "a"))
    assert RelStructure.from_json(json.loads(json.dumps(s.to_json()))) == s
    with pytest.raises(ValueError):
        RelStructure(("a",), {"R": (2, frozenset({("a", "z")}))})


def test_atomic_diagram_sees_equality_and_relations():
    s = RelStructure(("a", "b"), {"R": (2, frozenset({("a", "b")}))})
    tf = AtomicDiagram(s)
    assert tf(("a", "b")) != tf(("b", "a"))
    assert tf(("a", "a")) != tf(("a", "b"))


def test_constant_family_passes_everything():
    f = constant_family(balanced_tree(2, 2))
    assert check_indexed_indiscernible(f, LanguageTag.L0P, 3).ok
    assert check_treetop_collapse(f).ok
    assert check_cone_indiscernible(f, N("1.1")).ok
    rep = check_side_sets(f, N("0"))
    assert rep.ok


def test_multigraph_checks():
    _, f = multigraph_family(2, 3)
    assert check_indexed_indiscernible(f, LanguageTag.LS, 2).ok
    res = check_indexed_indiscernible(f, LanguageTag.L0P, 2)
    assert not res.ok
    p, q = res.counterexample
    assert qftp(f.index, p) == qftp(f.index, q) and f.code(p) != f.code(q)
    coll = check_treetop_collapse(f, 2)
    assert not coll.ok
    a, b = coll.counterexample
    assert len(meet(*a)) != len(meet(*b))


def test_oag_checks():
    f = oag_family(3, 2)
    res = check_treetop_collapse(f, 4)
    assert not res.ok and len(res.counterexample[0]) == 4
    cone = check_cone_indiscernible(f, N("0"), 3)
    assert cone.ok  # three collinear points: every increasing triple looks alike
    rep = check_side_sets(f, N("1"), 3)
    assert rep.left == (N("0.0"), N("0.1"), N("0.2"))
    assert rep.left_result.ok and rep.right_result.ok and not rep.left_strong.ok
    deep = check_side_sets(oag_family(3, 3), N("1"), 3)
    assert not deep.left_result.ok and deep.right_result.ok
    assert deep.left_result.counterexample[1] == (N("0.0.0"), N("0.0.1"), N("0.1.2"))


def test_cone_checks():
    f = oag_family(3, 3)
    assert check_cone_indiscernible(f, N("0.0.0"), 2).ok
    res = check_cone_indiscernible(f, N("0"), 4)
    assert not res.ok and all(v[0] == 0 for v in res.counterexample[1])
    assert check_cone_indiscernible(f, (), 4).counterexample == check_treetop_collapse(f, 4).counterexample


def test_side_sets_on_interval_family():
    fam = interval_sop2(balanced_tree(2, 3)).as_indexed()
    left, right = side_sets(fam.index, N("1.0"))
    assert left == tuple(v for v in fam.index.leaf_list if v[0] == 0)
    assert right == (N("1.1.0"), N("1.1.1"))
    rep = check_side_sets(fam, N("1.0"), 3)
    assert rep.ok
    with pytest.raises(TreeError):
        check_side_sets(fam, N("1.0.0"))


def test_collapse_requires_leaves():
    f = IndexedFamily(MeetTree(((),)), {(): (Fraction(0),)}, LinearPredicates((LESS,)))
    with pytest.raises(TreeError):
        check_treetop_collapse(f)


def test_anchor_restricts_to_its_length():
    f = oag_family(3, 2)
    anchor = (N("0.0"), N("0.1"), N("1.0"), N("1.1"))
    res = check_treetop_collapse(f, 4, anchor=anchor)
    assert res.counterexample[0] == anchor
    assert all(len(t) == 4 for t in res.counterexample)


def test_family_json_round_trip():
    for f in (oag_family(2, 2), multigraph_family(2, 2)[1]):
        g = load_family(json.dumps(f.to_json()))
        assert g.index == f.index and g.assignment == f.assignment
        assert check_treetop_collapse(g, 3).to_json() == check_treetop_collapse(f, 3).to_json()


def test_family_validation():
    t = fan_tree(2)
    with pytest.raises(ValueError):
        IndexedFamily(t, {(): (Fraction(0),)}, LinearPredicates((LESS,)))
    with pytest.raises(ValueError):
        IndexedFamily(t, {v: (Fraction(0), Fraction(1)) for v in t.nodes}, LinearPredicates((LESS,)))


def test_extract_copy_examples():
    t = balanced_tree(2, 2)
    f = constant_family(t)
    res = extract_copy(f, fan_tree(2), n_max=2)
    assert res.status == "FOUND" and res.tried == 1
    assert extract_copy(f, fan_tree(2), budget=0).status == "EXHAUSTED"


def test_extract_copy_pigeonhole():
    # oracle: with n_max = 1 a fan copy exists iff two leaves share their unary code
    rng = random.Random(3)
    t = fan_tree(3)
    for _ in range(40):
        bits = [rng.randrange(2) for _ in t.nodes]
        f = unary_family(t, bits)
        leaf_bits = [bits[t.index[v]] for v in t.leaf_list]
        expected = any(a == b for a, b in itertools.combinations(leaf_bits, 2))
        assert (extract_copy(f, fan_tree(2), n_max=1).status == "FOUND") == expected
