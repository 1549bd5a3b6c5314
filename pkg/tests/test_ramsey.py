import pytest

from treekit.patterns import enumerate_embeddings, find_realizations
from treekit.ramsey import (
    RamseyError,
    RamseyInstance,
    collapse_leaf_coloring,
    is_ramsey_witness,
    lift_coloring,
    minus_positions,
    mono_copy,
    ramsey_search,
)
from treekit.tree_core import LanguageTag, MeetTree, balanced_tree, fan_tree, iso_code, parse_node, parse_tree, qftp

LEAF = MeetTree(((),), frozenset({()}))
N = parse_node


def test_instance_validation():
    with pytest.raises(RamseyError):
        RamseyInstance(LEAF, fan_tree(2), 0)
    with pytest.raises(RamseyError):
        RamseyInstance(fan_tree(3), fan_tree(2), 2)


def test_mono_copy_examples():
    inst = RamseyInstance(LEAF, fan_tree(2), 2)
    copy = mono_copy(inst, fan_tree(3), (0, 0, 1))
    assert copy.images == (N("-"), N("0"), N("1"))
    assert mono_copy(inst, fan_tree(2), (0, 1)) is None
    one = RamseyInstance(LEAF, fan_tree(2), 1)
    assert mono_copy(one, fan_tree(3), (0, 0, 0)) == enumerate_embeddings(fan_tree(2), fan_tree(3))[0]
    with pytest.raises(RamseyError):
        mono_copy(inst, fan_tree(3), (0, 1))


@pytest.mark.parametrize("method", ["backtrack", "exhaustive"])
def test_witness_examples(method):
    inst = RamseyInstance(LEAF, fan_tree(2), 2)
    assert is_ramsey_witness(inst, fan_tree(3), method=method).status == "WITNESS"
    res = is_ramsey_witness(inst, fan_tree(2), method=method)
    assert res.status == "REFUTED" and res.bad_coloring == (0, 1)
    one = RamseyInstance(LEAF, fan_tree(2), 1)
    assert is_ramsey_witness(one, balanced_tree(2, 2), method=method).status == "WITNESS"


def test_backtrack_agrees_with_exhaustive():
    # oracle: full enumeration of colorings
    cases = [
        (LEAF, fan_tree(2), 2, fan_tree(3)),
        (LEAF, fan_tree(3), 2, fan_tree(4)),
        (LEAF, fan_tree(3), 2, fan_tree(5)),
        (LEAF, balanced_tree(2, 1), 2, balanced_tree(2, 2)),
        (fan_tree(2), fan_tree(3), 2, fan_tree(5)),
        (MeetTree(((),)), parse_tree("-\n0\n0.0"), 2, parse_tree("-\n0\n0.0\n0.0.0\n0.0.0.0")),
    ]
    for a, b, r, c in cases:
        inst = RamseyInstance(a, b, r)
        ex = is_ramsey_witness(inst, c, method="exhaustive")
        for seed in (None, 1, 2):
            assert is_ramsey_witness(inst, c, seed=seed).status == ex.status


def test_pair_coloring_of_fan_follows_r33():
    # colorings of leaf pairs of a k-fan, copies = leaf triples: R(3,3) = 6
    inst = RamseyInstance(fan_tree(2), fan_tree(3), 2)
    assert is_ramsey_witness(inst, fan_tree(5)).status == "REFUTED"
    assert is_ramsey_witness(inst, fan_tree(6)).status == "WITNESS"


def test_budget_gives_indeterminate():
    inst = RamseyInstance(fan_tree(2), fan_tree(3), 2)
    res = is_ramsey_witness(inst, fan_tree(6), budget=10)
    assert res.status == "INDETERMINATE"
    res = is_ramsey_witness(inst, fan_tree(6), method="exhaustive", budget=10)
    assert res.status == "INDETERMINATE" and res.colorings_checked == 10


def test_search_examples():
    inst2 = RamseyInstance(LEAF, fan_tree(2), 2)
    out = ramsey_search(inst2, 10)
    assert out.status == "FOUND" and len(out.witness.leaves) == 3
    inst3 = RamseyInstance(LEAF, fan_tree(2), 3)
    out = ramsey_search(inst3, 10)
    assert out.status == "FOUND" and iso_code(out.witness) == iso_code(fan_tree(4))
    with pytest.raises(RamseyError):
        ramsey_search(inst2, 2)
    assert ramsey_search(RamseyInstance(LEAF, fan_tree(2), 5), 4, strategy="balanced").status == "EXHAUSTED"


def test_collapse_examples():
    t = parse_tree("-\n0\n0.0 P\n0.1 P\n1 P")
    q = qftp(t, (N("0"), N("0.0")))
    assert minus_positions(q) == (0,)
    reals = find_realizations(q, t)
    const = collapse_leaf_coloring(t, q, lambda z: 7, reals)
    assert const.well_defined and set(const.minus_coloring.values()) == {7}
    assert lift_coloring(q, const.minus_coloring, reals) == {z: 7 for z in reals}
    split = collapse_leaf_coloring(t, q, {z: z[1][-1] for z in reals})
    assert not split.well_defined
    assert split.conflict == ((N("-"), N("0.0")), (N("-"), N("0.1")))
    with pytest.raises(RamseyError):
        collapse_leaf_coloring(t, qftp(t, (N("0"),), LanguageTag.LS), lambda z: 0)
