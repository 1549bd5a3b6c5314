import pytest

from treekit.fraisse import (
    Draft,
    Extension,
    all_extensions,
    amalgamate,
    check_extension_property,
    demands,
    extension_of,
    extension_tree,
    generic_stage,
    joint_embed,
)
from treekit.patterns import age_check, enumerate_embeddings, iter_embeddings, k0p_classes
from treekit.tree_core import MeetTree, balanced_tree, fan_tree, iso_code, parse_node, parse_tree

N = parse_node
ROOT = MeetTree(((),))
LEAF = MeetTree(((),), frozenset({()}))


def first_emb(a, b):
    return next(iter_embeddings(a, b))


def test_amalgam_over_root_is_fan():
    b = parse_tree("-\n0 P")
    am = amalgamate(ROOT, b, b, first_emb(ROOT, b), first_emb(ROOT, b))
    assert iso_code(am.tree) == iso_code(fan_tree(2))


def test_amalgam_keeps_shared_chain():
    a = parse_tree("-\n1")
    b1 = parse_tree("-\n0 P\n1")
    b2 = parse_tree("-\n1\n2 P")
    am = amalgamate(a, b1, b2, first_emb(a, b1), first_emb(a, b2))
    assert len(am.tree) == 4
    for x in a.nodes:
        assert am.g1(first_emb(a, b1)(x)) == am.g2(first_emb(a, b2)(x))
    assert am.g1.audit() == [] and am.g2.audit() == []


def test_amalgam_of_identical_sides_is_identity():
    a = balanced_tree(2, 1)
    ident = first_emb(a, a)
    am = amalgamate(a, a, a, ident, ident)
    assert am.tree.nodes == a.nodes
    assert am.g1.images == am.g2.images == a.nodes


def test_amalgamate_rejects_bad_maps():
    a = parse_tree("-\n0 P")
    with pytest.raises(ValueError):
        amalgamate(ROOT, a, a, first_emb(ROOT, a), first_emb(a, a))


def test_joint_embedding_examples():
    am = joint_embed(LEAF, LEAF)
    assert iso_code(am.tree) == iso_code(fan_tree(2))
    am = joint_embed(fan_tree(2), fan_tree(2))
    assert len(am.tree) == 7
    assert am.g1.audit() == [] and am.g2.audit() == []
    am = joint_embed(fan_tree(2), MeetTree())
    assert am.tree.nodes == fan_tree(2).nodes


def test_amalgam_commutes_for_all_small_spans():
    # every span A -> B1, A -> B2 over small structures
    small = k0p_classes(3)
    spans = 0
    for a in small[:4]:
        for b1 in small:
            for b2 in small:
                for f1 in enumerate_embeddings(a, b1):
                    for f2 in enumerate_embeddings(a, b2):
                        am = amalgamate(a, b1, b2, f1, f2)
                        assert all(am.g1(f1(x)) == am.g2(f2(x)) for x in a.nodes)
                        spans += 1
    assert spans > 50


def test_extension_classification():
    sub = (N("-"), N("1"))
    assert extension_of(sub, N("0"), True) == Extension("child", N("-"), 0, True)
    assert extension_of(sub, N("2"), False) == Extension("child", N("-"), 1, False)
    assert extension_of(sub, N("1.0"), False) == Extension("child", N("1"), 0, False)
    assert extension_of((N("1"),), N("-"), False) == Extension("below", N("1"))
    assert extension_of((N("0"),), N("1"), False) is None


def test_every_extension_realizes_its_type():
    base = fan_tree(2)
    for ext in all_extensions(base):
        tree, emb, x = extension_tree(base, ext)
        assert extension_of(tuple(emb.images), x, x in tree.leaves) == ext.__class__(
            ext.kind, None if ext.anchor is None else emb(ext.anchor), ext.position, ext.p
        )


def test_draft_realize_ranks_children():
    d = Draft()
    r = d.add_root(False)
    d.add_child(r, 0, True)
    d.add_child(r, 0, False)
    tree, words = d.realize()
    assert tree.nodes == (N("-"), N("0"), N("1"))
    assert tree.leaves == frozenset({N("1")})


def test_demand_count_k3():
    # oracle by hand: empty base 2; P-node 1, non-P node 3;
    # 2-chain with non-P top 2 + 4 + 2 = 8, with P top 2 + 4 = 6
    counts = {}
    for d in demands(3):
        counts[len(d.base)] = counts.get(len(d.base), 0) + 1
    assert counts == {0: 2, 1: 4, 2: 14}


@pytest.mark.parametrize("k", [1, 2, 3])
def test_generic_stage_has_extension_property(k):
    st = generic_stage(k)
    assert st.complete
    assert check_extension_property(st.tree, k) == []
    assert age_check(st.tree, k).complete
    assert all(rec.holds(st.tree) for rec in st.concrete_log)


def test_generic_stage_sizes():
    assert len(generic_stage(3, rounds=1).tree) == 6
    assert len(generic_stage(3).tree) == 26


def test_generic_stage_budget_is_partial():
    st = generic_stage(3, max_nodes=5)
    assert not st.complete and st.unmet


def test_extension_property_failures():
    assert check_extension_property(ROOT, 2)
    missing = check_extension_property(balanced_tree(2, 2), 3)
    assert {d.describe() for d in missing} == {
        "[- 0] + below -", "[- 0] + below 0", "[- 0] + child of 0 at 0 (non-P)"
    }
    # a third sibling needs a 3-node base, so it first shows up at k = 4
    missing = check_extension_property(balanced_tree(2, 2), 4)
    third_sibling = [
        d for d in missing
        if iso_code(d.base) == iso_code(fan_tree(2)) and d.ext.kind == "child" and d.ext.position == 2
    ]
    assert third_sibling


def test_stage_rejects_bad_arguments():
    with pytest.raises(ValueError):
        generic_stage(0)
    with pytest.raises(ValueError):
        check_extension_property(ROOT, 0)
