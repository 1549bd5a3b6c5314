import itertools
from fractions import Fraction

import pytest

from treekit.tree_core import balanced_tree, fan_tree, incomparable, meet, parse_node
from treekit.verify import verify_certificate
from treekit.witnesses import (
    RatInterval,
    WitnessError,
    fr,
    interval_sop2,
    intersect_all,
    intervals_to_sop3,
    multigraph_certificate,
    multigraph_family,
    oag_certificate,
    oag_family,
    sop3_boundary,
    sop3_replay,
    sop3_to_intervals,
    two_ip_certificate,
    two_ip_family,
)

N = parse_node
F = Fraction


def test_rational_intervals():
    a, b = RatInterval(F(0), F(1, 2)), RatInterval(F(1, 4), F(3, 4))
    assert intersect_all([a, b]) == RatInterval(F(1, 4), F(1, 2))
    assert intersect_all([a, RatInterval(F(2, 3), F(1))]) is None
    assert a.disjoint(RatInterval(F(2, 3), F(1))) and not a.disjoint(b)
    assert RatInterval(F(1, 4), F(1, 3)).within(a)
    assert fr(F(2, 4)) == "1/2" and fr(F(3)) == "3"
    with pytest.raises(WitnessError):
        RatInterval(F(1), F(0))


def test_oag_family_values():
    f = oag_family(3, 2)
    assert f.assignment[N("1.2")] == (F(5, 3),)
    assert f.assignment[()] == (F(0),)
    with pytest.raises(WitnessError):
        oag_family(1, 2)
    with pytest.raises(WitnessError):
        oag_family(3, 2, F(-1))


def test_oag_certificate_scales_with_g():
    c = oag_certificate(3, 2, F(2))
    assert c["values"] == ["0", "2/3", "2", "8/3"]
    assert verify_certificate(c) == []


def test_multigraph_relations():
    s, f = multigraph_family(2, 2)
    assert s.holds("R1", ("0.0", "0.1"))
    assert s.holds("R0", ("0.0", "1.1"))
    assert not any(s.holds(r, ("0.0", "0.0")) for r in s.relations)
    c = multigraph_certificate(2, 3)
    assert c["collapse_full"]["counterexample"] == [["0.0.0", "0.0.1"], ["0.0.0", "0.1.0"]]
    assert c["level_pair_codes_differ"]


def test_two_ip_relation_is_x_pattern():
    s, f = two_ip_family(2, 3)
    phi = s.relations["phi"][1]
    assert ("a:0.0.0", "b:1.0.0", "c:1.0.1") in phi
    assert ("a:0.0.0", "b:0.0.1", "c:1.0.0") not in phi
    c = two_ip_certificate(2, 3)
    assert c["collapse"]["counterexample"] == [c["tuple"], ["0.0.0", "0.0.1", "0.1.0", "1.0.0"]]
    with pytest.raises(WitnessError):
        two_ip_family(2, 2)


def test_interval_sop2_shape():
    fam = interval_sop2(balanced_tree(2, 3))
    assert fam.intervals[()] == RatInterval(F(0), F(1))
    assert fam.intervals[N("0")] == RatInterval(F(0), F(1, 3))
    assert fam.intervals[N("1")] == RatInterval(F(2, 3), F(1))
    assert fam.points[N("0.0.0")] == F(1, 54)
    assert fam.invariant_failures() == []
    for x, y in itertools.combinations(fam.index.nodes, 2):
        if incomparable(x, y):
            assert fam.intervals[x].disjoint(fam.intervals[y])
    tri = interval_sop2(balanced_tree(3, 2))
    assert tri.invariant_failures() == []
    assert verify_certificate(tri.certificate()) == []


def test_interval_sop2_detects_tampering():
    fam = interval_sop2(balanced_tree(2, 2))
    fam.intervals[N("1")] = RatInterval(F(1, 4), F(1))
    assert fam.invariant_failures()


def test_sop3_small_cases():
    fam = interval_sop2(balanced_tree(2, 2))
    one = sop3_replay(fam, 1)
    assert one.status == "SAT" and len(one.consistency) == 1 and len(one.inconsistency) == 1
    bare = sop3_replay(interval_sop2(fan_tree(2)), 1)
    assert bare.status == "UNSAT" and "η" in bare.reason
    with pytest.raises(WitnessError):
        sop3_replay(fam, 0)


def _brute_configuration_exists(tree, n):
    # oracle: increasing 4n-tuples of leaves laid out in the replay's chain order
    for combo in itertools.combinations(tree.leaf_list, 4 * n):
        el0, er0 = combo[0], combo[n]
        nl0, nr0 = combo[n + 1], combo[3 * n]
        eta, nu = meet(el0, er0), meet(nl0, nr0)
        if incomparable(eta, nu) and eta < nu:
            return True
    return False


@pytest.mark.parametrize("n", [1, 2, 3])
def test_sop3_configuration_search_matches_brute_force(n):
    for depth in range(1, 5):
        fam = interval_sop2(balanced_tree(2, depth))
        assert (sop3_replay(fam, n).status == "SAT") == _brute_configuration_exists(fam.index, n)
    fam = interval_sop2(balanced_tree(3, 2))
    assert (sop3_replay(fam, n).status == "SAT") == _brute_configuration_exists(fam.index, n)


def test_sop3_boundary_log():
    depth, log = sop3_boundary(2)
    assert depth == 4
    assert log == [(1, "UNSAT"), (2, "UNSAT"), (3, "UNSAT"), (4, "SAT")]
    assert sop3_boundary(2, max_depth=3) == (None, log[:3])


def test_intervals_to_sop3_examples():
    c = intervals_to_sop3(3, [F(1, 12), F(1, 6), F(1, 4)])
    assert c["verified"]
    assert c["c"][0][1] == ["1/12", "5/12"] and c["c"][1][0] == ["1/2", "5/6"]
    assert all(row["disjoint"] for row in c["clauses"]["inconsistent"])
    assert intervals_to_sop3(2, [F(1, 8), F(1, 4)])["verified"]
    with pytest.raises(WitnessError):
        intervals_to_sop3(2, [F(1, 4), F(1, 8)])
    with pytest.raises(WitnessError):
        intervals_to_sop3(2, [F(1, 8), F(1, 2)])


def test_sop3_to_intervals_examples():
    c = sop3_to_intervals([RatInterval(F(0), F(1, 2)), RatInterval(F(1, 4), F(3, 4))])
    both = c["rows"][-1]
    assert both["chi_satisfiable"] and F(1, 4) <= F(both["oracle_point"]) <= F(1, 2)
    c = sop3_to_intervals([RatInterval(F(0), F(1, 4)), RatInterval(F(1, 2), F(1))])
    assert not c["rows"][-1]["chi_satisfiable"] and c["rows"][-1]["oracle_point"] is None
    with pytest.raises(WitnessError):
        sop3_to_intervals([RatInterval(F(0), F(1, 2)), RatInterval(F(1, 2), F(1))])
