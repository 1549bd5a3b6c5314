import copy

import pytest

from treekit.tree_core import MeetTree, balanced_tree, fan_tree, format_tree, parse_node
from treekit.verify import (
    brute_embeddings,
    check_switcheroo1,
    check_switcheroo2,
    same_l0p,
    verify_certificate,
)
from treekit.witnesses import (
    interval_sop2,
    intervals_to_sop3,
    multigraph_certificate,
    oag_certificate,
    sop3_replay,
    sop3_to_intervals,
    two_ip_certificate,
)

N = parse_node


def nodes(*texts):
    return tuple(N(t) for t in texts)


def all_certificates():
    fam = interval_sop2(balanced_tree(2, 4))
    return {
        "oag": oag_certificate(),
        "multigraph": multigraph_certificate(),
        "2ip": two_ip_certificate(),
        "sop2": interval_sop2(balanced_tree(2, 3)).certificate(),
        "sop3": sop3_replay(fam, 3).certificate(fam),
        "intervals-to-sop3": intervals_to_sop3(3),
        "sop3-to-intervals": sop3_to_intervals(),
    }


@pytest.mark.parametrize("kind", sorted(all_certificates()))
def test_genuine_certificates_verify(kind):
    assert verify_certificate(all_certificates()[kind]) == []


def _tamper(cert, kind):
    c = copy.deepcopy(cert)
    if kind == "oag":
        c["values"][1] = "1/2"
    elif kind == "multigraph":
        c["collapse"]["counterexample"] = [["0.0.0", "0.0.1"], ["0.0.0", "0.0.1"]]
    elif kind == "2ip":
        c["tuple"] = ["0.0.0", "0.0.1", "0.1.0", "1.0.0"]
    elif kind == "sop2":
        c["intervals"]["1"] = ["1/4", "1"]
    elif kind == "sop3":
        c["pairs"][1][0] = c["pairs"][1][1]
    elif kind == "intervals-to-sop3":
        c["c"][0][1] = ["1/12", "7/12"]
    elif kind == "sop3-to-intervals":
        c["rows"][-1]["chi_satisfiable"] = not c["rows"][-1]["chi_satisfiable"]
    return c


@pytest.mark.parametrize("kind", sorted(all_certificates()))
def test_tampered_certificates_fail(kind):
    assert verify_certificate(_tamper(all_certificates()[kind], kind)) != []


def test_unknown_kind():
    assert verify_certificate({"kind": "nope"}) == ["unknown certificate kind 'nope'"]


def test_ramsey_certificates():
    base = {"kind": "ramsey", "A": "- P\n", "B": "-\n0 P\n1 P\n", "r": 2}
    good = dict(base, C=format_tree(fan_tree(3)), status="WITNESS", coloring=None)
    assert verify_certificate(good) == []
    wrong = dict(base, C=format_tree(fan_tree(2)), status="WITNESS", coloring=None)
    assert verify_certificate(wrong)
    refute = dict(base, C=format_tree(fan_tree(3)), status="REFUTED", coloring=[0, 1, 0])
    assert verify_certificate(refute) == ["refuting coloring has a monochromatic copy"]


def test_switcheroo_checker_rejections():
    b = balanced_tree(2, 3)
    etas, eta_n = nodes("0.0.0", "0.0.1"), N("0.1.0")
    assert check_switcheroo1(b, etas, eta_n, nodes("1.0.0", "1.0.1")) == []
    assert check_switcheroo1(b, etas, eta_n, nodes("0.0.0", "0.0.1")) == ["η_n not <lex ⋀ν̄"]
    assert check_switcheroo1(b, etas, N("1.0.0"), nodes("1.0.0", "1.0.1")) == [
        "η_n not incomparable with ⋀ν̄", "η_n not <lex ⋀ν̄"
    ]
    b3 = balanced_tree(3, 3)
    comb = nodes("0.0.0", "0.0.1", "0.1.0")
    assert check_switcheroo1(b3, comb, N("1.0.0"), nodes("2.0.0", "2.0.1", "2.1.0")) == []
    assert check_switcheroo1(b3, comb, N("1.0.0"), nodes("2.0.0", "2.0.1", "2.0.2")) == ["qftp over the root differs"]
    fan = nodes("1.1.0", "1.1.1")
    assert check_switcheroo2(b, N("1.0.0"), fan, nodes("0.0.0", "0.0.1")) == ["η0, ν̄ not a fan"]
    assert check_switcheroo2(b, N("1.1.0"), nodes("1.1.1"), nodes("1.0.0")) == []
    assert check_switcheroo2(b, N("0.0.0"), nodes("0.0.1"), nodes("1.0.0")) == [
        "⋀ν̄ not <lex η0", "some ν_j not <lex η0"
    ]


def test_sw_unsat_claim_checked_by_brute_force():
    bare = MeetTree.closed(nodes("0", "1", "2"), nodes("0", "1", "2"))
    cert = {"kind": "sw1", "tree": format_tree(bare), "etas": ["0", "1"], "eta_n": "2", "status": "UNSAT"}
    assert verify_certificate(cert) == []
    b = balanced_tree(2, 3)
    cert = {"kind": "sw1", "tree": format_tree(b), "etas": ["0.0.0", "0.0.1"], "eta_n": "0.1.0", "status": "UNSAT"}
    assert verify_certificate(cert)


def test_brute_helpers():
    assert len(brute_embeddings(fan_tree(2), fan_tree(3))) == 3
    b = balanced_tree(2, 2)
    assert same_l0p(b, nodes("0.0", "0.1"), b, nodes("1.0", "1.1"))
    assert not same_l0p(b, nodes("0.0", "0.1"), b, nodes("0", "1"))
    b3 = balanced_tree(3, 2)
    assert not same_l0p(b3, nodes("0.0", "0.1", "0.2"), b3, nodes("0.0", "0.1", "1.0"))
