"""Trusted certificate checker.

Uses only word relations from :mod:`treekit.tree_core` and exact rational
comparisons.  Nothing here calls the solvers or constructions it checks.
"""

from __future__ import annotations

import itertools
from fractions import Fraction
from typing import Sequence

from .tree_core import MeetTree, Node, is_initial, is_proper_initial, meet, parse_node, parse_tree


def _rel_table(tree: MeetTree, tup: Sequence[Node]) -> tuple:
    """Equality, ⊴, <lex and P among all pairwise meets of ``tup``."""
    idx = list(itertools.product(range(len(tup)), repeat=2))
    meets = [meet(tup[i], tup[j]) for i, j in idx]
    rows = []
    for x in meets:
        rows.append(x in tree.leaves)
        for y in meets:
            rows.append((x == y, is_initial(x, y), x < y))
    return tuple(rows)


def same_l0p(tree1: MeetTree, s: Sequence[Node], tree2: MeetTree, t: Sequence[Node]) -> bool:
    """Position map between the ∧-closures is an L0P isomorphism."""
    if len(s) != len(t):
        return False
    return _rel_table(tree1, [tuple(x) for x in s]) == _rel_table(tree2, [tuple(x) for x in t])


def brute_embeddings(a: MeetTree, c: MeetTree) -> list:
    """All embeddings by trying every injective map, sorted by image tuple."""
    out = []
    for img in itertools.permutations(c.nodes, len(a.nodes)):
        f = dict(zip(a.nodes, img))
        if any((x in a.leaves) != (f[x] in c.leaves) for x in a.nodes):
            continue
        ok = True
        for x, y in itertools.product(a.nodes, repeat=2):
            fx, fy = f[x], f[y]
            if is_initial(x, y) != is_initial(fx, fy) or (x < y) != (fx < fy) or f[meet(x, y)] != meet(fx, fy):
                ok = False
                break
        if ok:
            out.append(tuple(img))
    return sorted(out)


# --- switcheroo ---------------------------------------------------------------


def check_switcheroo1(tree: MeetTree, etas, eta_n, nus) -> list:
    etas = [tuple(e) for e in etas]
    eta_n, nus = tuple(eta_n), [tuple(v) for v in nus]
    root = tree.nodes[0]
    errs = []
    if len(nus) != len(etas) or any(v not in tree.leaves for v in nus):
        return ["ν̄ must be P-leaves, one per η"]
    if any(not a < b for a, b in zip(nus, nus[1:])):
        errs.append("ν̄ not <lex increasing")
    if not same_l0p(tree, [root] + etas, tree, [root] + nus):
        errs.append("qftp over the root differs")
    m = nus[0]
    for v in nus[1:]:
        m = meet(m, v)
    if is_initial(eta_n, m) or is_initial(m, eta_n):
        errs.append("η_n not incomparable with ⋀ν̄")
    if not eta_n < m:
        errs.append("η_n not <lex ⋀ν̄")
    return errs


def check_switcheroo2(tree: MeetTree, eta0, fan, nus) -> list:
    eta0, fan, nus = tuple(eta0), [tuple(e) for e in fan], [tuple(v) for v in nus]
    errs = []
    if len(nus) != len(fan) or any(v not in tree.leaves for v in nus):
        return ["ν̄ must be P-leaves, one per fan entry"]
    if not same_l0p(tree, fan, tree, nus):
        errs.append("qftp differs from the fan")
    m = nus[0]
    for v in nus[1:]:
        m = meet(m, v)
    if not m < eta0:
        errs.append("⋀ν̄ not <lex η0")
    if any(not v < eta0 for v in nus):
        errs.append("some ν_j not <lex η0")
    pts = [eta0] + nus
    if len(set(pts)) != len(pts) or any(is_initial(a, b) for a, b in itertools.permutations(pts, 2)):
        errs.append("η0, ν̄ not an antichain")
    elif len({meet(a, b) for a, b in itertools.combinations(pts, 2)}) != 1:
        errs.append("η0, ν̄ not a fan")
    return errs


def brute_switcheroo(tree: MeetTree, n: int, check) -> list | None:
    """First increasing n-tuple of P-leaves accepted by ``check``."""
    for nus in itertools.combinations(sorted(tree.leaves), n):
        if not check(list(nus)):
            return list(nus)
    return None


# --- intervals ----------------------------------------------------------------


def _iv(pair) -> tuple:
    lo, hi = Fraction(pair[0]), Fraction(pair[1])
    return lo, hi


def _meets(ivs) -> tuple | None:
    lo = max(i[0] for i in ivs)
    hi = min(i[1] for i in ivs)
    return (lo, hi) if lo <= hi else None


def check_interval_family(cert: dict) -> list:
    tree = parse_tree(cert["tree"])
    ivs = {parse_node(k): _iv(v) for k, v in cert["intervals"].items()}
    pts = {parse_node(k): Fraction(v) for k, v in cert["points"].items()}
    errs = []
    if set(ivs) != set(tree.nodes) or set(pts) != set(tree.leaves):
        return ["intervals or points do not cover the tree"]
    for x, (lo, hi) in ivs.items():
        if lo > hi:
            errs.append(f"empty interval at {x}")
    for x, y in itertools.permutations(tree.nodes, 2):
        (a, b), (c, d) = ivs[x], ivs[y]
        if is_proper_initial(x, y) and not (a <= c and d <= b):
            errs.append(f"nesting {x} {y}")
        if not is_initial(x, y) and not is_initial(y, x) and not (b < c or d < a):
            errs.append(f"overlap {x} {y}")
    for leaf, p in pts.items():
        for x in tree.nodes:
            if is_initial(x, leaf) and not ivs[x][0] <= p <= ivs[x][1]:
                errs.append(f"point {leaf} outside {x}")
    return errs


def check_sop3(cert: dict) -> list:
    errs = check_interval_family(cert["family"])
    if cert["status"] != "SAT":
        return errs
    n = cert["n"]
    pairs = [(_iv(a), _iv(b)) for a, b in cert["pairs"]]
    if len(pairs) != n:
        return errs + ["wrong number of pairs"]
    fam = cert["family"]
    tree = parse_tree(fam["tree"])
    ivs = {parse_node(k): _iv(v) for k, v in fam["intervals"].items()}
    pts = {parse_node(k): Fraction(v) for k, v in fam["points"].items()}
    cfg = {k: parse_node(v) for k, v in cert["config"].items()}
    eta, nu = cfg["eta"], cfg["nu"]
    if is_initial(eta, nu) or is_initial(nu, eta) or not eta < nu:
        errs.append("need η ⊥ ν with η <lex ν")
    if meet(cfg["eta_l0"], cfg["eta_r0"]) != eta or meet(cfg["nu_l0"], cfg["nu_r0"]) != nu:
        errs.append("endpoint meets wrong")
    chain = (
        [f"eta_l{i}" for i in range(n)]
        + ["eta_r0", "nu_l0"]
        + [k for i in range(1, n) for k in (f"eta_r{i}", f"nu_l{i}")]
        + [f"nu_r{i}" for i in range(n)]
    )
    seq = [cfg[k] for k in chain]
    if any(v not in tree.leaves for v in seq) or any(not a < b for a, b in zip(seq, seq[1:])):
        errs.append("leaf chain not increasing P-leaves")
    if pairs[0] != (ivs[nu], ivs[eta]):
        errs.append("d_0 is not (interval(ν), interval(η))")
    for i in range(1, n):
        want = ((pts[cfg[f"nu_l{i}"]], pts[cfg[f"nu_r{i}"]]), (pts[cfg[f"eta_l{i}"]], pts[cfg[f"eta_r{i}"]]))
        if pairs[i] != want:
            errs.append(f"d_{i} is not the hull pair")
    for j in range(n):
        sets = [pairs[i][0] for i in range(j + 1)] + [pairs[i][1] for i in range(j + 1, n)]
        if _meets(sets) is None:
            errs.append(f"clause (1) fails at j={j}")
    for i in range(n):
        for j in range(i, n):
            (a, b), (c, d) = pairs[j][0], pairs[i][1]
            if not (b < c or d < a):
                errs.append(f"clause (2) fails at i={i}, j={j}")
    return errs


def check_intervals_to_sop3(cert: dict) -> list:
    ks = [Fraction(k) for k in cert["ks"]]
    n = len(ks)
    third = Fraction(1, 3)
    errs = []
    if any(not 0 < k < third for k in ks) or ks != sorted(set(ks)):
        errs.append("ks must increase inside (0, 1/3)")
    c = [(_iv(u), _iv(l)) for u, l in cert["c"]]
    if c != [((third + k, 2 * third + k), (k, third + k)) for k in ks]:
        errs.append("c_k does not match ks")
    for i in range(n + 1):
        if _meets([c[j][0] for j in range(i)] + [c[j][1] for j in range(i, n)]) is None:
            errs.append(f"consistency fails at i={i}")
    for i in range(n):
        for j in range(i):
            (a, b), (u, v) = c[j][1], c[i][0]
            if not (b < u or v < a):
                errs.append(f"disjointness fails at j={j}, i={i}")
    return errs


def check_sop3_to_intervals(cert: dict) -> list:
    sample = [_iv(p) for p in cert["sample"]]
    ends = [e for p in sample for e in p]
    if len(set(ends)) != len(ends):
        return ["duplicate endpoints"]
    errs = []
    for row in cert["rows"]:
        fam = [sample[i] for i in row["members"]]
        # φ(x; lo) ∧ ψ(x; hi) for every member, decided by max lo vs min hi
        sat = max(p[0] for p in fam) <= min(p[1] for p in fam)
        if sat != row["chi_satisfiable"]:
            errs.append(f"χ verdict wrong for {row['members']}")
        pt = row["oracle_point"]
        if pt is not None and not all(a <= Fraction(pt) <= b for a, b in fam):
            errs.append(f"oracle point misses {row['members']}")
        if (pt is not None) != sat:
            errs.append(f"oracle disagrees for {row['members']}")
    return errs


# --- tree-indexed counterexamples ---------------------------------------------


def _increasing_leaves(tree: MeetTree | None, tup) -> bool:
    return all(a < b for a, b in zip(tup, tup[1:]))


def check_oag(cert: dict) -> list:
    n, g = cert["n"], Fraction(cert["g"])
    t = [parse_node(s) for s in cert["tuple"]]

    def val(v):
        return sum((Fraction(c) * g / n**i for i, c in enumerate(v)), Fraction(0))

    a = [val(v) for v in t]
    errs = []
    if any(len(v) != cert["m"] or any(c >= n for c in v) for v in t):
        errs.append("tuple entries are not leaves of n^{≤m}")
    if [Fraction(x) for x in cert["values"]] != a:
        errs.append("values do not match the formula")
    base = meet(t[0], t[2])
    if not (_increasing_leaves(None, t) and is_proper_initial(base, meet(t[0], t[1])) and is_proper_initial(base, meet(t[2], t[3]))):
        errs.append("meet pattern fails")
    if not a[1] - a[0] < a[3] - a[1]:
        errs.append("first inequality fails")
    if not a[2] - a[0] > a[3] - a[2]:
        errs.append("second inequality fails")
    ce = cert["collapse"]["counterexample"]
    if ce is None:
        errs.append("collapse check found no counterexample")
    else:
        other = [parse_node(s) for s in ce[1]]
        b = [val(v) for v in other]
        if not _increasing_leaves(None, other):
            errs.append("counterexample tuple not increasing")
        if (b[1] - b[0] < b[3] - b[1]) and (b[2] - b[0] > b[3] - b[2]):
            errs.append("counterexample satisfies both inequalities")
    return errs


def check_multigraph(cert: dict) -> list:
    errs = []
    zero, one = ([parse_node(s) for s in p] for p in cert["level_pairs"])
    if len(meet(*zero)) != 0 or len(meet(*one)) != 1:
        errs.append("level pairs do not have meet lengths 0 and 1")
    if not cert["ls_indiscernible"]["ok"]:
        errs.append("LS check failed")
    ce = cert["collapse"]["counterexample"]
    if ce is None:
        errs.append("collapse found no counterexample")
    else:
        p, q = ([parse_node(s) for s in x] for x in ce)
        if len(meet(*p)) == len(meet(*q)):
            errs.append("collapse pairs have equal meet length")
    return errs


def _x_pattern(e, v, x) -> bool:
    return e < v < x and is_proper_initial(meet(e, v), meet(v, x))


def check_two_ip(cert: dict) -> list:
    t = [parse_node(s) for s in cert["tuple"]]
    errs = []
    if not _increasing_leaves(None, t) or len({len(v) for v in t}) != 1 or len(t[0]) != cert["d"]:
        errs.append("tuple is not 4 increasing leaves")
    if not is_proper_initial(meet(t[1], t[3]), meet(t[0], t[1])):
        errs.append("η0∧η1 ▷ η1∧η3 fails")
    if not is_proper_initial(meet(t[0], t[2]), meet(t[2], t[3])):
        errs.append("η0∧η2 ◁ η2∧η3 fails")
    if _x_pattern(t[0], t[1], t[3]):
        errs.append("φ(a0; b1, c3) holds")
    if not _x_pattern(t[0], t[2], t[3]):
        errs.append("φ(a0; b2, c3) fails")
    return errs


# --- ramsey -------------------------------------------------------------------


def check_ramsey(cert: dict, max_colorings: int = 10**6) -> list:
    a, b, c = (parse_tree(cert[k]) for k in ("A", "B", "C"))
    r = cert["r"]
    ac = brute_embeddings(a, c)
    ab = brute_embeddings(a, b)
    bc = brute_embeddings(b, c)
    pos = {img: i for i, img in enumerate(ac)}
    copies = []
    for beta in bc:
        fb = dict(zip(b.nodes, beta))
        copies.append({pos[tuple(fb[x] for x in alpha)] for alpha in ab})
    if cert["status"] == "REFUTED":
        col = cert["coloring"]
        if len(col) != len(ac) or any(not 0 <= x < r for x in col):
            return ["coloring does not match Emb(A, C)"]
        if any(len({col[i] for i in idx}) <= 1 for idx in copies):
            return ["refuting coloring has a monochromatic copy"]
        return []
    if r ** len(ac) > max_colorings:
        return [f"too many colorings to re-check ({r}^{len(ac)})"]
    for col in itertools.product(range(r), repeat=len(ac)):
        if not any(len({col[i] for i in idx}) <= 1 for idx in copies):
            return [f"bad coloring {list(col)} exists"]
    return []


CHECKERS = {
    "sop2": check_interval_family,
    "sop3": check_sop3,
    "intervals-to-sop3": check_intervals_to_sop3,
    "sop3-to-intervals": check_sop3_to_intervals,
    "oag": check_oag,
    "multigraph": check_multigraph,
    "2ip": check_two_ip,
    "ramsey": check_ramsey,
}


def verify_certificate(cert: dict) -> list:
    """Problems with ``cert`` (empty when it checks out)."""
    kind = cert.get("kind")
    if kind in ("sw1", "sw2"):
        tree = parse_tree(cert["tree"])
        nodes = lambda key: [parse_node(s) for s in cert[key]]  # noqa: E731
        if kind == "sw1":
            ref = nodes("etas")
            check = lambda nus: check_switcheroo1(tree, ref, parse_node(cert["eta_n"]), nus)  # noqa: E731
        else:
            ref = nodes("fan")
            check = lambda nus: check_switcheroo2(tree, parse_node(cert["eta0"]), ref, nus)  # noqa: E731
        if cert["status"] == "SAT":
            return check(nodes("witness"))
        found = brute_switcheroo(tree, len(ref), check)
        return [] if found is None else [f"UNSAT claimed but {found} passes"]
    if kind not in CHECKERS:
        return [f"unknown certificate kind {kind!r}"]
    return CHECKERS[kind](cert)
