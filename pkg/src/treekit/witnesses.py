"""Concrete exact-arithmetic witnesses with machine-checkable certificates.

Every ``*_certificate`` dict is plain JSON (rationals as ``"p/q"``) and is
re-checked by :mod:`treekit.verify`, which shares no code with this module.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .indiscernibles import (
    AtomicDiagram,
    IndexedFamily,
    LinearPredicates,
    LinearRelation,
    RelStructure,
    check_treetop_collapse,
)
from .tree_core import (
    MeetTree,
    Node,
    balanced_tree,
    format_node,
    format_tree,
    incomparable,
    is_initial,
    is_proper_initial,
    leaf_pattern_X,
    meet,
)


class WitnessError(ValueError):
    pass


def fr(x: Fraction) -> str:
    """Exact text form: "p/q", or "p" for integers."""
    return str(Fraction(x))


def _nodes(tup) -> list:
    return [format_node(n) for n in tup]


# --- rational intervals -------------------------------------------------------


@dataclass(frozen=True)
class RatInterval:
    lo: Fraction
    hi: Fraction

    def __post_init__(self):
        object.__setattr__(self, "lo", Fraction(self.lo))
        object.__setattr__(self, "hi", Fraction(self.hi))
        if self.lo > self.hi:
            raise WitnessError(f"empty interval [{self.lo}, {self.hi}]")

    def contains(self, x) -> bool:
        return self.lo <= x <= self.hi

    def within(self, other: "RatInterval") -> bool:
        return other.lo <= self.lo and self.hi <= other.hi

    def disjoint(self, other: "RatInterval") -> bool:
        return self.hi < other.lo or other.hi < self.lo

    @property
    def midpoint(self) -> Fraction:
        return (self.lo + self.hi) / 2

    def to_json(self) -> list:
        return [fr(self.lo), fr(self.hi)]

    def __str__(self) -> str:
        return f"[{self.lo}, {self.hi}]"


def intersect_all(intervals: Sequence[RatInterval]) -> RatInterval | None:
    """Intersection of a nonempty list, or None when empty."""
    lo = max(i.lo for i in intervals)
    hi = min(i.hi for i in intervals)
    return RatInterval(lo, hi) if lo <= hi else None


# --- ordered abelian group ----------------------------------------------------


OAG_RELATIONS = (
    LinearRelation("x1-x0<x3-x1", (Fraction(-1), Fraction(2), Fraction(0), Fraction(-1)), "<"),
    LinearRelation("x2-x0>x3-x2", (Fraction(-1), Fraction(0), Fraction(2), Fraction(-1)), ">"),
    LinearRelation("x0<x1", (Fraction(1), Fraction(-1)), "<"),
)


def oag_value(node: Node, n: int, g: Fraction) -> Fraction:
    return sum((Fraction(c) * g / n**i for i, c in enumerate(node)), Fraction(0))


def oag_family(n: int, m: int, g=Fraction(1)) -> IndexedFamily:
    """a_η = Σ η(i)·g/nⁱ on n^{≤m}, depth-m nodes P-flagged."""
    g = Fraction(g)
    if n < 2 or m < 2:
        raise WitnessError("need n >= 2 and m >= 2")
    if g <= 0:
        raise WitnessError("g must be positive")
    tree = balanced_tree(n, m)
    return IndexedFamily(tree, {v: (oag_value(v, n, g),) for v in tree.nodes}, LinearPredicates(OAG_RELATIONS))


def oag_meet_pattern(t: Sequence[Node]) -> bool:
    """η0 <lex .. <lex η3, η0∧η1 ▷ η0∧η2 and η2∧η3 ▷ η0∧η2."""
    e0, e1, e2, e3 = t
    base = meet(e0, e2)
    return e0 < e1 < e2 < e3 and is_proper_initial(base, meet(e0, e1)) and is_proper_initial(base, meet(e2, e3))


def oag_inequalities(fam: IndexedFamily, t: Sequence[Node]) -> tuple[bool, bool]:
    a = [fam.assignment[v][0] for v in t]
    return a[1] - a[0] < a[3] - a[1], a[2] - a[0] > a[3] - a[2]


def oag_certificate(n: int = 3, m: int = 2, g=Fraction(1)) -> dict:
    """Lex-least leaf 4-tuple with the meet pattern and both inequalities."""
    fam = oag_family(n, m, g)
    found = None
    for t in itertools.permutations(fam.index.leaf_list, 4):
        if oag_meet_pattern(t) and all(oag_inequalities(fam, t)):
            if found is None or t < found:
                found = t
    if found is None:
        raise WitnessError("no tuple with the pattern")  # pragma: no cover
    collapse = check_treetop_collapse(fam, 4, anchor=found)
    return {
        "kind": "oag",
        "n": n,
        "m": m,
        "g": fr(Fraction(g)),
        "tuple": _nodes(found),
        "values": [fr(fam.assignment[v][0]) for v in found],
        "collapse": collapse.to_json(),
    }


# --- multigraph ---------------------------------------------------------------


PAD = "pad"


def multigraph_family(b: int = 2, d: int = 3) -> tuple[RelStructure, IndexedFamily]:
    """Leaves of b^{≤d} as vertices; R_k(η, ν) iff |η∧ν| = k."""
    if b < 2 or d < 2:
        raise WitnessError("need b >= 2 and d >= 2")
    tree = balanced_tree(b, d)
    leaves = tree.leaf_list
    names = {v: format_node(v) for v in leaves}
    rels = {f"R{k}": (2, set()) for k in range(d)}
    for x, y in itertools.permutations(leaves, 2):
        rels[f"R{len(meet(x, y))}"][1].add((names[x], names[y]))
    structure = RelStructure(
        tuple(names[v] for v in leaves) + (PAD,), {k: (2, frozenset(v)) for k, (_, v) in rels.items()}
    )
    assign = {v: ((names[v],) if v in tree.leaves else (PAD,)) for v in tree.nodes}
    return structure, IndexedFamily(tree, assign, AtomicDiagram(structure), 1, structure)


def multigraph_certificate(b: int = 2, d: int = 3, n_max: int = 2) -> dict:
    from .indiscernibles import check_indexed_indiscernible
    from .tree_core import LanguageTag

    structure, fam = multigraph_family(b, d)
    ls = check_indexed_indiscernible(fam, LanguageTag.LS, n_max)
    l0p = check_indexed_indiscernible(fam, LanguageTag.L0P, n_max)
    full = check_treetop_collapse(fam, 2)
    # leftmost leaf over each depth-(d-1) node: pair meets have lengths < d-1,
    # so the first failure compares meet lengths 1 and 0
    sparse = [v for v in fam.index.leaf_list if v[-1] == 0]
    collapse = check_treetop_collapse(fam, 2, leaves=sparse)
    leaves = fam.index.leaf_list
    zero = next(p for p in itertools.combinations(leaves, 2) if len(meet(*p)) == 0)
    one = next(p for p in itertools.combinations(leaves, 2) if len(meet(*p)) == 1)
    return {
        "kind": "multigraph",
        "b": b,
        "d": d,
        "ls_indiscernible": ls.to_json(),
        "l0p_indiscernible": l0p.to_json(),
        "subsequence": _nodes(sparse),
        "collapse": collapse.to_json(),
        "collapse_full": full.to_json(),
        "level_pairs": [_nodes(zero), _nodes(one)],
        "level_pair_codes_differ": fam.code(zero, (fam.index.root,)) != fam.code(one, (fam.index.root,)),
    }


# --- 2-IP pattern -------------------------------------------------------------


def two_ip_family(b: int = 2, d: int = 3) -> tuple[RelStructure, IndexedFamily]:
    """Three sorts a, b, c over the leaves; φ(a_η; b_ν, c_ξ) iff (ν, ξ) ∈ X_η."""
    if b < 2 or d < 3:
        raise WitnessError("need b >= 2 and d >= 3")
    tree = balanced_tree(b, d)
    leaves = tree.leaf_list

    def el(sort, v):
        return f"{sort}:{format_node(v)}"

    phi = {
        (el("a", e), el("b", v), el("c", x))
        for e, v, x in itertools.permutations(leaves, 3)
        if leaf_pattern_X(tree, e, v, x)
    }
    universe = tuple(el(s, v) for s in "abc" for v in leaves) + (PAD,)
    structure = RelStructure(universe, {"phi": (3, frozenset(phi))})
    assign = {
        v: ((el("a", v), el("b", v), el("c", v)) if v in tree.leaves else (PAD, PAD, PAD)) for v in tree.nodes
    }
    return structure, IndexedFamily(tree, assign, AtomicDiagram(structure), 3, structure)


def two_ip_pattern(t: Sequence[Node]) -> bool:
    """η0 <lex .. <lex η3, η0∧η1 ▷ η1∧η3 and η0∧η2 ◁ η2∧η3."""
    e0, e1, e2, e3 = t
    return (
        e0 < e1 < e2 < e3
        and is_proper_initial(meet(e1, e3), meet(e0, e1))
        and is_proper_initial(meet(e0, e2), meet(e2, e3))
    )


def two_ip_certificate(b: int = 2, d: int = 3) -> dict:
    structure, fam = two_ip_family(b, d)
    phi = structure.relations["phi"][1]

    def holds(e, v, x):
        return (fam.assignment[e][0], fam.assignment[v][1], fam.assignment[x][2]) in phi

    found = None
    for t in itertools.combinations(fam.index.leaf_list, 4):
        if two_ip_pattern(t) and not holds(t[0], t[1], t[3]) and holds(t[0], t[2], t[3]):
            found = t
            break
    if found is None:
        raise WitnessError("no 2-IP pattern tuple")  # pragma: no cover
    collapse = check_treetop_collapse(fam, 4, anchor=found)
    return {
        "kind": "2ip",
        "b": b,
        "d": d,
        "tuple": _nodes(found),
        "phi_01_3": holds(found[0], found[1], found[3]),
        "phi_02_3": holds(found[0], found[2], found[3]),
        "collapse": collapse.to_json(),
    }


# --- interval SOP₂ trees ------------------------------------------------------


@dataclass
class IntervalTreeFamily:
    index: MeetTree
    intervals: dict  # node -> RatInterval
    points: dict  # P-leaf -> Fraction

    def invariant_failures(self) -> list:
        """All nesting, disjointness and realization violations."""
        out = []
        nodes = self.index.nodes
        for x, y in itertools.combinations(nodes, 2):
            ix, iy = self.intervals[x], self.intervals[y]
            if is_initial(x, y) and not iy.within(ix):
                out.append(f"nesting fails at {format_node(x)} ⊴ {format_node(y)}")
            if incomparable(x, y) and not ix.disjoint(iy):
                out.append(f"{format_node(x)} ⊥ {format_node(y)} but intervals meet")
        for leaf, p in self.points.items():
            for anc in nodes:
                if is_initial(anc, leaf) and not self.intervals[anc].contains(p):
                    out.append(f"point of {format_node(leaf)} outside interval of {format_node(anc)}")
        return out

    def as_indexed(self) -> IndexedFamily:
        """Node ↦ its interval endpoints, P-leaf ↦ its point twice; codes compare all endpoints."""
        assign = {
            n: (self.points[n], self.points[n]) if n in self.points else (self.intervals[n].lo, self.intervals[n].hi)
            for n in self.index.nodes
        }
        less = LinearRelation("x0<x1", (Fraction(1), Fraction(-1)), "<")
        return IndexedFamily(self.index, assign, LinearPredicates((less,), "all"), 2)

    def certificate(self) -> dict:
        return {
            "kind": "sop2",
            "tree": format_tree(self.index),
            "intervals": {format_node(n): self.intervals[n].to_json() for n in self.index.nodes},
            "points": {format_node(n): fr(p) for n, p in sorted(self.points.items())},
        }


def interval_sop2(index: MeetTree) -> IntervalTreeFamily:
    """Root gets [0, 1]; k children take the even parts of a (2k-1)-fold split.

    Consecutive siblings are separated by a gap of one part; a P-leaf is
    realized by the midpoint of its interval.
    """
    if not index.leaves:
        raise WitnessError("index has no P-leaves")
    intervals = {index.root: RatInterval(0, 1)}
    for v in index.nodes:
        kids = index.children[v]
        if not kids:
            continue
        iv = intervals[v]
        step = (iv.hi - iv.lo) / (2 * len(kids) - 1)
        for i, c in enumerate(kids):
            intervals[c] = RatInterval(iv.lo + 2 * i * step, iv.lo + (2 * i + 1) * step)
    points = {v: intervals[v].midpoint for v in index.leaves}
    return IntervalTreeFamily(index, intervals, points)


# --- SOP₂ ⇒ SOP₃ replay --------------------------------------------------------


@dataclass
class Sop3Replay:
    status: str  # "SAT" or "UNSAT"
    n: int
    config: dict = field(default_factory=dict)  # role -> node
    pairs: list = field(default_factory=list)  # d_i = (a_i, b_i)
    consistency: list = field(default_factory=list)  # (j, intersection, witness point)
    inconsistency: list = field(default_factory=list)  # (i, j, disjoint?)
    reason: str = ""

    @property
    def verified(self) -> bool:
        return (
            self.status == "SAT"
            and all(w is not None for _, _, w in self.consistency)
            and all(ok for _, _, ok in self.inconsistency)
        )

    def certificate(self, fam: IntervalTreeFamily) -> dict:
        return {
            "kind": "sop3",
            "n": self.n,
            "status": self.status,
            "reason": self.reason,
            "family": fam.certificate(),
            "config": {k: format_node(v) for k, v in self.config.items()},
            "pairs": [[a.to_json(), b.to_json()] for a, b in self.pairs],
            "clauses": {
                "consistent": [
                    {"j": j, "intersection": None if iv is None else iv.to_json(), "witness_point": None if w is None else fr(w)}
                    for j, iv, w in self.consistency
                ],
                "inconsistent": [{"i": i, "j": j, "disjoint": ok} for i, j, ok in self.inconsistency],
            },
        }


def _sop3_configuration(fam: IntervalTreeFamily, n: int) -> dict | None:
    """Lex-least placement of η, ν and the leaves the replay needs."""
    tree = fam.index
    leaves = tree.leaf_list
    pos = {v: i for i, v in enumerate(leaves)}
    inner = tree.minus_nodes
    for eta, nu in itertools.product(inner, repeat=2):
        if not (incomparable(eta, nu) and eta < nu):
            continue
        cone_e = [v for v in leaves if is_initial(eta, v)]
        cone_n = [v for v in leaves if is_initial(nu, v)]
        for el0, er0 in itertools.combinations(cone_e, 2):
            if meet(el0, er0) != eta or pos[er0] - pos[el0] - 1 < n - 1:
                continue
            for nl0, nr0 in itertools.combinations(cone_n, 2):
                if meet(nl0, nr0) != nu or pos[nr0] - pos[nl0] - 1 < 2 * (n - 1):
                    continue
                if len(leaves) - pos[nr0] - 1 < n - 1:
                    continue
                cfg = {"eta": eta, "nu": nu, "eta_l0": el0, "eta_r0": er0, "nu_l0": nl0, "nu_r0": nr0}
                mid = leaves[pos[nl0] + 1 : pos[nl0] + 1 + 2 * (n - 1)]
                for i in range(1, n):
                    cfg[f"eta_l{i}"] = leaves[pos[el0] + i]
                    cfg[f"eta_r{i}"] = mid[2 * (i - 1)]
                    cfg[f"nu_l{i}"] = mid[2 * (i - 1) + 1]
                    cfg[f"nu_r{i}"] = leaves[pos[nr0] + i]
                return cfg
    return None


def sop3_replay(fam: IntervalTreeFamily, n: int) -> Sop3Replay:
    """Parameters d_i = (a_i, b_i) with ψ0(x; d) ≡ x ∈ a and ψ1(x; d) ≡ x ∈ b.

    a_0, b_0 are the intervals of ν and η; for i >= 1, a_i spans the points
    of ν*_{l,i}..ν*_{r,i} and b_i spans η*_{l,i}..η*_{r,i}.  Placing these
    hulls directly stands in for the automorphism images used abstractly.
    """
    if n < 1:
        raise WitnessError("n must be >= 1")
    cfg = _sop3_configuration(fam, n)
    if cfg is None:
        return Sop3Replay(
            "UNSAT",
            n,
            reason=(
                f"no non-P η ⊥ ν (η <lex ν) whose cones hold {n + 1} and {2 * n} suitably "
                f"spaced leaves with {n - 1} leaves right of ν*_r0"
            ),
        )
    p = fam.points
    pairs = [(fam.intervals[cfg["nu"]], fam.intervals[cfg["eta"]])]
    for i in range(1, n):
        pairs.append(
            (RatInterval(p[cfg[f"nu_l{i}"]], p[cfg[f"nu_r{i}"]]), RatInterval(p[cfg[f"eta_l{i}"]], p[cfg[f"eta_r{i}"]]))
        )
    out = Sop3Replay("SAT", n, cfg, pairs)
    for j in range(n):
        sets = [pairs[i][0] for i in range(j + 1)] + [pairs[i][1] for i in range(j + 1, n)]
        iv = intersect_all(sets)
        out.consistency.append((j, iv, None if iv is None else iv.midpoint))
    for i in range(n):
        for j in range(i, n):
            out.inconsistency.append((i, j, pairs[j][0].disjoint(pairs[i][1])))
    return out


def sop3_boundary(n: int, max_depth: int = 6, branching: int = 2) -> tuple[int | None, list]:
    """Least depth d with sop3_replay SAT on the interval family of b^{≤d}."""
    log = []
    for d in range(1, max_depth + 1):
        res = sop3_replay(interval_sop2(balanced_tree(branching, d)), n)
        log.append((d, res.status))
        if res.status == "SAT":
            return d, log
    return None, log


# --- the interval lemma -------------------------------------------------------


def default_ks(n: int) -> list:
    """k_i = i/(4n): n increasing rationals in (0, 1/3)."""
    return [Fraction(i, 4 * n) for i in range(1, n + 1)]


def intervals_to_sop3(n: int, ks: Sequence | None = None) -> dict:
    """c_k = ([1/3+k, 2/3+k], [k, 1/3+k]) and the SOP₃ clauses for them."""
    if n < 2:
        raise WitnessError("n must be >= 2")
    ks = default_ks(n) if ks is None else [Fraction(k) for k in ks]
    if len(ks) != n or any(not (0 < k < Fraction(1, 3)) for k in ks) or ks != sorted(set(ks)):
        raise WitnessError("need n increasing rationals in (0, 1/3)")
    third = Fraction(1, 3)
    upper = [RatInterval(third + k, 2 * third + k) for k in ks]
    lower = [RatInterval(k, third + k) for k in ks]
    consistent = []
    for i in range(n + 1):
        iv = intersect_all(upper[:i] + lower[i:])
        consistent.append({"i": i, "intersection": None if iv is None else iv.to_json(),
                           "witness_point": None if iv is None else fr(iv.midpoint)})
    inconsistent = []
    for i in range(n):
        for j in range(i):
            inconsistent.append({"j": j, "i": i, "disjoint": lower[j].disjoint(upper[i])})
    return {
        "kind": "intervals-to-sop3",
        "n": n,
        "ks": [fr(k) for k in ks],
        "c": [[u.to_json(), l.to_json()] for u, l in zip(upper, lower)],
        "clauses": {"consistent": consistent, "inconsistent": inconsistent},
        "verified": all(c["intersection"] is not None for c in consistent) and all(c["disjoint"] for c in inconsistent),
    }


def default_interval_sample() -> list:
    return [
        RatInterval(0, Fraction(1, 2)),
        RatInterval(Fraction(1, 4), Fraction(3, 4)),
        RatInterval(Fraction(1, 8), Fraction(3, 8)),
        RatInterval(Fraction(5, 8), Fraction(7, 8)),
        RatInterval(Fraction(1, 3), Fraction(2, 3)),
        RatInterval(Fraction(1, 16), Fraction(15, 16)),
    ]


def sop3_to_intervals(sample: Sequence[RatInterval] | None = None) -> dict:
    """b_I = (a_lo, a_hi) with φ(x; a) ≡ x ≥ a, ψ(x; a) ≡ x ≤ a.

    For every nonempty subfamily, χ-satisfiability (every lower endpoint
    below every upper endpoint) is compared with a point-search oracle.
    """
    sample = default_interval_sample() if sample is None else list(sample)
    ends = [e for iv in sample for e in (iv.lo, iv.hi)]
    if len(set(ends)) != len(ends):
        raise WitnessError("interval endpoints must be pairwise distinct")
    rows = []
    for r in range(1, len(sample) + 1):
        for idx in itertools.combinations(range(len(sample)), r):
            fam = [sample[i] for i in idx]
            chi = all(a.lo < b.hi for a in fam for b in fam)
            oracle = _point_oracle(fam)
            rows.append({
                "members": list(idx),
                "chi_satisfiable": chi,
                "oracle_point": None if oracle is None else fr(oracle),
                "agree": chi == (oracle is not None),
            })
    return {
        "kind": "sop3-to-intervals",
        "sample": [iv.to_json() for iv in sample],
        "b": [[fr(iv.lo), fr(iv.hi)] for iv in sample],
        "rows": rows,
        "verified": all(r["agree"] for r in rows),
    }


def _point_oracle(fam: Sequence[RatInterval]) -> Fraction | None:
    """First candidate point (endpoint or midpoint of neighbours) in every interval."""
    pts = sorted({e for iv in fam for e in (iv.lo, iv.hi)})
    cands = pts + [(a + b) / 2 for a, b in zip(pts, pts[1:])]
    for x in sorted(cands):
        if all(iv.lo <= x <= iv.hi for iv in fam):
            return x
    return None
