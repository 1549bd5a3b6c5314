"""Tree-indexed families of tuples and finite indiscernibility checks.

Complete types are replaced by a *type functional*: a function from tuples
of target elements to a hashable code.  Two implementations are provided:
the atomic diagram of a finite relational structure, and truth vectors of
linear inequalities over exact rationals.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

from .patterns import Embedding, iter_embeddings
from .tree_core import (
    LanguageTag,
    MeetTree,
    Node,
    TreeError,
    cone_leaves,
    format_node,
    format_tree,
    is_proper_initial,
    meet,
    parse_node,
    parse_tree,
    qftp,
)


# --- targets and type functionals ---------------------------------------------


@dataclass(frozen=True)
class RelStructure:
    universe: tuple
    relations: dict  # name -> (arity, frozenset of tuples)

    def __post_init__(self):
        elems = set(self.universe)
        for name, (arity, tuples) in self.relations.items():
            for t in tuples:
                if len(t) != arity:
                    raise ValueError(f"relation {name}: tuple {t} has wrong arity")
                if not set(t) <= elems:
                    raise ValueError(f"relation {name}: tuple {t} leaves the universe")

    def holds(self, name: str, tup: Sequence) -> bool:
        return tuple(tup) in self.relations[name][1]

    def to_json(self) -> dict:
        return {
            "universe": list(self.universe),
            "relations": {
                name: {"arity": arity, "tuples": sorted(list(t) for t in tuples)}
                for name, (arity, tuples) in self.relations.items()
            },
        }

    @classmethod
    def from_json(cls, data: dict) -> "RelStructure":
        rels = {
            name: (int(r["arity"]), frozenset(tuple(t) for t in r["tuples"])) for name, r in data["relations"].items()
        }
        return cls(tuple(data["universe"]), rels)


def _equality_pattern(elems: Sequence) -> tuple:
    first: dict = {}
    return tuple(first.setdefault(e, len(first)) for e in elems)


@dataclass(frozen=True)
class AtomicDiagram:
    """Code = equality pattern plus every relation on every choice of positions."""

    structure: RelStructure

    def __call__(self, elems: Sequence) -> tuple:
        elems = tuple(elems)
        rows = []
        for name in sorted(self.structure.relations):
            arity, tuples = self.structure.relations[name]
            rows.append(
                tuple(tuple(elems[i] for i in pos) in tuples for pos in itertools.product(range(len(elems)), repeat=arity))
            )
        return (_equality_pattern(elems), tuple(rows))

    def to_json(self) -> dict:
        return {"kind": "atomic"}


@dataclass(frozen=True)
class LinearRelation:
    """``Σ coeffs[i]·x_i  op  0`` with ``op`` one of ``<``, ``<=``, ``=``, ``>``."""

    name: str
    coeffs: tuple
    op: str

    def holds(self, xs: Sequence[Fraction]) -> bool:
        v = sum(c * x for c, x in zip(self.coeffs, xs))
        return {"<": v < 0, "<=": v <= 0, "=": v == 0, ">": v > 0, ">=": v >= 0}[self.op]


@dataclass(frozen=True)
class LinearPredicates:
    """Truth vector of linear relations over exact rationals.

    ``pattern="increasing"`` evaluates each relation on increasing position
    tuples only (the relations describe ordered configurations);
    ``"all"`` uses every injective position tuple.
    """

    relations: tuple
    pattern: str = "increasing"

    def __call__(self, elems: Sequence) -> tuple:
        xs = [Fraction(e) for e in elems]
        out = []
        for rel in self.relations:
            k = len(rel.coeffs)
            if self.pattern == "increasing":
                combos = itertools.combinations(range(len(xs)), k)
            else:
                combos = itertools.permutations(range(len(xs)), k)
            out.append(tuple(rel.holds([xs[i] for i in pos]) for pos in combos))
        return tuple(out)

    def to_json(self) -> dict:
        return {
            "kind": "linear",
            "pattern": self.pattern,
            "relations": [{"name": r.name, "coeffs": [str(c) for c in r.coeffs], "op": r.op} for r in self.relations],
        }


def tf_from_json(data: dict, structure: RelStructure | None):
    if data["kind"] == "atomic":
        if structure is None:
            raise ValueError("atomic type functional needs a relational target")
        return AtomicDiagram(structure)
    if data["kind"] == "linear":
        rels = tuple(
            LinearRelation(r.get("name", f"r{i}"), tuple(Fraction(c) for c in r["coeffs"]), r["op"])
            for i, r in enumerate(data["relations"])
        )
        return LinearPredicates(rels, data.get("pattern", "increasing"))
    raise ValueError(f"unknown type functional {data['kind']!r}")


# --- families -----------------------------------------------------------------


@dataclass(frozen=True)
class IndexedFamily:
    index: MeetTree
    assignment: dict  # node -> tuple of target elements
    tf: Callable
    arity: int = 1
    target: RelStructure | None = None  # None means the rationals

    def __post_init__(self):
        missing = [n for n in self.index.nodes if n not in self.assignment]
        if missing:
            raise ValueError(f"assignment misses {format_node(missing[0])}")
        for n, tup in self.assignment.items():
            if len(tup) != self.arity:
                raise ValueError(f"assignment of {format_node(n)} has length {len(tup)} != {self.arity}")

    def image(self, tup: Sequence[Node]) -> tuple:
        return tuple(x for n in tup for x in self.assignment[n])

    def code(self, tup: Sequence[Node], params: Sequence[Node] = ()) -> tuple:
        return self.tf(self.image(tuple(tup) + tuple(params)))

    def restrict(self, emb: Embedding) -> "IndexedFamily":
        """Pull the family back along ``emb``."""
        return IndexedFamily(
            emb.source, {x: self.assignment[emb(x)] for x in emb.source.nodes}, self.tf, self.arity, self.target
        )

    def to_json(self) -> dict:
        def enc(v):
            return str(v) if isinstance(v, Fraction) else v

        return {
            "tree": format_tree(self.index),
            "arity": self.arity,
            "target": "rationals" if self.target is None else self.target.to_json(),
            "assignment": {format_node(n): [enc(v) for v in self.assignment[n]] for n in self.index.nodes},
            "tf": self.tf.to_json(),
        }

    @classmethod
    def from_json(cls, data: dict) -> "IndexedFamily":
        tree = parse_tree(data["tree"])
        target = None if data["target"] == "rationals" else RelStructure.from_json(data["target"])

        def dec(v):
            return Fraction(v) if target is None else (tuple(v) if isinstance(v, list) else v)

        assignment = {parse_node(k): tuple(dec(v) for v in vals) for k, vals in data["assignment"].items()}
        return cls(tree, assignment, tf_from_json(data["tf"], target), int(data.get("arity", 1)), target)


def load_family(text: str) -> IndexedFamily:
    return IndexedFamily.from_json(json.loads(text))


# --- checks -------------------------------------------------------------------


@dataclass
class CheckResult:
    ok: bool
    counterexample: tuple | None = None  # (s̄, t̄)
    codes: tuple | None = None  # image codes of s̄ and t̄
    checked: int = 0

    def to_json(self) -> dict:
        ce = None
        if self.counterexample is not None:
            ce = [[format_node(n) for n in t] for t in self.counterexample]
        return {"ok": self.ok, "counterexample": ce, "checked": self.checked}


def check_indexed_indiscernible(f: IndexedFamily, tag: LanguageTag = LanguageTag.L0P, n_max: int = 2) -> CheckResult:
    """Equal index qftp (under ``tag``) must give equal image codes.

    Tuples are enumerated by length, then lexicographically; each is
    compared with the first tuple of its qftp class.
    """
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    tag = LanguageTag(tag)
    checked = 0
    for length in range(1, n_max + 1):
        first: dict = {}
        for tup in itertools.product(f.index.nodes, repeat=length):
            checked += 1
            key = qftp(f.index, tup, tag)
            code = f.code(tup)
            if key not in first:
                first[key] = (tup, code)
            elif first[key][1] != code:
                return CheckResult(False, (first[key][0], tup), (first[key][1], code), checked)
    return CheckResult(True, checked=checked)


def _order_indiscernible(
    f: IndexedFamily, seq: Sequence[Node], params: Sequence[Node], n_max: int, anchor: Sequence[Node] | None
) -> CheckResult:
    """Increasing tuples from ``seq`` of each length must share one code over ``params``.

    With ``anchor`` only tuples of the anchor's length are checked, each
    against the anchor.
    """
    checked = 0
    lengths = range(1, n_max + 1) if anchor is None else [len(anchor)]
    for length in lengths:
        combos = list(itertools.combinations(seq, length))
        if not combos:
            break
        ref = combos[0] if anchor is None else tuple(anchor)
        ref_code = f.code(ref, params)
        for tup in combos:
            checked += 1
            code = f.code(tup, params)
            if code != ref_code:
                return CheckResult(False, (ref, tup), (ref_code, code), checked)
    return CheckResult(True, checked=checked)


def check_treetop_collapse(
    f: IndexedFamily,
    n_max: int = 4,
    anchor: Sequence[Node] | None = None,
    leaves: Sequence[Node] | None = None,
) -> CheckResult:
    """Leaves in lex order must be order-indiscernible over the root tuple.

    The counterexample pairs the lex-least tuple of the failing length (or
    ``anchor``, which restricts the check to its length) with the first
    tuple whose code differs.  ``leaves`` restricts the check to a
    subsequence; a failure there is a failure of the whole sequence.
    """
    if leaves is None:
        leaves = f.index.leaf_list
    else:
        leaves = tuple(sorted(tuple(v) for v in leaves))
        bad = [v for v in leaves if v not in f.index.leaves]
        if bad:
            raise TreeError(f"{format_node(bad[0])} is not a P-leaf")
    if not leaves:
        raise TreeError("index has no P-leaves")
    return _order_indiscernible(f, leaves, (f.index.root,), n_max, anchor)


def check_cone_indiscernible(f: IndexedFamily, xi: Node, n_max: int = 4, anchor=None) -> CheckResult:
    """Leaves of the cone above ``xi`` must be order-indiscernible over a_ξ."""
    xi = tuple(xi)
    return _order_indiscernible(f, cone_leaves(f.index, xi), (xi,), n_max, anchor)


@dataclass
class SideSetReport:
    nu: Node
    left: tuple  # J: leaves branching off below ν on the left
    right: tuple  # J′: the mirror set
    left_result: CheckResult
    right_result: CheckResult
    left_strong: CheckResult  # over every a_μ with ν ⊴ μ
    right_strong: CheckResult

    @property
    def ok(self) -> bool:
        return all(r.ok for r in (self.left_result, self.right_result, self.left_strong, self.right_strong))

    def to_json(self) -> dict:
        return {
            "nu": format_node(self.nu),
            "J": [format_node(n) for n in self.left],
            "J_prime": [format_node(n) for n in self.right],
            "J_over_nu": self.left_result.to_json(),
            "J_prime_over_nu": self.right_result.to_json(),
            "J_over_cone": self.left_strong.to_json(),
            "J_prime_over_cone": self.right_strong.to_json(),
        }


def side_sets(tree: MeetTree, nu: Node) -> tuple[tuple, tuple]:
    """J = {η ∈ P : η∧ν ◁ ν, η <lex ν} and J′ = {η ∈ P : η∧ν ◁ ν, ν <lex η}."""
    nu = tuple(nu)
    below = [e for e in tree.leaf_list if is_proper_initial(meet(e, nu), nu)]
    return tuple(e for e in below if e < nu), tuple(e for e in below if nu < e)


def check_side_sets(f: IndexedFamily, nu: Node, n_max: int = 3) -> SideSetReport:
    nu = tuple(nu)
    f.index.require([nu])
    if nu in f.index.leaves:
        raise TreeError(f"{format_node(nu)} is a leaf")
    left, right = side_sets(f.index, nu)
    cone = tuple(f.index.descendants(nu, strict=False))
    return SideSetReport(
        nu,
        left,
        right,
        _order_indiscernible(f, left, (nu,), n_max, None),
        _order_indiscernible(f, right, (nu,), n_max, None),
        _order_indiscernible(f, left, cone, n_max, None),
        _order_indiscernible(f, right, cone, n_max, None),
    )


@dataclass
class ExtractResult:
    status: str  # "FOUND" or "EXHAUSTED"
    embedding: Embedding | None = None
    family: IndexedFamily | None = None
    tried: int = 0


def extract_copy(f: IndexedFamily, j: MeetTree, n_max: int = 2, budget: int | None = None) -> ExtractResult:
    """First copy of ``j`` in ``f.index`` on which the family is indiscernible."""
    tried = 0
    for emb in iter_embeddings(j, f.index):
        if budget is not None and tried >= budget:
            break
        tried += 1
        sub = f.restrict(emb)
        if check_indexed_indiscernible(sub, LanguageTag.L0P, n_max).ok:
            return ExtractResult("FOUND", emb, sub, tried)
    return ExtractResult("EXHAUSTED", tried=tried)
