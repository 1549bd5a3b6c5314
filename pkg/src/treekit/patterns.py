"""Embeddings, constrained type realization and the switcheroo witness searches."""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from typing import Callable, Iterator, Sequence

from .tree_core import (
    LanguageTag,
    MeetTree,
    Node,
    QfTypeCode,
    TreeError,
    closed_subsets,
    format_node,
    incomparable,
    is_initial,
    is_proper_initial,
    iso_code,
    meet,
    meet_all,
    parse_node,
    qftp,
)


# --- embeddings ---------------------------------------------------------------


@dataclass(frozen=True)
class Embedding:
    """Injective map ``source.nodes[i] -> images[i]`` preserving ⊴, <lex, ∧, P."""

    source: MeetTree
    target: MeetTree
    images: tuple

    def __call__(self, node: Node) -> Node:
        return self.images[self.source.index[tuple(node)]]

    def as_dict(self) -> dict:
        return dict(zip(self.source.nodes, self.images))

    def apply(self, tup: Sequence[Node]) -> tuple:
        return tuple(self(n) for n in tup)

    def compose(self, inner: "Embedding") -> "Embedding":
        """``self ∘ inner``: first ``inner``, then ``self``."""
        if inner.target.nodes != self.source.nodes:
            raise TreeError("embeddings do not compose")
        return Embedding(inner.source, self.target, tuple(self(x) for x in inner.images))

    def audit(self, respect_p: bool = True) -> list:
        """Pairwise preservation/reflection failures (empty when valid)."""
        errors = []
        src, tgt = self.source, self.target
        if len(set(self.images)) != len(self.images):
            errors.append("not injective")
        for x, fx in zip(src.nodes, self.images):
            if fx not in tgt.node_set:
                errors.append(f"image {format_node(fx)} not in target")
            if respect_p and ((x in src.leaves) != (fx in tgt.leaves)):
                errors.append(f"P not preserved at {format_node(x)}")
        for (x, fx), (y, fy) in itertools.product(zip(src.nodes, self.images), repeat=2):
            if is_initial(x, y) != is_initial(fx, fy):
                errors.append(f"⊴ differs on {format_node(x)}, {format_node(y)}")
            if (x < y) != (fx < fy):
                errors.append(f"<lex differs on {format_node(x)}, {format_node(y)}")
            m = meet(x, y)
            if m in src.node_set and self(m) != meet(fx, fy):
                errors.append(f"∧ not preserved on {format_node(x)}, {format_node(y)}")
        return errors

    def to_json(self) -> dict:
        return {format_node(x): format_node(y) for x, y in zip(self.source.nodes, self.images)}


def iter_embeddings(
    source: MeetTree,
    target: MeetTree,
    respect_p: bool = True,
    accept: Callable[[dict], bool] | None = None,
) -> Iterator[Embedding]:
    """Backtracking enumeration, lex order on image tuples.

    Source nodes are assigned in lex order, which lists every node after its
    ancestors; an image must extend the image of the source parent, exceed
    the previous image in lex order and commute with ∧ against every
    earlier assignment.  ``accept`` may prune a partial assignment.
    """
    src = source.nodes
    if not src:
        yield Embedding(source, target, ())
        return
    src_parent = source.parent
    src_index = source.index
    tgt_nodes = target.nodes
    assigned: list = []

    def candidates(i: int):
        x = src[i]
        p = src_parent[x]
        pool = target.descendants(assigned[src_index[p]]) if p is not None else tgt_nodes
        lo = assigned[-1] if assigned else None
        want_p = x in source.leaves
        for c in pool:
            if lo is not None and not (lo < c):
                continue
            if respect_p and ((c in target.leaves) != want_p):
                continue
            yield c

    def ok(i: int, c: Node) -> bool:
        x = src[i]
        for j in range(i):
            # src[j] <lex x, so their meet is an earlier node (possibly src[j])
            m = meet(src[j], x)
            if meet(assigned[j], c) != assigned[src_index[m]]:
                return False
        return True

    def rec(i: int):
        if i == len(src):
            yield Embedding(source, target, tuple(assigned))
            return
        for c in candidates(i):
            if not ok(i, c):
                continue
            assigned.append(c)
            if accept is None or accept(dict(zip(src, assigned))):
                yield from rec(i + 1)
            assigned.pop()

    yield from rec(0)


def enumerate_embeddings(
    source: MeetTree, target: MeetTree, limit: int | None = None, respect_p: bool = True
) -> list:
    it = iter_embeddings(source, target, respect_p=respect_p)
    if limit is not None:
        it = itertools.islice(it, limit)
    return list(it)


# --- constraints --------------------------------------------------------------


class ConstraintError(ValueError):
    pass


@dataclass(frozen=True)
class Atom:
    op: str  # "<=", "<", "<lex", "^", "incomp", "P", "!P", "="
    terms: tuple

    def variables(self) -> set:
        return {t for t in self.terms if isinstance(t, str)}

    def holds(self, tree: MeetTree, val: Callable) -> bool:
        a = [val(t) for t in self.terms]
        if self.op == "<=":
            return is_initial(a[0], a[1])
        if self.op == "<":
            return is_proper_initial(a[0], a[1])
        if self.op == "<lex":
            return a[0] < a[1]
        if self.op == "^":
            return meet(a[0], a[1]) == a[2]
        if self.op == "incomp":
            return incomparable(a[0], a[1])
        if self.op == "P":
            return a[0] in tree.leaves
        if self.op == "!P":
            return a[0] not in tree.leaves
        if self.op == "=":
            return a[0] == a[1]
        raise ConstraintError(f"unknown atom {self.op}")


_TERM = r"(@[-0-9.]+|[A-Za-z_]\w*)"
_ATOM_PATTERNS = [
    (re.compile(rf"^{_TERM}\s*\^\s*{_TERM}\s*=\s*{_TERM}$"), "^"),
    (re.compile(rf"^{_TERM}\s*<lex\s*{_TERM}$"), "<lex"),
    (re.compile(rf"^{_TERM}\s*<=\s*{_TERM}$"), "<="),
    (re.compile(rf"^{_TERM}\s*<\s*{_TERM}$"), "<"),
    (re.compile(rf"^{_TERM}\s+incomp\s+{_TERM}$"), "incomp"),
    (re.compile(rf"^!P\(\s*{_TERM}\s*\)$"), "!P"),
    (re.compile(rf"^P\(\s*{_TERM}\s*\)$"), "P"),
    (re.compile(rf"^{_TERM}\s*=\s*{_TERM}$"), "="),
]


def _term(text: str):
    if text.startswith("@"):
        return parse_node(text[1:])
    return text


@dataclass(frozen=True)
class PatternConstraint:
    """Conjunction of atoms over variables ``x0, x1, ...`` and ``@path`` constants.

    Text syntax: ``x<=y`` (⊴), ``x<y`` (◁), ``x<lex y``, ``x^y=z``,
    ``x incomp y``, ``P(x)``, ``!P(x)``, ``x=y``; atoms joined by ``;``.
    """

    atoms: tuple = ()

    @classmethod
    def parse(cls, text: str) -> "PatternConstraint":
        atoms = []
        for chunk in text.split(";"):
            chunk = chunk.strip()
            if not chunk:
                continue
            for rx, op in _ATOM_PATTERNS:
                m = rx.match(chunk)
                if m:
                    atoms.append(Atom(op, tuple(_term(g) for g in m.groups())))
                    break
            else:
                raise ConstraintError(f"cannot parse atom {chunk!r}")
        return cls(tuple(atoms))

    def variables(self) -> set:
        out = set()
        for a in self.atoms:
            out |= a.variables()
        return out

    def check_arity(self, arity: int) -> None:
        for v in self.variables():
            m = re.fullmatch(r"x(\d+)", v)
            if not m or int(m.group(1)) >= arity:
                raise ConstraintError(f"variable {v} does not address a position < {arity}")

    def holds(self, tree: MeetTree, tup: Sequence[Node]) -> bool:
        def val(t):
            return tup[int(t[1:])] if isinstance(t, str) else t

        return all(a.holds(tree, val) for a in self.atoms)


# --- realizations -------------------------------------------------------------


def find_realizations(
    q: QfTypeCode,
    tree: MeetTree,
    constraint: PatternConstraint | str | None = None,
    limit: int | None = None,
) -> list:
    """Tuples of ``tree`` whose code is ``q`` and which satisfy ``constraint``.

    A realization is determined by the embedding of the generated closure,
    so realizations are read off the embeddings of ``q``'s canonical tree.
    Output is sorted lexicographically.
    """
    if isinstance(constraint, str):
        constraint = PatternConstraint.parse(constraint)
    if constraint is not None:
        constraint.check_arity(q.arity)
    shape_tree = q.canonical_tree()
    respect_p = q.tag is not LanguageTag.L0
    out = []
    for emb in iter_embeddings(shape_tree, tree, respect_p=respect_p):
        if q.levels is not None:
            if any(
                (lvl is None and img not in tree.leaves) or (lvl is not None and (img in tree.leaves or len(img) != lvl))
                for lvl, img in zip(q.levels, emb.images)
            ):
                continue
        tup = tuple(emb.images[m] for m in q.marks)
        if constraint is None or constraint.holds(tree, tup):
            out.append(tup)
    out.sort()
    return out if limit is None else out[:limit]


# --- switcheroo searches ------------------------------------------------------


class SwitcherooError(ValueError):
    pass


@dataclass
class SearchResult:
    status: str  # "SAT" or "UNSAT"
    witness: tuple | None
    nodes_visited: int = 0

    @property
    def sat(self) -> bool:
        return self.status == "SAT"


def _check_increasing_leaves(tree: MeetTree, leaves: Sequence[Node]) -> None:
    tree.require(leaves)
    for n in leaves:
        if n not in tree.leaves:
            raise SwitcherooError(f"{format_node(n)} is not a P-leaf")
    for a, b in zip(leaves, leaves[1:]):
        if not a < b:
            raise SwitcherooError("leaves must be strictly <lex increasing")


def _prefix_search(
    tree: MeetTree,
    reference: tuple,
    fixed_prefix: tuple,
    partial_ok: Callable[[tuple], bool],
    final_ok: Callable[[tuple], bool],
) -> SearchResult:
    """Find leaves ν̄ with qftp(fixed+ν̄) = qftp(fixed+reference), lex-least first.

    Every prefix ν̄[:i] must already match the type of reference[:i]; the
    caller's ``partial_ok`` forward-checks the side conditions.
    """
    n = len(reference)
    target_codes = [qftp(tree, fixed_prefix + reference[:i], LanguageTag.L0P) for i in range(n + 1)]
    leaves = tree.leaf_list
    visited = 0
    chosen: list = []

    def rec(i: int, start: int):
        nonlocal visited
        if i == n:
            cand = tuple(chosen)
            return cand if final_ok(cand) else None
        for j in range(start, len(leaves)):
            visited += 1
            chosen.append(leaves[j])
            cand = tuple(chosen)
            if qftp(tree, fixed_prefix + cand, LanguageTag.L0P) == target_codes[i + 1] and partial_ok(cand):
                found = rec(i + 1, j + 1)
                if found is not None:
                    return found
            chosen.pop()
        return None

    found = rec(0, 0)
    return SearchResult("SAT" if found is not None else "UNSAT", found, visited)


def solve_switcheroo1(tree: MeetTree, etas: Sequence[Node], eta_n: Node) -> SearchResult:
    """Leaves ν̄ with the type of η̄ over the root, sitting right of η_n.

    Conditions: qftp((root,)+ν̄) = qftp((root,)+η̄), η_n ⊥ ⋀ν̄ and
    η_n <lex ⋀ν̄.  UNSAT means ``tree`` is too small.
    """
    etas = tuple(map(tuple, etas))
    eta_n = tuple(eta_n)
    if len(etas) < 1:
        raise SwitcherooError("need n >= 1")
    _check_increasing_leaves(tree, etas + (eta_n,))
    root = (tree.root,)

    def partial_ok(nus):
        # ⋀ν̄ ⊴ ν0, so the final conditions already constrain ν0
        return incomparable(eta_n, nus[0]) and eta_n < nus[0]

    def final_ok(nus):
        m = meet_all(nus)
        return incomparable(eta_n, m) and eta_n < m

    return _prefix_search(tree, etas, root, partial_ok, final_ok)


def solve_switcheroo2(tree: MeetTree, eta0: Node, fan: Sequence[Node]) -> SearchResult:
    """Leaves ν1..νn of the type of the fan, left of η0, forming a fan with η0.

    Conditions: qftp(ν̄) = qftp(η1..ηn), (η0, ν1, ..., νn) is a fan and
    every νj <lex η0.  With prefix-first lex order a fan meet is a prefix of
    η0 and hence automatically <lex η0, so the side condition is imposed on
    the leaves themselves.
    """
    eta0 = tuple(eta0)
    fan = tuple(map(tuple, fan))
    if len(fan) < 1:
        raise SwitcherooError("need n >= 1")
    _check_increasing_leaves(tree, (eta0,) + fan)
    if len(fan) >= 2:
        meets = {meet(a, b) for a, b in itertools.combinations(fan, 2)}
        if len(meets) != 1:
            raise SwitcherooError("η1..ηn do not form a fan")
        zeta = meets.pop()
    else:
        zeta = fan[0]
    if not incomparable(eta0, zeta):
        raise SwitcherooError("η0 must be incomparable with the fan meet")

    def partial_ok(nus):
        pts = (eta0,) + nus
        meets = {meet(a, b) for a, b in itertools.combinations(pts, 2)}
        return len(meets) == 1 and all(v < eta0 for v in nus)

    def final_ok(nus):
        return meet_all(nus) < eta0 and partial_ok(nus)

    return _prefix_search(tree, fan, (), partial_ok, final_ok)


# --- ages ---------------------------------------------------------------------


def plane_trees(n: int) -> list:
    """All ordered rooted trees with ``n`` nodes as nested tuples of children."""
    if n == 1:
        return [()]
    return [kids for kids in _forests(n - 1)]


def _forests(n: int) -> list:
    if n == 0:
        return [()]
    out = []
    for first in range(1, n + 1):
        for head in plane_trees(first):
            for tail in _forests(n - first):
                out.append((head,) + tail)
    return out


def _plane_words(t, prefix=()) -> list:
    out = [prefix]
    for i, child in enumerate(t):
        out.extend(_plane_words(child, prefix + (i,)))
    return out


def k0p_classes(max_size: int, min_size: int = 1) -> list:
    """Representatives of every K₀,P isomorphism class with the given sizes.

    Finite meet-trees with lex order are exactly plane trees; P ranges over
    subsets of the maximal nodes.
    """
    out = []
    for n in range(min_size, max_size + 1):
        for t in plane_trees(n):
            words = _plane_words(t)
            base = MeetTree(tuple(words))
            tops = [w for w in base.nodes if base.is_maximal(w)]
            for r in range(len(tops) + 1):
                for flagged in itertools.combinations(tops, r):
                    out.append(MeetTree(base.nodes, frozenset(flagged)))
    return out


@dataclass
class AgeReport:
    k: int
    realized: list  # QfTypeCode of each realized class
    expected: int
    missing: list  # MeetTree representatives of unrealized classes
    substructures_seen: int = 0

    @property
    def complete(self) -> bool:
        return not self.missing


def age_check(tree: MeetTree, k: int) -> AgeReport:
    """Which K₀,P classes with at most ``k`` nodes occur in ``tree``."""
    if k < 1:
        raise ValueError("k must be >= 1")
    seen: dict = {}
    count = 0
    for sub in closed_subsets(tree, max_size=k):
        count += 1
        code = iso_code(tree, sub)
        seen.setdefault(code, sub)
    classes = k0p_classes(k)
    missing = [c for c in classes if iso_code(c) not in seen]
    return AgeReport(k, list(seen), len(classes), missing, count)
