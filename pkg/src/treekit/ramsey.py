"""Ramsey instances over meet-trees: monochromatic copies, witness checks, search.

A coloring of Emb(A, C) is a tuple of colors aligned with
``enumerate_embeddings(A, C)``.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

from .patterns import Embedding, enumerate_embeddings, find_realizations, iter_embeddings
from .tree_core import LanguageTag, MeetTree, QfTypeCode, balanced_tree, format_tree, qftp


class RamseyError(ValueError):
    pass


@dataclass(frozen=True)
class RamseyInstance:
    a: MeetTree
    b: MeetTree
    r: int
    f: Embedding | None = None  # A -> B; the first embedding when omitted

    def __post_init__(self):
        if self.r < 1:
            raise RamseyError("r must be >= 1")
        if self.f is None:
            first = next(iter_embeddings(self.a, self.b), None)
            if first is None:
                raise RamseyError("A does not embed into B")
            object.__setattr__(self, "f", first)
        elif self.f.audit():
            raise RamseyError("f is not an embedding of A into B")


def _copy_table(inst: RamseyInstance, c: MeetTree, a_embs: list) -> tuple[list, list]:
    """Embeddings of B into C and, for each, the indices of its A-copies."""
    pos = {e.images: i for i, e in enumerate(a_embs)}
    ab = enumerate_embeddings(inst.a, inst.b)
    b_embs = enumerate_embeddings(inst.b, c)
    copies = [sorted({pos[beta.compose(alpha).images] for alpha in ab}) for beta in b_embs]
    return b_embs, copies


def mono_copy(inst: RamseyInstance, c: MeetTree, coloring: Sequence[int]) -> Embedding | None:
    """First α ∈ Emb(B, C) with the coloring constant on α ∘ Emb(A, B)."""
    a_embs = enumerate_embeddings(inst.a, c)
    if len(coloring) != len(a_embs):
        raise RamseyError(f"coloring has {len(coloring)} entries, Emb(A,C) has {len(a_embs)}")
    b_embs, copies = _copy_table(inst, c, a_embs)
    for beta, idx in zip(b_embs, copies):
        if len({coloring[i] for i in idx}) <= 1:
            return beta
    return None


@dataclass
class WitnessResult:
    status: str  # "WITNESS", "REFUTED" or "INDETERMINATE"
    bad_coloring: tuple | None = None
    colorings_checked: int = 0
    nodes_visited: int = 0
    domain_size: int = 0
    copies: int = 0

    @property
    def is_witness(self) -> bool:
        return self.status == "WITNESS"

    def to_json(self) -> dict:
        return {
            "status": self.status,
            "bad_coloring": None if self.bad_coloring is None else list(self.bad_coloring),
            "colorings_checked": self.colorings_checked,
            "nodes_visited": self.nodes_visited,
            "domain_size": self.domain_size,
            "copies": self.copies,
        }


def _exhaustive(n: int, r: int, copies: list, budget: int | None) -> WitnessResult:
    checked = 0
    for col in itertools.product(range(r), repeat=n):
        if budget is not None and checked >= budget:
            return WitnessResult("INDETERMINATE", colorings_checked=checked)
        checked += 1
        if not any(len({col[i] for i in idx}) <= 1 for idx in copies):
            return WitnessResult("REFUTED", col, checked)
    return WitnessResult("WITNESS", colorings_checked=checked)


def _backtrack(n: int, r: int, copies: list, order: list, budget: int | None) -> WitnessResult:
    """Search for a coloring with no monochromatic copy.

    Colors are interchangeable, so a new color is only ever the next unused
    one.  A copy is checked as soon as its last index is colored.
    """
    closing: dict = {i: [] for i in order}
    rank = {v: k for k, v in enumerate(order)}
    for idx in copies:
        if not idx:
            return WitnessResult("WITNESS")  # B has no A-copy constraints left to break
        closing[max(idx, key=rank.__getitem__)].append(idx)
    col = [None] * n
    visited = 0

    def rec(k: int, used: int):
        nonlocal visited
        if k == n:
            return True
        v = order[k]
        for c in range(min(used + 1, r)):
            visited += 1
            if budget is not None and visited > budget:
                raise _OverBudget
            col[v] = c
            if all(len({col[i] for i in idx}) > 1 for idx in closing[v]):
                if rec(k + 1, max(used, c + 1)):
                    return True
            col[v] = None
        return False

    try:
        found = rec(0, 0)
    except _OverBudget:
        return WitnessResult("INDETERMINATE", nodes_visited=visited)
    if found:
        return WitnessResult("REFUTED", tuple(col), nodes_visited=visited)
    return WitnessResult("WITNESS", nodes_visited=visited)


class _OverBudget(Exception):
    pass


def is_ramsey_witness(
    inst: RamseyInstance,
    c: MeetTree,
    method: str = "backtrack",
    budget: int | None = None,
    seed: int | None = None,
) -> WitnessResult:
    """Does every r-coloring of Emb(A, C) have a monochromatic copy of B?

    ``method="exhaustive"`` tries all r^|Emb(A,C)| colorings;
    ``"backtrack"`` searches for a bad coloring with pruning.  ``seed``
    shuffles the variable order (used for independent re-verification).
    """
    a_embs = enumerate_embeddings(inst.a, c)
    if not a_embs:
        raise RamseyError("Emb(A, C) is empty")
    _, copies = _copy_table(inst, c, a_embs)
    n = len(a_embs)
    if method == "exhaustive":
        res = _exhaustive(n, inst.r, copies, budget)
    elif method == "backtrack":
        order = list(range(n))
        if seed is not None:
            random.Random(seed).shuffle(order)
        res = _backtrack(n, inst.r, copies, order, budget)
    else:
        raise RamseyError(f"unknown method {method!r}")
    res.domain_size = n
    res.copies = len(copies)
    if res.status == "REFUTED":
        assert mono_copy(inst, c, res.bad_coloring) is None, "refutation has a monochromatic copy"
    return res


# --- search -------------------------------------------------------------------


def candidate_trees(strategy: str, size_budget: int, max_stage: int = 5) -> list:
    """Candidate ambient trees in the order they are tried.

    Generic stages stop at ``max_stage``: the demand list grows with the
    number of plane trees of size k, which outpaces the tree sizes involved.
    """
    from .fraisse import generic_stage

    out = []
    if strategy in ("balanced", "default"):
        shapes = []
        for d in range(1, size_budget):
            for b in range(2, size_budget):
                n = sum(b**i for i in range(d + 1))
                if n > size_budget:
                    break
                shapes.append((n, d, b))
        out += [(f"balanced b={b} d={d}", balanced_tree(b, d)) for n, d, b in sorted(shapes)]
    if strategy in ("generic", "default"):
        for k in range(1, max_stage + 1):
            stage = generic_stage(k, max_nodes=size_budget)
            if not stage.complete:
                break
            out.append((f"generic stage k={k}", stage.tree))
    if strategy not in ("balanced", "generic", "default"):
        raise RamseyError(f"unknown strategy {strategy!r}")
    return out


@dataclass
class SearchOutcome:
    status: str  # "FOUND" or "EXHAUSTED"
    witness: MeetTree | None
    label: str | None
    refuted: list = field(default_factory=list)  # (label, tree, bad coloring or None)

    def to_json(self) -> dict:
        return {
            "status": self.status,
            "C": None if self.witness is None else format_tree(self.witness),
            "label": self.label,
            "refuted": [
                {"label": lbl, "C": format_tree(t), "coloring": None if col is None else list(col)}
                for lbl, t, col in self.refuted
            ],
        }


def ramsey_search(
    inst: RamseyInstance,
    size_budget: int,
    strategy: str = "default",
    budget: int | None = None,
    verify_seed: int = 1,
    max_stage: int = 5,
) -> SearchOutcome:
    """First candidate tree that is a Ramsey witness for ``inst``.

    Every hit is re-verified with a shuffled variable order before it is
    returned.  Candidates without any copy of B are skipped silently.
    """
    if size_budget < len(inst.b):
        raise RamseyError("size budget is smaller than B")
    refuted = []
    for label, c in candidate_trees(strategy, size_budget, max_stage):
        if next(iter_embeddings(inst.b, c), None) is None:
            continue
        res = is_ramsey_witness(inst, c, budget=budget)
        if res.status == "WITNESS":
            again = is_ramsey_witness(inst, c, budget=budget, seed=verify_seed)
            if again.status != "WITNESS":
                raise AssertionError(f"re-verification disagrees on {label}")
            return SearchOutcome("FOUND", c, label, refuted)
        refuted.append((label, c, res.bad_coloring))
    return SearchOutcome("EXHAUSTED", None, None, refuted)


# --- collapsing leaf colorings ------------------------------------------------


@dataclass
class CollapseResult:
    minus_coloring: dict | None  # minus tuple -> color
    conflict: tuple | None = None  # two realizations with one minus part, different colors

    @property
    def well_defined(self) -> bool:
        return self.conflict is None


def minus_positions(q: QfTypeCode) -> tuple:
    """Tuple positions holding non-P entries under ``q``."""
    return tuple(i for i, m in enumerate(q.marks) if not q.flags[m])


def collapse_leaf_coloring(
    ambient: MeetTree,
    q: QfTypeCode,
    chi: Mapping | Callable,
    realizations: Sequence[tuple] | None = None,
) -> CollapseResult:
    """Induced coloring of minus parts: c(μ̄) = χ(ζ̄) for any ζ̄ ⊨ q over μ̄.

    Returns the first pair of realizations that share a minus part but get
    different colors when χ is not constant on such fibres.
    """
    if q.tag is not LanguageTag.L0P:
        raise RamseyError("q must be an L0P code")
    color = chi if callable(chi) else chi.__getitem__
    reals = find_realizations(q, ambient) if realizations is None else realizations
    pos = minus_positions(q)
    out: dict = {}
    first: dict = {}
    for z in reals:
        mu = tuple(z[i] for i in pos)
        c = color(z)
        if mu in out and out[mu] != c:
            return CollapseResult(None, (first[mu], z))
        out.setdefault(mu, c)
        first.setdefault(mu, z)
    return CollapseResult(out)


def lift_coloring(q: QfTypeCode, minus_coloring: Mapping, realizations: Sequence[tuple]) -> dict:
    """Pull a minus-part coloring back to every realization."""
    pos = minus_positions(q)
    return {z: minus_coloring[tuple(z[i] for i in pos)] for z in realizations}


def ls_code_coloring(tree: MeetTree) -> Callable:
    """χ(ζ̄) = the LS code of ζ̄ (LS-invariant by definition)."""
    return lambda z: qftp(tree, z, LanguageTag.LS)


__all__ = [
    "CollapseResult",
    "RamseyError",
    "RamseyInstance",
    "SearchOutcome",
    "WitnessResult",
    "candidate_trees",
    "collapse_leaf_coloring",
    "is_ramsey_witness",
    "lift_coloring",
    "ls_code_coloring",
    "minus_positions",
    "mono_copy",
    "ramsey_search",
]
