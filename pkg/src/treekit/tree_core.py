"""Finite meet-trees with a leaf predicate.

A node is a path word: a tuple of naturals, the root being ``()``.  A
:class:`MeetTree` is a finite set of words closed under longest common
prefix, together with a set ``leaves`` of maximal nodes carrying the
predicate P.  The three relations of the tree language are

* ``is_initial(a, b)``   a is a prefix of b (tree order),
* ``lex_less(a, b)``     prefix-first lexicographic order,
* ``meet(a, b)``         longest common prefix.

Python's built-in tuple comparison already is the prefix-first
lexicographic order, which is why sorting nodes is just ``sorted``.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

Node = tuple  # tuple[int, ...]

ROOT: Node = ()


class TreeError(ValueError):
    """Invalid tree, node or tuple."""


class TreeFormatError(TreeError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


# --- relations on words -------------------------------------------------------


def meet(a: Node, b: Node) -> Node:
    n = 0
    for x, y in zip(a, b):
        if x != y:
            break
        n += 1
    return a[:n]


def is_initial(a: Node, b: Node) -> bool:
    """a ⊴ b."""
    return len(a) <= len(b) and b[: len(a)] == a


def is_proper_initial(a: Node, b: Node) -> bool:
    """a ◁ b."""
    return len(a) < len(b) and b[: len(a)] == a


def incomparable(a: Node, b: Node) -> bool:
    return not is_initial(a, b) and not is_initial(b, a)


def lex_less(a: Node, b: Node) -> bool:
    return a < b


def meet_all(nodes: Iterable[Node]) -> Node:
    it = iter(nodes)
    try:
        acc = next(it)
    except StopIteration:
        raise TreeError("meet of an empty set") from None
    for x in it:
        acc = meet(acc, x)
    return acc


def format_node(node: Node) -> str:
    return ".".join(map(str, node)) if node else "-"


def parse_node(text: str) -> Node:
    text = text.strip()
    if text == "-":
        return ()
    try:
        parts = tuple(int(p) for p in text.split("."))
    except ValueError:
        raise TreeError(f"bad node path {text!r}") from None
    if any(p < 0 for p in parts):
        raise TreeError(f"negative coordinate in {text!r}")
    return parts


def closure_of(nodes: Iterable[Node]) -> list[Node]:
    """∧-closure of a set of words, lex sorted.  Pairwise meets suffice."""
    base = set(nodes)
    out = set(base)
    items = sorted(base)
    for a, b in itertools.combinations(items, 2):
        out.add(meet(a, b))
    return sorted(out)


# --- trees --------------------------------------------------------------------


@dataclass(frozen=True)
class MeetTree:
    """A finite ∧-closed set of words with a leaf predicate.

    ``nodes`` is stored lex sorted.  Raises :class:`TreeError` when the node
    set is not ∧-closed or when a P-flagged node has a proper extension in
    the tree.
    """

    nodes: tuple = ()
    leaves: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        nodes = tuple(sorted(set(tuple(n) for n in self.nodes)))
        leaves = frozenset(tuple(n) for n in self.leaves)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "leaves", leaves)
        node_set = set(nodes)
        for n in nodes:
            if any((not isinstance(x, int)) or x < 0 for x in n):
                raise TreeError(f"node {n!r} is not a word over naturals")
        missing = leaves - node_set
        if missing:
            raise TreeError(f"P-flag on node(s) not in tree: {sorted(missing)}")
        for a, b in zip(nodes, nodes[1:]):
            # a node with an extension is followed (in lex order) by one
            if a in leaves and is_proper_initial(a, b):
                raise TreeError(f"P-flag on non-maximal node {format_node(a)}")
        for a, b in zip(nodes, nodes[1:]):
            # consecutive meets generate all meets of a lex-sorted set
            if meet(a, b) not in node_set:
                raise TreeError(
                    f"not ∧-closed: meet of {format_node(a)} and {format_node(b)} missing"
                )

    @classmethod
    def closed(cls, nodes: Iterable[Node], leaves: Iterable[Node] = ()) -> "MeetTree":
        """Build the tree on the ∧-closure of ``nodes``."""
        return cls(tuple(closure_of(nodes)), frozenset(leaves))

    # -- basic queries

    def __len__(self) -> int:
        return len(self.nodes)

    def __contains__(self, node) -> bool:
        return tuple(node) in self.node_set

    def __iter__(self):
        return iter(self.nodes)

    @cached_property
    def node_set(self) -> frozenset:
        return frozenset(self.nodes)

    @cached_property
    def index(self) -> dict:
        return {n: i for i, n in enumerate(self.nodes)}

    @property
    def root(self) -> Node | None:
        return self.nodes[0] if self.nodes else None

    @cached_property
    def leaf_list(self) -> tuple:
        """P-leaves in lex order."""
        return tuple(n for n in self.nodes if n in self.leaves)

    @cached_property
    def minus_nodes(self) -> tuple:
        return tuple(n for n in self.nodes if n not in self.leaves)

    @cached_property
    def parent(self) -> dict:
        """Immediate ⊴-predecessor inside the tree (None for the root)."""
        out = {}
        stack: list = []
        for n in self.nodes:
            while stack and not is_proper_initial(stack[-1], n):
                stack.pop()
            out[n] = stack[-1] if stack else None
            stack.append(n)
        return out

    @cached_property
    def children(self) -> dict:
        out = {n: [] for n in self.nodes}
        for n, p in self.parent.items():
            if p is not None:
                out[p].append(n)
        return {n: tuple(c) for n, c in out.items()}

    def is_maximal(self, node: Node) -> bool:
        return not self.children[node]

    def require(self, nodes: Iterable[Node]) -> None:
        for n in nodes:
            if tuple(n) not in self.node_set:
                raise TreeError(f"node {format_node(tuple(n))} not in tree")

    def descendants(self, node: Node, strict: bool = True) -> list:
        i = self.index[node]
        out = []
        for n in self.nodes[i + (1 if strict else 0):]:
            if not is_initial(node, n):
                break
            out.append(n)
        return out

    def with_leaves(self, leaves: Iterable[Node]) -> "MeetTree":
        return MeetTree(self.nodes, frozenset(leaves))

    def __repr__(self) -> str:
        body = ", ".join(format_node(n) + ("*" if n in self.leaves else "") for n in self.nodes)
        return f"MeetTree[{body}]"


def balanced_tree(branching: int, depth: int, p_leaves: bool = True) -> MeetTree:
    """The full tree ``branching^{<=depth}``; depth-``depth`` nodes get P."""
    nodes = [w for d in range(depth + 1) for w in itertools.product(range(branching), repeat=d)]
    leaves = [w for w in nodes if len(w) == depth] if p_leaves else []
    return MeetTree(tuple(nodes), frozenset(leaves))


def fan_tree(k: int) -> MeetTree:
    """Root with ``k`` P-leaf children."""
    return MeetTree(((),) + tuple((i,) for i in range(k)), frozenset((i,) for i in range(k)))


def chain_tree(k: int, top_p: bool = False) -> MeetTree:
    nodes = tuple((0,) * i for i in range(k))
    leaves = frozenset([nodes[-1]]) if (top_p and nodes) else frozenset()
    return MeetTree(nodes, leaves)


# --- file format --------------------------------------------------------------

AUTOCLOSE = "#autoclose"


def parse_tree(text: str, autoclose: bool = False) -> MeetTree:
    """Parse the line format ``path [P]``; ``-`` is the root.

    A ``#autoclose`` header (or ``autoclose=True``) adds missing meets;
    otherwise a non-closed node set is rejected.
    """
    nodes: list = []
    leaves: list = []
    seen_content = False
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            if line.lower() == AUTOCLOSE:
                if seen_content:
                    raise TreeFormatError("#autoclose must precede node lines", lineno)
                autoclose = True
            continue
        seen_content = True
        parts = line.split()
        if len(parts) > 2 or (len(parts) == 2 and parts[1] != "P"):
            raise TreeFormatError(f"expected 'path [P]', got {line!r}", lineno)
        try:
            node = parse_node(parts[0])
        except TreeError as exc:
            raise TreeFormatError(str(exc), lineno) from None
        nodes.append(node)
        if len(parts) == 2:
            leaves.append(node)
    for leaf in leaves:
        for n in nodes:
            if is_proper_initial(leaf, n):
                raise TreeFormatError(f"P-flag on non-maximal node {format_node(leaf)}")
    if autoclose:
        return MeetTree.closed(nodes, leaves)
    return MeetTree(tuple(nodes), frozenset(leaves))


def format_tree(tree: MeetTree) -> str:
    lines = [format_node(n) + (" P" if n in tree.leaves else "") for n in tree.nodes]
    return "\n".join(lines) + "\n"


# --- closures and types -------------------------------------------------------


def meet_closure(tree: MeetTree, tup: Sequence[Node]) -> tuple:
    tree.require(tup)
    return tuple(closure_of(tuple(n) for n in tup))


class LanguageTag(str, enum.Enum):
    L0 = "L0"
    L0P = "L0P"
    LS = "LS"


@dataclass(frozen=True)
class QfTypeCode:
    """Canonical isomorphism code of the substructure generated by a tuple.

    ``shape`` lists the relabelled closure nodes in lex order (children of a
    closure node ranked 0..k-1), ``flags`` the P-flags (all False for L0),
    ``marks`` the closure position of every tuple entry and ``levels`` the
    word lengths (LS only; ``None`` stands for the leaf level ω).
    """

    tag: LanguageTag
    shape: tuple
    flags: tuple
    marks: tuple
    levels: tuple | None = None

    @property
    def arity(self) -> int:
        return len(self.marks)

    def canonical_tree(self) -> MeetTree:
        return MeetTree(self.shape, frozenset(s for s, f in zip(self.shape, self.flags) if f))

    def canonical_tuple(self) -> tuple:
        return tuple(self.shape[m] for m in self.marks)

    def realize(self) -> tuple[MeetTree, tuple]:
        """A concrete tree and tuple with exactly this code.

        For LS codes the words are padded with zeros so that closure nodes
        sit at their recorded levels.
        """
        if self.levels is None:
            return self.canonical_tree(), self.canonical_tuple()
        parent = MeetTree(self.shape).parent
        words: dict = {}
        lev: dict = {}
        for s, level in zip(self.shape, self.levels):
            p = parent[s]
            if p is None:
                target = 0 if level is None else level
                words[s] = (0,) * target
            else:
                base = words[p]
                target = len(base) + 1 if level is None else level
                words[s] = base + (s[-1],) + (0,) * (target - len(base) - 1)
            lev[s] = len(words[s])
        tree = MeetTree(
            tuple(words.values()),
            frozenset(words[s] for s, f in zip(self.shape, self.flags) if f),
        )
        return tree, tuple(words[self.shape[m]] for m in self.marks)

    def to_json(self) -> dict:
        return {
            "tag": self.tag.value,
            "shape": [format_node(s) for s in self.shape],
            "flags": list(self.flags),
            "marks": list(self.marks),
            "levels": None if self.levels is None else ["omega" if v is None else v for v in self.levels],
        }

    @classmethod
    def from_json(cls, data: dict) -> "QfTypeCode":
        levels = data.get("levels")
        return cls(
            LanguageTag(data["tag"]),
            tuple(parse_node(s) for s in data["shape"]),
            tuple(bool(f) for f in data["flags"]),
            tuple(int(m) for m in data["marks"]),
            None if levels is None else tuple(None if v == "omega" else int(v) for v in levels),
        )


def _canonical_shape(closure: Sequence[Node]) -> list:
    """Relabel a lex-sorted ∧-closed list: child ranks in order of appearance."""
    shape: list = []
    rank_used: dict = {}
    stack: list = []  # (original, relabelled)
    for n in closure:
        while stack and not is_proper_initial(stack[-1][0], n):
            stack.pop()
        if stack:
            parent_label = stack[-1][1]
            r = rank_used.get(parent_label, 0)
            rank_used[parent_label] = r + 1
            label = parent_label + (r,)
        else:
            label = ()
        shape.append(label)
        stack.append((n, label))
    return shape


def qftp(tree: MeetTree, tup: Sequence[Node], tag: LanguageTag = LanguageTag.L0P) -> QfTypeCode:
    tag = LanguageTag(tag)
    tup = tuple(tuple(n) for n in tup)
    closure = meet_closure(tree, tup)
    shape = _canonical_shape(closure)
    pos = {n: i for i, n in enumerate(closure)}
    if tag is LanguageTag.L0:
        flags = (False,) * len(closure)
    else:
        flags = tuple(n in tree.leaves for n in closure)
    levels = None
    if tag is LanguageTag.LS:
        levels = tuple(None if n in tree.leaves else len(n) for n in closure)
    return QfTypeCode(tag, tuple(shape), flags, tuple(pos[n] for n in tup), levels)


def iso_code(tree: MeetTree, nodes: Iterable[Node] | None = None) -> QfTypeCode:
    """L0P isomorphism class of a substructure (all nodes, lex order)."""
    sub = tree.nodes if nodes is None else tuple(sorted(set(nodes)))
    return qftp(tree, sub, LanguageTag.L0P)


def split_minus_plus(tree: MeetTree, tup: Sequence[Node]) -> tuple[tuple, tuple]:
    minus = tuple(n for n in tup if n not in tree.leaves)
    plus = tuple(n for n in tup if n in tree.leaves)
    return minus, plus


def is_closed_tuple(tup: Sequence[Node]) -> bool:
    s = set(tup)
    return all(meet(a, b) in s for a, b in itertools.combinations(s, 2))


@dataclass(frozen=True)
class SameTypeVerdict:
    verdict: str  # "holds", "violated" or "precondition unmet"
    l0p_equal: bool
    codes: dict
    reason: str = ""


def same_type_implication(tree: MeetTree, eta: Sequence[Node], nu: Sequence[Node]) -> SameTypeVerdict:
    """Check: equal minus parts and equal L0P codes force equal LS codes.

    Precondition failures are reported in the verdict, never raised.
    """
    eta = tuple(map(tuple, eta))
    nu = tuple(map(tuple, nu))
    tree.require(eta + nu)
    codes = {
        "eta_L0P": qftp(tree, eta, LanguageTag.L0P),
        "nu_L0P": qftp(tree, nu, LanguageTag.L0P),
        "eta_LS": qftp(tree, eta, LanguageTag.LS),
        "nu_LS": qftp(tree, nu, LanguageTag.LS),
    }
    l0p_equal = codes["eta_L0P"] == codes["nu_L0P"]
    problems = []
    if not is_closed_tuple(eta):
        problems.append("eta not ∧-closed")
    if not is_closed_tuple(nu):
        problems.append("nu not ∧-closed")
    if split_minus_plus(tree, eta)[0] != split_minus_plus(tree, nu)[0]:
        problems.append("minus parts differ")
    if problems:
        return SameTypeVerdict("precondition unmet", l0p_equal, codes, "; ".join(problems))
    if not l0p_equal:
        return SameTypeVerdict("precondition unmet", False, codes, "L0P codes differ")
    if codes["eta_LS"] == codes["nu_LS"]:
        return SameTypeVerdict("holds", True, codes)
    return SameTypeVerdict("violated", True, codes, "LS codes differ")


# --- fans, cones, patterns ----------------------------------------------------


def _require_antichain(tup: Sequence[Node]) -> None:
    if len(tup) < 2:
        raise TreeError("a fan needs at least two entries")
    for a, b in itertools.combinations(tup, 2):
        if a == b:
            raise TreeError(f"duplicate entry {format_node(a)}")
        if not incomparable(a, b):
            raise TreeError(f"comparable entries {format_node(a)}, {format_node(b)}")


def is_fan(tree: MeetTree, tup: Sequence[Node]) -> bool:
    tup = tuple(map(tuple, tup))
    tree.require(tup)
    _require_antichain(tup)
    meets = {meet(a, b) for a, b in itertools.combinations(tup, 2)}
    return len(meets) == 1


def cone_leaves(tree: MeetTree, node: Node) -> tuple:
    node = tuple(node)
    tree.require([node])
    return tuple(n for n in tree.descendants(node, strict=False) if n in tree.leaves)


def leaf_pattern_X(tree: MeetTree, eta: Node, nu: Node, xi: Node) -> bool:
    """η <lex ν <lex ξ and (η∧ν) ◁ (ν∧ξ)."""
    eta, nu, xi = tuple(eta), tuple(nu), tuple(xi)
    for n in (eta, nu, xi):
        if n not in tree.leaves:
            raise TreeError(f"{format_node(n)} is not a P-leaf")
    if len({eta, nu, xi}) < 3:
        raise TreeError("leaf_pattern_X needs three distinct leaves")
    return eta < nu < xi and is_proper_initial(meet(eta, nu), meet(nu, xi))


def closed_subsets(tree: MeetTree, max_size: int | None = None, min_size: int = 1):
    """All ∧-closed subsets (as lex sorted tuples), smallest first."""
    nodes = tree.nodes
    top = len(nodes) if max_size is None else min(max_size, len(nodes))
    for k in range(min_size, top + 1):
        for combo in itertools.combinations(nodes, k):
            if is_closed_tuple(combo):
                yield combo
