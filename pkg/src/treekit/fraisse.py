"""Amalgamation, joint embedding and staged approximations of the generic tree.

Constructions work on a mutable :class:`Draft` (abstract parent/children
structure with stable integer ids) and are realized as word trees at the
end; word lengths carry no meaning in L₀,P, so the realization uses child
ranks as coordinates.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .patterns import Embedding, iter_embeddings, k0p_classes
from .tree_core import MeetTree, Node, closed_subsets, format_node, is_proper_initial, meet


class Draft:
    """Ordered rooted forest under construction (a single tree once nonempty)."""

    def __init__(self):
        self.parent: dict = {}
        self.children: dict = {}
        self.flag: dict = {}
        self.roots: list = []
        self._next = 0

    @classmethod
    def from_tree(cls, tree: MeetTree) -> tuple["Draft", dict]:
        d = cls()
        ids = {}
        for n in tree.nodes:
            p = tree.parent[n]
            nid = d._new(n in tree.leaves)
            ids[n] = nid
            if p is None:
                d.roots.append(nid)
                d.parent[nid] = None
            else:
                d.parent[nid] = ids[p]
                d.children[ids[p]].append(nid)
        return d, ids

    def _new(self, flag: bool) -> int:
        nid = self._next
        self._next += 1
        self.flag[nid] = flag
        self.children[nid] = []
        return nid

    def __len__(self) -> int:
        return len(self.flag)

    def ancestors(self, nid: int) -> list:
        out = []
        while nid is not None:
            out.append(nid)
            nid = self.parent[nid]
        return out

    def branch_toward(self, top: int, below: int) -> int:
        """The child of ``top`` on the path to its descendant ``below``."""
        path = self.ancestors(below)
        i = path.index(top)
        return path[i - 1]

    def add_root(self, flag: bool) -> int:
        if self.roots:
            raise ValueError("draft already has a root")
        nid = self._new(flag)
        self.parent[nid] = None
        self.roots.append(nid)
        return nid

    def add_child(self, parent: int, position: int, flag: bool) -> int:
        if self.flag[parent]:
            raise ValueError("P-nodes cannot get children")
        nid = self._new(flag)
        self.parent[nid] = parent
        self.children[parent].insert(position, nid)
        return nid

    def insert_above(self, nid: int) -> int:
        """New non-P node between ``nid`` and its parent (new root if none)."""
        new = self._new(False)
        p = self.parent[nid]
        self.parent[new] = p
        self.parent[nid] = new
        self.children[new] = [nid]
        if p is None:
            self.roots[self.roots.index(nid)] = new
        else:
            kids = self.children[p]
            kids[kids.index(nid)] = new
        return new

    def new_root_over(self, flag_root: bool = False) -> int:
        """Fresh root above the current roots (which become its children)."""
        new = self._new(flag_root)
        self.parent[new] = None
        for r in self.roots:
            self.parent[r] = new
        self.children[new] = list(self.roots)
        self.roots = [new]
        return new

    def realize(self) -> tuple[MeetTree, dict]:
        if len(self.roots) > 1:
            raise ValueError("draft is a forest; add a root first")
        words = {}
        stack = [(r, ()) for r in reversed(self.roots)]
        while stack:
            nid, w = stack.pop()
            words[nid] = w
            for i, c in reversed(list(enumerate(self.children[nid]))):
                stack.append((c, w + (i,)))
        tree = MeetTree(tuple(words.values()), frozenset(words[n] for n, f in self.flag.items() if f))
        return tree, words


# --- one-point extensions -----------------------------------------------------


@dataclass(frozen=True)
class Extension:
    """Location of a new point x over a ∧-closed set S with S ∪ {x} closed.

    ``kind`` is ``"root"`` (S empty), ``"below"`` (x inserted just under the
    S-node ``anchor``) or ``"child"`` (x a new branch at ``anchor`` placed at
    ``position`` among anchor's S-children).
    """

    kind: str
    anchor: Node | None = None
    position: int = 0
    p: bool = False

    def describe(self) -> str:
        if self.kind == "root":
            return f"point ({'P' if self.p else 'non-P'})"
        if self.kind == "below":
            return f"below {format_node(self.anchor)}"
        return f"child of {format_node(self.anchor)} at {self.position} ({'P' if self.p else 'non-P'})"


def s_children(sub: tuple, node: Node) -> list:
    """Immediate successors of ``node`` inside the lex-sorted closed set ``sub``."""
    above = [s for s in sub if is_proper_initial(node, s)]
    return [s for s in above if not any(is_proper_initial(t, s) for t in above)]


def extension_of(sub: tuple, x: Node, x_is_p: bool) -> Extension | None:
    """Location of ``x`` over closed ``sub``; None if ``sub+{x}`` is not closed."""
    s = set(sub)
    if any(meet(x, a) not in s and meet(x, a) != x for a in sub):
        return None
    if not sub:
        return Extension("root", p=x_is_p)
    above = [a for a in sub if is_proper_initial(x, a)]
    if above:
        lowest = min(above, key=len)
        return Extension("below", lowest)
    below = [a for a in sub if is_proper_initial(a, x)]
    p = max(below, key=len)
    kids = s_children(sub, p)
    pos = sum(1 for c in kids if c < x)
    return Extension("child", p, pos, x_is_p)


def all_extensions(sub_tree: MeetTree) -> list:
    """Every one-point K₀,P extension type over the whole of ``sub_tree``."""
    if not sub_tree.nodes:
        return [Extension("root", p=True), Extension("root", p=False)]
    out = [Extension("below", n) for n in sub_tree.nodes]
    for n in sub_tree.nodes:
        if n in sub_tree.leaves:
            continue
        for pos in range(len(sub_tree.children[n]) + 1):
            out.append(Extension("child", n, pos, True))
            out.append(Extension("child", n, pos, False))
    return out


def apply_extension(draft: Draft, image: dict, ext: Extension) -> int:
    """Add a node to ``draft`` realizing ``ext`` over the copy ``image`` of S.

    ``image`` maps S-nodes to draft ids.  Insertions never create new meets,
    so the draft stays ∧-closed and the old nodes keep their type.
    """
    if ext.kind == "root":
        if not draft.roots:
            return draft.add_root(ext.p)
        r = draft.roots[0]
        if draft.flag[r]:
            raise ValueError("cannot attach a free point under a P root")
        return draft.add_child(r, len(draft.children[r]), ext.p)
    if ext.kind == "below":
        return draft.insert_above(image[ext.anchor])
    anchor = image[ext.anchor]
    sub_nodes = tuple(sorted(image))
    kids = s_children(sub_nodes, ext.anchor)
    branches = [draft.branch_toward(anchor, image[c]) for c in kids]
    siblings = draft.children[anchor]
    if ext.position < len(branches):
        slot = siblings.index(branches[ext.position])
    else:
        slot = len(siblings)
    return draft.add_child(anchor, slot, ext.p)


def extension_tree(sub_tree: MeetTree, ext: Extension) -> tuple[MeetTree, Embedding, Node]:
    """The structure S + x as a tree, with the inclusion of S and the new node."""
    d, ids = Draft.from_tree(sub_tree)
    new = apply_extension(d, ids, ext)
    tree, words = d.realize()
    emb = Embedding(sub_tree, tree, tuple(words[ids[n]] for n in sub_tree.nodes))
    return tree, emb, words[new]


# --- amalgamation -------------------------------------------------------------


@dataclass
class Amalgam:
    tree: MeetTree
    g1: Embedding
    g2: Embedding


def _closed_growth_order(base: set, whole: MeetTree) -> list:
    """Order ``whole - base`` so that each prefix keeps ``base`` ∧-closed."""
    have = set(base)
    rest = [n for n in whole.nodes if n not in have]
    order = []
    while rest:
        for x in rest:
            if all(meet(x, a) in have or meet(x, a) == x for a in have):
                break
        else:  # pragma: no cover - impossible for closed base
            raise AssertionError("no one-point extension available")
        order.append(x)
        have.add(x)
        rest.remove(x)
    return order


def amalgamate(a: MeetTree, b1: MeetTree, b2: MeetTree, f1: Embedding, f2: Embedding) -> Amalgam:
    """Strong amalgam of ``b1`` and ``b2`` over ``a``.

    ``b2``'s extra nodes are added to a copy of ``b1`` one point at a time;
    each new branch is placed as far right as the shared part allows, so
    b1-only branches precede b2-only branches.
    """
    for f, b in ((f1, b1), (f2, b2)):
        if f.source.nodes != a.nodes or f.target.nodes != b.nodes or f.audit():
            raise ValueError("f1/f2 must be embeddings of A")
    if not a.nodes:
        return joint_embed(b1, b2)
    draft, ids1 = Draft.from_tree(b1)
    image2 = {f2(x): ids1[f1(x)] for x in a.nodes}
    for x in _closed_growth_order(set(image2), b2):
        sub = tuple(sorted(image2))
        ext = extension_of(sub, x, x in b2.leaves)
        if ext is None:  # pragma: no cover
            raise AssertionError("growth order produced a non-closed step")
        image2[x] = apply_extension(draft, image2, ext)
    tree, words = draft.realize()
    g1 = Embedding(b1, tree, tuple(words[ids1[n]] for n in b1.nodes))
    g2 = Embedding(b2, tree, tuple(words[image2[n]] for n in b2.nodes))
    assert not g1.audit() and not g2.audit(), "amalgamation produced a non-embedding"
    for x in a.nodes:
        assert g1(f1(x)) == g2(f2(x)), "amalgamation square does not commute"
    return Amalgam(tree, g1, g2)


def joint_embed(b1: MeetTree, b2: MeetTree) -> Amalgam:
    """Fresh non-P root with ``b1`` then ``b2`` as its two branches."""
    if not b2.nodes or not b1.nodes:
        only = b1 if b1.nodes else b2
        tree = MeetTree(only.nodes, only.leaves)
        ident = Embedding(only, tree, only.nodes)
        empty = MeetTree()
        e = Embedding(empty, tree, ())
        return Amalgam(tree, ident, e) if b1.nodes else Amalgam(tree, e, ident)
    nodes = [()]
    leaves = []
    g = []
    for i, b in enumerate((b1, b2)):
        shift = {n: (i,) + _rank_word(b, n) for n in b.nodes}
        nodes.extend(shift.values())
        leaves.extend(shift[n] for n in b.leaves)
        g.append(shift)
    tree = MeetTree(tuple(nodes), frozenset(leaves))
    g1 = Embedding(b1, tree, tuple(g[0][n] for n in b1.nodes))
    g2 = Embedding(b2, tree, tuple(g[1][n] for n in b2.nodes))
    assert not g1.audit() and not g2.audit()
    return Amalgam(tree, g1, g2)


def _rank_word(tree: MeetTree, node: Node) -> Node:
    """Word of ``node`` in the rank realization of ``tree``."""
    path = []
    n = node
    while tree.parent[n] is not None:
        p = tree.parent[n]
        path.append(tree.children[p].index(n))
        n = p
    return tuple(reversed(path))


# --- generic stages -----------------------------------------------------------


@dataclass(frozen=True)
class Demand:
    """One-point extension ``ext`` of the structure ``base`` (|base| < k)."""

    base: MeetTree
    ext: Extension

    def extended(self) -> MeetTree:
        return extension_tree(self.base, self.ext)[0]

    def describe(self) -> str:
        body = " ".join(format_node(n) + ("*" if n in self.base.leaves else "") for n in self.base.nodes)
        return f"[{body or 'empty'}] + {self.ext.describe()}"


def demands(k: int) -> list:
    """All (S, one-point extension) pairs with |S| < k, S up to isomorphism.

    Meet-trees with lex order are rigid, so extension locations over a
    representative S are exactly the isomorphism types over S.
    """
    out = [Demand(MeetTree(), e) for e in all_extensions(MeetTree())]
    for base in k0p_classes(k - 1) if k >= 2 else []:
        out.extend(Demand(base, e) for e in all_extensions(base))
    return out


def _realized(tree: MeetTree, demand: Demand) -> tuple | None:
    target = demand.extended()
    for emb in iter_embeddings(target, tree):
        return emb.images
    return None


def check_extension_property(tree: MeetTree, k: int) -> list:
    """Demands with |S| < k that have no copy of S + x inside ``tree``.

    A finite tree can never extend *every* concrete copy of S (nothing lies
    below its root), so a demand counts as met when S + x embeds somewhere.
    Empty output means every K₀,P structure of size <= k embeds.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    return [d for d in demands(k) if _realized(tree, d) is None]


@dataclass
class DemandRecord:
    demand: Demand
    step: int  # 0 when already met on arrival
    witness: tuple  # image of S + x in the final tree


@dataclass
class ConcreteRecord:
    """Extension ``ext`` realized by ``node`` over the concrete closed set ``base``."""

    base: tuple
    ext: Extension
    node: Node

    def holds(self, tree: MeetTree) -> bool:
        return extension_of(self.base, self.node, self.node in tree.leaves) == self.ext


@dataclass
class GenericStage:
    tree: MeetTree
    stage: int  # rounds completed
    demand_log: list
    unmet: list = field(default_factory=list)
    concrete_log: list = field(default_factory=list)
    insertions: int = 0

    @property
    def complete(self) -> bool:
        return not self.unmet


def _concrete_types(sub: tuple, tree: MeetTree) -> set:
    """Extension types over the concrete closed set ``sub`` present in ``tree``."""
    have = set(sub)
    out = set()
    for x in tree.nodes:
        if x in have:
            continue
        e = extension_of(sub, x, x in tree.leaves)
        if e is not None:
            out.add(e)
    return out


def _concrete_extensions(sub: tuple, leaves) -> list:
    """Every extension type over ``sub`` (a lex sorted closed tuple of words)."""
    out = [Extension("below", a) for a in sub]
    for a in sub:
        if a in leaves:
            continue
        for pos in range(len(s_children(sub, a)) + 1):
            out.append(Extension("child", a, pos, True))
            out.append(Extension("child", a, pos, False))
    return out


def generic_stage(k: int, max_nodes: int = 200, rounds: int = 2) -> GenericStage:
    """Finite approximation of the generic tree, extension property up to k.

    Round 1 starts from a single non-P node and meets every demand of
    :func:`demands` (one copy of S + x per isomorphism type).  Each later
    round takes the tree T it starts with and realizes, over every closed
    S ⊆ T with |S| < k, every one-point extension type of S that is still
    missing.  Stops (with ``unmet`` listed) once another node would exceed
    ``max_nodes``.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if rounds < 1:
        raise ValueError("rounds must be >= 1")
    draft = Draft()
    draft.add_root(False)
    steps: list = []  # (demand, step)
    unmet: list = []
    step = 0
    for dem in demands(k):
        tree, words = draft.realize()
        if _realized(tree, dem) is not None:
            steps.append((dem, 0))
            continue
        if len(tree) + 1 > max_nodes:
            unmet.append(dem)
            continue
        inv = {w: nid for nid, w in words.items()}
        emb = next(iter_embeddings(dem.base, tree), None)
        if emb is None:
            unmet.append(dem)
            continue
        image = {n: inv[w] for n, w in zip(dem.base.nodes, emb.images)}
        apply_extension(draft, image, dem.ext)
        step += 1
        steps.append((dem, step))

    concrete: list = []  # (base ids, ext over ids, new id)
    done = 1
    for _ in range(rounds - 1):
        if unmet:
            break
        tree, words = draft.realize()
        inv = {w: nid for nid, w in words.items()}
        bases = [tuple(inv[w] for w in sub) for sub in closed_subsets(tree, max_size=k - 1)]
        for base_ids in bases:
            tree, words = draft.realize()
            sub = tuple(words[i] for i in base_ids)
            wanted = [(e.kind, None if e.anchor is None else base_ids[sub.index(e.anchor)], e.position, e.p)
                      for e in _concrete_extensions(sub, tree.leaves)]
            for kind, anchor, pos, flag in wanted:
                tree, words = draft.realize()
                sub = tuple(words[i] for i in base_ids)
                ext = Extension(kind, words[anchor], pos, flag)
                if ext in _concrete_types(sub, tree):
                    continue
                if len(draft) + 1 > max_nodes:
                    unmet.append((sub, ext))
                    continue
                new = apply_extension(draft, dict(zip(sub, base_ids)), ext)
                concrete.append((base_ids, ext, anchor, new))
                step += 1
        if not unmet:
            done += 1

    tree, words = draft.realize()
    log = []
    for dem, st in steps:
        witness = _realized(tree, dem)
        assert witness is not None, "stage lost a previously met demand"
        log.append(DemandRecord(dem, st, witness))
    clog = []
    for base_ids, ext, anchor, new in concrete:
        base = tuple(words[i] for i in base_ids)
        rec = ConcreteRecord(base, Extension(ext.kind, words[anchor], ext.position, ext.p), words[new])
        assert rec.holds(tree), "concrete extension lost its type"
        clog.append(rec)
    return GenericStage(tree, done, log, unmet, clog, step)
