"""Littlestone trees, shattering certificates, and monochromatic subtree extraction.

Tree nodes are stored in heap order: position 0 is the root and position p
has children 2p+1 (edge bit 0) and 2p+2 (edge bit 1), so heap order is also
breadth-first order.  ``depth`` counts edges, so a depth-d tree has d+1
levels and 2**(d+1) root-to-leaf branches.

Subtrees in the Ramsey routines are node subsets of a host tree ordered by
ancestry.  Their size is measured in levels (a lone node has one level).
Every subtree built here also keeps direction: a node's two children lie in
its host left and right subtrees respectively.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .dimensions import MTDWitness, ld_choice, littlestone_dim, verify_mtd
from .errors import ContractViolation
from .hypothesis import FiniteClass, HypothesisClass, as_explicit


def _level(p: int) -> int:
    return (p + 1).bit_length() - 1


def is_ancestor(a: int, b: int) -> bool:
    """True when heap position a is b or lies above it."""
    da, db = _level(a), _level(b)
    return db >= da and (b + 1) >> (db - da) == a + 1


def bitstring(p: int) -> str:
    level = _level(p)
    if level == 0:
        return "-"
    return format(p + 1 - (1 << level), f"0{level}b")


def position_of(bits: str) -> int:
    if bits == "-":
        return 0
    if set(bits) - {"0", "1"}:
        raise ContractViolation(f"bad node id {bits!r}")
    return (1 << len(bits)) - 1 + int(bits, 2)


class LittlestoneTree:
    """A complete binary tree with an instance per node and a label per edge.

    ``labels[p] = (y0, y1)`` are the labels on the edges from node p to its
    children 2p+1 and 2p+2; the binary form uses (0, 1) everywhere.
    """

    def __init__(self, depth: int, instances, labels=None, label_count: int = 2):
        if depth < 0:
            raise ContractViolation("tree depth must be >= 0")
        size = (1 << (depth + 1)) - 1
        instances = [int(x) for x in instances]
        if len(instances) != size:
            raise ContractViolation(f"a depth-{depth} tree has {size} nodes, got {len(instances)}")
        if labels is None:
            labels = [(0, 1)] * size
        labels = [(int(a), int(b)) for a, b in labels]
        if len(labels) != size:
            raise ContractViolation("one label pair per node is required")
        for a, b in labels:
            if a == b:
                raise ContractViolation("the two edges below a node need distinct labels")
            if not (0 <= a < label_count and 0 <= b < label_count):
                raise ContractViolation("edge label out of range")
        self.depth = depth
        self.instances = tuple(instances)
        self.labels = tuple(labels)
        self.label_count = label_count

    def __repr__(self):
        return f"<LittlestoneTree depth={self.depth} nodes={self.node_count}>"

    def __eq__(self, other):
        return (isinstance(other, LittlestoneTree) and self.depth == other.depth
                and self.instances == other.instances and self.labels == other.labels
                and self.label_count == other.label_count)

    @property
    def node_count(self) -> int:
        return len(self.instances)

    @property
    def branch_count(self) -> int:
        return 1 << (self.depth + 1)

    def branch_path(self, u: int):
        """(position, edge bit) pairs along branch u, most significant bit first."""
        p = 0
        for level in range(self.depth + 1):
            bit = (u >> (self.depth - level)) & 1
            yield p, bit
            p = 2 * p + 1 + bit

    def branch_labels(self, u: int) -> list[tuple[int, int]]:
        """(instance, required label) pairs along branch u."""
        return [(self.instances[p], self.labels[p][b]) for p, b in self.branch_path(u)]


def tree_cube_tree(d: int) -> LittlestoneTree:
    """The tree that tree_cube_class(d) shatters by construction: node p carries instance p."""
    return LittlestoneTree(d, range((1 << (d + 1)) - 1))


def shatters(cls: FiniteClass, tree: LittlestoneTree) -> Optional[dict]:
    """Map each branch to its lowest-index consistent hypothesis, or None if some branch has none."""
    for x in tree.instances:
        cls._check_x(x)
    witness = {}

    def walk(space, p, prefix, level):
        x = tree.instances[p]
        for bit in (0, 1):
            y = tree.labels[p][bit]
            if not 0 <= y < cls.label_count:
                return False
            sub = space.filter(x, y)
            if sub.is_empty():
                return False
            u = (prefix << 1) | bit
            if level == tree.depth:
                witness[u] = int(min(sub.members()))
            elif not walk(sub, 2 * p + 1 + bit, u, level + 1):
                return False
        return True

    if not walk(cls.full_space(), 0, 0, 0):
        return None
    return witness


def verify_shatter_witness(cls: FiniteClass, tree: LittlestoneTree, witness: dict) -> bool:
    """Replay every branch through ``evaluate``."""
    if sorted(witness) != list(range(tree.branch_count)):
        return False
    return all(cls.evaluate(witness[u], x) == y
               for u in range(tree.branch_count) for x, y in tree.branch_labels(u))


def bfs_sequence(tree: LittlestoneTree, n: int) -> list[int]:
    """The first n node instances in breadth-first order, repeating the last node if n is larger."""
    if n < 1:
        raise ContractViolation("bfs_sequence needs n >= 1")
    seq = list(tree.instances[:n])
    seq += [tree.instances[-1]] * (n - len(seq))
    return seq


def littlestone_witness_tree(cls: HypothesisClass) -> LittlestoneTree:
    """A shattered tree with LD(cls) levels, rebuilt from the memoized recursion."""
    cls = as_explicit(cls)
    ld = littlestone_dim(cls)
    if ld == 0:
        raise ContractViolation("a class of Littlestone dimension 0 shatters no tree")
    depth = ld - 1
    size = (1 << (depth + 1)) - 1
    instances = [0] * size
    labels = [(0, 1)] * size
    spaces = {0: cls.full_space()}
    for p in range(size):
        vs = spaces.pop(p)
        x, y0, y1 = ld_choice(vs)
        instances[p] = x
        labels[p] = (y0, y1)
        if _level(p) < depth:
            spaces[2 * p + 1] = vs.filter(x, y0)
            spaces[2 * p + 2] = vs.filter(x, y1)
    return LittlestoneTree(depth, instances, labels, cls.label_count)


# -- monochromatic subtrees ------------------------------------------------------

@dataclass(frozen=True)
class Subtree:
    """A direction-respecting complete subtree: a root position and two equal-height child subtrees."""

    root: int
    left: Optional["Subtree"] = None
    right: Optional["Subtree"] = None

    @property
    def levels(self) -> int:
        return 1 + (self.left.levels if self.left is not None else 0)

    def nodes(self) -> frozenset:
        out = {self.root}
        for child in (self.left, self.right):
            if child is not None:
                out |= child.nodes()
        return frozenset(out)

    def truncated(self, levels: int) -> Optional["Subtree"]:
        if levels <= 0:
            return None
        if levels == 1:
            return Subtree(self.root)
        return Subtree(self.root, self.left.truncated(levels - 1), self.right.truncated(levels - 1))


def _levels(sub: Optional[Subtree]) -> int:
    return 0 if sub is None else sub.levels


def full_subtree(root: int, levels: int) -> Optional[Subtree]:
    if levels <= 0:
        return None
    if levels == 1:
        return Subtree(root)
    return Subtree(root, full_subtree(2 * root + 1, levels - 1), full_subtree(2 * root + 2, levels - 1))


def _join(root: int, left: Optional[Subtree], right: Optional[Subtree]) -> Subtree:
    keep = min(_levels(left), _levels(right))
    if keep == 0:
        return Subtree(root)
    return Subtree(root, left.truncated(keep), right.truncated(keep))


@dataclass(frozen=True)
class MonoSubtree:
    color: int
    subtree: Optional[Subtree]

    @property
    def levels(self) -> int:
        return _levels(self.subtree)

    @property
    def depth(self) -> int:
        """Edge depth; -1 for the empty subtree."""
        return self.levels - 1

    @property
    def nodes(self) -> frozenset:
        return self.subtree.nodes() if self.subtree is not None else frozenset()


def _two_color(sub: Optional[Subtree], color, p: int, q: int) -> MonoSubtree:
    """Color-0 subtree with >= p levels or color-1 subtree with >= q levels.

    Needs _levels(sub) >= p + q - 1.  ``color`` maps a host position to 0/1.
    """
    if sub is None:
        return MonoSubtree(0, None) if p <= 0 else MonoSubtree(1, None)
    c = color(sub.root)
    if c == 0:
        kids = [_two_color(sub.left, color, p - 1, q), _two_color(sub.right, color, p - 1, q)]
    else:
        kids = [_two_color(sub.left, color, p, q - 1), _two_color(sub.right, color, p, q - 1)]
    if kids[0].color == c and kids[1].color == c:
        return MonoSubtree(c, _join(sub.root, kids[0].subtree, kids[1].subtree))
    return kids[0] if kids[0].color != c else kids[1]


def _coloring_fn(coloring):
    arr = [int(c) for c in coloring]
    return arr.__getitem__


def ramsey_two_color(tree: LittlestoneTree, coloring, p: int, q: int) -> MonoSubtree:
    """Recursive join: a 0-colored subtree with >= p levels or a 1-colored one with >= q levels.

    ``coloring`` gives a color in {0, 1} per heap position.  The tree depth
    (in edges) must equal p + q - 1.  When both outcomes are possible at a
    node the 0-colored one is kept.
    """
    if p < 0 or q < 0 or tree.depth != p + q - 1:
        raise ContractViolation(f"tree depth {tree.depth} does not match p + q - 1 = {p + q - 1}")
    if len(coloring) != tree.node_count or any(c not in (0, 1) for c in coloring):
        raise ContractViolation("two-coloring needs one color in {0,1} per node")
    return _two_color(full_subtree(0, tree.depth + 1), _coloring_fn(coloring), p, q)


def _color_bits(k: int) -> int:
    return (k - 1).bit_length()


def _multi_color(sub: Subtree, color, k: int) -> MonoSubtree:
    current = sub
    for bit in range(_color_bits(k)):
        half = (_levels(current) + 1) // 2
        current = _two_color(current, lambda v, s=bit: (color(v) >> s) & 1, half, half).subtree
    return MonoSubtree(color(current.root), current)


def ramsey_multi_color(tree: LittlestoneTree, coloring, k: Optional[int] = None) -> MonoSubtree:
    """Monochromatic subtree with >= (d+1)/2**ceil(log2 k) levels by repeated parity halving.

    Each round splits the colors on one bit of their index and keeps a
    subtree on which that bit is constant, with at least half the levels.
    """
    colors = [int(c) for c in coloring]
    if len(colors) != tree.node_count:
        raise ContractViolation("coloring needs one color per node")
    if k is None:
        k = max(colors) + 1
    if k < 1 or min(colors) < 0 or max(colors) >= k:
        raise ContractViolation(f"colors must lie in [0, {k})")
    return _multi_color(full_subtree(0, tree.depth + 1), colors.__getitem__, k)


def ramsey_guarantee(depth: int, k: int) -> float:
    return (depth + 1) / 2 ** _color_bits(k)


def verify_mono_subtree(host_depth: int, nodes, coloring, color: int, min_levels: float = 0,
                        directional: bool = False) -> bool:
    """Independent certificate check of a monochromatic complete subtree.

    Works only from the node set and the host ancestor order: every non-leaf
    has exactly two children in the induced order, all leaves sit at the
    same induced depth, every node has ``color``, and the level count meets
    ``min_levels``.  With ``directional`` the two children must sit in the
    host's left and right subtrees of their parent.
    """
    nodes = sorted(set(nodes))
    size = (1 << (host_depth + 1)) - 1
    if any(not 0 <= v < size for v in nodes):
        return False
    if not nodes:
        return min_levels <= 0
    if any(coloring[v] != color for v in nodes):
        return False
    roots = [v for v in nodes if not any(a != v and is_ancestor(a, v) for a in nodes)]
    if len(roots) != 1:
        return False
    children = {v: [] for v in nodes}
    for v in nodes:
        above = [a for a in nodes if a != v and is_ancestor(a, v)]
        if above:
            parent = max(above, key=_level)
            children[parent].append(v)
    leaf_depths = set()
    depth_of = {roots[0]: 1}
    stack = [roots[0]]
    while stack:
        v = stack.pop()
        kids = children[v]
        if len(kids) == 0:
            leaf_depths.add(depth_of[v])
            continue
        if len(kids) != 2:
            return False
        if directional:
            left, right = 2 * v + 1, 2 * v + 2
            sides = sorted(is_ancestor(right, c) for c in kids)
            if sides != [False, True] or not all(is_ancestor(left, c) or is_ancestor(right, c) for c in kids):
                return False
        for c in kids:
            depth_of[c] = depth_of[v] + 1
            stack.append(c)
    if len(depth_of) != len(nodes) or len(leaf_depths) != 1:
        return False
    return leaf_depths.pop() >= min_levels


# -- multiclass thresholds from a shattered tree ----------------------------------

def mtd_recursion_bound(k: int, d: int) -> int:
    """f(0) = 0, f(1) = 1, f(d) = 1 + f(ceil(d / 2k) - 1)."""
    if d <= 0:
        return 0
    if d == 1:
        return 1
    return 1 + mtd_recursion_bound(k, -(-d // (2 * k)) - 1)


@dataclass(frozen=True)
class MTDFromTree:
    witness: MTDWitness
    target: int
    meets_bound: bool


def mtd_from_tree(cls: FiniteClass, tree: LittlestoneTree, k: Optional[int] = None,
                  max_steps: int = 200_000) -> MTDFromTree:
    """Multiclass threshold chain read off a shattered tree.

    Fix h, take an h-monochromatic subtree, step from its root x through an
    edge whose label c differs from h's color y, recurse inside
    {g : g(x) = c} on that child subtree, and append (x, h).  Choices of h
    and of the edge are backtracked so that inner row labels avoid every
    outer column label and inner column labels avoid every outer row label.
    """
    k = cls.label_count if k is None else k
    if k != cls.label_count:
        raise ContractViolation("k must equal the class label count")
    if shatters(cls, tree) is None:
        raise ContractViolation("the class does not shatter the tree")
    target = mtd_recursion_bound(k, tree.depth)
    steps = [0]

    def goal(levels):
        # the size the halving recursion alone can promise for this many levels
        return 0 if levels <= 0 else 1 + goal((levels + 2 ** _color_bits(k) - 1) // 2 ** _color_bits(k) - 1)

    def rec(space, sub, forbid_rows, forbid_cols):
        if sub is None or space.is_empty():
            return []
        want = goal(sub.levels)
        best = []
        for h in space.members():
            h = int(h)
            steps[0] += 1
            if steps[0] > max_steps:
                break
            mono = _multi_color(sub, lambda p, h=h: cls.evaluate(h, tree.instances[p]), k)
            y, top = mono.color, mono.subtree
            if y in forbid_rows:
                continue
            x = tree.instances[top.root]
            for bit, child in ((0, top.left), (1, top.right)):
                c = tree.labels[top.root][bit]
                if c == y or c in forbid_cols:
                    continue
                inner = rec(space.filter(x, c), child, forbid_rows | {c}, forbid_cols | {y})
                cand = inner + [(x, h, y, c)]
                if len(cand) > len(best):
                    best = cand
                if len(best) >= want:
                    return best
        return best

    chain = rec(cls.full_space(), full_subtree(0, tree.depth + 1), frozenset(), frozenset())
    w = MTDWitness(tuple(x for x, _, _, _ in chain), tuple(h for _, h, _, _ in chain),
                   tuple(y for _, _, y, _ in chain), tuple(c for _, _, _, c in chain))
    assert verify_mtd(cls, w)
    return MTDFromTree(w, target, len(w) >= target)


# -- LTREE v1 -------------------------------------------------------------------------

def dumps_ltree(tree: LittlestoneTree) -> str:
    lines = [f"LTREE 1 {tree.depth} {tree.label_count}"]
    for p in range(tree.node_count):
        y0, y1 = tree.labels[p]
        lines.append(f"{bitstring(p)} {tree.instances[p]} {y0} {y1}")
    return "\n".join(lines) + "\n"


def loads_ltree(text: str) -> LittlestoneTree:
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise ContractViolation("empty LTREE file")
    head = lines[0].split(" ")
    if len(head) != 4 or head[:2] != ["LTREE", "1"]:
        raise ContractViolation(f"bad LTREE header: {lines[0]!r}")
    try:
        depth, k = int(head[2]), int(head[3])
    except ValueError as exc:
        raise ContractViolation(f"bad LTREE header: {lines[0]!r}") from exc
    size = (1 << (depth + 1)) - 1
    if len(lines) - 1 != size:
        raise ContractViolation(f"depth {depth} needs {size} node lines, found {len(lines) - 1}")
    instances, labels = [], []
    for p, line in enumerate(lines[1:]):
        parts = line.split(" ")
        if len(parts) != 4:
            raise ContractViolation(f"node line {p + 1}: expected 4 fields")
        if position_of(parts[0]) != p:
            raise ContractViolation(f"node line {p + 1}: id {parts[0]!r} out of breadth-first order")
        try:
            x, y0, y1 = (int(v) for v in parts[1:])
        except ValueError as exc:
            raise ContractViolation(f"node line {p + 1}: non-integer field") from exc
        instances.append(x)
        labels.append((y0, y1))
    return LittlestoneTree(depth, instances, labels, k)


def write_ltree(tree: LittlestoneTree, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(dumps_ltree(tree))


def read_ltree(path) -> LittlestoneTree:
    with open(path, encoding="utf-8", newline="") as fh:
        return loads_ltree(fh.read())
