"""Generators for the named hypothesis classes.

Index conventions
-----------------
thresholds(N)
    Instance ``j`` (0-based) is the chain point x_{j+1}; hypothesis ``i`` is
    h_i with h_i(x_j) = 1 iff j <= i, for i = 0..N (h_0 is all-zero).
full_cube(m), multiclass_cube(m, k)
    Rows in ``itertools.product`` order, instance 0 most significant.
tree_cube_class(d)
    Instances are the nodes of a complete binary tree of depth d (edges) in
    heap order: node (level l, position i) has index 2**l - 1 + i.  Hypothesis
    ``u`` is a branch, an integer in [0, 2**(d+1)) whose most significant bit
    is the first step.  h_u(node) is the next step of u when the node lies on
    u's path and 0 otherwise.  The branches through a node form a dyadic
    range; h_u = 1 exactly on the upper half of it.
ds_claim_class(n)
    Instance ``l`` is tree level l (0..n).  Edge (l, i, b) gets label
    2**(l+1) - 2 + 2*i + b, so labels enumerate edges in breadth-first order.
g_truncation(i_max)
    Domain is the node set of tree_cube_class(i_max).  For each i, the tree
    cube of depth i is embedded on the top i+1 levels and each branch j is
    tagged; the label (bit, i, j) is encoded densely as offset(i) + 2*j + bit.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .errors import BudgetExceeded, ContractViolation
from .hypothesis import MATERIALIZE_CELLS, FiniteClass, HypothesisClass

# largest table a generator will build row by row
GENERATOR_ROWS = 1 << 16


def thresholds(n: int) -> HypothesisClass:
    if n < 1:
        raise ContractViolation("thresholds needs N >= 1")
    i = np.arange(n + 1)[:, None]
    j = np.arange(n)[None, :]
    return HypothesisClass((j < i).astype(np.int8), 2, name=f"thresholds({n})")


def multiclass_cube(m: int, k: int) -> HypothesisClass:
    if m < 1 or k < 2:
        raise ContractViolation("multiclass_cube needs m >= 1 and k >= 2")
    if k ** m > GENERATOR_ROWS:
        raise BudgetExceeded(f"{k}**{m} hypotheses exceed the generator budget", reached=k ** m)
    rows = np.array(list(itertools.product(range(k), repeat=m)), dtype=np.int8)
    name = f"full_cube({m})" if k == 2 else f"multiclass_cube({m},{k})"
    return HypothesisClass(rows, k, name=name)


def full_cube(m: int) -> HypothesisClass:
    return multiclass_cube(m, 2)


def singleton(m: int = 1, label: int = 0, label_count: int = 2) -> HypothesisClass:
    return HypothesisClass(np.full((1, m), label), label_count, name="singleton")


def random_class(m: int, k: int, size: int, seed: int) -> HypothesisClass:
    """``size`` distinct uniformly drawn rows, deterministic in ``seed``."""
    total = k ** m
    if size < 1 or size > total:
        raise ContractViolation(f"cannot draw {size} distinct rows from {total} functions")
    rng = np.random.default_rng(seed)
    if total <= 1 << 20:
        codes = rng.choice(total, size=size, replace=False)
        rows = [[(int(c) // k ** (m - 1 - x)) % k for x in range(m)] for c in codes]
    else:
        seen = set()
        rows = []
        while len(rows) < size:
            row = tuple(int(v) for v in rng.integers(0, k, size=m))
            if row not in seen:
                seen.add(row)
                rows.append(row)
    return HypothesisClass(np.array(rows, dtype=np.int64).reshape(size, m), k,
                           name=f"random({m},{k},{size},{seed})")


def ds_claim_class(n: int) -> HypothesisClass:
    """One hypothesis per branch of a depth-n tree whose edges all carry distinct labels."""
    if n < 1:
        raise ContractViolation("ds_claim_class needs n >= 1")
    if 2 ** (n + 1) > GENERATOR_ROWS:
        raise BudgetExceeded("ds_claim_class too large", reached=2 ** (n + 1))
    u = np.arange(2 ** (n + 1))[:, None]
    level = np.arange(n + 1)[None, :]
    pos = u >> (n + 1 - level)
    bit = (u >> (n - level)) & 1
    table = (2 ** (level + 1) - 2) + 2 * pos + bit
    return HypothesisClass(table, 2 ** (n + 2) - 2, name=f"ds_claim({n})")


def g_truncation(i_max: int) -> HypothesisClass:
    """Tagged tree-cube witnesses for depths 1..i_max on a shared node domain."""
    if i_max < 1:
        raise ContractViolation("g_truncation needs i_max >= 1")
    host = TreeCubeClass(i_max)
    rows = []
    offset = 0
    for depth in range(1, i_max + 1):
        cube = TreeCubeClass(depth)
        inner = cube.to_explicit().table.astype(np.int64)
        block = np.zeros((cube.hypothesis_count, host.domain_size), dtype=np.int64)
        block[:, : cube.domain_size] = inner
        j = np.arange(cube.hypothesis_count)[:, None]
        rows.append(offset + 2 * j + block)
        offset += 2 * cube.hypothesis_count
    return HypothesisClass(np.vstack(rows), offset, name=f"g_truncation({i_max})")


# -- implicit tree cube --------------------------------------------------------

def node_level(v: int) -> int:
    return (v + 1).bit_length() - 1


def node_position(v: int) -> int:
    return v + 1 - (1 << node_level(v))


def node_index(level: int, position: int) -> int:
    return (1 << level) - 1 + position


class TreeCubeClass(FiniteClass):
    """Branch witnesses of a complete depth-d tree, evaluated on demand."""

    label_count = 2

    def __init__(self, depth: int):
        if depth < 1:
            raise ContractViolation("tree_cube_class needs d >= 1")
        self.depth = depth
        self.domain_size = (1 << (depth + 1)) - 1
        self.name = f"tree_cube({depth})"
        self._explicit = None

    def __repr__(self):
        return f"<TreeCubeClass d={self.depth} m={self.domain_size} |H|={self.hypothesis_count}>"

    @property
    def hypothesis_count(self) -> int:
        return 1 << (self.depth + 1)

    def upper_range(self, x: int) -> tuple[int, int]:
        """Branch range on which h(x) = 1: the branches through x's right child."""
        self._check_x(x)
        level, pos = node_level(x), node_position(x)
        shift = self.depth - level
        return (2 * pos + 1) << shift, (2 * pos + 2) << shift

    def evaluate(self, h: int, x: int) -> int:
        self._check_h(h)
        a, b = self.upper_range(x)
        return int(a <= h < b)

    def evaluate_branches(self, x: int, branches: np.ndarray) -> np.ndarray:
        a, b = self.upper_range(x)
        return ((branches >= a) & (branches < b)).astype(np.int8)

    def table_for(self, instances) -> np.ndarray:
        instances = list(instances)
        cells = self.hypothesis_count * len(instances)
        if cells > MATERIALIZE_CELLS:
            raise BudgetExceeded(f"materializing {cells} cells of {self!r}", reached=cells)
        u = np.arange(self.hypothesis_count)
        table = np.empty((self.hypothesis_count, len(instances)), dtype=np.int8)
        for col, x in enumerate(instances):
            table[:, col] = self.evaluate_branches(x, u)
        return table

    def restrict(self, instances) -> HypothesisClass:
        instances = list(instances)
        if not instances:
            raise ContractViolation("restrict needs a nonempty instance list")
        for x in instances:
            self._check_x(x)
        return HypothesisClass(self.table_for(instances), 2)

    def to_explicit(self) -> HypothesisClass:
        if self._explicit is None:
            self._explicit = HypothesisClass(self.table_for(range(self.domain_size)), 2, name=self.name)
        return self._explicit

    def full_space(self) -> "TreeCubeSpace":
        return TreeCubeSpace(self, 0, self.hypothesis_count, ())

    def restriction_codes(self, instances) -> np.ndarray:
        """Integer code per branch; two branches share a code iff they agree on ``instances``.

        A branch restricted to a node set is 1 exactly on the set's nodes where
        it turns right, so it is determined by its prefix through the deepest
        such turn.  The code packs that prefix with a leading marker bit.
        """
        d = self.depth
        inside = np.zeros(self.domain_size, dtype=bool)
        inside[np.asarray(list(instances), dtype=np.int64)] = True
        u = np.arange(self.hypothesis_count, dtype=np.int64)
        codes = np.ones(self.hypothesis_count, dtype=np.int64)
        for level in range(d + 1):
            nodes = (1 << level) - 1 + (u >> (d + 1 - level))
            turn = ((u >> (d - level)) & 1).astype(bool)
            sel = inside[nodes] & turn
            codes[sel] = (1 << (level + 1)) | (u[sel] >> (d - level))
        return codes


def tree_cube_class(d: int) -> TreeCubeClass:
    return TreeCubeClass(d)


def _overlap(a0, a1, b0, b1) -> int:
    return max(0, min(a1, b1) - max(a0, b0))


@dataclass(frozen=True)
class TreeCubeSpace:
    """A version space of the tree cube: a dyadic branch range minus dyadic holes.

    Label-1 constraints intersect the range with a dyadic interval, label-0
    constraints punch one out, so this form is closed under filtering.  The
    representation is normalized (holes maximal, range minimal) so equal sets
    have equal keys.
    """

    cls: TreeCubeClass
    lo: int
    hi: int
    removed: tuple = ()

    @property
    def key(self):
        return (self.lo, self.hi, self.removed)

    @property
    def size(self) -> int:
        return (self.hi - self.lo) - sum(b - a for a, b in self.removed)

    def __len__(self):
        return self.size

    def is_empty(self) -> bool:
        return self.hi <= self.lo

    def count_in(self, a: int, b: int) -> int:
        total = _overlap(self.lo, self.hi, a, b)
        if total:
            total -= sum(_overlap(r0, r1, a, b) for r0, r1 in self.removed)
        return total

    def label_counts(self, x: int) -> list[int]:
        if self.is_empty():
            raise ContractViolation("label_counts on an empty version space")
        ones = self.count_in(*self.cls.upper_range(x))
        return [self.size - ones, ones]

    def realizable_labels(self, x: int) -> list[int]:
        zero, one = self.label_counts(x) if not self.is_empty() else (0, 0)
        return [y for y, c in ((0, zero), (1, one)) if c]

    def filter(self, x: int, y: int) -> "TreeCubeSpace":
        self.cls._check_y(y)
        a, b = self.cls.upper_range(x)
        if self.is_empty():
            return self
        if y == 1:
            lo, hi = max(self.lo, a), min(self.hi, b)
            if lo >= hi:
                return _empty(self.cls)
            removed = []
            for r0, r1 in self.removed:
                if r0 <= lo and hi <= r1:
                    return _empty(self.cls)
                if lo <= r0 and r1 <= hi:
                    removed.append((r0, r1))
            return _normalized(self.cls, lo, hi, removed)
        if b <= self.lo or self.hi <= a:
            return self
        if a <= self.lo and self.hi <= b:
            return _empty(self.cls)
        removed = []
        for r0, r1 in self.removed:
            if r0 <= a and b <= r1:
                return self
            if not (a <= r0 and r1 <= b):
                removed.append((r0, r1))
        removed.append((a, b))
        return _normalized(self.cls, self.lo, self.hi, removed)

    def members(self) -> np.ndarray:
        alive = np.ones(self.hi - self.lo, dtype=bool)
        for a, b in self.removed:
            alive[a - self.lo:b - self.lo] = False
        return np.arange(self.lo, self.hi, dtype=np.int64)[alive]

    def rank(self) -> int:
        """Lower bound on the Littlestone dimension by splitting only at tree nodes."""
        if self.is_empty():
            raise ContractViolation("rank of an empty version space")
        return _rank(self.lo, self.hi, self.removed)

    def materialize(self) -> HypothesisClass:
        """Explicit class of the alive branches on the non-constant path nodes."""
        alive = self.members()
        d = self.cls.depth
        nodes = set()
        for u in alive.tolist():
            for level in range(d + 1):
                nodes.add(node_index(level, u >> (d + 1 - level)))
        table = np.stack([self.cls.evaluate_branches(x, alive) for x in sorted(nodes)], axis=1)
        keep = [c for c in range(table.shape[1]) if table[:, c].min() != table[:, c].max()]
        if not keep:
            return HypothesisClass(np.zeros((1, 1), dtype=np.int8), 2)
        return HypothesisClass(table[:, keep], 2)


def _empty(cls):
    return TreeCubeSpace(cls, 0, 0, ())


def _normalized(cls, lo, hi, removed):
    removed = sorted(removed)
    changed = True
    while changed:
        changed = False
        # merge sibling holes into their parent
        for idx in range(len(removed) - 1):
            (a0, a1), (b0, b1) = removed[idx], removed[idx + 1]
            width = a1 - a0
            if a1 == b0 and b1 - b0 == width and a0 % (2 * width) == 0:
                removed[idx:idx + 2] = [(a0, b1)]
                changed = True
                break
        if changed:
            continue
        if len(removed) == 1 and removed[0] == (lo, hi):
            return _empty(cls)
        # a hole covering half the range shrinks the range to the other half
        mid = (lo + hi) // 2
        if hi - lo >= 2:
            if (lo, mid) in removed:
                removed.remove((lo, mid))
                lo = mid
                changed = True
            elif (mid, hi) in removed:
                removed.remove((mid, hi))
                hi = mid
                changed = True
    return TreeCubeSpace(cls, lo, hi, tuple(removed))


def _rank(lo, hi, removed) -> int:
    if not removed:
        return (hi - lo).bit_length() - 1
    if len(removed) == 1 and removed[0] == (lo, hi):
        return -1
    mid = (lo + hi) // 2
    left = _rank(lo, mid, tuple(r for r in removed if r[1] <= mid))
    right = _rank(mid, hi, tuple(r for r in removed if r[0] >= mid))
    if left < 0 or right < 0:
        return max(left, right)
    return 1 + min(left, right)


# -- specs -----------------------------------------------------------------------

FAMILIES = ("thresholds", "full_cube", "multiclass_cube", "singleton", "tree_cube",
            "ds_claim", "g_truncation", "random")


@dataclass(frozen=True)
class ClassSpec:
    """A family name plus its integer parameters; ``build`` is deterministic."""

    family: str
    params: tuple = ()
    seed: int = 0

    def build(self) -> FiniteClass:
        p = self.params
        if self.family == "thresholds":
            return thresholds(*p)
        if self.family in ("full_cube", "cube"):
            return full_cube(*p)
        if self.family == "multiclass_cube":
            return multiclass_cube(*p)
        if self.family == "singleton":
            return singleton(*p)
        if self.family in ("tree_cube", "tree-cube"):
            return tree_cube_class(*p)
        if self.family in ("ds_claim", "ds-claim"):
            return ds_claim_class(*p)
        if self.family in ("g_truncation", "g-truncation"):
            return g_truncation(*p)
        if self.family == "random":
            return random_class(*p, seed=self.seed)
        raise ContractViolation(f"unknown family {self.family!r}")
