"""Exact combinatorial dimensions of small classes, with checkable witnesses.

Every search is exhaustive.  Classes larger than the configured budget raise
:class:`BudgetExceeded` instead of returning an unverified number.  Ties in
witness extraction go to the lowest instance, then hypothesis, then label.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import BudgetExceeded, ContractViolation
from .hypothesis import FiniteClass, HypothesisClass, VersionSpace, as_explicit, mask_members
from .zoo import TreeCubeClass, TreeCubeSpace


@dataclass(frozen=True)
class DimensionBudget:
    max_instances: int = 16
    max_hypotheses: int = 4096
    max_nodes: int = 2_000_000


DEFAULT_BUDGET = DimensionBudget()


def _explicit(cls: FiniteClass, budget: Optional[DimensionBudget]) -> HypothesisClass:
    budget = budget or DEFAULT_BUDGET
    if cls.domain_size > budget.max_instances or cls.hypothesis_count > budget.max_hypotheses:
        raise BudgetExceeded(
            f"{cls!r} exceeds the dimension budget "
            f"(m <= {budget.max_instances}, |H| <= {budget.max_hypotheses})",
            reached=(cls.domain_size, cls.hypothesis_count))
    return as_explicit(cls)


def _codes(table: np.ndarray, cols, k: int) -> np.ndarray:
    weights = k ** np.arange(len(cols), dtype=np.int64)
    return table[:, list(cols)].astype(np.int64) @ weights


# -- VC ------------------------------------------------------------------------

def verify_shattered_set(cls: FiniteClass, instances) -> bool:
    """Raw check: every binary pattern on ``instances`` is realized by some row."""
    cls = as_explicit(cls)
    instances = list(instances)
    if len(set(instances)) != len(instances):
        return False
    rows = {tuple(r) for r in cls.table[:, instances].tolist()}
    return all(p in rows for p in itertools.product((0, 1), repeat=len(instances)))


def vc_dim(cls: FiniteClass, budget=None) -> tuple[int, tuple]:
    if cls.label_count != 2:
        raise ContractViolation("vc_dim needs a binary class; use natarajan_dim")
    cls = _explicit(cls, budget)
    best: tuple = ()
    m, size = cls.domain_size, cls.hypothesis_count
    for d in range(1, m + 1):
        if 1 << d > size:
            break
        found = None
        for cols in itertools.combinations(range(m), d):
            if len(np.unique(_codes(cls.table, cols, 2))) == 1 << d:
                found = cols
                break
        if found is None:
            break
        best = found
    return len(best), best


# -- Littlestone -------------------------------------------------------------

def _ld_masks(cls: HypothesisClass, mask: int) -> int:
    memo = cls._cache.setdefault("ld", {})
    columns = cls.label_masks

    def rec(v):
        got = memo.get(v)
        if got is not None:
            return got
        n = v.bit_count()
        if n <= 1:
            memo[v] = 0
            return 0
        cap = n.bit_length() - 1
        best = 0
        for col in columns:
            parts = [v & lm for lm in col]
            parts = [p for p in parts if p]
            if len(parts) < 2:
                continue
            sizes = sorted((p.bit_count() for p in parts), reverse=True)
            if sizes[1].bit_length() <= best:
                continue
            vals = sorted((rec(p) for p in parts), reverse=True)
            if vals[1] + 1 > best:
                best = vals[1] + 1
                if best == cap:
                    break
        memo[v] = best
        return best

    return rec(mask)


def tree_cube_ld(space: TreeCubeSpace, materialize_limit: int = 64) -> int:
    """Littlestone dimension of a tree-cube version space.

    Splitting only at tree nodes gives a lower bound and log2 of the size an
    upper bound; they coincide on every subtree-shaped space.  Otherwise the
    space is materialized when small.
    """
    if space.is_empty():
        raise ContractViolation("Littlestone dimension of an empty version space")
    lower = space.rank()
    upper = space.size.bit_length() - 1
    if lower == upper:
        return lower
    if space.size > materialize_limit:
        raise BudgetExceeded(
            f"tree-cube space of size {space.size} has LD in [{lower}, {upper}]", reached=space.size)
    small = space.materialize()
    return _ld_masks(small, small.full_mask)


def littlestone_dim(obj, budget=None) -> int:
    """Littlestone dimension of a class or of a version space."""
    if isinstance(obj, TreeCubeClass):
        obj = obj.full_space()
    if isinstance(obj, TreeCubeSpace):
        return tree_cube_ld(obj)
    if isinstance(obj, VersionSpace):
        if obj.is_empty():
            raise ContractViolation("Littlestone dimension of an empty version space")
        return _ld_masks(obj.cls, obj.mask)
    cls = _explicit(obj, budget)
    return _ld_masks(cls, cls.full_mask)


def ld_choice(vs: VersionSpace) -> Optional[tuple[int, int, int]]:
    """The (instance, y0, y1) split that attains LD(vs), lowest indices first; None at LD 0."""
    target = _ld_masks(vs.cls, vs.mask)
    if target == 0:
        return None
    for x, col in enumerate(vs.cls.label_masks):
        for y0, y1 in itertools.combinations(range(vs.cls.label_count), 2):
            a, b = vs.mask & col[y0], vs.mask & col[y1]
            if a and b and 1 + min(_ld_masks(vs.cls, a), _ld_masks(vs.cls, b)) == target:
                return x, y0, y1
    raise AssertionError("no split attains the memoized Littlestone dimension")


# -- thresholds ----------------------------------------------------------------

@dataclass(frozen=True)
class ThresholdWitness:
    """h_i(x_j) = y1 when j <= i and y0 otherwise (1-based i, j)."""

    instances: tuple
    hypotheses: tuple
    y0: int = 0
    y1: int = 1

    def __len__(self):
        return len(self.instances)


def verify_threshold(cls: FiniteClass, w: ThresholdWitness) -> bool:
    if w.y0 == w.y1 or len(w.instances) != len(w.hypotheses):
        return False
    for i, h in enumerate(w.hypotheses):
        for j, x in enumerate(w.instances):
            want = w.y1 if j <= i else w.y0
            if cls.evaluate(h, x) != want:
                return False
    return True


class _NodeCounter:
    def __init__(self, limit):
        self.limit = limit
        self.count = 0

    def tick(self):
        self.count += 1
        if self.count > self.limit:
            raise BudgetExceeded(f"search exceeded {self.limit} nodes", reached=self.count)


def _threshold_search(cls: HypothesisClass, y0: int, y1: int, counter) -> ThresholdWitness:
    masks = cls.label_masks
    m = cls.domain_size
    best = [(), ()]

    def dfs(chain, rows, ones):
        counter.tick()
        if len(chain) > len(best[0]):
            best[0] = tuple(chain)
            best[1] = tuple(min(mask_members(r)) for r in rows)
        options = []
        for x in range(m):
            if x in chain:
                continue
            new_ones = ones & masks[x][y1]
            if not new_ones:
                continue
            new_rows = [r & masks[x][y0] for r in rows]
            if all(new_rows):
                options.append((x, new_rows, new_ones))
        if len(chain) + len(options) <= len(best[0]):
            return
        for x, new_rows, new_ones in options:
            chain.append(x)
            dfs(chain, new_rows + [new_ones], new_ones)
            chain.pop()

    dfs([], [], cls.full_mask)
    return ThresholdWitness(best[0], best[1], y0, y1)


def threshold_dim(cls: FiniteClass, budget=None) -> tuple[int, ThresholdWitness]:
    """Longest threshold-shattered chain.

    Binary classes use the staircase with labels (0, 1) fixed; classes with
    more labels may use any ordered pair of distinct labels.
    """
    cls = _explicit(cls, budget)
    counter = _NodeCounter((budget or DEFAULT_BUDGET).max_nodes)
    if cls.label_count == 2:
        pairs = [(0, 1)]
    else:
        pairs = list(itertools.permutations(range(cls.label_count), 2))
    best = ThresholdWitness((), (), 0, 1)
    for y0, y1 in pairs:
        w = _threshold_search(cls, y0, y1, counter)
        if len(w) > len(best):
            best = w
    return len(best), best


# -- Natarajan -----------------------------------------------------------------

@dataclass(frozen=True)
class NatarajanWitness:
    instances: tuple
    f0: tuple
    f1: tuple

    def __len__(self):
        return len(self.instances)


def verify_natarajan(cls: FiniteClass, w: NatarajanWitness) -> bool:
    """Raw check over all 2^d subsets A: some h equals f0 on A and f1 off A."""
    cls = as_explicit(cls)
    if len(set(w.instances)) != len(w.instances):
        return False
    if any(a == b for a, b in zip(w.f0, w.f1)):
        return False
    rows = {tuple(r) for r in cls.table[:, list(w.instances)].tolist()}
    for pick in itertools.product((0, 1), repeat=len(w.instances)):
        want = tuple(w.f0[i] if p else w.f1[i] for i, p in enumerate(pick))
        if want not in rows:
            return False
    return True


def _natarajan_pair(rows: frozenset, width: int):
    """(f0, f1) such that ``rows`` Natarajan-shatters all ``width`` coordinates, or None."""
    if width == 0:
        return ((), ()) if rows else None
    groups: dict = {}
    for r in rows:
        groups.setdefault(r[0], set()).add(r[1:])
    labels = sorted(groups)
    for a, b in itertools.combinations(labels, 2):
        common = frozenset(groups[a] & groups[b])
        if not common:
            continue
        sub = _natarajan_pair(common, width - 1)
        if sub is not None:
            return (a,) + sub[0], (b,) + sub[1]
    return None


def natarajan_dim(cls: FiniteClass, budget=None) -> tuple[int, NatarajanWitness]:
    cls = _explicit(cls, budget)
    best = NatarajanWitness((), (), ())
    m = cls.domain_size
    for d in range(1, m + 1):
        if 1 << d > cls.hypothesis_count:
            break
        found = None
        for cols in itertools.combinations(range(m), d):
            rows = frozenset(map(tuple, cls.table[:, list(cols)].tolist()))
            if len(rows) < 1 << d:
                continue
            pair = _natarajan_pair(rows, d)
            if pair is not None:
                found = NatarajanWitness(cols, pair[0], pair[1])
                break
        if found is None:
            break
        best = found
    return len(best), best


# -- multiclass thresholds -------------------------------------------------------

@dataclass(frozen=True)
class MTDWitness:
    """h_i(x_j) = row_labels[i] when j <= i and col_labels[j] otherwise."""

    instances: tuple
    hypotheses: tuple
    row_labels: tuple
    col_labels: tuple

    def __len__(self):
        return len(self.instances)


def verify_mtd(cls: FiniteClass, w: MTDWitness) -> bool:
    t = len(w.instances)
    if not (len(w.hypotheses) == len(w.row_labels) == len(w.col_labels) == t):
        return False
    if set(w.row_labels) & set(w.col_labels):
        return False
    for lab in itertools.chain(w.row_labels, w.col_labels):
        if not 0 <= lab < cls.label_count:
            return False
    for i, h in enumerate(w.hypotheses):
        for j, x in enumerate(w.instances):
            want = w.row_labels[i] if j <= i else w.col_labels[j]
            if cls.evaluate(h, x) != want:
                return False
    return True


def mtd(cls: FiniteClass, budget=None) -> tuple[int, MTDWitness]:
    """Longest multiclass-threshold-shattered chain, by depth-first search."""
    cls = _explicit(cls, budget)
    counter = _NodeCounter((budget or DEFAULT_BUDGET).max_nodes)
    masks = cls.label_masks
    m, k = cls.domain_size, cls.label_count
    best = [MTDWitness((), (), (), ())]

    def dfs(chain, rows, row_labels, col_labels, prefix):
        # rows[i]: candidates for h_i; prefix[y]: hypotheses equal to y on the whole chain
        counter.tick()
        if len(chain) > len(best[0]):
            best[0] = MTDWitness(tuple(chain), tuple(min(mask_members(r)) for r in rows),
                                 tuple(row_labels), tuple(col_labels))
        remaining = m - len(chain)
        if len(chain) + remaining <= len(best[0]):
            return
        used_rows, used_cols = set(row_labels), set(col_labels)
        for x in range(m):
            if x in chain:
                continue
            for yc in range(k):
                if yc in used_rows:
                    continue
                new_rows = [r & masks[x][yc] for r in rows]
                if not all(new_rows):
                    continue
                for yr in range(k):
                    if yr == yc or yr in used_cols:
                        continue
                    head = prefix[yr] & masks[x][yr]
                    if not head:
                        continue
                    new_prefix = [p & masks[x][y] for y, p in enumerate(prefix)]
                    chain.append(x)
                    dfs(chain, new_rows + [head], row_labels + [yr], col_labels + [yc], new_prefix)
                    chain.pop()
                    if len(best[0]) == m:
                        return

    dfs([], [], [], [], [cls.full_mask] * k)
    return len(best[0]), best[0]


def mtd_to_threshold_extract(cls: FiniteClass, w: MTDWitness) -> ThresholdWitness:
    """Two pigeonhole passes: keep the most common row label, then the most common column label.

    The first kept index never has its column label read, so it survives the
    second pass; the result has size at least ceil(ceil(t/k)/k) >= floor(t/k^2).
    """
    if not verify_mtd(cls, w):
        raise ContractViolation("input is not a valid multiclass threshold witness")
    t = len(w)
    if t == 0:
        return ThresholdWitness((), (), 0, 1)
    row_freq = {}
    for i in range(t):
        row_freq.setdefault(w.row_labels[i], []).append(i)
    top = max(sorted(row_freq), key=lambda y: len(row_freq[y]))
    keep = row_freq[top]
    head, tail = keep[0], keep[1:]
    col_freq = {}
    for j in tail:
        col_freq.setdefault(w.col_labels[j], []).append(j)
    if col_freq:
        col = max(sorted(col_freq), key=lambda y: len(col_freq[y]))
        chosen = [head] + col_freq[col]
    else:
        col = min(y for y in range(cls.label_count) if y != top)
        chosen = [head]
    out = ThresholdWitness(tuple(w.instances[i] for i in chosen),
                           tuple(w.hypotheses[i] for i in chosen), y0=col, y1=top)
    assert verify_threshold(cls, out)
    return out


# -- DS ------------------------------------------------------------------------------

def has_pseudocube(vectors, d: int) -> tuple[bool, frozenset]:
    """Prune vectors lacking an i-neighbor until nothing changes; nonempty fixpoint is a pseudocube."""
    if d < 1:
        raise ContractViolation("pseudocube dimension must be >= 1")
    alive = {tuple(v) for v in vectors}
    if not alive:
        raise ContractViolation("has_pseudocube needs a nonempty vector set")
    if any(len(v) != d for v in alive):
        raise ContractViolation(f"all vectors must have length {d}")
    changed = True
    while changed and alive:
        changed = False
        for i in range(d):
            groups: dict = {}
            for v in alive:
                groups.setdefault(v[:i] + v[i + 1:], []).append(v)
            lonely = {g[0] for g in groups.values() if len(g) == 1}
            if lonely:
                alive -= lonely
                changed = True
    return bool(alive), frozenset(alive)


def is_pseudocube(vectors, d: int) -> bool:
    """Direct check of the definition, independent of the pruning routine."""
    vecs = {tuple(v) for v in vectors}
    if not vecs:
        return False
    for v in vecs:
        for i in range(d):
            if not any(u != v and all(u[j] == v[j] for j in range(d) if j != i) for u in vecs):
                return False
    return True


@dataclass(frozen=True)
class DSWitness:
    instances: tuple
    pseudocube: frozenset = field(default_factory=frozenset)

    def __len__(self):
        return len(self.instances)


def verify_ds(cls: FiniteClass, w: DSWitness) -> bool:
    cls = as_explicit(cls)
    if not w.instances:
        return True
    rows = {tuple(r) for r in cls.table[:, list(w.instances)].tolist()}
    return w.pseudocube <= rows and is_pseudocube(w.pseudocube, len(w.instances))


def ds_dim(cls: FiniteClass, budget=None) -> tuple[int, DSWitness]:
    """Largest d such that the restriction to some d distinct instances contains a d-pseudocube."""
    cls = _explicit(cls, budget)
    best = DSWitness(())
    m = cls.domain_size
    for d in range(1, m + 1):
        found = None
        for cols in itertools.combinations(range(m), d):
            rows = {tuple(r) for r in cls.table[:, list(cols)].tolist()}
            if len(rows) < 2:
                continue
            ok, cube = has_pseudocube(rows, d)
            if ok:
                found = DSWitness(cols, cube)
                break
        if found is None:
            break
        best = found
    return len(best), best


# -- Sauer-type bounds ------------------------------------------------------------

def sauer_bound(m: int, vc: int) -> int:
    return sum(math.comb(m, i) for i in range(vc + 1))


def multiclass_sauer_bound(m: int, k: int, nd: int) -> int:
    return sum(math.comb(m, i) * math.comb(k + 1, 2) ** i for i in range(nd + 1))


def sauer_check(cls: FiniteClass, vc: Optional[int] = None) -> bool:
    if vc is None:
        vc = vc_dim(cls)[0]
    return cls.hypothesis_count <= sauer_bound(cls.domain_size, vc)


def multiclass_sauer_check(cls: FiniteClass, nd: Optional[int] = None) -> bool:
    if nd is None:
        nd = natarajan_dim(cls)[0]
    return cls.hypothesis_count <= multiclass_sauer_bound(cls.domain_size, cls.label_count, nd)


# -- report ----------------------------------------------------------------------

DIM_NAMES = ("vc", "ld", "td", "nd", "mtd", "ds")


@dataclass
class DimensionReport:
    vc: Optional[int] = None
    ld: Optional[int] = None
    td: Optional[int] = None
    nd: Optional[int] = None
    mtd: Optional[int] = None
    ds: Optional[int] = None
    witnesses: dict = field(default_factory=dict)

    def items(self):
        return [(name, getattr(self, name)) for name in DIM_NAMES]


def dimension_report(cls: FiniteClass, which=DIM_NAMES, budget=None, witnesses=False) -> DimensionReport:
    """Compute the requested dimensions; None marks one that was not computed."""
    rep = DimensionReport()
    for name in which:
        if name == "vc":
            if cls.label_count != 2:
                continue
            rep.vc, rep.witnesses["vc"] = vc_dim(cls, budget)
        elif name == "ld":
            rep.ld = littlestone_dim(cls, budget)
            if witnesses and rep.ld > 0:
                from .trees import littlestone_witness_tree
                rep.witnesses["ld"] = littlestone_witness_tree(as_explicit(cls))
        elif name == "td":
            rep.td, rep.witnesses["td"] = threshold_dim(cls, budget)
        elif name == "nd":
            rep.nd, rep.witnesses["nd"] = natarajan_dim(cls, budget)
        elif name == "mtd":
            rep.mtd, rep.witnesses["mtd"] = mtd(cls, budget)
        elif name == "ds":
            rep.ds, rep.witnesses["ds"] = ds_dim(cls, budget)
        else:
            raise ContractViolation(f"unknown dimension {name!r}")
    return rep
