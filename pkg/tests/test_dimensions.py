import itertools
import math
from functools import lru_cache

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from translab import BudgetExceeded, ContractViolation, HypothesisClass
from translab.dimensions import (DimensionBudget, MTDWitness, dimension_report, ds_dim, has_pseudocube,
                                 is_pseudocube, ld_choice, littlestone_dim, mtd, mtd_to_threshold_extract,
                                 multiclass_sauer_bound, multiclass_sauer_check, natarajan_dim, sauer_bound,
                                 sauer_check, threshold_dim, vc_dim, verify_ds, verify_mtd, verify_natarajan,
                                 verify_shattered_set, verify_threshold)
from translab.zoo import ds_claim_class, full_cube, multiclass_cube, singleton, thresholds

from conftest import binary_classes, small_classes


# -- independent oracles: plain enumeration over row sets ------------------------

def rows_of(cls):
    return frozenset(tuple(r) for r in cls.table.tolist())


def brute_vc(cls):
    rows, m = rows_of(cls), cls.domain_size
    best = 0
    for size in range(1, m + 1):
        for cols in itertools.combinations(range(m), size):
            if len({tuple(r[c] for c in cols) for r in rows}) == 2 ** size:
                best = size
    return best


def brute_ld(cls):
    m, k = cls.domain_size, cls.label_count

    @lru_cache(maxsize=None)
    def ld(rows):
        if len(rows) <= 1:
            return 0
        best = 0
        for x in range(m):
            parts = [frozenset(r for r in rows if r[x] == y) for y in range(k)]
            parts = [p for p in parts if p]
            if len(parts) < 2:
                continue
            vals = sorted((ld(p) for p in parts), reverse=True)
            best = max(best, 1 + vals[1])
        return best

    return ld(rows_of(cls))


def brute_td(cls, binary_labels=True):
    rows, m, k = rows_of(cls), cls.domain_size, cls.label_count
    pairs = [(0, 1)] if k == 2 and binary_labels else list(itertools.permutations(range(k), 2))
    best = 0
    for t in range(1, m + 1):
        for xs in itertools.permutations(range(m), t):
            for y0, y1 in pairs:
                if all(any(all(r[xs[j]] == (y1 if j <= i else y0) for j in range(t)) for r in rows)
                       for i in range(t)):
                    best = t
    return best


def brute_nd(cls):
    rows, m = rows_of(cls), cls.domain_size
    best = 0
    for size in range(1, m + 1):
        for cols in itertools.combinations(range(m), size):
            proj = {tuple(r[c] for c in cols) for r in rows}
            for f0 in proj:
                for f1 in proj:
                    if any(a == b for a, b in zip(f0, f1)):
                        continue
                    if all(tuple(f1[i] if bit else f0[i] for i, bit in enumerate(bits)) in proj
                           for bits in itertools.product((0, 1), repeat=size)):
                        best = size
    return best


def brute_mtd(cls):
    rows, m = list(rows_of(cls)), cls.domain_size
    best = 0
    for t in range(1, m + 1):
        for xs in itertools.permutations(range(m), t):
            # candidate rows per i: constant on x_1..x_i
            cands = [[r for r in rows if len({r[xs[j]] for j in range(i + 1)}) == 1] for i in range(t)]
            for pick in itertools.product(*cands):
                ys = [pick[i][xs[0]] for i in range(t)]
                cols = {}
                ok = True
                for i in range(t):
                    for j in range(i + 1, t):
                        v = pick[i][xs[j]]
                        if cols.setdefault(j, v) != v:
                            ok = False
                if ok and not set(ys) & set(cols.values()):
                    best = t
                    break
    return best


def brute_ds(cls):
    rows, m = rows_of(cls), cls.domain_size
    best = 0
    for d in range(1, m + 1):
        for cols in itertools.combinations(range(m), d):
            proj = [tuple(r[c] for c in cols) for r in rows]
            proj = sorted(set(proj))
            # any nonempty subset that is a pseudocube
            if any(is_pseudocube(sub, d) for size in range(2, len(proj) + 1)
                   for sub in itertools.combinations(proj, size)):
                best = d
    return best


# -- VC ----------------------------------------------------------------------------

def test_vc_examples():
    assert vc_dim(full_cube(3))[0] == 3
    assert vc_dim(thresholds(5))[0] == 1
    assert vc_dim(singleton(3))[0] == 0


def test_vc_multiclass_rejected():
    with pytest.raises(ContractViolation):
        vc_dim(multiclass_cube(2, 3))


@settings(max_examples=80, deadline=None)
@given(binary_classes())
def test_vc_matches_enumeration(cls):
    d, cols = vc_dim(cls)
    assert d == brute_vc(cls)
    assert len(cols) == d and verify_shattered_set(cls, cols)


# -- Littlestone -----------------------------------------------------------------------

def test_ld_examples():
    assert littlestone_dim(full_cube(3)) == 3
    assert littlestone_dim(thresholds(7)) == 3
    assert littlestone_dim(singleton()) == 0


@settings(max_examples=80, deadline=None)
@given(small_classes())
def test_ld_matches_enumeration(cls):
    ld = littlestone_dim(cls)
    assert ld == brute_ld(cls)
    assert ld <= cls.hypothesis_count.bit_length() - 1


@settings(max_examples=40, deadline=None)
@given(binary_classes())
def test_ld_choice_splits_the_space(cls):
    vs = cls.full_space()
    choice = ld_choice(vs)
    ld = littlestone_dim(cls)
    if ld == 0:
        assert choice is None
    else:
        x, y0, y1 = choice
        assert min(littlestone_dim(vs.filter(x, y0)), littlestone_dim(vs.filter(x, y1))) == ld - 1


def test_budget_is_enforced():
    with pytest.raises(BudgetExceeded):
        littlestone_dim(thresholds(40))
    assert littlestone_dim(thresholds(40), DimensionBudget(max_instances=64)) == 5


# -- thresholds -----------------------------------------------------------------------

def test_td_examples():
    assert threshold_dim(thresholds(5))[0] == 5
    assert threshold_dim(full_cube(3))[0] == 3
    assert threshold_dim(singleton(2))[0] == 0


@settings(max_examples=50, deadline=None)
@given(small_classes(max_m=4, max_h=8))
def test_td_matches_enumeration(cls):
    t, w = threshold_dim(cls)
    assert t == brute_td(cls)
    assert len(w) == t and verify_threshold(cls, w)


# -- Natarajan --------------------------------------------------------------------------

def test_nd_examples():
    assert natarajan_dim(multiclass_cube(2, 3))[0] == 2
    assert natarajan_dim(singleton(3))[0] == 0


@settings(max_examples=50, deadline=None)
@given(small_classes(max_m=4, max_h=10))
def test_nd_matches_enumeration(cls):
    d, w = natarajan_dim(cls)
    assert d == brute_nd(cls)
    assert len(w) == d and verify_natarajan(cls, w)
    if cls.label_count == 2:
        assert d == vc_dim(cls)[0]


# -- multiclass thresholds --------------------------------------------------------------------

def test_mtd_examples():
    assert mtd(full_cube(3))[0] == 3
    assert mtd(thresholds(5))[0] == 5
    # a one-point chain only needs some column label different from the row label
    assert mtd(singleton())[0] == 1


@settings(max_examples=40, deadline=None)
@given(small_classes(max_m=4, max_h=6))
def test_mtd_matches_enumeration(cls):
    t, w = mtd(cls)
    assert t == brute_mtd(cls)
    assert len(w) == t and verify_mtd(cls, w)


def test_extract_examples():
    _, w = mtd(thresholds(5))
    out = mtd_to_threshold_extract(thresholds(5), w)
    assert len(out) == 5

    # a binary witness of size 5 always keeps at least floor(5/4) points
    rows = [[1, 0, 0, 0, 0], [1, 1, 0, 0, 0], [1, 1, 1, 0, 0], [1, 1, 1, 1, 0], [1, 1, 1, 1, 1]]
    cls = HypothesisClass(np.array(rows))
    w = MTDWitness((0, 1, 2, 3, 4), (0, 1, 2, 3, 4), (1,) * 5, (0,) * 5)
    assert len(mtd_to_threshold_extract(cls, w)) >= 1


def test_extract_rejects_invalid_witness():
    w = MTDWitness((0,), (0,), (1,), (1,))
    with pytest.raises(ContractViolation):
        mtd_to_threshold_extract(thresholds(2), w)


def test_extract_three_labels():
    # 9 points over labels {0,1,2}; rows cycle through labels, columns use a fixed disjoint label
    t, k = 9, 3
    row_labels = [i % 2 for i in range(t)]
    col_labels = [2] * t
    table = [[row_labels[i] if j <= i else col_labels[j] for j in range(t)] for i in range(t)]
    cls = HypothesisClass(np.array(table), k)
    w = MTDWitness(tuple(range(t)), tuple(range(t)), tuple(row_labels), tuple(col_labels))
    assert verify_mtd(cls, w)
    out = mtd_to_threshold_extract(cls, w)
    assert len(out) >= t // k ** 2
    assert verify_threshold(cls, out)


@settings(max_examples=60, deadline=None)
@given(small_classes(max_m=5, max_k=3, max_h=10))
def test_extract_meets_pigeonhole_size(cls):
    t, w = mtd(cls)
    out = mtd_to_threshold_extract(cls, w)
    k = cls.label_count
    assert verify_threshold(cls, out)
    assert len(out) >= t // k ** 2


# -- DS ----------------------------------------------------------------------------------

def test_pseudocube_examples():
    ok, kept = has_pseudocube([(0, 0), (0, 1), (1, 0), (1, 1)], 2)
    assert ok and len(kept) == 4
    assert not has_pseudocube([(0, 0)], 2)[0]
    assert not has_pseudocube([(0, 0), (1, 0), (0, 1)], 2)[0]


def test_pseudocube_contract():
    with pytest.raises(ContractViolation):
        has_pseudocube([], 2)
    with pytest.raises(ContractViolation):
        has_pseudocube([(0, 1, 0)], 2)


@settings(max_examples=150, deadline=None)
@given(st.integers(1, 3), st.data())
def test_pruning_fixpoint_is_largest_pseudocube(d, data):
    vecs = data.draw(st.sets(st.tuples(*[st.integers(0, 2)] * d), min_size=1, max_size=10))
    ok, kept = has_pseudocube(vecs, d)
    assert ok == bool(kept)
    if ok:
        assert is_pseudocube(kept, d)
    # brute force: some subset is a pseudocube iff pruning leaves something
    ordered = sorted(vecs)
    exists = any(is_pseudocube(sub, d) for size in range(2, len(ordered) + 1)
                 for sub in itertools.combinations(ordered, size))
    assert exists == ok


def test_ds_examples():
    for n in (1, 2, 3):
        assert ds_dim(ds_claim_class(n))[0] == 1
    assert ds_dim(full_cube(2))[0] == 2
    assert ds_dim(singleton())[0] == 0


@settings(max_examples=40, deadline=None)
@given(small_classes(max_m=3, max_k=3, max_h=7))
def test_ds_matches_enumeration(cls):
    d, w = ds_dim(cls)
    assert d == brute_ds(cls)
    assert verify_ds(cls, w)


# -- Sauer -------------------------------------------------------------------------------

def test_sauer_examples():
    assert sauer_bound(3, 3) == 8 and sauer_check(full_cube(3))
    assert sauer_bound(5, 1) == 6 and sauer_check(thresholds(5))
    assert multiclass_sauer_bound(2, 3, 2) == 1 + 12 + 36
    assert multiclass_sauer_check(multiclass_cube(2, 3))


@settings(max_examples=80, deadline=None)
@given(small_classes())
def test_sauer_always_holds(cls):
    assert multiclass_sauer_check(cls)
    if cls.label_count == 2:
        assert sauer_check(cls)


# -- relations ---------------------------------------------------------------------------

@settings(max_examples=80, deadline=None)
@given(binary_classes(max_m=6))
def test_binary_relations(cls):
    rep = dimension_report(cls, ("vc", "ld", "td"))
    assert rep.vc <= rep.ld
    if rep.ld >= 1:
        assert rep.td >= int(math.log2(rep.ld))
    if rep.td >= 1:
        assert rep.ld >= int(math.log2(rep.td))


def test_report_skips_vc_for_multiclass():
    rep = dimension_report(multiclass_cube(2, 3), ("vc", "nd"))
    assert rep.vc is None and rep.nd == 2
    with pytest.raises(ContractViolation):
        dimension_report(full_cube(2), ("nope",))
