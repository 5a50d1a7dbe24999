import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from translab import (ContractViolation, HypothesisClass, LabeledSequence, evaluate, filter_version_space,
                      is_realizable, label_counts, read_hyp, restrict, write_hyp)
from translab.hypothesis import as_explicit, consistent_space, dumps_hyp, loads_hyp, mask_members
from translab.zoo import full_cube, singleton, thresholds

from conftest import small_classes


# 1-based chain points x1, x2, x3 are instance indices 0, 1, 2
X1, X2, X3 = 0, 1, 2


def test_threshold_evaluation():
    t3 = thresholds(3)
    assert evaluate(t3, 2, 1) == 1
    assert evaluate(t3, 0, 2) == 0


def test_evaluate_rejects_out_of_range():
    t3 = thresholds(3)
    with pytest.raises(ContractViolation):
        evaluate(t3, 4, 0)
    with pytest.raises(ContractViolation):
        evaluate(t3, 0, 3)


def test_restrict_examples():
    assert restrict(full_cube(3), [0]).hypothesis_count == 2
    assert restrict(thresholds(3), [0, 1, 2]).hypothesis_count == 4
    assert restrict(thresholds(3), [1]).hypothesis_count == 2


def test_realizability_examples():
    t3 = thresholds(3)
    assert is_realizable(t3, [(X1, 1), (X2, 0)])
    assert not is_realizable(t3, [(X1, 0), (X2, 1)])
    assert is_realizable(t3, [])
    assert is_realizable(full_cube(2), LabeledSequence([(0, 1), (1, 0)]))


def test_filter_examples():
    t3 = thresholds(3)
    vs = filter_version_space(t3.full_space(), X2, 1)
    assert vs.members() == [2, 3]
    vs = filter_version_space(vs, X3, 0)
    assert vs.members() == [2]
    assert filter_version_space(vs, X3, 0) == vs


def test_label_count_examples():
    t3 = thresholds(3)
    assert label_counts(t3.full_space(), X2) == [2, 2]
    assert label_counts(t3.full_space(), X1) == [1, 3]
    assert sorted(label_counts(singleton(3).full_space(), 1)) == [0, 1]


def test_label_counts_on_empty_space_raises():
    t3 = thresholds(3)
    empty = t3.full_space().filter(X1, 0).filter(X2, 1)
    assert empty.is_empty()
    with pytest.raises(ContractViolation):
        empty.label_counts(0)


def test_construction_dedups_keeping_first():
    cls = HypothesisClass([[1, 0], [0, 0], [1, 0]])
    assert cls.hypothesis_count == 2
    assert cls.table.tolist() == [[1, 0], [0, 0]]
    assert not cls.table.flags.writeable


@pytest.mark.parametrize("table,k", [([[0, 2]], 2), ([[-1, 0]], 2), ([], 2), ([[0]], 1)])
def test_construction_rejects_bad_tables(table, k):
    with pytest.raises(ContractViolation):
        HypothesisClass(np.array(table), k)


def test_labeled_sequence_validate():
    LabeledSequence([(0, 1)]).validate(thresholds(3))
    with pytest.raises(ContractViolation):
        LabeledSequence([(5, 1)]).validate(thresholds(3))
    with pytest.raises(ContractViolation):
        LabeledSequence([(0, 2)]).validate(thresholds(3))


def test_mask_members():
    assert mask_members(0) == []
    assert mask_members(0b10110) == [1, 2, 4]


def test_hyp_roundtrip(tmp_path):
    cls = thresholds(4)
    path = tmp_path / "t4.hyp"
    write_hyp(cls, path)
    text = path.read_text()
    assert text.splitlines()[0] == "HYP 1 4 2 5"
    assert read_hyp(path) == cls
    assert dumps_hyp(read_hyp(path)) == text


@pytest.mark.parametrize("text", [
    "",
    "HYP 2 1 2 1\n0\n",
    "HYP 1 2 2 2\n0 0\n",
    "HYP 1 2 2 1\n0 2\n",
    "HYP 1 2 2 2\n0 1\n0 1\n",
    "HYP 1 2 2 1\n0 1 \n",
    "HYP 1 2 2 1\n0\n",
    "HYP 1 x 2 1\n0\n",
])
def test_hyp_parser_is_strict(text):
    with pytest.raises(ContractViolation):
        loads_hyp(text)


@settings(max_examples=60, deadline=None)
@given(small_classes())
def test_hyp_roundtrip_property(cls):
    assert loads_hyp(dumps_hyp(cls)) == cls


@settings(max_examples=80, deadline=None)
@given(small_classes(), st.data())
def test_filter_matches_brute_force(cls, data):
    """Bitset filtering against a row scan."""
    steps = data.draw(st.lists(st.tuples(st.integers(0, cls.domain_size - 1),
                                         st.integers(0, cls.label_count - 1)), max_size=4))
    vs = consistent_space(cls, steps)
    expect = [h for h in range(cls.hypothesis_count) if all(cls.table[h, x] == y for x, y in steps)]
    assert vs.members() == expect
    assert is_realizable(cls, steps) == bool(expect)
    if expect:
        for x in range(cls.domain_size):
            counts = vs.label_counts(x)
            assert sum(counts) == vs.size
            assert counts == [sum(cls.table[h, x] == y for h in expect) for y in range(cls.label_count)]


@settings(max_examples=60, deadline=None)
@given(small_classes(), st.data())
def test_filter_monotone_and_idempotent(cls, data):
    x = data.draw(st.integers(0, cls.domain_size - 1))
    y = data.draw(st.integers(0, cls.label_count - 1))
    vs = cls.full_space()
    once = vs.filter(x, y)
    assert once.issubset(vs)
    assert once.filter(x, y) == once


@settings(max_examples=60, deadline=None)
@given(small_classes(), st.data())
def test_restriction_is_row_projection(cls, data):
    cols = data.draw(st.lists(st.integers(0, cls.domain_size - 1), min_size=1, max_size=cls.domain_size,
                              unique=True))
    sub = restrict(cls, cols)
    assert sub.row_set() == {tuple(r) for r in cls.table[:, cols].tolist()}
    assert sub.hypothesis_count <= cls.hypothesis_count


def test_as_explicit_passes_explicit_through():
    cls = thresholds(2)
    assert as_explicit(cls) is cls


def test_full_cube_rows_are_all_functions():
    cls = full_cube(3)
    assert cls.row_set() == set(itertools.product((0, 1), repeat=3))
