import itertools
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from translab import ContractViolation
from translab.dimensions import DimensionBudget, littlestone_dim
from translab.game import best_sequence, fixed_sequence_value, run_agnostic, run_realizable, worst_case_mistakes
from translab.hypothesis import as_explicit
from translab.strategies import (ADVERSARIES, LEARNERS, BestResponseLearner, BFSTreeAdversary, DyadicAdversary,
                                 ExplicitProjection, HalvingLearner, MinimaxAdversary, MWLearner,
                                 RandomLabelAdversary, RandomLearner, SOALearner, TreeCubeProjection,
                                 UniformLabelAdversary, VCAdversary, _at_least_fraction)
from translab.trees import tree_cube_tree
from translab.zoo import full_cube, singleton, thresholds, tree_cube_class

from conftest import small_classes


def suite():
    return [HalvingLearner(), SOALearner(), BestResponseLearner()]


# -- learners -----------------------------------------------------------------------

def test_halving_examples():
    assert run_realizable(full_cube(3), VCAdversary(), HalvingLearner(), 3).mistakes == 3
    t7 = thresholds(7)
    for seq in [range(7), [3, 1, 5, 0, 2, 4, 6], [6, 5, 4, 3, 2, 1, 0]]:
        assert worst_case_mistakes(t7, HalvingLearner(), list(seq)) <= 3
    assert worst_case_mistakes(singleton(3), HalvingLearner(), [0, 1, 2]) == 0


def test_soa_examples():
    t7 = thresholds(7)
    for adv in (DyadicAdversary(), MinimaxAdversary(), VCAdversary()):
        assert run_realizable(t7, adv, SOALearner(), 7).mistakes <= 3
    assert run_realizable(full_cube(3), VCAdversary(), SOALearner(), 3).mistakes <= 3
    assert worst_case_mistakes(singleton(3), SOALearner(), [0, 1]) == 0


def test_best_response_examples():
    assert worst_case_mistakes(thresholds(3), BestResponseLearner(), [1, 2, 0]) <= 2
    for seq in itertools.permutations(range(3)):
        assert worst_case_mistakes(full_cube(3), BestResponseLearner(), list(seq)) <= 3
    assert worst_case_mistakes(singleton(2), BestResponseLearner(), [0, 1]) == 0


@settings(max_examples=60, deadline=None)
@given(small_classes(max_m=4, max_h=12), st.data())
def test_halving_and_soa_bounds(cls, data):
    seq = data.draw(st.lists(st.integers(0, cls.domain_size - 1), min_size=1, max_size=5))
    hx = as_explicit(cls.restrict(sorted(set(seq)))).hypothesis_count
    assert worst_case_mistakes(cls, HalvingLearner(), seq) <= hx.bit_length() - 1
    assert worst_case_mistakes(cls, SOALearner(), seq) <= littlestone_dim(cls)
    assert worst_case_mistakes(cls, BestResponseLearner(), seq) == fixed_sequence_value(cls, seq)


def test_ties_go_to_lowest_label():
    learner = HalvingLearner().start(full_cube(2), [0, 1])
    assert learner.predict(0) == 0
    learner = SOALearner().start(full_cube(2), [0, 1])
    assert learner.predict(0) == 0


def test_implicit_halving_matches_explicit():
    tc = tree_cube_class(3)
    ex = tc.to_explicit()
    rng = np.random.default_rng(1)
    for _ in range(30):
        seq = rng.integers(0, tc.domain_size, size=6).tolist()
        imp_view, ex_view = TreeCubeProjection(tc, seq), ExplicitProjection(ex, seq)
        a, b = imp_view.start(), ex_view.start()
        branch = int(rng.integers(tc.hypothesis_count))
        for x in seq:
            assert imp_view.counts(a, x) == ex_view.counts(b, x)
            assert imp_view.size(a) == ex_view.size(b)
            y = tc.evaluate(branch, x)
            a, b = imp_view.filter(a, x, y), ex_view.filter(b, x, y)


def test_mw_singleton_has_no_regret():
    rep = run_agnostic(singleton(2), UniformLabelAdversary(), MWLearner(), 25, trials=10, seed=0)
    assert rep.mean_regret == 0


def test_mw_weights_and_fork():
    learner = MWLearner().start(thresholds(7), list(range(7)), np.random.default_rng(0))
    assert learner.eta == pytest.approx(np.sqrt(8 * np.log(8) / 7))
    twin = learner.fork()
    for t in range(7):
        learner.observe(t, 1)
    assert (learner.weights > 0).all()
    assert (twin.weights == 1).all()
    assert learner.probabilities(0).sum() == pytest.approx(1.0)


def test_mw_flip_adversary_two_experts():
    """Labels always oppose the current weighted majority of two experts."""
    cls = full_cube(1)
    n, trials = 200, 200
    rng = np.random.default_rng(5)
    regrets = []
    for _ in range(trials):
        learner = MWLearner().start(cls, [0] * n, rng)
        mistakes, labels = 0.0, []
        for t in range(n):
            p = learner.probabilities(t)
            y = int(p[1] < p[0]) if p[0] != p[1] else int(rng.integers(2))
            mistakes += 1 - p[y]
            learner.observe(t, y)
            labels.append(y)
        best = min(labels.count(0), labels.count(1))
        regrets.append(mistakes - best)
    assert np.mean(regrets) <= np.sqrt(n / 2 * np.log(2)) + 1


def test_mw_needs_rng():
    with pytest.raises(ContractViolation):
        MWLearner().start(thresholds(2), [0, 1], None)
    with pytest.raises(ContractViolation):
        MWLearner(eta=-1)


def test_registries():
    assert set(LEARNERS) == {"halving", "soa", "mw", "best-response", "random"}
    assert {"vc", "dyadic", "bfs-tree", "minimax", "random"} <= set(ADVERSARIES)


# -- adversaries ------------------------------------------------------------------------------

def test_vc_adversary_forces_the_shattered_prefix():
    for learner in suite() + [MWLearner(), RandomLearner()]:
        tr = run_realizable(full_cube(3), VCAdversary(), learner, 5, seed=2)
        assert tr.mistake_set >= {0, 1, 2}
    assert run_realizable(singleton(2), VCAdversary(), HalvingLearner(), 3).mistakes == 0


def test_dyadic_examples():
    t7 = thresholds(7)
    assert run_realizable(t7, DyadicAdversary(), HalvingLearner(), 7).mistakes >= 2
    assert run_realizable(t7, DyadicAdversary(), BestResponseLearner(), 7).mistakes >= 2
    for learner in suite() + [RandomLearner()]:
        assert run_realizable(thresholds(1), DyadicAdversary(), learner, 1, seed=3).mistakes >= 1


@pytest.mark.parametrize("N", [3, 7, 15, 31])
def test_dyadic_forces_log_levels(N):
    cls = thresholds(N)
    for n in (N, N // 2 + 1):
        k = min(N.bit_length() - 1, n.bit_length() - 1)
        for learner in (HalvingLearner(), SOALearner()):
            adv = DyadicAdversary(DimensionBudget(max_instances=64))
            assert run_realizable(cls, adv, learner, n).mistakes >= k


def test_minimax_adversary_attains_value():
    for cls in (thresholds(3), full_cube(3), thresholds(5)):
        value, _ = best_sequence(cls, cls.domain_size)
        tr = run_realizable(cls, MinimaxAdversary(), BestResponseLearner(), cls.domain_size)
        assert tr.mistakes == value


def test_at_least_fraction_exact():
    for part in range(0, 9):
        for total in range(max(1, part), 9):
            for e in range(0, 6):
                assert _at_least_fraction(part, total, e) == (part >= 1 and Fraction(part, total) >= Fraction(1, 2 ** e))
    # huge exponents never build the power
    assert _at_least_fraction(1, 2 ** 17, 2 ** 64)


def test_bfs_tree_small_regime():
    tc = tree_cube_class(4)
    learners = suite() + [RandomLearner() for _ in range(5)]
    for i, learner in enumerate(learners):
        adv = BFSTreeAdversary()
        tr = run_realizable(tc, adv, learner, 16, seed=i)
        assert tr.mistakes >= 1
        assert len(adv.forced) >= 1 and set(adv.forced) <= tr.mistake_set
        # every prefix is consistent with some branch of the tree
        vs = tc.full_space()
        for x, y in zip(tr.sequence, tr.labels):
            vs = vs.filter(x, y)
            assert vs.size >= 1


def test_bfs_tree_on_explicit_class_and_scaled_mode():
    cube = full_cube(3)
    tr = run_realizable(cube, BFSTreeAdversary(), HalvingLearner(), 7)
    assert tr.mistakes >= 1
    adv = BFSTreeAdversary(scaled=True)
    assert adv.exponent(2) == 4 and BFSTreeAdversary().exponent(2) == 16
    run_realizable(tree_cube_class(3), adv, SOALearner(), 15)
    assert adv.k_at_round[0] == 1


def test_bfs_tree_rejects_unshattered_tree():
    with pytest.raises(ContractViolation):
        run_realizable(singleton(7), BFSTreeAdversary(tree_cube_tree(2)), HalvingLearner(), 7)


def test_random_label_adversary_blocks():
    adv = RandomLabelAdversary()
    seq = adv.start(full_cube(2), 101, np.random.default_rng(0))
    assert adv.accounted_rounds == 100 and adv.block == 50
    assert seq[:50] == [seq[0]] * 50 and seq[50:100] == [seq[50]] * 50 and seq[100] == seq[0]
    with pytest.raises(ContractViolation):
        RandomLabelAdversary().start(full_cube(2), 10, None)
    with pytest.raises(ContractViolation):
        RandomLabelAdversary().start(singleton(2), 10, np.random.default_rng(0))


def test_uniform_adversary_cycles():
    adv = UniformLabelAdversary()
    seq = adv.start(thresholds(3), 7, np.random.default_rng(0))
    assert seq == [0, 1, 2, 0, 1, 2, 0]
    assert set(adv.labels) <= {0, 1}
