"""Learner and adversary strategies for the transductive game.

Learners: ``start(cls, sequence, rng)``, then per round ``predict(t)`` and
``observe(t, label)``.  Deterministic learners support ``fork()`` so an
exhaustive adversary can branch them.  All label ties go to the lowest label.

Adversaries: ``start(cls, n, rng)`` returns the instance sequence, then
``label(t, prediction)`` answers each round.  ``realizable`` says whether
every emitted prefix is consistent with the class.  In agnostic play the
engine calls ``label`` before the learner predicts and passes no prediction.
"""

from __future__ import annotations

import copy
import math
from typing import Optional

import numpy as np

from .dimensions import DimensionBudget, littlestone_dim, natarajan_dim, threshold_dim, vc_dim
from .errors import ContractViolation, ProtocolViolation
from .game import SequenceGame, best_sequence
from .hypothesis import FiniteClass, as_explicit
from .trees import LittlestoneTree, bfs_sequence, littlestone_witness_tree, shatters, tree_cube_tree
from .zoo import TreeCubeClass


def _argmax_low(values) -> int:
    best = 0
    for i, v in enumerate(values):
        if v > values[best]:
            best = i
    return best


# -- the class as seen through the sequence -----------------------------------------

class ExplicitProjection:
    """H restricted to the sequence's instances, as an explicit class."""

    def __init__(self, cls: FiniteClass, sequence):
        key = tuple(sorted(set(sequence)))
        cache = getattr(cls, "_cache", None)
        restricted = cache.get(("restrict", key)) if cache is not None else None
        if restricted is None:
            restricted = as_explicit(cls.restrict(list(key)))
            if cache is not None:
                cache[("restrict", key)] = restricted
        self.cls = restricted
        self.col = {x: i for i, x in enumerate(key)}

    def start(self):
        return self.cls.full_space()

    def counts(self, state, x) -> list[int]:
        return state.label_counts(self.col[x])

    def filter(self, state, x, y):
        return state.filter(self.col[x], y)

    def size(self, state) -> int:
        return state.size


class TreeCubeProjection:
    """Distinct restrictions of tree-cube branches, counted without a table.

    The state is the class-level branch space; its image in H|x is the set of
    distinct restriction codes among the alive branches.
    """

    def __init__(self, cls: TreeCubeClass, sequence):
        self.cls = cls
        self.codes = cls.restriction_codes(set(sequence))

    def start(self):
        return self.cls.full_space()

    def _representatives(self, state) -> np.ndarray:
        alive = state.members()
        _, first = np.unique(self.codes[alive], return_index=True)
        return alive[first]

    def counts(self, state, x) -> list[int]:
        reps = self._representatives(state)
        ones = int(self.cls.evaluate_branches(x, reps).sum())
        return [len(reps) - ones, ones]

    def filter(self, state, x, y):
        return state.filter(x, y)

    def size(self, state) -> int:
        return len(self._representatives(state))


def projection(cls: FiniteClass, sequence):
    if isinstance(cls, TreeCubeClass):
        return TreeCubeProjection(cls, sequence)
    return ExplicitProjection(cls, sequence)


# -- learners ---------------------------------------------------------------------------

class Learner:
    name = "learner"
    deterministic = True

    def start(self, cls: FiniteClass, sequence, rng=None):
        self.cls = cls
        self.sequence = [int(x) for x in sequence]
        self.rng = rng
        return self

    def predict(self, t: int) -> int:
        raise NotImplementedError

    def observe(self, t: int, y: int) -> None:
        pass

    def fork(self):
        return copy.copy(self)


class HalvingLearner(Learner):
    """Majority vote of the version space inside H|x."""

    name = "halving"

    def start(self, cls, sequence, rng=None):
        super().start(cls, sequence, rng)
        self.view = projection(cls, self.sequence)
        self.state = self.view.start()
        return self

    def predict(self, t):
        return _argmax_low(self.view.counts(self.state, self.sequence[t]))

    def observe(self, t, y):
        self.state = self.view.filter(self.state, self.sequence[t], y)
        if self.state.is_empty():
            raise ProtocolViolation(f"round {t}: label {y} empties the version space", round_index=t)

    @property
    def version_space_size(self) -> int:
        return self.view.size(self.state)


class SOALearner(Learner):
    """Predict the label whose restriction keeps the largest Littlestone dimension."""

    name = "soa"

    def start(self, cls, sequence, rng=None):
        super().start(cls, sequence, rng)
        self.state = cls.full_space()
        return self

    def predict(self, t):
        x = self.sequence[t]
        labels = self.state.realizable_labels(x)
        if not labels:
            raise ProtocolViolation(f"round {t}: empty version space", round_index=t)
        if len(labels) == 1:
            return labels[0]
        scores = [(littlestone_dim(self.state.filter(x, y)), -y) for y in labels]
        return -max(scores)[1]

    def observe(self, t, y):
        self.state = self.state.filter(self.sequence[t], y)
        if self.state.is_empty():
            raise ProtocolViolation(f"round {t}: label {y} empties the version space", round_index=t)


class MWLearner(Learner):
    """Randomized weighted majority over H|x with multiplicative penalty exp(-eta) per error.

    Weights are kept as logs so they stay positive however long the run.
    Default eta is sqrt(8 ln N / n) with N = |H|x|.
    """

    name = "mw"
    deterministic = False

    def __init__(self, eta: Optional[float] = None):
        if eta is not None and eta < 0:
            raise ContractViolation("eta must be >= 0")
        self.eta_override = eta

    def start(self, cls, sequence, rng=None):
        super().start(cls, sequence, rng)
        if rng is None:
            raise ContractViolation("MWLearner needs an injected random generator")
        view = ExplicitProjection(cls, self.sequence)
        self.table = view.cls.table
        self.col = view.col
        size, n = self.table.shape[0], max(1, len(self.sequence))
        self.eta = self.eta_override if self.eta_override is not None else math.sqrt(8 * math.log(size) / n)
        self.log_weights = np.zeros(size)
        return self

    def probabilities(self, t) -> np.ndarray:
        w = np.exp(self.log_weights - self.log_weights.max())
        votes = np.bincount(self.table[:, self.col[self.sequence[t]]], weights=w, minlength=self.cls.label_count)
        return votes / votes.sum()

    def predict(self, t):
        return int(self.rng.choice(self.cls.label_count, p=self.probabilities(t)))

    def observe(self, t, y):
        wrong = self.table[:, self.col[self.sequence[t]]] != y
        self.log_weights[wrong] -= self.eta

    @property
    def weights(self) -> np.ndarray:
        return np.exp(self.log_weights)

    def fork(self):
        twin = copy.copy(self)
        twin.log_weights = self.log_weights.copy()
        return twin


class BestResponseLearner(Learner):
    """Optimal play from the fixed-sequence min-max recursion on H|x."""

    name = "best-response"

    def __init__(self, max_states: int = 2_000_000):
        self.max_states = max_states

    def start(self, cls, sequence, rng=None):
        super().start(cls, sequence, rng)
        view = ExplicitProjection(cls, self.sequence)
        self.game = SequenceGame(view.cls, self.max_states)
        self.cols = tuple(view.col[x] for x in self.sequence)
        self.mask = view.cls.full_mask
        return self

    def predict(self, t):
        return self.game.best_prediction(self.mask, self.cols[t:])

    def observe(self, t, y):
        self.mask &= self.game.cls.label_masks[self.cols[t]][y]
        if not self.mask:
            raise ProtocolViolation(f"round {t}: label {y} empties the version space", round_index=t)

    def value(self) -> int:
        return self.game.value(self.game.cls.full_mask, self.cols)


class RandomLearner(Learner):
    """Uniformly random label each round."""

    name = "random"
    deterministic = False

    def predict(self, t):
        return int(self.rng.integers(self.cls.label_count))


LEARNERS = {
    "halving": HalvingLearner,
    "soa": SOALearner,
    "mw": MWLearner,
    "best-response": BestResponseLearner,
    "random": RandomLearner,
}


# -- adversaries -------------------------------------------------------------------------

class Adversary:
    name = "adversary"
    realizable = True

    def start(self, cls: FiniteClass, n: int, rng=None) -> list:
        raise NotImplementedError

    def label(self, t: int, prediction) -> int:
        raise NotImplementedError


class _Tracking(Adversary):
    """Keeps the class version space so every label can be checked for realizability."""

    def _begin(self, cls, sequence):
        self.cls = cls
        self.sequence = list(sequence)
        self.space = cls.full_space()
        return self.sequence

    def _emit(self, t, y):
        nxt = self.space.filter(self.sequence[t], y)
        if nxt.is_empty():
            raise AssertionError(f"adversary {self.name} chose an unrealizable label at round {t}")
        self.space = nxt
        return y

    def _flip_or_forced(self, t, prediction, allowed=None):
        labels = self.space.realizable_labels(self.sequence[t])
        if allowed is not None:
            labels = [y for y in labels if y in allowed] or labels
        others = [y for y in labels if y != prediction]
        return self._emit(t, others[0] if others else labels[0])


class VCAdversary(_Tracking):
    """Shows a shattered set and contradicts every prediction on it.

    Binary classes use a VC-shattered set; multiclass ones a Natarajan set,
    answering with whichever of f0(x), f1(x) differs from the prediction.
    Extra rounds repeat the last shattered point.
    """

    name = "vc"

    def __init__(self, budget: Optional[DimensionBudget] = None):
        self.budget = budget

    def start(self, cls, n, rng=None):
        if cls.label_count == 2:
            size, points = vc_dim(cls, self.budget)
            self.allowed = [(0, 1)] * size
        else:
            size, w = natarajan_dim(cls, self.budget)
            points = w.instances
            self.allowed = list(zip(w.f0, w.f1))
        points = list(points)[:n]
        self.allowed = self.allowed[:len(points)]
        pad = points[-1] if points else 0
        self.forced_rounds = len(points)
        return self._begin(cls, points + [pad] * (n - len(points)))

    def label(self, t, prediction):
        allowed = self.allowed[t] if t < self.forced_rounds else None
        return self._flip_or_forced(t, prediction, allowed)


class DyadicAdversary(_Tracking):
    """Binary search along a threshold chain.

    With k = min(floor(log2 td), floor(log2 n)) and N = 2**k, the chain is
    re-indexed so the first staircase hypothesis plays the role of the
    all-y0 one: points z_j = x_{j+1} (j = 1..N-1), hypotheses g_i = h_{i+1}
    (i = 0..N-1).  The N-1 points are shown in dyadic order and a prediction
    is contradicted whenever both labels are still realizable inside
    {g_0..g_{N-1}}; otherwise the forced label is given.
    """

    name = "dyadic"

    def __init__(self, budget: Optional[DimensionBudget] = None):
        self.budget = budget

    def start(self, cls, n, rng=None):
        td, w = threshold_dim(cls, self.budget)
        self.y0, self.y1 = w.y0, w.y1
        k = min(td.bit_length() - 1, n.bit_length() - 1) if td >= 1 else 0
        self.levels = k
        if k == 0:
            seq = self._coin_flip_point(cls)
            self.group = None
            return self._begin(cls, [seq] * n)
        size = 1 << k
        points = [w.instances[j] for j in range(1, size)]
        self.group = [w.hypotheses[i] for i in range(size)]
        order = []
        step = size // 2
        while step >= 1:
            order += list(range(step, size, 2 * step))
            step //= 2
        seq = [points[j - 1] for j in order]
        seq += [seq[-1]] * (n - len(seq))
        return self._begin(cls, seq)

    def _coin_flip_point(self, cls):
        vs = cls.full_space()
        for x in range(cls.domain_size):
            if len(vs.realizable_labels(x)) >= 2:
                return x
        return 0

    def label(self, t, prediction):
        x = self.sequence[t]
        if self.group is None:
            return self._flip_or_forced(t, prediction)
        alive = [g for g in self.group if all(self.cls.evaluate(g, xs) == ys
                                             for xs, ys in zip(self.sequence[:t], self.history))]
        options = sorted({self.cls.evaluate(g, x) for g in alive})
        if len(options) >= 2:
            y = next(v for v in options if v != prediction) if prediction in options else options[0]
        else:
            y = options[0]
        self.history.append(y)
        return self._emit(t, y)

    def _begin(self, cls, sequence):
        self.history = []
        return super()._begin(cls, sequence)


def _at_least_fraction(part: int, total: int, exponent: int) -> bool:
    """part / total >= 2**-exponent, in exact integer arithmetic."""
    if part < 1:
        return False
    if exponent >= total.bit_length():
        return True
    return (part << exponent) >= total


class BFSTreeAdversary(_Tracking):
    """Breadth-first walk of a shattered tree that contradicts the learner only on balanced rounds.

    Counts are taken over the branch witnesses of the tree.  The balance
    threshold for the k-th forced round is 1 / 2**(2**(2k)); the ``scaled``
    mode uses 1 / 2**(2k) instead and is meant for exploration only.
    """

    name = "bfs-tree"

    def __init__(self, tree: Optional[LittlestoneTree] = None, scaled: bool = False):
        self.tree = tree
        self.scaled = scaled

    def exponent(self, k: int) -> int:
        return 2 * k if self.scaled else 2 ** (2 * k)

    def start(self, cls, n, rng=None):
        if cls.label_count != 2:
            raise ContractViolation("the tree adversary plays binary classes")
        tree = self.tree
        if tree is None:
            tree = tree_cube_tree(cls.depth) if isinstance(cls, TreeCubeClass) else littlestone_witness_tree(cls)
        if isinstance(cls, TreeCubeClass) and tree == tree_cube_tree(cls.depth):
            # every branch is its own witness, so the witness set is the whole class
            self.witnesses = cls.full_space()
        else:
            found = shatters(cls, tree)
            if found is None:
                raise ContractViolation("the class does not shatter the tree")
            self.witnesses = as_explicit(cls).space(found.values())
        self.used_tree = tree
        self.k = 1
        self.forced = []
        self.ratios = []
        self.k_at_round = []
        return self._begin(cls, bfs_sequence(tree, n))

    def label(self, t, prediction):
        x = self.sequence[t]
        zero, one = self.witnesses.label_counts(x)
        total = zero + one
        e = self.exponent(self.k)
        self.ratios.append((one, total))
        self.k_at_round.append(self.k)
        if _at_least_fraction(one, total, e) and _at_least_fraction(zero, total, e):
            y = 1 - prediction
            self.forced.append(t)
            self.k += 1
        elif not _at_least_fraction(one, total, e):
            y = 0
        else:
            y = 1
        self.witnesses = self.witnesses.filter(x, y)
        return self._emit(t, y)


class MinimaxAdversary(_Tracking):
    """Plays a value-maximizing sequence and the value-maximizing label each round."""

    name = "minimax"

    def start(self, cls, n, rng=None):
        self.explicit = as_explicit(cls)
        value, seq = best_sequence(self.explicit, n)
        seq = list(seq)
        if not seq:
            seq = [0]
        seq += [seq[-1]] * (n - len(seq))
        self.game = SequenceGame(self.explicit)
        self.mask = self.explicit.full_mask
        self.value = value
        return self._begin(cls, seq)

    def label(self, t, prediction):
        y = self.game.best_label(self.mask, tuple(self.sequence[t:]), prediction)
        self.mask &= self.explicit.label_masks[self.sequence[t]][y]
        return self._emit(t, y)


class RandomLabelAdversary(Adversary):
    """Agnostic: d shattered points, each shown in a block of k = n // d rounds, with fair coin labels.

    The n - k*d leftover rounds repeat the first point and are left out of
    regret accounting through ``accounted_rounds``.
    """

    name = "random"
    realizable = False

    def __init__(self, points=None):
        self.points = points

    def start(self, cls, n, rng=None):
        if rng is None:
            raise ContractViolation("RandomLabelAdversary needs an injected random generator")
        points = self.points
        if points is None:
            if cls.label_count != 2:
                raise ContractViolation("random label adversary needs a binary class")
            points = vc_dim(cls)[1]
        points = list(points)
        d = len(points)
        if d < 1:
            raise ContractViolation("random label adversary needs a shattered point")
        block = n // d
        self.block = block
        self.accounted_rounds = block * d
        seq = [p for p in points for _ in range(block)]
        seq += [points[0]] * (n - len(seq))
        self.labels = rng.integers(0, 2, size=n).tolist()
        return seq

    def label(self, t, prediction):
        return self.labels[t]


class UniformLabelAdversary(Adversary):
    """Agnostic: cycles through the domain (or a given sequence) with uniform random labels."""

    name = "uniform"
    realizable = False

    def __init__(self, sequence=None):
        self.given = sequence

    def start(self, cls, n, rng=None):
        if rng is None:
            raise ContractViolation("UniformLabelAdversary needs an injected random generator")
        base = list(self.given) if self.given is not None else list(range(cls.domain_size))
        seq = [base[t % len(base)] for t in range(n)]
        self.labels = rng.integers(0, cls.label_count, size=n).tolist()
        return seq

    def label(self, t, prediction):
        return self.labels[t]


ADVERSARIES = {
    "vc": VCAdversary,
    "dyadic": DyadicAdversary,
    "bfs-tree": BFSTreeAdversary,
    "minimax": MinimaxAdversary,
    "random": RandomLabelAdversary,
    "uniform": UniformLabelAdversary,
}
