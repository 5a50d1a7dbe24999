"""The transductive mistake-bound game: protocol runners and exact values.

Realizable runs reveal the whole instance sequence to the learner first,
then alternate predict / label / observe, checking after every round that
the labels so far are consistent with some hypothesis.

Exact values come from a min-max recursion over version spaces.  A learner
never loses by predicting a realizable label, and labels the adversary may
not use (empty restriction) are skipped, so the recursion only branches on
realizable labels.
"""

from __future__ import annotations

import csv
import io
import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import BudgetExceeded, ContractViolation, ProtocolViolation
from .hypothesis import FiniteClass, HypothesisClass, as_explicit


@dataclass(frozen=True)
class GameBudget:
    max_instances: int = 7
    max_hypotheses: int = 64
    max_states: int = 2_000_000


DEFAULT_GAME_BUDGET = GameBudget()


# -- transcripts -------------------------------------------------------------------

TRANSCRIPT_COLUMNS = ("t", "x", "prediction", "label", "mistake", "version_space_size")


@dataclass
class Transcript:
    sequence: list
    predictions: list = field(default_factory=list)
    labels: list = field(default_factory=list)
    version_space_sizes: list = field(default_factory=list)

    @property
    def mistake_set(self) -> set:
        return {t for t, (p, y) in enumerate(zip(self.predictions, self.labels)) if p != y}

    @property
    def mistakes(self) -> int:
        return len(self.mistake_set)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(TRANSCRIPT_COLUMNS)
        for t, x in enumerate(self.sequence):
            p, y = self.predictions[t], self.labels[t]
            writer.writerow([t, x, p, y, int(p != y), self.version_space_sizes[t]])
        return buf.getvalue()


def _check_sequence(cls: FiniteClass, seq, n: int) -> list:
    seq = [int(x) for x in seq]
    if len(seq) != n:
        raise ProtocolViolation(f"adversary produced {len(seq)} instances, expected {n}")
    for x in seq:
        if not 0 <= x < cls.domain_size:
            raise ProtocolViolation(f"instance {x} outside the domain")
    return seq


def _streams(seed: int, *key) -> tuple:
    ss = np.random.SeedSequence([seed, *key])
    return tuple(np.random.default_rng(s) for s in ss.spawn(2))


def run_realizable(cls: FiniteClass, adversary, learner, n: int, seed: int = 0) -> Transcript:
    """Play one realizable game; a label that empties the version space is a protocol violation."""
    if not adversary.realizable:
        raise ContractViolation("run_realizable needs a realizable adversary")
    rng_adv, rng_learn = _streams(seed)
    seq = _check_sequence(cls, adversary.start(cls, n, rng_adv), n)
    learner.start(cls, seq, rng_learn)
    tr = Transcript(seq)
    vs = cls.full_space()
    for t, x in enumerate(seq):
        pred = int(learner.predict(t))
        y = int(adversary.label(t, pred))
        if not 0 <= y < cls.label_count:
            raise ProtocolViolation(f"round {t}: label {y} out of range", round_index=t)
        vs = vs.filter(x, y)
        if vs.is_empty():
            raise ProtocolViolation(f"round {t}: labels are no longer realizable", round_index=t)
        learner.observe(t, y)
        tr.predictions.append(pred)
        tr.labels.append(y)
        tr.version_space_sizes.append(vs.size)
    return tr


# -- agnostic runs ---------------------------------------------------------------------

@dataclass(frozen=True)
class RegretReport:
    """Monte Carlo summary; ``confidence_halfwidth`` is three standard errors."""

    trials: int
    mean_learner_mistakes: float
    mean_best_hypothesis_mistakes: float
    mean_regret: float
    regret_std: float
    confidence_halfwidth: float


def _best_fixed_mistakes(table: np.ndarray, cols: list, labels: list) -> int:
    sub = table[:, cols]
    return int((sub != np.asarray(labels)[None, :]).sum(axis=1).min())


def play_agnostic(cls: FiniteClass, adversary, learner, n: int, seed: int = 0, trial: int = 0) -> Transcript:
    """One agnostic game.  The label for a round is drawn before the learner predicts."""
    rng_adv, rng_learn = _streams(seed, trial)
    seq = _check_sequence(cls, adversary.start(cls, n, rng_adv), n)
    learner.start(cls, seq, rng_learn)
    tr = Transcript(seq)
    vs = cls.full_space()
    for t, x in enumerate(seq):
        y = int(adversary.label(t, None))
        if not 0 <= y < cls.label_count:
            raise ProtocolViolation(f"round {t}: label {y} out of range", round_index=t)
        pred = int(learner.predict(t))
        learner.observe(t, y)
        if not vs.is_empty():
            vs = vs.filter(x, y)
        tr.predictions.append(pred)
        tr.labels.append(y)
        tr.version_space_sizes.append(vs.size)
    return tr


def run_agnostic(cls: FiniteClass, adversary, learner, n: int, trials: int, seed: int = 0) -> RegretReport:
    """Repeated agnostic games with per-trial streams derived from (seed, trial).

    Each round the adversary's label is fixed before the learner is asked to
    predict, and the prediction is never passed to the adversary.  Regret is
    counted on the adversary's ``accounted_rounds`` (all rounds by default).
    """
    if trials < 1:
        raise ContractViolation("trials must be >= 1")
    regrets = np.empty(trials)
    learner_m = np.empty(trials)
    best_m = np.empty(trials)
    tables = {}
    for trial in range(trials):
        tr = play_agnostic(cls, adversary, learner, n, seed, trial)
        seq, preds, labels = tr.sequence, tr.predictions, tr.labels
        rounds = getattr(adversary, "accounted_rounds", n)
        key = tuple(sorted(set(seq)))
        if key not in tables:
            tables[key] = as_explicit(cls.restrict(list(key))).table
        col = {x: i for i, x in enumerate(key)}
        mistakes = sum(p != y for p, y in zip(preds[:rounds], labels[:rounds]))
        best = _best_fixed_mistakes(tables[key], [col[x] for x in seq[:rounds]], labels[:rounds])
        learner_m[trial], best_m[trial] = mistakes, best
        regrets[trial] = mistakes - best
    std = float(regrets.std(ddof=1)) if trials > 1 else 0.0
    return RegretReport(trials, float(learner_m.mean()), float(best_m.mean()), float(regrets.mean()),
                        std, 3 * std / math.sqrt(trials))


# -- exact values ----------------------------------------------------------------------

class SequenceGame:
    """Min-max values of the realizable game on an explicit class.

    States are (version-space mask, remaining instance suffix), so one
    solver can be shared across many sequences.
    """

    def __init__(self, cls: HypothesisClass, max_states: int = DEFAULT_GAME_BUDGET.max_states):
        self.cls = as_explicit(cls)
        self.max_states = max_states
        self.memo: dict = {}

    def _parts(self, mask, x):
        return [(y, mask & lm) for y, lm in enumerate(self.cls.label_masks[x]) if mask & lm]

    def value(self, mask: int, suffix: tuple) -> int:
        if not suffix:
            return 0
        key = (mask, suffix)
        got = self.memo.get(key)
        if got is not None:
            return got
        if len(self.memo) >= self.max_states:
            raise BudgetExceeded(f"game search passed {self.max_states} states", reached=len(self.memo))
        parts = self._parts(mask, suffix[0])
        rest = suffix[1:]
        vals = [(y, self.value(part, rest)) for y, part in parts]
        if len(vals) == 1:
            out = vals[0][1]
        else:
            out = min(max(v + (y != guess) for y, v in vals) for guess, _ in vals)
        self.memo[key] = out
        return out

    def best_prediction(self, mask: int, suffix: tuple) -> int:
        parts = self._parts(mask, suffix[0])
        vals = [(y, self.value(part, suffix[1:])) for y, part in parts]
        scores = [(max(v + (y != guess) for y, v in vals), guess) for guess, _ in vals]
        return min(scores)[1]

    def best_label(self, mask: int, suffix: tuple, prediction: int) -> int:
        parts = self._parts(mask, suffix[0])
        scores = [(-(self.value(part, suffix[1:]) + (y != prediction)), y) for y, part in parts]
        return min(scores)[1]


def fixed_sequence_value(cls: FiniteClass, sequence, max_states: int = DEFAULT_GAME_BUDGET.max_states) -> int:
    """Exact number of mistakes an optimal learner concedes on this sequence."""
    sequence = [int(x) for x in sequence]
    if not sequence:
        return 0
    for x in sequence:
        cls._check_x(x)
    cols = sorted(set(sequence))
    sub = as_explicit(cls.restrict(cols))
    pos = {x: i for i, x in enumerate(cols)}
    game = SequenceGame(sub, max_states)
    return game.value(sub.full_mask, tuple(pos[x] for x in sequence))


def instance_automorphisms(cls: HypothesisClass) -> list[tuple]:
    """Instance permutations that map the class onto itself (identity first)."""
    cls = as_explicit(cls)
    m = cls.domain_size
    table = cls.table
    rows = cls.row_set()
    signature = [tuple(sorted(np.bincount(table[:, x], minlength=cls.label_count).tolist())) for x in range(m)]
    found = []

    def extend(perm, used):
        if len(perm) == m:
            if {tuple(r) for r in table[:, perm].tolist()} == rows:
                found.append(tuple(perm))
            return
        x = len(perm)
        for z in range(m):
            if z in used or signature[z] != signature[x]:
                continue
            # the partial image must keep the projected row multiset
            cols_new = perm + [z]
            left = {tuple(r) for r in table[:, :x + 1].tolist()}
            right = {tuple(r) for r in table[:, cols_new].tolist()}
            if left != right:
                continue
            perm.append(z)
            used.add(z)
            extend(perm, used)
            perm.pop()
            used.discard(z)

    extend([], set())
    return found


def _check_game_budget(cls: FiniteClass, budget: GameBudget):
    if cls.domain_size > budget.max_instances or cls.hypothesis_count > budget.max_hypotheses:
        raise BudgetExceeded(
            f"{cls!r} exceeds the game budget (m <= {budget.max_instances}, |H| <= {budget.max_hypotheses})",
            reached=(cls.domain_size, cls.hypothesis_count))


def best_sequence(cls: FiniteClass, n: int, budget: GameBudget = DEFAULT_GAME_BUDGET,
                  use_symmetry: bool = True) -> tuple[int, tuple]:
    """(value, sequence) maximizing the fixed-sequence value over distinct-instance sequences.

    On a realizable repeat every consistent hypothesis agrees, so repeats
    never cost the learner anything; length min(n, m) sequences of distinct
    instances therefore attain the supremum.  Sequences in the same orbit
    under an instance automorphism have equal value and only one is solved.
    """
    if n < 0:
        raise ContractViolation("n must be >= 0")
    if n == 0:
        return 0, ()
    _check_game_budget(cls, budget)
    cls = as_explicit(cls)
    from .dimensions import littlestone_dim
    length = min(n, cls.domain_size)
    cap = min(length, cls.hypothesis_count.bit_length() - 1, littlestone_dim(cls))
    group = instance_automorphisms(cls) if use_symmetry else [tuple(range(cls.domain_size))]
    game = SequenceGame(cls, budget.max_states)
    seen = set()
    best = (-1, ())
    for seq in itertools.permutations(range(cls.domain_size), length):
        if seq in seen:
            continue
        if len(group) > 1:
            seen.update(tuple(g[x] for x in seq) for g in group)
        v = game.value(cls.full_mask, seq)
        if v > best[0]:
            best = (v, seq)
            if v >= cap:
                break
    return best


def transductive_value(cls: FiniteClass, n: int, budget: GameBudget = DEFAULT_GAME_BUDGET,
                       use_symmetry: bool = True) -> int:
    return best_sequence(cls, n, budget, use_symmetry)[0]


# -- exhaustive adversary ------------------------------------------------------------------

def worst_case_mistakes(cls: FiniteClass, learner, sequence, rng=None) -> int:
    """Most mistakes a deterministic learner makes over all realizable labelings of ``sequence``.

    Explores every realizable label at every round, branching the learner
    with ``fork()``.
    """
    sequence = [int(x) for x in sequence]
    learner.start(cls, sequence, rng)

    def dfs(t, vs, player):
        if t == len(sequence):
            return 0
        x = sequence[t]
        guess = player.predict(t)
        labels = vs.realizable_labels(x)
        best = 0
        for i, y in enumerate(labels):
            branch = player if i == len(labels) - 1 else player.fork()
            branch.observe(t, y)
            best = max(best, (guess != y) + dfs(t + 1, vs.filter(x, y), branch))
        return best

    return dfs(0, cls.full_space(), learner)
