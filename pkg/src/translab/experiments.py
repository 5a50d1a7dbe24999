"""Sweeps over class families and the exact sign-sum expectation.

Sweeps return rows plus a list of violated shape checks; CSV text is a pure
function of the configuration so repeated runs are byte-identical (the
optional timing column is the one exception and is off by default).
"""

from __future__ import annotations

import csv
import io
import math
import time
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .dimensions import DimensionBudget, littlestone_dim, natarajan_dim, threshold_dim, vc_dim
from .errors import BudgetExceeded, ContractViolation
from .game import DEFAULT_GAME_BUDGET, GameBudget, run_agnostic, transductive_value
from .hypothesis import FiniteClass, as_explicit
from .strategies import MWLearner, RandomLabelAdversary, UniformLabelAdversary
from .zoo import ClassSpec

SWEEP_BUDGET = DimensionBudget(max_instances=64, max_hypotheses=4096)


def floor_log2(n: int) -> int:
    return n.bit_length() - 1 if n >= 1 else 0


# -- sign sums --------------------------------------------------------------------------

@dataclass(frozen=True)
class KhinchineResult:
    k: int
    expected_abs_sum: Fraction

    @property
    def bound(self) -> float:
        return math.sqrt(self.k / 2)

    def holds(self) -> bool:
        """E|sum| >= sqrt(k/2), compared exactly through squares."""
        return self.expected_abs_sum ** 2 >= Fraction(self.k, 2)

    def is_tight(self) -> bool:
        return self.expected_abs_sum ** 2 == Fraction(self.k, 2)

    def __iter__(self):
        return iter((self.expected_abs_sum, self.bound))


KHINCHINE_MAX_K = 24


def khinchine_exact(k: int) -> KhinchineResult:
    """E|s_1 + ... + s_k| for independent uniform signs, exactly, by the binomial sum."""
    if k < 0:
        raise ContractViolation("k must be >= 0")
    if k > KHINCHINE_MAX_K:
        raise ContractViolation(f"exact enumeration is limited to k <= {KHINCHINE_MAX_K}; use Monte Carlo")
    total = sum(math.comb(k, j) * abs(2 * j - k) for j in range(k + 1))
    return KhinchineResult(k, Fraction(total, 2 ** k))


# -- trichotomy sweep --------------------------------------------------------------------

SWEEP_COLUMNS = ("family", "param", "n", "vc", "ld", "td", "M_exact_or_lower", "M_upper", "seconds")
SWEEP_FAMILIES = ("thresholds", "cube", "tree-cube", "ds-claim", "singleton", "random")


def _family_class(family: str, param: int, seed: int) -> FiniteClass:
    if family == "cube":
        return ClassSpec("full_cube", (param,)).build()
    if family == "singleton":
        return ClassSpec("singleton", (param,)).build()
    if family == "random":
        # param selects the seed of a fixed 5-instance class
        return ClassSpec("random", (5, 2, 12), seed=seed * 1000 + param).build()
    return ClassSpec(family, (param,)).build()


def _try(fn):
    try:
        return fn()
    except BudgetExceeded:
        return None


@dataclass
class SweepConfig:
    family: str
    params: list
    ns: list
    seed: int = 0
    timing: bool = False
    game_budget: GameBudget = DEFAULT_GAME_BUDGET
    dim_budget: DimensionBudget = SWEEP_BUDGET

    def header(self, kind: str) -> list[str]:
        return [f"# sweep {kind}",
                f"# family={self.family} params={self.params[0]}..{self.params[-1]} "
                f"n={self.ns[0]}..{self.ns[-1]} seed={self.seed}"]


@dataclass
class SweepRow:
    family: str
    param: int
    n: int
    vc: Optional[int]
    ld: Optional[int]
    td: Optional[int]
    lower: Optional[int]
    upper: Optional[int]
    exact: bool
    seconds: Optional[float] = None
    size: int = 0
    domain: int = 0

    def cells(self, timing: bool) -> list:
        def fmt(v):
            return "" if v is None else str(v)
        secs = f"{self.seconds:.3f}" if timing and self.seconds is not None else ""
        return [self.family, self.param, self.n, fmt(self.vc), fmt(self.ld), fmt(self.td),
                fmt(self.lower) if self.lower is not None else "budget", fmt(self.upper), secs]


def class_dims(cls: FiniteClass, budget: DimensionBudget = SWEEP_BUDGET) -> tuple:
    """(vc or Natarajan, ld, td), with None where the budget is exceeded."""
    if cls.label_count == 2:
        vc = _try(lambda: vc_dim(cls, budget)[0])
    else:
        vc = _try(lambda: natarajan_dim(cls, budget)[0])
    ld = _try(lambda: littlestone_dim(cls, budget))
    td = _try(lambda: threshold_dim(cls, budget)[0])
    return vc, ld, td


def bracket(n: int, size: int, vc, ld, td, binary: bool = True) -> tuple[int, int]:
    """Lower and upper bounds on M(H, n) from dimensions alone.

    Lower: a shattered set forces min(vc, n); a threshold chain of length td
    forces min(floor log td, floor log n) by binary search.  Upper: n, the
    Littlestone dimension, and halving over H|x whose size is at most
    |H| and (binary case) the Sauer sum.
    """
    lower = min(vc, n) if vc is not None else 0
    if td is not None and td >= 1:
        lower = max(lower, min(floor_log2(td), floor_log2(n)))
    uppers = [n, floor_log2(size)]
    if ld is not None:
        uppers.append(ld)
    if binary and vc is not None:
        uppers.append(floor_log2(sum(math.comb(n, i) for i in range(vc + 1))))
    return lower, min(uppers)


def value_bracket(cls: FiniteClass, n: int, budget: DimensionBudget = SWEEP_BUDGET) -> tuple[int, int]:
    vc, ld, td = class_dims(cls, budget)
    return bracket(n, cls.hypothesis_count, vc, ld, td, cls.label_count == 2)


def trichotomy_sweep(config: SweepConfig) -> tuple[list[SweepRow], list[str]]:
    if config.family not in SWEEP_FAMILIES:
        raise ContractViolation(f"unknown sweep family {config.family!r}")
    rows = []
    for param in config.params:
        cls = _family_class(config.family, param, config.seed)
        vc, ld, td = class_dims(cls, config.dim_budget)
        for n in config.ns:
            start = time.perf_counter()
            value = _try(lambda: transductive_value(cls, n, config.game_budget))
            if value is not None:
                lower = upper = value
            else:
                lower, upper = bracket(n, cls.hypothesis_count, vc, ld, td, cls.label_count == 2)
            rows.append(SweepRow(config.family, param, n, vc, ld, td, lower, upper, value is not None,
                                 time.perf_counter() - start, cls.hypothesis_count, cls.domain_size))
    return rows, check_trichotomy(rows)


def check_trichotomy(rows: list[SweepRow]) -> list[str]:
    """Shape checks per family; returns human-readable violations."""
    bad = []
    for r in rows:
        if r.lower is not None and r.upper is not None and r.lower > r.upper:
            bad.append(f"{r.family}({r.param}) n={r.n}: lower {r.lower} > upper {r.upper}")
        if r.family == "cube" and r.exact and r.lower != min(r.param, r.n):
            bad.append(f"cube({r.param}) n={r.n}: M={r.lower} != min(d, n)={min(r.param, r.n)}")
        if r.family == "ds-claim" and r.exact and r.lower != min(r.n, r.param + 1):
            bad.append(f"ds-claim({r.param}) n={r.n}: M={r.lower} != min(n, p+1)={min(r.n, r.param + 1)}")
        if r.family == "singleton" and r.upper != 0:
            bad.append(f"singleton n={r.n}: M upper {r.upper} != 0")
        if r.family == "thresholds" and r.n <= min(64, r.param):
            lo = floor_log2(r.n)
            if r.lower is None or r.lower < lo:
                bad.append(f"thresholds({r.param}) n={r.n}: lower {r.lower} < floor(log n)={lo}")
            if r.upper is None or r.upper > 3 * lo + 3:
                bad.append(f"thresholds({r.param}) n={r.n}: upper {r.upper} > 3 floor(log n)+3={3 * lo + 3}")
    # monotone in n, and constant once n reaches the domain size
    by_class: dict = {}
    for r in rows:
        if r.exact:
            by_class.setdefault((r.family, r.param), []).append(r)
    for (family, param), group in by_class.items():
        group.sort(key=lambda r: r.n)
        for a, b in zip(group, group[1:]):
            if b.lower < a.lower:
                bad.append(f"{family}({param}): M decreases from n={a.n} to n={b.n}")
        tail = {r.lower for r in group if r.n >= r.domain}
        if len(tail) > 1:
            bad.append(f"{family}({param}): M not constant for n >= m ({sorted(tail)})")
    return bad


def sweep_csv(config: SweepConfig, rows: list[SweepRow]) -> str:
    buf = io.StringIO()
    for line in config.header("trichotomy"):
        buf.write(line + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(SWEEP_COLUMNS)
    for r in rows:
        writer.writerow(r.cells(config.timing))
    return buf.getvalue()


# -- agnostic sweep --------------------------------------------------------------------------

AGNOSTIC_COLUMNS = ("class", "n", "trials", "mean_regret", "lower_bound_value",
                    "upper_bound_value", "ci_halfwidth")


@dataclass
class AgnosticCase:
    spec: ClassSpec
    n: int
    trials: int
    adversary: str = "blocks"   # "blocks": shattered points in blocks; "uniform": cycle the domain
    seed: int = 0


@dataclass
class AgnosticRow:
    name: str
    n: int
    trials: int
    mean_regret: float
    lower: Optional[float]
    upper: float
    halfwidth: float
    sigmas: float = 3.0

    def cells(self):
        lower = "" if self.lower is None else f"{self.lower:.6f}"
        return [self.name, self.n, self.trials, f"{self.mean_regret:.6f}", lower,
                f"{self.upper:.6f}", f"{self.halfwidth:.6f}"]


def run_agnostic_case(case: AgnosticCase, sigmas: float = 3.0) -> AgnosticRow:
    if case.trials < 1:
        raise ContractViolation("trials must be >= 1")
    cls = case.spec.build()
    name = f"{case.spec.family}({','.join(map(str, case.spec.params))})"
    if case.adversary == "blocks":
        d, points = vc_dim(cls)
        adv = RandomLabelAdversary(points)
        block = case.n // d
        lower = d * math.sqrt(block) / (2 * math.sqrt(2))
        distinct = 2 ** d
    elif case.adversary == "uniform":
        adv = UniformLabelAdversary()
        lower = None
        # the uniform adversary cycles through the domain in index order
        seen = list(range(min(case.n, cls.domain_size)))
        distinct = as_explicit(cls.restrict(seen)).hypothesis_count
    else:
        raise ContractViolation(f"unknown agnostic adversary {case.adversary!r}")
    upper = math.sqrt(case.n / 2 * math.log(distinct))
    rep = run_agnostic(cls, adv, MWLearner(), case.n, case.trials, case.seed)
    stderr = rep.regret_std / math.sqrt(rep.trials)
    return AgnosticRow(name, case.n, rep.trials, rep.mean_regret, lower, upper, sigmas * stderr, sigmas)


def check_agnostic(row: AgnosticRow) -> list[str]:
    bad = []
    if row.lower is not None and row.lower > row.mean_regret + row.halfwidth:
        bad.append(f"{row.name} n={row.n}: lower bound {row.lower:.4f} > mean {row.mean_regret:.4f} + {row.halfwidth:.4f}")
    if row.mean_regret > row.upper + row.halfwidth:
        bad.append(f"{row.name} n={row.n}: mean {row.mean_regret:.4f} > upper bound {row.upper:.4f} + {row.halfwidth:.4f}")
    return bad


def agnostic_sweep(cases: list[AgnosticCase], sigmas: float = 3.0) -> tuple[list[AgnosticRow], list[str]]:
    rows = [run_agnostic_case(c, sigmas) for c in cases]
    bad = [msg for r in rows for msg in check_agnostic(r)]
    return rows, bad


def agnostic_csv(cases: list[AgnosticCase], rows: list[AgnosticRow]) -> str:
    buf = io.StringIO()
    buf.write("# sweep agnostic\n")
    for c in cases:
        buf.write(f"# case family={c.spec.family} params={list(c.spec.params)} n={c.n} "
                  f"trials={c.trials} adversary={c.adversary} seed={c.seed}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(AGNOSTIC_COLUMNS)
    for r in rows:
        writer.writerow(r.cells())
    return buf.getvalue()
