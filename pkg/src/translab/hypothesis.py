"""Finite hypothesis classes, labeled sequences and version spaces.

Instances and labels are dense integer indices: a class over ``m`` instances
and ``k`` labels is a set of functions ``[0, m) -> [0, k)``.  Explicit classes
store the table; implicit ones (see :mod:`translab.zoo`) evaluate on demand
and supply their own version-space encoding.

Version spaces of explicit classes are Python ints used as bitsets over
hypothesis indices, so they hash cheaply and can key memo tables.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import BudgetExceeded, ContractViolation

# largest explicit table (hypotheses x instances) an implicit class may materialize
MATERIALIZE_CELLS = 1 << 22


class FiniteClass:
    """Interface shared by explicit tables and implicit generators."""

    domain_size: int
    label_count: int

    @property
    def hypothesis_count(self) -> int:
        raise NotImplementedError

    @property
    def is_binary(self) -> bool:
        return self.label_count == 2

    def evaluate(self, h: int, x: int) -> int:
        raise NotImplementedError

    def full_space(self):
        raise NotImplementedError

    def restrict(self, instances):
        raise NotImplementedError

    def to_explicit(self) -> "HypothesisClass":
        raise NotImplementedError

    def _check_h(self, h):
        if not 0 <= h < self.hypothesis_count:
            raise ContractViolation(f"hypothesis index {h} out of range [0, {self.hypothesis_count})")

    def _check_x(self, x):
        if not 0 <= x < self.domain_size:
            raise ContractViolation(f"instance index {x} out of range [0, {self.domain_size})")

    def _check_y(self, y):
        if not 0 <= y < self.label_count:
            raise ContractViolation(f"label {y} out of range [0, {self.label_count})")


def _bits_to_int(flags: np.ndarray) -> int:
    return int.from_bytes(np.packbits(flags, bitorder="little").tobytes(), "little")


def mask_members(mask: int) -> list[int]:
    out = []
    while mask:
        low = mask & -mask
        out.append(low.bit_length() - 1)
        mask ^= low
    return out


class HypothesisClass(FiniteClass):
    """An explicit class: a deduplicated table of shape (hypotheses, instances).

    Duplicate rows are dropped at construction, keeping the first occurrence,
    so generators control the index of every hypothesis.
    """

    def __init__(self, table, label_count: int | None = None, name: str | None = None):
        arr = np.asarray(table, dtype=np.int64)
        if arr.ndim != 2:
            raise ContractViolation("hypothesis table must be two-dimensional")
        if arr.shape[0] < 1:
            raise ContractViolation("a hypothesis class needs at least one hypothesis")
        if arr.shape[1] < 1:
            raise ContractViolation("the instance domain must be nonempty")
        if label_count is None:
            label_count = max(2, int(arr.max()) + 1)
        if label_count < 2:
            raise ContractViolation("label_count must be at least 2")
        if arr.min() < 0 or arr.max() >= label_count:
            raise ContractViolation(f"table entries must lie in [0, {label_count})")
        _, first = np.unique(arr, axis=0, return_index=True)
        keep = np.sort(first)
        dtype = np.int8 if label_count <= 127 else np.int32
        self.table = np.ascontiguousarray(arr[keep], dtype=dtype)
        self.table.setflags(write=False)
        self.domain_size = int(arr.shape[1])
        self.label_count = int(label_count)
        self.name = name
        self._masks = None
        self._cache = {}

    def __repr__(self):
        tag = f" {self.name}" if self.name else ""
        return f"<HypothesisClass{tag} m={self.domain_size} k={self.label_count} |H|={self.hypothesis_count}>"

    def __eq__(self, other):
        if not isinstance(other, HypothesisClass):
            return NotImplemented
        return (
            self.label_count == other.label_count
            and self.table.shape == other.table.shape
            and self.row_set() == other.row_set()
        )

    def __hash__(self):
        return hash((self.label_count, self.table.shape, self.table.tobytes()))

    @property
    def hypothesis_count(self) -> int:
        return int(self.table.shape[0])

    @property
    def full_mask(self) -> int:
        return (1 << self.hypothesis_count) - 1

    def row_set(self) -> frozenset:
        return frozenset(map(tuple, self.table.tolist()))

    def evaluate(self, h: int, x: int) -> int:
        self._check_h(h)
        self._check_x(x)
        return int(self.table[h, x])

    @property
    def label_masks(self) -> list[list[int]]:
        """``label_masks[x][y]`` is the bitset of hypotheses with h(x) = y."""
        if self._masks is None:
            masks = []
            for x in range(self.domain_size):
                col = self.table[:, x]
                masks.append([_bits_to_int(col == y) for y in range(self.label_count)])
            self._masks = masks
        return self._masks

    def full_space(self) -> "VersionSpace":
        return VersionSpace(self, self.full_mask)

    def space(self, members: Iterable[int]) -> "VersionSpace":
        mask = 0
        for h in members:
            self._check_h(h)
            mask |= 1 << h
        return VersionSpace(self, mask)

    def subclass(self, members: Iterable[int]) -> "HypothesisClass":
        idx = sorted(set(members))
        if not idx:
            raise ContractViolation("subclass needs at least one hypothesis")
        return HypothesisClass(self.table[idx], self.label_count)

    def restrict(self, instances: Sequence[int]) -> "HypothesisClass":
        instances = list(instances)
        if not instances:
            raise ContractViolation("restrict needs a nonempty instance list")
        for x in instances:
            self._check_x(x)
        return HypothesisClass(self.table[:, instances], self.label_count)

    def to_explicit(self) -> "HypothesisClass":
        return self

    def sorted_rows(self) -> list[tuple[int, ...]]:
        return sorted(self.row_set())


@dataclass(frozen=True)
class LabeledSequence:
    """Ordered (instance, label) pairs."""

    pairs: tuple[tuple[int, int], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "pairs", tuple((int(x), int(y)) for x, y in self.pairs))

    def __len__(self):
        return len(self.pairs)

    def __iter__(self):
        return iter(self.pairs)

    def validate(self, cls: FiniteClass) -> None:
        for x, y in self.pairs:
            cls._check_x(x)
            cls._check_y(y)


@dataclass(frozen=True)
class VersionSpace:
    """A subset of an explicit class, stored as a bitset over hypothesis indices."""

    cls: HypothesisClass
    mask: int

    @property
    def key(self) -> int:
        return self.mask

    @property
    def size(self) -> int:
        return self.mask.bit_count()

    def __len__(self):
        return self.size

    def is_empty(self) -> bool:
        return self.mask == 0

    def members(self) -> list[int]:
        return mask_members(self.mask)

    def filter(self, x: int, y: int) -> "VersionSpace":
        self.cls._check_x(x)
        self.cls._check_y(y)
        return VersionSpace(self.cls, self.mask & self.cls.label_masks[x][y])

    def label_counts(self, x: int) -> list[int]:
        self.cls._check_x(x)
        if self.mask == 0:
            raise ContractViolation("label_counts on an empty version space")
        return [(self.mask & m).bit_count() for m in self.cls.label_masks[x]]

    def realizable_labels(self, x: int) -> list[int]:
        return [y for y, m in enumerate(self.cls.label_masks[x]) if self.mask & m]

    def issubset(self, other: "VersionSpace") -> bool:
        return self.mask & ~other.mask == 0


def as_explicit(cls: FiniteClass) -> HypothesisClass:
    if isinstance(cls, HypothesisClass):
        return cls
    cells = cls.hypothesis_count * cls.domain_size
    if cells > MATERIALIZE_CELLS:
        raise BudgetExceeded(f"materializing {cls!r} needs {cells} cells", reached=cells)
    return cls.to_explicit()


def evaluate(cls: FiniteClass, h: int, x: int) -> int:
    return cls.evaluate(h, x)


def restrict(cls: FiniteClass, instances: Sequence[int]):
    return cls.restrict(instances)


def filter_version_space(vs, x: int, y: int):
    return vs.filter(x, y)


def label_counts(vs, x: int) -> list[int]:
    return vs.label_counts(x)


def consistent_space(cls: FiniteClass, seq: Iterable[tuple[int, int]]):
    vs = cls.full_space()
    for x, y in seq:
        cls._check_x(x)
        cls._check_y(y)
        vs = vs.filter(x, y)
    return vs


def is_realizable(cls: FiniteClass, seq: Iterable[tuple[int, int]]) -> bool:
    return not consistent_space(cls, seq).is_empty()


# -- HYP v1 ------------------------------------------------------------------

def dumps_hyp(cls: FiniteClass) -> str:
    cls = as_explicit(cls)
    m, k, n = cls.domain_size, cls.label_count, cls.hypothesis_count
    lines = [f"HYP 1 {m} {k} {n}"]
    lines += [" ".join(map(str, row)) for row in cls.sorted_rows()]
    return "\n".join(lines) + "\n"


def loads_hyp(text: str) -> HypothesisClass:
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise ContractViolation("empty HYP file")
    head = lines[0].split(" ")
    if len(head) != 5 or head[0] != "HYP" or head[1] != "1":
        raise ContractViolation(f"bad HYP header: {lines[0]!r}")
    try:
        m, k, n = (int(v) for v in head[2:])
    except ValueError as exc:
        raise ContractViolation(f"bad HYP header: {lines[0]!r}") from exc
    body = lines[1:]
    if len(body) != n:
        raise ContractViolation(f"header declares {n} hypotheses, found {len(body)} rows")
    rows = []
    seen = set()
    for lineno, line in enumerate(body, start=2):
        if line != line.rstrip() or "\r" in line:
            raise ContractViolation(f"line {lineno}: trailing whitespace")
        try:
            row = tuple(int(v) for v in line.split(" "))
        except ValueError as exc:
            raise ContractViolation(f"line {lineno}: not a row of integers") from exc
        if len(row) != m:
            raise ContractViolation(f"line {lineno}: expected {m} entries, got {len(row)}")
        if any(not 0 <= v < k for v in row):
            raise ContractViolation(f"line {lineno}: entry outside [0, {k})")
        if row in seen:
            raise ContractViolation(f"line {lineno}: duplicate hypothesis")
        seen.add(row)
        rows.append(row)
    return HypothesisClass(np.array(rows, dtype=np.int64).reshape(n, m), k)


def write_hyp(cls: FiniteClass, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(dumps_hyp(cls))


def read_hyp(path) -> HypothesisClass:
    with open(path, encoding="utf-8", newline="") as fh:
        return loads_hyp(fh.read())
