"""Finite-alphabet pmfs and information measures (all in bits).

Two layers live here. The public containers (`Pmf`, `JointPmf`, `CondPmf`)
validate on construction and are what callers pass around. Underneath,
`Table` is a named, *batched* probability tensor: axis 0 indexes independent
joints so that the optimizer can score thousands of candidates per numpy
call. Every public measure is computed through `Table` with batch size 1,
so there is a single arithmetic path.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

STOCHASTIC_TOL = 1e-12
LOG_FLOOR = 1e-15


class ProbabilityError(ValueError):
    pass


@dataclass(frozen=True)
class Alphabet:
    name: str
    size: int
    labels: tuple[str, ...] | None = None

    def __post_init__(self):
        if int(self.size) != self.size or self.size < 1:
            raise ProbabilityError(f"alphabet {self.name!r}: size must be a positive integer")
        if self.labels is not None:
            labels = tuple(str(s) for s in self.labels)
            if len(labels) != self.size or len(set(labels)) != self.size:
                raise ProbabilityError(
                    f"alphabet {self.name!r}: need {self.size} distinct labels, got {labels}")
            object.__setattr__(self, "labels", labels)

    def label(self, i: int) -> str:
        return self.labels[i] if self.labels is not None else str(i)

    def index(self, label: str) -> int:
        if self.labels is not None and label in self.labels:
            return self.labels.index(label)
        i = int(label)
        if not 0 <= i < self.size:
            raise ProbabilityError(f"symbol {label!r} not in alphabet {self.name!r}")
        return i

    def renamed(self, name: str) -> "Alphabet":
        return Alphabet(name, self.size, self.labels)


def _frozen(a) -> np.ndarray:
    arr = np.array(a, dtype=float)
    arr.setflags(write=False)
    return arr


def _check_mass(probs: np.ndarray, what: str, tol: float = STOCHASTIC_TOL):
    if not np.all(np.isfinite(probs)):
        raise ProbabilityError(f"{what}: non-finite entries")
    if np.any(probs < 0):
        raise ProbabilityError(f"{what}: negative entries")
    total = probs.sum()
    if abs(total - 1.0) > tol:
        raise ProbabilityError(f"{what}: total mass {total!r} != 1")


@dataclass(frozen=True, eq=False)
class Pmf:
    alphabet: Alphabet
    probs: np.ndarray

    def __post_init__(self):
        probs = _frozen(self.probs)
        if probs.shape != (self.alphabet.size,):
            raise ProbabilityError(
                f"pmf over {self.alphabet.name!r}: expected {self.alphabet.size} entries, got {probs.shape}")
        _check_mass(probs, f"pmf over {self.alphabet.name!r}")
        object.__setattr__(self, "probs", probs)

    def __eq__(self, other):
        return (isinstance(other, Pmf) and self.alphabet == other.alphabet
                and np.array_equal(self.probs, other.probs))

    __hash__ = None

    @classmethod
    def uniform(cls, alphabet: Alphabet) -> "Pmf":
        return cls(alphabet, np.full(alphabet.size, 1.0 / alphabet.size))

    @classmethod
    def point(cls, alphabet: Alphabet, i: int) -> "Pmf":
        p = np.zeros(alphabet.size)
        p[i] = 1.0
        return cls(alphabet, p)


@dataclass(frozen=True, eq=False)
class JointPmf:
    axes: tuple[Alphabet, ...]
    probs: np.ndarray

    def __post_init__(self):
        axes = tuple(self.axes)
        names = [a.name for a in axes]
        if len(set(names)) != len(names):
            raise ProbabilityError(f"duplicate axis names {names}")
        probs = _frozen(self.probs)
        if probs.shape != tuple(a.size for a in axes):
            raise ProbabilityError(f"joint shape {probs.shape} does not match axes {names}")
        _check_mass(probs, f"joint over {names}")
        object.__setattr__(self, "axes", axes)
        object.__setattr__(self, "probs", probs)

    def __eq__(self, other):
        return (isinstance(other, JointPmf) and self.axes == other.axes
                and np.array_equal(self.probs, other.probs))

    __hash__ = None

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(a.name for a in self.axes)

    def axis(self, name: str) -> Alphabet:
        return self.axes[self.names.index(name)]

    def table(self) -> "Table":
        return Table(self.names, self.probs[None])

    @classmethod
    def from_pmf(cls, p: Pmf) -> "JointPmf":
        return cls((p.alphabet,), p.probs)


@dataclass(frozen=True, eq=False)
class CondPmf:
    """Row-stochastic table p(output | inputs), shape (*input sizes, output size)."""

    input_axes: tuple[Alphabet, ...]
    output_axis: Alphabet
    probs: np.ndarray

    def __post_init__(self):
        input_axes = tuple(self.input_axes)
        probs = _frozen(self.probs)
        shape = tuple(a.size for a in input_axes) + (self.output_axis.size,)
        if probs.shape != shape:
            raise ProbabilityError(
                f"p({self.output_axis.name}|{','.join(a.name for a in input_axes)}): "
                f"expected shape {shape}, got {probs.shape}")
        if np.any(probs < 0) or not np.all(np.isfinite(probs)):
            raise ProbabilityError("conditional pmf has negative or non-finite entries")
        sums = probs.sum(axis=-1)
        bad = np.abs(sums - 1.0) > STOCHASTIC_TOL
        if np.any(bad):
            idx = tuple(int(i) for i in np.argwhere(bad)[0])
            raise ProbabilityError(f"row {idx} of p({self.output_axis.name}|...) sums to {sums[idx]!r}")
        object.__setattr__(self, "input_axes", input_axes)
        object.__setattr__(self, "probs", probs)

    def __eq__(self, other):
        return (isinstance(other, CondPmf) and self.input_axes == other.input_axes
                and self.output_axis == other.output_axis
                and np.array_equal(self.probs, other.probs))

    __hash__ = None

    @classmethod
    def uniform(cls, input_axes: Sequence[Alphabet], output_axis: Alphabet) -> "CondPmf":
        shape = tuple(a.size for a in input_axes) + (output_axis.size,)
        return cls(tuple(input_axes), output_axis, np.full(shape, 1.0 / output_axis.size))


# --- batched tables -------------------------------------------------------

def _entropy_rows(m: np.ndarray) -> np.ndarray:
    """-sum p log2 p over each row of a (B, n) array, tiny entries treated as 0."""
    m = np.where(m > LOG_FLOOR, m, 0.0)
    logs = np.zeros_like(m)
    np.log2(m, out=logs, where=m > 0)
    return -(m * logs).sum(axis=1)


def _as_group(group: str | Iterable[str]) -> tuple[str, ...]:
    if isinstance(group, str):
        return tuple(group.split(",")) if "," in group else (group,)
    return tuple(group)


class Table:
    """A batch of joint pmfs sharing named axes; probs has shape (B, *sizes).

    Entropies of axis subsets are memoized, since the bound expressions reuse
    the same marginals many times.
    """

    def __init__(self, names: Sequence[str], probs: np.ndarray):
        self.names = tuple(names)
        self.probs = probs
        if probs.ndim != len(self.names) + 1:
            raise ProbabilityError(f"table rank {probs.ndim} does not match axes {self.names} plus batch")
        self._h: dict[frozenset, np.ndarray] = {}

    @property
    def batch(self) -> int:
        return self.probs.shape[0]

    def _index(self, names: Iterable[str]) -> list[int]:
        out = []
        for n in names:
            if n not in self.names:
                raise ProbabilityError(f"unknown axis {n!r}; have {self.names}")
            out.append(self.names.index(n))
        return out

    def marginal(self, keep: Sequence[str]) -> np.ndarray:
        keep = list(keep)
        idx = self._index(keep)
        drop = tuple(i + 1 for i in range(len(self.names)) if i not in idx)
        m = self.probs.sum(axis=drop) if drop else self.probs
        kept_order = sorted(idx)
        perm = [0] + [kept_order.index(i) + 1 for i in idx]
        return np.transpose(m, perm)

    def entropy(self, group) -> np.ndarray:
        group = frozenset(_as_group(group))
        if not group:
            return np.zeros(self.batch)
        hit = self._h.get(group)
        if hit is None:
            m = self.marginal(sorted(group, key=self.names.index))
            hit = _entropy_rows(m.reshape(self.batch, -1))
            self._h[group] = hit
        return hit

    def mi(self, a, b) -> np.ndarray:
        a, b = set(_as_group(a)), set(_as_group(b))
        _disjoint(a, b)
        out = self.entropy(a) + self.entropy(b) - self.entropy(a | b)
        return np.maximum(out, 0.0)

    def cmi(self, a, b, c) -> np.ndarray:
        a, b, c = set(_as_group(a)), set(_as_group(b)), set(_as_group(c))
        _disjoint(a, b, c)
        out = (self.entropy(a | c) + self.entropy(b | c)
               - self.entropy(a | b | c) - self.entropy(c))
        return np.maximum(out, 0.0)


def _disjoint(*groups: set):
    for g in groups:
        if not g:
            raise ProbabilityError("empty axis group")
    seen: set = set()
    for g in groups:
        if seen & g:
            raise ProbabilityError(f"axis groups overlap on {sorted(seen & g)}")
        seen |= g


# --- public measures ------------------------------------------------------

def entropy(p: Pmf | JointPmf) -> float:
    if isinstance(p, Pmf):
        p = JointPmf.from_pmf(p)
    return float(p.table().entropy(p.names)[0])


def binary_entropy(p: float) -> float:
    if not 0.0 <= p <= 1.0:
        raise ProbabilityError(f"binary entropy argument {p} outside [0, 1]")
    return float(_entropy_rows(np.array([[p, 1.0 - p]]))[0])


def marginalize(j: JointPmf, keep: str | Sequence[str]) -> JointPmf:
    keep = _as_group(keep)
    if not keep:
        raise ProbabilityError("marginalize needs at least one axis to keep")
    if len(set(keep)) != len(keep):
        raise ProbabilityError(f"repeated axes in {keep}")
    m = j.table().marginal(keep)[0]
    return JointPmf(tuple(j.axis(n) for n in keep), m)


def mutual_information(j: JointPmf, a, b) -> float:
    return float(j.table().mi(a, b)[0])


def conditional_mutual_information(j: JointPmf, a, b, c) -> float:
    return float(j.table().cmi(a, b, c)[0])


def conditional_entropy(j: JointPmf, a, c) -> float:
    t = j.table()
    a, c = set(_as_group(a)), set(_as_group(c))
    _disjoint(a, c)
    return float(t.entropy(a | c)[0] - t.entropy(c)[0])
