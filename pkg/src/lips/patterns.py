"""Interaction terms (patterns) over categorical variables.

A pattern is a product of dummy indicators, one per involved variable, and
is stored as the sorted tuple of its ``(variable, level)`` terms. The empty
pattern is the constant interaction 1.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations, product
from typing import Iterable, Sequence

import numpy as np

from . import _kernels
from .dataset import DummyMatrix, Variable

EMPTY_TEXT = "⊤"


@dataclass(frozen=True, order=True)
class Pattern:
    terms: tuple[tuple[int, int], ...] = ()

    def __post_init__(self):
        terms = tuple(sorted((int(v), int(l)) for v, l in set(self.terms)))
        vars_ = [v for v, _ in terms]
        if len(set(vars_)) != len(vars_):
            raise ValueError(f"pattern repeats a variable: {terms}")
        if any(v < 0 or l < 0 for v, l in terms):
            raise ValueError("negative variable or level index")
        object.__setattr__(self, "terms", terms)

    @classmethod
    def of(cls, *terms: tuple[int, int]) -> "Pattern":
        return cls(tuple(terms))

    def __len__(self) -> int:
        return len(self.terms)

    @property
    def order(self) -> int:
        """Interaction order in the usual convention: term count minus one."""
        return len(self.terms) - 1

    @property
    def variables(self) -> tuple[int, ...]:
        return tuple(v for v, _ in self.terms)

    def as_dict(self) -> dict[int, int]:
        return dict(self.terms)


def is_subinteraction(t: Pattern, s: Pattern) -> bool:
    return set(t.terms) <= set(s.terms)


def mcd(t: Pattern, s: Pattern) -> Pattern:
    """Largest common subinteraction (term-set intersection)."""
    return Pattern(tuple(set(t.terms) & set(s.terms)))


def incompatible(t: Pattern, s: Pattern) -> bool:
    """True iff the two patterns fix different levels of some variable."""
    sd = s.as_dict()
    return any(v in sd and sd[v] != l for v, l in t.terms)


def dissimilarity(t: Pattern, s: Pattern) -> int:
    big = max(len(t), len(s))
    if incompatible(t, s):
        return big
    return big - len(mcd(t, s))


def format_pattern(t: Pattern, variables: Sequence[Variable] | None = None) -> str:
    """Text form ``name=level&name=level``; ``⊤`` for the empty pattern."""
    if not t.terms:
        return EMPTY_TEXT
    if variables is None:
        return "&".join(f"X{v}={l}" for v, l in t.terms)
    return "&".join(f"{variables[v].name}={variables[v].levels[l]}" for v, l in t.terms)


def parse_pattern(text: str, variables: Sequence[Variable]) -> Pattern:
    """Inverse of :func:`format_pattern` for a given variable list."""
    text = text.strip()
    if text == EMPTY_TEXT:
        return Pattern()
    by_name = {v.name: j for j, v in enumerate(variables)}
    terms = []
    for chunk in text.split("&"):
        name, _, level = chunk.partition("=")
        if name not in by_name:
            raise ValueError(f"unknown variable {name!r} in pattern {text!r}")
        j = by_name[name]
        try:
            terms.append((j, variables[j].levels.index(level)))
        except ValueError:
            raise ValueError(f"unknown level {level!r} of {name!r}") from None
    return Pattern(tuple(terms))


def pattern_codes(patterns: Sequence[Pattern], p: int) -> tuple[np.ndarray, np.ndarray]:
    """Dense ``L x p`` level codes (``-1`` = variable absent) and sizes."""
    codes = np.full((len(patterns), p), -1, dtype=np.int32)
    sizes = np.empty(len(patterns), dtype=np.int64)
    for k, t in enumerate(patterns):
        sizes[k] = len(t)
        for v, l in t.terms:
            codes[k, v] = l
    return codes, sizes


def _check_terms(t: Pattern, dm: DummyMatrix) -> None:
    for v, l in t.terms:
        dm.column_index(v, l)


def evaluate(t: Pattern, dm: DummyMatrix) -> np.ndarray:
    """Indicator column of ``t``: conjunction of its dummy columns."""
    _check_terms(t, dm)
    out = np.ones(dm.n, dtype=bool)
    for v, l in t.terms:
        out &= dm.bits[:, dm.column_index(v, l)]
    return out


def incompatibility_matrix(patterns: Sequence[Pattern], dm: DummyMatrix) -> np.ndarray:
    """``d x L`` boolean matrix; entry (i, k) marks dummy i incompatible with pattern k."""
    M = np.zeros((dm.d, len(patterns)), dtype=bool)
    offsets = dm.offsets
    for k, t in enumerate(patterns):
        _check_terms(t, dm)
        for v, l in t.terms:
            start = offsets[v]
            M[start:start + dm.level_counts[v], k] = True
            M[start + l, k] = False
    return M


def support_matrix(patterns: Sequence[Pattern], dm: DummyMatrix, *, backend: str | None = None) -> np.ndarray:
    """``n x L`` indicator matrix of all patterns, computed as ``not (Z . M)``.

    A row lacks a pattern exactly when it carries some dummy incompatible
    with it, since every row has one level per variable.
    """
    if len(patterns) == 0:
        raise ValueError("support_matrix needs at least one pattern")
    M = incompatibility_matrix(patterns, dm)
    return _kernels.boolean_support(dm.bits, M, backend=backend)


def support_counts(patterns: Sequence[Pattern], dm: DummyMatrix, *, backend: str | None = None) -> np.ndarray:
    """Number of rows carrying each pattern (column sums of the support matrix)."""
    if len(patterns) == 0:
        return np.zeros(0, dtype=np.int64)
    M = incompatibility_matrix(patterns, dm)
    return _kernels.support_counts(dm.bits, M, backend=backend)


def all_patterns(level_counts: Iterable[int], max_len: int | None = None):
    """Every non-empty pattern over the given variables, shortest first."""
    level_counts = tuple(level_counts)
    p = len(level_counts)
    top = p if max_len is None else min(max_len, p)
    for size in range(1, top + 1):
        for vars_ in combinations(range(p), size):
            for levels in product(*(range(level_counts[v]) for v in vars_)):
                yield Pattern(tuple(zip(vars_, levels)))
