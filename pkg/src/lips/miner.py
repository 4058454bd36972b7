"""Frequent-pattern search restricted to one class of rows.

Dummy columns play the role of items and rows the role of transactions, so
a frequent itemset is exactly a frequent interaction. Candidates are grown
levelwise (Apriori) and counted by AND-ing per-item row bitsets.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, replace
from itertools import combinations
from typing import Sequence

import numpy as np

from . import _kernels
from .dataset import DummyMatrix
from .patterns import Pattern, support_counts

SEARCH_CLASSES = ("minority_only", "both_classes")
BRUTE_FORCE_MAX_D = 30


class MiningError(ValueError):
    pass


@dataclass(frozen=True)
class MinerConfig:
    supp_min: float = 0.1
    max_len: int | None = None
    search_classes: str = "minority_only"

    def __post_init__(self):
        if not 0.0 < self.supp_min <= 1.0:
            raise MiningError("supp_min must lie in (0, 1]")
        if self.max_len is not None and self.max_len < 1:
            raise MiningError("max_len must be a positive integer")
        if self.search_classes not in SEARCH_CLASSES:
            raise MiningError(f"search_classes must be one of {SEARCH_CLASSES}")


@dataclass(frozen=True)
class MinedPattern:
    pattern: Pattern
    minority_support: float
    majority_support: float | None = None
    minority_count: int = 0
    majority_count: int | None = None


def is_frequent(count, n_rows: int, supp_min: float):
    """Strict threshold ``count / n > supp_min``.

    ``supp_min == 1`` is read as "present in every row", otherwise that
    setting could never emit anything.
    """
    count = np.asarray(count)
    if supp_min >= 1.0:
        return count == n_rows
    return count / n_rows > supp_min


def apriori(
    tidsets: np.ndarray,
    item_var: Sequence[int],
    n_rows: int,
    supp_min: float,
    max_len: int | None = None,
) -> list[tuple[tuple[int, ...], int]]:
    """Levelwise frequent itemset mining over packed row bitsets.

    ``tidsets[i]`` is the uint64 row bitset of item ``i``; ``item_var[i]``
    names the variable the item belongs to. Two items of the same variable
    never co-occur in a candidate. Returns ``(items, count)`` pairs, shorter
    itemsets first, lexicographic within a level.
    """
    if n_rows <= 0:
        raise MiningError("cannot mine an empty row set")
    item_var = np.asarray(item_var)
    single = np.bitwise_count(tidsets).sum(axis=1)
    keep = np.flatnonzero(is_frequent(single, n_rows, supp_min))
    level = [(int(i),) for i in keep]
    bits = tidsets[keep]
    counts = single[keep]
    out = [(items, int(c)) for items, c in zip(level, counts)]

    k = 1
    while level and (max_len is None or k < max_len):
        known = set(level)
        pairs = []
        cands = []
        start = 0
        # level is sorted, so itemsets sharing a (k-1)-prefix are contiguous
        while start < len(level):
            stop = start + 1
            while stop < len(level) and level[stop][:-1] == level[start][:-1]:
                stop += 1
            for a in range(start, stop):
                last_a = level[a][-1]
                for b in range(a + 1, stop):
                    last_b = level[b][-1]
                    if item_var[last_a] == item_var[last_b]:
                        continue
                    cand = level[a] + (last_b,)
                    if k > 1 and not all(cand[:i] + cand[i + 1:] in known for i in range(k - 1)):
                        continue
                    pairs.append((a, b))
                    cands.append(cand)
            start = stop
        if not cands:
            break
        children, child_counts = _kernels.and_count(bits, np.asarray(pairs, dtype=np.int64))
        hit = np.flatnonzero(is_frequent(child_counts, n_rows, supp_min))
        level = [cands[i] for i in hit]
        bits = children[hit]
        out.extend((cands[i], int(child_counts[i])) for i in hit)
        k += 1
    return out


def mine(dm: DummyMatrix, cfg: MinerConfig) -> list[MinedPattern]:
    """Frequent patterns of the rows in ``dm`` (typically one class only)."""
    if dm.n == 0:
        raise MiningError("cannot mine an empty row set")
    item_var = [v for v, _ in dm.columns]
    found = apriori(dm.tidsets(), item_var, dm.n, cfg.supp_min, cfg.max_len)
    return [
        MinedPattern(Pattern(tuple(dm.columns[i] for i in items)), c / dm.n, minority_count=c)
        for items, c in found
    ]


def brute_force_frequent(dm: DummyMatrix, cfg: MinerConfig) -> list[MinedPattern]:
    """Exhaustive oracle: count every sub-pattern of every row."""
    if dm.d > BRUTE_FORCE_MAX_D:
        raise MiningError(f"brute force limited to d <= {BRUTE_FORCE_MAX_D}")
    if dm.n == 0:
        raise MiningError("cannot mine an empty row set")
    top = dm.p if cfg.max_len is None else min(cfg.max_len, dm.p)
    tally: Counter = Counter()
    for row in dm.bits:
        present = [dm.columns[i] for i in np.flatnonzero(row)]
        for size in range(1, top + 1):
            tally.update(combinations(present, size))
    found = [(terms, c) for terms, c in tally.items() if is_frequent(c, dm.n, cfg.supp_min)]
    found.sort(key=lambda tc: (len(tc[0]), tc[0]))
    return [MinedPattern(Pattern(terms), c / dm.n, minority_count=c) for terms, c in found]


def attach_majority_support(mined: Sequence[MinedPattern], dm_majority: DummyMatrix) -> list[MinedPattern]:
    """Fill in each pattern's count and frequency among the majority rows."""
    if not mined:
        return []
    counts = support_counts([m.pattern for m in mined], dm_majority)
    n = dm_majority.n
    return [
        replace(m, majority_count=int(c), majority_support=(c / n if n else 0.0))
        for m, c in zip(mined, counts)
    ]


def mine_candidates(dm: DummyMatrix, outcome: np.ndarray, cfg: MinerConfig) -> list[MinedPattern]:
    """Candidate list for a training set, with both class supports attached.

    ``minority_only`` mines the outcome=1 rows; ``both_classes`` mines each
    class separately and takes the union of the two result lists.
    """
    outcome = np.asarray(outcome)
    pos = np.flatnonzero(outcome == 1)
    neg = np.flatnonzero(outcome == 0)
    dm_pos, dm_neg = dm.subset(pos), dm.subset(neg)
    mined = mine(dm_pos, cfg)
    if cfg.search_classes == "minority_only":
        return attach_majority_support(mined, dm_neg)

    seen = {m.pattern for m in mined}
    extra = [m.pattern for m in mine(dm_neg, cfg) if m.pattern not in seen]
    if extra:
        pos_counts = support_counts(extra, dm_pos)
        mined = mined + [
            MinedPattern(t, c / dm_pos.n, minority_count=int(c)) for t, c in zip(extra, pos_counts)
        ]
    return attach_majority_support(mined, dm_neg)
