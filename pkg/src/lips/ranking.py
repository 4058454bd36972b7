"""Odds-ratio ranking of candidate patterns."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np
from scipy.stats import norm

from .miner import MinedPattern
from .patterns import Pattern, format_pattern


class UncomputableRank(ArithmeticError):
    """Odds ratio undefined (a zero cell) and no correction was allowed."""


@dataclass(frozen=True)
class ContingencyTable:
    a: float  # T=1, Y=1
    b: float  # T=1, Y=0
    c: float  # T=0, Y=1
    d: float  # T=0, Y=0

    def __post_init__(self):
        if min(self.a, self.b, self.c, self.d) < 0:
            raise ValueError("contingency counts must be non-negative")

    @property
    def n(self):
        return self.a + self.b + self.c + self.d

    def cells(self):
        return (self.a, self.b, self.c, self.d)


@dataclass(frozen=True)
class RankedPattern:
    pattern: Pattern
    table: ContingencyTable
    odds_ratio: float
    corrected: bool = False
    minority_support: float = 0.0
    label: str = ""
    ci: tuple[float, float] | None = None

    @property
    def log_abs_or(self) -> float:
        return abs(math.log(self.odds_ratio))

    @property
    def direction(self) -> str:
        if self.odds_ratio > 1:
            return "risk"
        if self.odds_ratio < 1:
            return "protection"
        return "neutral"

    def sort_key(self):
        return (-self.log_abs_or, -self.minority_support, len(self.pattern), self.label)


def contingency(pattern_column, y) -> ContingencyTable:
    t = np.asarray(pattern_column).astype(bool)
    y = np.asarray(y).astype(bool)
    if t.shape != y.shape:
        raise ValueError("pattern column and outcome differ in length")
    a = int(np.count_nonzero(t & y))
    b = int(np.count_nonzero(t & ~y))
    c = int(np.count_nonzero(~t & y))
    d = int(np.count_nonzero(~t & ~y))
    return ContingencyTable(a, b, c, d)


def odds_ratio(tbl: ContingencyTable, zero_cell_policy: str = "haldane") -> tuple[float, bool]:
    """Cross ratio ``(a/b) / (c/d)``; Haldane-Anscombe +0.5 on any zero cell."""
    a, b, c, d = tbl.cells()
    if min(a, b, c, d) > 0:
        return (a * d) / (b * c), False
    if zero_cell_policy == "error":
        raise UncomputableRank(f"zero cell in contingency table {tbl.cells()}")
    if zero_cell_policy != "haldane":
        raise ValueError(f"unknown zero-cell policy {zero_cell_policy!r}")
    a, b, c, d = a + 0.5, b + 0.5, c + 0.5, d + 0.5
    return (a * d) / (b * c), True


def or_confidence_interval(tbl: ContingencyTable, gamma: float) -> tuple[float, float]:
    """Woolf (log-normal) interval at coverage ``gamma``."""
    if not 0.0 < gamma < 1.0:
        raise ValueError("gamma must lie in (0, 1)")
    cells = tbl.cells()
    if min(cells) == 0:
        cells = tuple(x + 0.5 for x in cells)
    a, b, c, d = cells
    log_or = math.log((a * d) / (b * c))
    half = norm.ppf((1.0 + gamma) / 2.0) * math.sqrt(1 / a + 1 / b + 1 / c + 1 / d)
    return math.exp(log_or - half), math.exp(log_or + half)


def rank_candidates(
    mined: Sequence[MinedPattern],
    n_pos: int,
    n_neg: int,
    *,
    variables=None,
    zero_cell_policy: str = "haldane",
) -> list[RankedPattern]:
    """Build tables and odds ratios for mined patterns (unsorted).

    Tables come straight from the per-class counts: ``a`` is the pattern's
    count in the outcome=1 rows, ``b`` its count in the outcome=0 rows.
    """
    out = []
    for m in mined:
        if m.majority_count is None:
            raise ValueError("majority support missing; call attach_majority_support first")
        a, b = m.minority_count, m.majority_count
        tbl = ContingencyTable(a, b, n_pos - a, n_neg - b)
        orr, corrected = odds_ratio(tbl, zero_cell_policy)
        out.append(
            RankedPattern(
                pattern=m.pattern,
                table=tbl,
                odds_ratio=orr,
                corrected=corrected,
                minority_support=m.minority_support,
                label=format_pattern(m.pattern, variables),
            )
        )
    return out


def rank(candidates: Sequence[RankedPattern], ci_gamma: float | None = None) -> list[RankedPattern]:
    """Sort by descending ``|log OR|``, optionally dropping CIs that contain 1.

    Ties fall back to higher minority support, then fewer terms, then the
    pattern text.
    """
    kept = list(candidates)
    if ci_gamma is not None:
        with_ci = []
        for rp in kept:
            lo, hi = or_confidence_interval(rp.table, ci_gamma)
            if lo <= 1.0 <= hi:
                continue
            with_ci.append(replace(rp, ci=(lo, hi)))
        kept = with_ci
    return sorted(kept, key=RankedPattern.sort_key)


def write_ranked_csv(ranked: Sequence[RankedPattern], path) -> None:
    """One row per ranked pattern: its table, odds ratio and interval."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["pattern", "a", "b", "c", "d", "or", "log_abs_or", "direction", "ci_low", "ci_high", "corrected"])
        for rp in ranked:
            lo, hi = rp.ci if rp.ci is not None else ("", "")
            t = rp.table
            w.writerow([rp.label, t.a, t.b, t.c, t.d, rp.odds_ratio, rp.log_abs_or, rp.direction, lo, hi, int(rp.corrected)])
