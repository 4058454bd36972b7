"""Choosing the final interaction terms from a ranked candidate list.

Plain selection is a farthest-first traversal under the pattern
dissimilarity: start from the top-ranked pattern, then repeatedly add the
candidate whose distance to the already selected set is largest, breaking
ties by rank. The score variants split the list by odds-ratio direction and
aggregate each half, either into a single count or into compatibility
clusters obtained by greedy maximum-clique removal.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np

from . import _kernels
from .dataset import DummyMatrix
from .patterns import Pattern, incompatible, pattern_codes, support_matrix
from .ranking import RankedPattern

VARIANTS = ("plain", "top", "scores", "clusters")


class SelectionWarning(UserWarning):
    pass


@dataclass(frozen=True)
class SelectionResult:
    """Selected patterns in selection order, plus optional grouping.

    ``groups`` maps a label (``R``/``P`` for scores, ``R1``.. / ``P1``.. for
    clusters) to indices into ``selected``.
    """

    selected: tuple[RankedPattern, ...]
    variant: str = "plain"
    min_distances: tuple[int | None, ...] = ()
    groups: tuple[tuple[str, tuple[int, ...]], ...] = ()
    notes: tuple[str, ...] = field(default=())

    def __len__(self):
        return len(self.selected)

    @property
    def patterns(self) -> list[Pattern]:
        return [r.pattern for r in self.selected]

    def group_of(self, i: int) -> str | None:
        for label, members in self.groups:
            if i in members:
                return label
        return None

    def to_json(self) -> dict:
        rows = []
        for i, r in enumerate(self.selected):
            dist = self.min_distances[i] if i < len(self.min_distances) else None
            rows.append(
                {
                    "step": i + 1,
                    "pattern": r.label,
                    "terms": len(r.pattern),
                    "direction": r.direction,
                    "odds_ratio": r.odds_ratio,
                    "log_abs_or": r.log_abs_or,
                    "corrected": r.corrected,
                    "min_distance": dist,
                    "cluster": self.group_of(i),
                }
            )
        return {"variant": self.variant, "selected": rows, "notes": list(self.notes)}


def _n_vars(patterns: Sequence[Pattern]) -> int:
    return max((v + 1 for t in patterns for v in t.variables), default=1)


def select_dissimilar(ranked: Sequence[RankedPattern], K: int, *, criterion: str = "farthest") -> SelectionResult:
    """Greedy maximin selection of up to ``K`` patterns from a ranked list.

    ``criterion="nearest"`` flips the step to pick the candidate *closest*
    to the selected set; it exists only to compare against the literal
    argmin reading of the procedure.
    """
    if K < 1:
        raise ValueError("K must be at least 1")
    if criterion not in ("farthest", "nearest"):
        raise ValueError(f"unknown criterion {criterion!r}")
    ranked = list(ranked)
    if not ranked:
        return SelectionResult((), "plain")
    pats = [r.pattern for r in ranked]
    codes, sizes = pattern_codes(pats, _n_vars(pats))
    L = len(ranked)
    mind = np.full(L, np.iinfo(np.int64).max // 2, dtype=np.int64)
    remaining = np.ones(L, dtype=bool)

    chosen, dists = [0], [None]
    remaining[0] = False
    mind = _kernels.min_dissimilarity(codes, sizes, codes[0], sizes[0], mind)
    while len(chosen) < K and remaining.any():
        live = np.flatnonzero(remaining)
        vals = mind[live]
        best = vals.max() if criterion == "farthest" else vals.min()
        pick = int(live[np.argmax(vals == best)])  # first hit = highest rank
        chosen.append(pick)
        dists.append(int(best))
        remaining[pick] = False
        mind = _kernels.min_dissimilarity(codes, sizes, codes[pick], sizes[pick], mind)
    return SelectionResult(tuple(ranked[i] for i in chosen), "plain", tuple(dists))


def select_top(ranked: Sequence[RankedPattern], K: int) -> SelectionResult:
    if K < 1:
        raise ValueError("K must be at least 1")
    top = tuple(ranked[:K])
    return SelectionResult(top, "top", tuple([None] * len(top)))


def split_risk_protection(ranked: Sequence[RankedPattern]) -> tuple[list[RankedPattern], list[RankedPattern]]:
    """Risk list (OR > 1, descending OR) and protection list (OR < 1, ascending)."""
    risk = sorted((r for r in ranked if r.odds_ratio > 1), key=lambda r: -r.odds_ratio)
    protection = sorted((r for r in ranked if r.odds_ratio < 1), key=lambda r: r.odds_ratio)
    return risk, protection


def budgets(K: int) -> tuple[int, int]:
    """Risk and protection budgets; odd K gives the extra slot to risk."""
    return math.ceil(K / 2), K // 2


def _split_select(ranked, K, criterion):
    if K < 1:
        raise ValueError("K must be at least 1")
    risk, protection = split_risk_protection(ranked)
    k_risk, k_prot = budgets(K)
    notes = []
    sel_r = select_dissimilar(risk, k_risk, criterion=criterion) if risk and k_risk else SelectionResult(())
    sel_p = select_dissimilar(protection, k_prot, criterion=criterion) if protection and k_prot else SelectionResult(())
    for name, got, want in (("risk", len(sel_r), k_risk), ("protection", len(sel_p), k_prot)):
        if got < want:
            msg = f"{name} list shorter than its budget ({got} < {want})"
            notes.append(msg)
            warnings.warn(msg, SelectionWarning, stacklevel=3)
    return sel_r, sel_p, tuple(notes)


def select_scores(ranked: Sequence[RankedPattern], K: int, *, criterion: str = "farthest") -> SelectionResult:
    """Dissimilar risk and protection selections summed into two scores."""
    sel_r, sel_p, notes = _split_select(ranked, K, criterion)
    nr = len(sel_r)
    groups = (("R", tuple(range(nr))), ("P", tuple(range(nr, nr + len(sel_p)))))
    return SelectionResult(
        sel_r.selected + sel_p.selected, "scores", sel_r.min_distances + sel_p.min_distances, groups, notes
    )


def select_clusters(ranked: Sequence[RankedPattern], K: int, *, criterion: str = "farthest") -> SelectionResult:
    """Like :func:`select_scores` but each half is split into compatibility clusters."""
    sel_r, sel_p, notes = _split_select(ranked, K, criterion)
    groups = []
    offset = 0
    for prefix, sel in (("R", sel_r), ("P", sel_p)):
        if len(sel):
            g = compatibility_graph(sel.patterns)
            cover = greedy_clique_cover(g, weights=[r.log_abs_or for r in sel.selected], labels=[r.label for r in sel.selected])
            for j, members in enumerate(cover, start=1):
                groups.append((f"{prefix}{j}", tuple(offset + i for i in members)))
        offset += len(sel)
    return SelectionResult(
        sel_r.selected + sel_p.selected, "clusters", sel_r.min_distances + sel_p.min_distances, tuple(groups), notes
    )


def build_scores(risk_sel: Sequence[Pattern], prot_sel: Sequence[Pattern], dm: DummyMatrix) -> tuple[np.ndarray, np.ndarray]:
    """Per-row counts of selected risk and protection patterns."""
    def count(pats):
        if not len(pats):
            return np.zeros(dm.n, dtype=np.int64)
        return support_matrix(list(pats), dm).sum(axis=1, dtype=np.int64)

    return count(risk_sel), count(prot_sel)


# ---------------------------------------------------------------------------
# compatibility clusters
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class CompatibilityGraph:
    nodes: tuple[Pattern, ...]
    adjacency: np.ndarray

    def neighbours(self, i: int) -> set[int]:
        return set(np.flatnonzero(self.adjacency[i]).tolist())


def compatibility_graph(patterns: Sequence[Pattern]) -> CompatibilityGraph:
    """Undirected graph linking every pair of compatible patterns."""
    patterns = tuple(patterns)
    if len(set(patterns)) != len(patterns):
        raise ValueError("duplicate patterns in compatibility graph")
    L = len(patterns)
    adj = np.zeros((L, L), dtype=bool)
    for i in range(L):
        for j in range(i + 1, L):
            if not incompatible(patterns[i], patterns[j]):
                adj[i, j] = adj[j, i] = True
    return CompatibilityGraph(patterns, adj)


def maximal_cliques(adj: dict[int, set[int]]) -> Iterator[frozenset[int]]:
    """Bron-Kerbosch with Tomita pivoting over an adjacency-set mapping."""

    def expand(R, P, X):
        if not P and not X:
            yield frozenset(R)
            return
        pivot = max(P | X, key=lambda u: len(adj[u] & P))
        for v in list(P - adj[pivot]):
            yield from expand(R | {v}, P & adj[v], X & adj[v])
            P = P - {v}
            X = X | {v}

    yield from expand(set(), set(adj), set())


def greedy_clique_cover(
    g: CompatibilityGraph,
    weights: Sequence[float] | None = None,
    labels: Sequence[str] | None = None,
) -> list[list[int]]:
    """Partition the graph by repeatedly removing a maximum clique.

    Among equally large cliques the one with the larger total weight wins,
    then the lexicographically smaller list of member labels.
    """
    L = len(g.nodes)
    weights = list(weights) if weights is not None else [0.0] * L
    labels = list(labels) if labels is not None else [repr(t.terms) for t in g.nodes]
    left = set(range(L))
    cover = []
    while left:
        adj = {i: g.neighbours(i) & left for i in left}
        best = min(
            maximal_cliques(adj),
            key=lambda c: (-len(c), -sum(weights[i] for i in c), sorted(labels[i] for i in c)),
        )
        cover.append(sorted(best))
        left -= best
    return cover


def build_cluster_scores(
    cover: Sequence[tuple[str, Sequence[Pattern]]], dm: DummyMatrix
) -> list[tuple[str, np.ndarray]]:
    """One integer column per cluster: how many of its patterns each row carries."""
    out = []
    for label, pats in cover:
        col = support_matrix(list(pats), dm).sum(axis=1, dtype=np.int64)
        out.append((label, col))
    return out


def check_cover(g: CompatibilityGraph, cover: Sequence[Sequence[int]]) -> dict:
    """Report partition, within-cluster compatibility and the no-merge property.

    ``mergeable`` lists cluster pairs whose union would still be a clique;
    the greedy cover does not promise there are none.
    """
    flat = sorted(i for c in cover for i in c)
    partition = flat == list(range(len(g.nodes)))
    compatible = all(g.adjacency[i, j] for c in cover for i in c for j in c if i != j)
    mergeable = [
        (a, b)
        for a in range(len(cover))
        for b in range(a + 1, len(cover))
        if all(g.adjacency[i, j] for i in cover[a] for j in cover[b])
    ]
    return {"partition": partition, "compatible": compatible, "mergeable": mergeable}
