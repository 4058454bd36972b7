"""Rebuilding model columns from patterns on any dummy matrix."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .dataset import DummyMatrix, Variable
from .glm import DesignMatrix
from .patterns import Pattern, format_pattern, parse_pattern, support_matrix
from .selector import SelectionResult


@dataclass(frozen=True)
class FeatureRecipe:
    """Each model column is the row-wise sum of a group of pattern indicators.

    A single-pattern group is the pattern itself; a group of single-term
    patterns, one per column, reproduces plain dummy coding.
    """

    kind: str
    columns: tuple[tuple[str, tuple[Pattern, ...]], ...]

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(name for name, _ in self.columns)

    def build(self, dm: DummyMatrix) -> DesignMatrix:
        if not self.columns:
            return DesignMatrix.empty(dm.n)
        unique = list(dict.fromkeys(t for _, pats in self.columns for t in pats))
        where = {t: k for k, t in enumerate(unique)}
        values = np.zeros((dm.n, len(self.columns)))
        if unique:
            sm = support_matrix(unique, dm)
            for j, (_, pats) in enumerate(self.columns):
                if pats:
                    values[:, j] = sm[:, [where[t] for t in pats]].sum(axis=1)
        return DesignMatrix(self.names, values)

    def to_json(self, variables: Sequence[Variable] | None = None) -> dict:
        return {
            "kind": self.kind,
            "columns": [
                {"name": name, "patterns": [format_pattern(t, variables) for t in pats]}
                for name, pats in self.columns
            ],
        }

    @classmethod
    def from_json(cls, obj: dict, variables: Sequence[Variable]) -> "FeatureRecipe":
        cols = tuple(
            (c["name"], tuple(parse_pattern(s, variables) for s in c["patterns"])) for c in obj["columns"]
        )
        return cls(obj["kind"], cols)


def recipe_from_selection(sel: SelectionResult) -> FeatureRecipe:
    if sel.groups:
        cols = tuple((label, tuple(sel.selected[i].pattern for i in members)) for label, members in sel.groups)
        return FeatureRecipe(sel.variant, cols)
    return FeatureRecipe(sel.variant, tuple((r.label, (r.pattern,)) for r in sel.selected))


def dummy_recipe(variables: Sequence[Variable]) -> FeatureRecipe:
    """All dummy levels of every variable, no reference level dropped."""
    cols = []
    for j, v in enumerate(variables):
        for l, level in enumerate(v.levels):
            cols.append((f"{v.name}={level}", (Pattern(((j, l),)),)))
    return FeatureRecipe("dummies", tuple(cols))
