"""Selection of dissimilar interaction patterns for logistic regression."""

from .dataset import CategoricalDataset, DatasetError, DummyMatrix, Variable, encode_dummies, load_csv, split
from .features import FeatureRecipe, dummy_recipe, recipe_from_selection
from .glm import DesignMatrix, FittedModel, fit_logistic, fit_logistic_l1, predict_proba, wald_stats
from .harness import ExperimentConfig, ThresholdPolicy, auc, confusion_metrics, run_pipeline, run_trials, sweep
from .miner import MinerConfig, mine, mine_candidates
from .patterns import Pattern, dissimilarity, format_pattern, parse_pattern, support_matrix
from .ranking import RankedPattern, odds_ratio, or_confidence_interval, rank, rank_candidates
from .selector import (
    SelectionResult,
    compatibility_graph,
    greedy_clique_cover,
    maximal_cliques,
    select_clusters,
    select_dissimilar,
    select_scores,
    select_top,
)
from .simulator import TilingConfig, generate, generate_with_prior

__version__ = "0.1.0"

__all__ = [
    "CategoricalDataset",
    "DatasetError",
    "DesignMatrix",
    "DummyMatrix",
    "ExperimentConfig",
    "FeatureRecipe",
    "FittedModel",
    "MinerConfig",
    "Pattern",
    "RankedPattern",
    "SelectionResult",
    "ThresholdPolicy",
    "TilingConfig",
    "Variable",
    "auc",
    "compatibility_graph",
    "confusion_metrics",
    "dissimilarity",
    "dummy_recipe",
    "encode_dummies",
    "fit_logistic",
    "fit_logistic_l1",
    "format_pattern",
    "generate",
    "generate_with_prior",
    "greedy_clique_cover",
    "load_csv",
    "maximal_cliques",
    "mine",
    "mine_candidates",
    "odds_ratio",
    "or_confidence_interval",
    "parse_pattern",
    "predict_proba",
    "rank",
    "rank_candidates",
    "recipe_from_selection",
    "run_pipeline",
    "run_trials",
    "select_clusters",
    "select_dissimilar",
    "select_scores",
    "select_top",
    "split",
    "support_matrix",
    "sweep",
    "wald_stats",
]
