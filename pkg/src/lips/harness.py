"""Metrics, single-trial pipelines, repeated trials and parameter sweeps."""

from __future__ import annotations

import csv
import json
import math
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Any, Sequence

import numpy as np
from scipy.stats import rankdata

from . import glm, simulator
from .dataset import CategoricalDataset, encode_dummies, load_csv, split
from .features import FeatureRecipe, dummy_recipe, recipe_from_selection
from .miner import MinerConfig, mine_candidates
from .ranking import rank, rank_candidates
from .selector import SelectionResult, select_clusters, select_dissimilar, select_scores, select_top

VARIANTS = (
    "lips",
    "scores_lips",
    "clusters_lips",
    "top_lips",
    "double_search_lips",
    "lr_baseline",
    "lasso_baseline",
)
PATTERN_VARIANTS = VARIANTS[:5]
METRICS = ("auc", "sensitivity", "specificity", "npv", "ppv", "n_terms", "fit_seconds")


class ConfigError(ValueError):
    pass


# ---------------------------------------------------------------------------
# metrics
# ---------------------------------------------------------------------------


def auc(scores, y) -> float:
    """Mann-Whitney AUC; tied positive/negative pairs count one half."""
    scores = np.asarray(scores, dtype=float)
    y = np.asarray(y).astype(bool)
    n1 = int(y.sum())
    n0 = y.size - n1
    if n1 == 0 or n0 == 0:
        raise ValueError("AUC needs both classes")
    ranks = rankdata(scores)
    u = ranks[y].sum() - n1 * (n1 + 1) / 2.0
    return float(u / (n1 * n0))


def confusion_metrics(probs, y, threshold: float) -> dict[str, float]:
    """Sensitivity, specificity, NPV and PPV at ``prob >= threshold``.

    A rate whose denominator is empty comes back as NaN.
    """
    probs = np.asarray(probs, dtype=float)
    y = np.asarray(y).astype(bool)
    pred = probs >= threshold
    tp = int(np.sum(pred & y))
    fp = int(np.sum(pred & ~y))
    fn = int(np.sum(~pred & y))
    tn = int(np.sum(~pred & ~y))

    def ratio(a, b):
        return a / b if b else math.nan

    return {
        "sensitivity": ratio(tp, tp + fn),
        "specificity": ratio(tn, tn + fp),
        "npv": ratio(tn, tn + fn),
        "ppv": ratio(tp, tp + fp),
    }


@dataclass(frozen=True)
class ThresholdPolicy:
    kind: str = "fixed"
    value: float = 0.5

    def __post_init__(self):
        if self.kind not in ("fixed", "prevalence", "youden"):
            raise ConfigError(f"unknown threshold policy {self.kind!r}")

    @classmethod
    def parse(cls, value) -> "ThresholdPolicy":
        if value is None:
            return cls()
        if isinstance(value, ThresholdPolicy):
            return value
        if isinstance(value, dict):
            return cls(value.get("kind", "fixed"), float(value.get("value", 0.5)))
        if isinstance(value, (int, float)):
            return cls("fixed", float(value))
        text = str(value).strip().lower()
        if text.startswith("fixed"):
            inner = text[5:].strip("() ")
            return cls("fixed", float(inner) if inner else 0.5)
        return cls(text)

    def choose(self, train_probs, train_y) -> float:
        """Threshold picked from training predictions only."""
        if self.kind == "fixed":
            return self.value
        y = np.asarray(train_y).astype(bool)
        if self.kind == "prevalence":
            return float(y.mean())
        probs = np.asarray(train_probs, dtype=float)
        best, best_j = 0.5, -np.inf
        for t in np.unique(probs):
            m = confusion_metrics(probs, y, t)
            j = m["sensitivity"] + m["specificity"] - 1.0
            if j > best_j:
                best, best_j = float(t), j
        return best

    def __str__(self):
        return f"fixed({self.value})" if self.kind == "fixed" else self.kind


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CsvSource:
    path: str
    label: str
    missing: str = "own_level"
    positive_label: str | None = None
    header_names: tuple[str, ...] | None = None

    def load(self) -> CategoricalDataset:
        return load_csv(
            self.path,
            self.label,
            self.missing,
            positive_label=self.positive_label,
            header_names=self.header_names,
        )


@dataclass(frozen=True)
class ExperimentConfig:
    variants: tuple[str, ...] = ("lips",)
    K: int = 10
    supp_min: float = 0.1
    max_len: int | None = None
    ci_gamma: float | None = None
    lam: float = 1e-5
    trials: int = 10
    train_fraction: float = 0.7
    seed: int = 0
    seeds: tuple[int, ...] | None = None
    threshold: ThresholdPolicy = field(default_factory=ThresholdPolicy)
    simulate: simulator.TilingConfig | None = None
    csv: CsvSource | None = None
    p1: float | None = None
    criterion: str = "farthest"
    stratified: bool = True
    n_jobs: int = 1

    def __post_init__(self):
        if isinstance(self.variants, str):
            object.__setattr__(self, "variants", (self.variants,))
        object.__setattr__(self, "variants", tuple(self.variants))
        for v in self.variants:
            if v not in VARIANTS:
                raise ConfigError(f"unknown variant {v!r}")
        if self.trials < 1:
            raise ConfigError("trials must be at least 1")
        if self.K < 1 and any(v in PATTERN_VARIANTS for v in self.variants):
            raise ConfigError("K must be at least 1 for pattern variants")
        if self.simulate is None and self.csv is None:
            object.__setattr__(self, "simulate", simulator.TilingConfig())
        if self.simulate is not None and self.csv is not None:
            raise ConfigError("give either a simulate or a csv data source, not both")
        if self.p1 is not None and self.simulate is None:
            raise ConfigError("p1 needs the simulated data source")
        if self.seeds is not None:
            object.__setattr__(self, "seeds", tuple(int(s) for s in self.seeds))
            if len(self.seeds) != self.trials:
                raise ConfigError("seeds must list exactly one seed per trial")
        object.__setattr__(self, "threshold", ThresholdPolicy.parse(self.threshold))
        MinerConfig(self.supp_min, self.max_len)  # validates both

    def trial_seeds(self) -> tuple[int, ...]:
        return self.seeds if self.seeds is not None else tuple(range(self.seed, self.seed + self.trials))

    @classmethod
    def from_dict(cls, obj: dict[str, Any]) -> "ExperimentConfig":
        obj = dict(obj)
        data = obj.pop("data", None) or {}
        kwargs: dict[str, Any] = {}
        if "simulate" in data:
            sim = dict(data["simulate"])
            for key in ("red_left", "red_right"):
                if key in sim:
                    sim[key] = tuple(sim[key])
            kwargs["simulate"] = simulator.TilingConfig(**sim)
        if "csv" in data:
            src = dict(data["csv"])
            if src.get("header_names") is not None:
                src["header_names"] = tuple(src["header_names"])
            kwargs["csv"] = CsvSource(**src)
        if "variant" in obj:
            obj["variants"] = obj.pop("variant")
        if "lambda" in obj:
            obj["lam"] = obj.pop("lambda")
        obj.pop("grid", None)
        obj.pop("axis", None)
        unknown = set(obj) - set(cls.__dataclass_fields__)
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        return cls(**obj, **kwargs)

    @classmethod
    def from_json(cls, path) -> "ExperimentConfig":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))

    def to_dict(self) -> dict:
        out = {
            "variants": list(self.variants),
            "K": self.K,
            "supp_min": self.supp_min,
            "max_len": self.max_len,
            "ci_gamma": self.ci_gamma,
            "lambda": self.lam,
            "trials": self.trials,
            "train_fraction": self.train_fraction,
            "seed": self.seed,
            "seeds": list(self.seeds) if self.seeds is not None else None,
            "threshold": str(self.threshold),
            "p1": self.p1,
            "criterion": self.criterion,
            "stratified": self.stratified,
            "n_jobs": self.n_jobs,
        }
        if self.simulate is not None:
            sim = asdict(self.simulate)
            sim["red_left"], sim["red_right"] = list(sim["red_left"]), list(sim["red_right"])
            out["data"] = {"simulate": sim}
        else:
            out["data"] = {"csv": asdict(self.csv)}
        return out


# ---------------------------------------------------------------------------
# single trial
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TrialMetrics:
    auc: float
    sensitivity: float
    specificity: float
    npv: float
    ppv: float
    n_terms: int
    fit_seconds: float
    threshold: float = 0.5
    degenerate: bool = False

    def as_dict(self) -> dict:
        return asdict(self)


@dataclass
class TrialResult:
    variant: str
    seed: int
    metrics: TrialMetrics
    selection: SelectionResult | None = None
    model: glm.FittedModel | None = None
    recipe: FeatureRecipe | None = None
    notes: list[str] = field(default_factory=list)


def _degenerate(seconds: float) -> TrialMetrics:
    nan = math.nan
    return TrialMetrics(nan, nan, nan, nan, nan, 0, seconds, nan, True)


def _select(variant: str, ranked, cfg: ExperimentConfig) -> SelectionResult:
    if variant in ("lips", "double_search_lips"):
        return select_dissimilar(ranked, cfg.K, criterion=cfg.criterion)
    if variant == "top_lips":
        return select_top(ranked, cfg.K)
    if variant == "scores_lips":
        return select_scores(ranked, cfg.K, criterion=cfg.criterion)
    if variant == "clusters_lips":
        return select_clusters(ranked, cfg.K, criterion=cfg.criterion)
    raise ConfigError(f"{variant} is not a pattern variant")


def run_pipeline(cfg: ExperimentConfig, variant: str, train: CategoricalDataset, test: CategoricalDataset, seed: int = 0) -> TrialResult:
    """Train one variant on ``train`` and score it on ``test``.

    Mining, ranking, selection, fitting and threshold choice see only the
    training rows; the test rows are used to build columns from the fitted
    recipe and to compute metrics.
    """
    if variant not in VARIANTS:
        raise ConfigError(f"unknown variant {variant!r}")
    t0 = time.perf_counter()
    dm_train = encode_dummies(train)
    notes: list[str] = []
    selection = None

    if variant in PATTERN_VARIANTS:
        search = "both_classes" if variant == "double_search_lips" else "minority_only"
        mcfg = MinerConfig(cfg.supp_min, cfg.max_len, search)
        mined = mine_candidates(dm_train, train.outcome, mcfg)
        n_pos = int(train.outcome.sum())
        ranked = rank(rank_candidates(mined, n_pos, train.n - n_pos, variables=train.variables), cfg.ci_gamma)
        if not ranked:
            return TrialResult(variant, seed, _degenerate(time.perf_counter() - t0), notes=["no candidate patterns"])
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            selection = _select(variant, ranked, cfg)
        notes.extend(str(w.message) for w in caught)
        recipe = recipe_from_selection(selection)
    else:
        recipe = dummy_recipe(train.variables)

    X_train = recipe.build(dm_train)
    recipe_json = recipe.to_json(train.variables)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        if variant == "lasso_baseline":
            model = glm.fit_logistic_l1(X_train, train.outcome, cfg.lam, recipe=recipe_json)
        else:
            model = glm.fit_logistic(X_train, train.outcome, recipe=recipe_json)
    notes.extend(str(w.message) for w in caught)
    if model.separation_suspected:
        notes.append("separation suspected")
    threshold = cfg.threshold.choose(glm.predict_proba(model, X_train), train.outcome)
    seconds = time.perf_counter() - t0

    probs = glm.predict_proba(model, recipe.build(encode_dummies(test)))
    rates = confusion_metrics(probs, test.outcome, threshold)
    n_terms = model.n_terms if variant == "lasso_baseline" else X_train.k
    metrics = TrialMetrics(auc(probs, test.outcome), n_terms=n_terms, fit_seconds=seconds, threshold=threshold, **rates)
    return TrialResult(variant, seed, metrics, selection, model, recipe, notes)


# ---------------------------------------------------------------------------
# repeated trials
# ---------------------------------------------------------------------------


def trial_data(cfg: ExperimentConfig, seed: int, base: CategoricalDataset | None = None):
    """Train/test split for one trial seed."""
    if cfg.simulate is not None:
        sim = replace(cfg.simulate, seed=seed)
        ds = simulator.generate_with_prior(sim, cfg.p1) if cfg.p1 is not None else simulator.generate(sim)
    else:
        ds = base if base is not None else cfg.csv.load()
    return split(ds, cfg.train_fraction, seed, cfg.stratified)


def _run_one_trial(args) -> list[TrialResult]:
    cfg, seed, base = args
    train, test = trial_data(cfg, seed, base)
    return [run_pipeline(cfg, v, train, test, seed) for v in cfg.variants]


@dataclass
class Summary:
    config: ExperimentConfig
    results: list[TrialResult]

    def per_variant(self) -> dict[str, list[TrialResult]]:
        out: dict[str, list[TrialResult]] = {v: [] for v in self.config.variants}
        for r in self.results:
            out[r.variant].append(r)
        return out

    def table(self) -> list[dict]:
        """One row per variant: mean and sd of every metric over the trials.

        NaN cells are left out of the mean and counted in ``<metric>_excluded``.
        A single usable value gets sd 0.
        """
        rows = []
        for variant, res in self.per_variant().items():
            row: dict[str, Any] = {"variant": variant, "trials": len(res)}
            row["degenerate"] = sum(r.metrics.degenerate for r in res)
            for m in METRICS:
                vals = np.array([getattr(r.metrics, m) for r in res], dtype=float)
                ok = vals[~np.isnan(vals)]
                row[f"{m}_mean"] = float(ok.mean()) if ok.size else math.nan
                row[f"{m}_sd"] = float(ok.std(ddof=1)) if ok.size > 1 else (0.0 if ok.size else math.nan)
                row[f"{m}_excluded"] = int(vals.size - ok.size)
            rows.append(row)
        return rows

    def mean(self, variant: str, metric: str) -> float:
        for row in self.table():
            if row["variant"] == variant:
                return row[f"{metric}_mean"]
        raise KeyError(variant)

    def values(self, variant: str, metric: str) -> np.ndarray:
        return np.array([getattr(r.metrics, metric) for r in self.per_variant()[variant]], dtype=float)

    def write(self, out_dir) -> None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        rows = self.table()
        _write_rows(out / "summary.csv", rows)
        trial_rows = [{"variant": r.variant, "seed": r.seed, **r.metrics.as_dict()} for r in self.results]
        _write_rows(out / "trials.csv", trial_rows)
        first = {}
        for r in self.results:
            first.setdefault(r.variant, r)
        selection = {}
        models = {}
        for v, r in first.items():
            if r.selection is not None:
                sel = r.selection.to_json()
                sel["seed"] = r.seed
                if self.config.simulate is not None:
                    for item, rp in zip(sel["selected"], r.selection.selected):
                        item["tiles"] = simulator.pattern_tiles(rp.pattern)
                selection[v] = sel
            if r.model is not None:
                models[v] = {"seed": r.seed, **r.model.to_json()}
        _dump_json(out / "selection.json", selection)
        _dump_json(out / "model.json", models)
        _dump_json(out / "summary.json", {"config": self.config.to_dict(), "summary": rows})


def _clean(obj):
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.generic):
        return _clean(obj.item())
    return obj


def _dump_json(path: Path, obj) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(_clean(obj), fh, indent=2)


def _write_rows(path: Path, rows: Sequence[dict]) -> None:
    if not rows:
        path.write_text("")
        return
    keys = list(rows[0])
    for row in rows[1:]:
        keys.extend(k for k in row if k not in keys)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.DictWriter(fh, fieldnames=keys)
        w.writeheader()
        w.writerows(rows)


def run_trials(cfg: ExperimentConfig, out_dir=None) -> Summary:
    """Run every configured variant on the same per-seed splits."""
    base = cfg.csv.load() if cfg.csv is not None else None
    jobs = [(cfg, s, base) for s in cfg.trial_seeds()]
    if cfg.n_jobs > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=cfg.n_jobs) as pool:
            batches = list(pool.map(_run_one_trial, jobs))
    else:
        batches = [_run_one_trial(j) for j in jobs]
    summary = Summary(cfg, [r for batch in batches for r in batch])
    if out_dir is not None:
        summary.write(out_dir)
    return summary


SWEEP_AXES = ("sample_size", "imbalance")


def sweep(cfg: ExperimentConfig, axis: str, grid: Sequence[float], out_dir=None) -> list[tuple[float, Summary]]:
    """Repeat :func:`run_trials` over a grid of sample sizes or minority rates."""
    axis = axis.replace("-", "_")
    if axis not in SWEEP_AXES:
        raise ConfigError(f"axis must be one of {SWEEP_AXES}")
    if cfg.simulate is None:
        raise ConfigError("sweeps need the simulated data source")
    out = []
    for value in grid:
        if axis == "sample_size":
            point = replace(cfg, simulate=replace(cfg.simulate, n=int(value)))
        else:
            point = replace(cfg, p1=float(value))
        out.append((value, run_trials(point)))
    if out_dir is not None:
        path = Path(out_dir)
        path.mkdir(parents=True, exist_ok=True)
        rows = [{axis: value, **row} for value, s in out for row in s.table()]
        _write_rows(path / "sweep.csv", rows)
        _dump_json(path / "sweep.json", {"config": cfg.to_dict(), "axis": axis, "rows": rows})
    return out
