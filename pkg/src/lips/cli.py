"""Command-line entry point: ``lips <command> ...``.

Every command prints a JSON object on stdout. Failures print
``{"error": <type>, "message": <text>}`` and exit with status 1
(2 for argument errors, as argparse does).
"""

from __future__ import annotations

import argparse
import csv
import json
import sys

from . import harness, simulator
from .dataset import DatasetError, encode_dummies, load_csv, write_csv
from .miner import MinerConfig, MiningError, mine_candidates
from .patterns import format_pattern
from .ranking import rank, rank_candidates, write_ranked_csv


def _int_list(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(t) for t in text.split(",") if t.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _float_list(text: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _missing(text: str) -> str:
    return {"own-level": "own_level", "drop": "drop_row"}[text]


def _load(args):
    columns = args.columns.split(",") if getattr(args, "columns", None) else None
    return load_csv(
        args.input,
        args.label,
        _missing(args.missing),
        positive_label=args.positive_label,
        header_names=columns,
    )


def _add_input(p):
    p.add_argument("--input", required=True)
    p.add_argument("--label", required=True, help="name of the outcome column")
    p.add_argument("--missing", choices=("own-level", "drop"), default="own-level")
    p.add_argument("--positive-label", default=None, help="label coded 1 (default: the minority class)")
    p.add_argument("--columns", default=None, help="comma-separated names for a headerless file")


def cmd_simulate(args) -> dict:
    cfg = simulator.TilingConfig(
        n=args.n,
        red_left=args.red_left,
        red_right=args.red_right,
        p_tilde=args.p_tilde,
        q_tilde=args.q_tilde,
        seed=args.seed,
    )
    ds = simulator.generate(cfg)
    write_csv(ds, args.out)
    raw, noisy = simulator.exact_prior(cfg)
    return {"out": str(args.out), "n": ds.n, "positives": int(ds.outcome.sum()), "expected_rate": noisy}


def cmd_ingest(args) -> dict:
    ds = _load(args)
    if args.out:
        write_csv(ds, args.out)
    return {
        "n": ds.n,
        "p": ds.p,
        "positives": int(ds.outcome.sum()),
        "class_labels": {"0": ds.class_labels[0], "1": ds.class_labels[1]},
        "variables": [{"name": v.name, "levels": list(v.levels)} for v in ds.variables],
        "out": args.out,
    }


def cmd_mine(args) -> dict:
    ds = _load(args)
    search = "minority_only" if args.classes == "minority" else "both_classes"
    dm = encode_dummies(ds)
    mined = mine_candidates(dm, ds.outcome, MinerConfig(args.supp_min, args.max_len, search))
    with open(args.out, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["pattern", "minority_support", "majority_support"])
        for m in mined:
            w.writerow([format_pattern(m.pattern, ds.variables), m.minority_support, m.majority_support])
    out = {"patterns": len(mined), "out": str(args.out)}
    if args.ranked_out:
        n_pos = int(ds.outcome.sum())
        ranked = rank(rank_candidates(mined, n_pos, ds.n - n_pos, variables=ds.variables), args.ci_gamma)
        write_ranked_csv(ranked, args.ranked_out)
        out.update(ranked=len(ranked), ranked_out=str(args.ranked_out))
    return out


def _summary_json(summary: harness.Summary) -> list[dict]:
    keep = ("variant", "trials", "degenerate", "auc_mean", "auc_sd", "sensitivity_mean", "specificity_mean", "n_terms_mean")
    return [{k: row[k] for k in keep} for row in harness._clean(summary.table())]


def cmd_run(args) -> dict:
    cfg = harness.ExperimentConfig.from_json(args.config)
    summary = harness.run_trials(cfg, args.out_dir)
    return {"out_dir": str(args.out_dir), "summary": _summary_json(summary)}


def cmd_sweep(args) -> dict:
    with open(args.config, encoding="utf-8") as fh:
        raw = json.load(fh)
    grid = args.grid if args.grid is not None else raw.get("grid")
    if not grid:
        raise harness.ConfigError("no grid given (use --grid or a 'grid' key in the config)")
    cfg = harness.ExperimentConfig.from_dict(raw)
    points = harness.sweep(cfg, args.axis, grid, args.out_dir)
    return {"out_dir": str(args.out_dir), "points": len(points), "axis": args.axis}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lips", description="Interaction-pattern selection for logistic regression.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="generate a two-tiling dataset")
    p.add_argument("--n", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--red-left", type=_int_list, default=simulator.DEFAULT_RED_LEFT)
    p.add_argument("--red-right", type=_int_list, default=simulator.DEFAULT_RED_RIGHT)
    p.add_argument("--p-tilde", type=float, default=0.005)
    p.add_argument("--q-tilde", type=float, default=0.05)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("ingest", help="validate a categorical CSV and report its schema")
    _add_input(p)
    p.add_argument("--out", default=None, help="optional normalised CSV copy")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("mine", help="mine frequent patterns of the positive class")
    _add_input(p)
    p.add_argument("--supp-min", type=float, default=0.1)
    p.add_argument("--max-len", type=int, default=None)
    p.add_argument("--classes", choices=("minority", "both"), default="minority")
    p.add_argument("--out", required=True)
    p.add_argument("--ranked-out", default=None, help="also write the odds-ratio ranking here")
    p.add_argument("--ci-gamma", type=float, default=None)
    p.set_defaults(func=cmd_mine)

    p = sub.add_parser("run", help="repeated train/test trials from a JSON config")
    p.add_argument("--config", required=True)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep", help="run trials over a sample-size or class-mix grid")
    p.add_argument("--axis", choices=("sample-size", "imbalance"), required=True)
    p.add_argument("--config", required=True)
    p.add_argument("--grid", type=_float_list, default=None)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        result = args.func(args)
    except (DatasetError, MiningError, harness.ConfigError, ValueError, OSError, KeyError, TypeError) as exc:
        json.dump({"error": type(exc).__name__, "message": str(exc)}, sys.stdout)
        sys.stdout.write("\n")
        return 1
    json.dump(result, sys.stdout, default=str)
    sys.stdout.write("\n")
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
