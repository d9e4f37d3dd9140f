"""Command-line entry point: evaluation runs, ablation sweeps, SFT harvesting, reports.

Settings resolve in precedence order: command-line flags beat the config file
(TOML or JSON), which beats built-in defaults. Exit codes: 0 full success,
1 fatal configuration/dataset error, 2 completed run with per-sample failures.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from typing import Dict, List, Optional, Sequence

try:
    import tomllib  # Python >= 3.11
except ModuleNotFoundError:  # pragma: no cover - version shim
    import tomli as tomllib

from .backend import HttpBackend, HttpBackendConfig, OracleBackend, OracleConfig
from .fusion import FusionConfig
from .geometry import ResolutionBudget, TokenCounter
from .harness import (
    CONSISTENCY_N_VALUES,
    EXPANSION_SCALES,
    RESOLUTION_LADDER,
    DatasetError,
    SweepSpec,
    evaluate,
    harvest_sft,
    load_dataset,
    pareto_report,
    read_summary_csv,
    sweep_consistency,
    sweep_expansion,
    sweep_overlap,
    sweep_resolution,
    write_pareto,
    write_records_jsonl,
    write_rows_csv,
    write_summary_csv,
)
from .pipeline import PipelineConfig

EXIT_OK = 0
EXIT_FATAL = 1
EXIT_PARTIAL = 2

DEFAULTS: Dict[str, object] = {
    "backend": "oracle",
    "backend_url": "",
    "model": "",
    "resolution": "full",
    "consistency": 1,
    "wbf_iou": 0.5,
    "temperature": None,
    "seed": 0,
    "workers": 1,
    "out_dir": ".",
    "modality": "box",
    "point_side": 256,
    "patch_px": 28,
    "coord_space": "auto",
    "oracle_sigma_frac": 0.15,
    "oracle_p_floor": 0.3,
    "oracle_p_ceil": 0.95,
    "oracle_ramp_a": 0.2,
    "oracle_ramp_b": 0.8,
    "timeout": 120.0,
    "max_attempts": 3,
}


class CliError(Exception):
    """Fatal configuration or input problem; maps to exit code 1."""


def _add_common_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", default=None, help="TOML or JSON config file; flags override its values")
    parser.add_argument("--dataset", default=None, help="path to the benchmark JSONL file")
    parser.add_argument("--backend", choices=["oracle", "http"], default=None, help="inference backend kind")
    parser.add_argument("--backend-url", default=None, help="chat-completions endpoint URL for the http backend")
    parser.add_argument("--model", default=None, help="model name sent to the backend")
    parser.add_argument("--resolution", default=None, help="longest-side budget for the base image: 256, 512 or full")
    parser.add_argument("--consistency", type=int, default=None, help="number of detection rollouts N")
    parser.add_argument("--wbf-iou", type=float, default=None, help="IoU threshold for fusing rollout boxes")
    parser.add_argument("--temperature", type=float, default=None, help="detection sampling temperature (default: 0.7 when N>1, else 0)")
    parser.add_argument("--seed", type=int, default=None, help="global seed; all run randomness derives from it")
    parser.add_argument("--workers", type=int, default=None, help="bound on concurrent samples")
    parser.add_argument("--out-dir", default=None, help="directory for report files")
    parser.add_argument("--modality", choices=["box", "point"], default=None, help="grounding output modality of the model")
    parser.add_argument("--point-side", type=int, default=None, help="square crop side for point grounding, in original pixels")
    parser.add_argument("--patch-px", type=int, default=None, help="square patch size of the visual-token model")
    parser.add_argument("--coord-space", choices=["auto", "pixel", "norm_1000", "percent"], default=None, help="coordinate space of detection outputs (auto-detected by default)")
    parser.add_argument("--oracle-sigma-frac", type=float, default=None, help="oracle localization noise as a fraction of the gt half-diagonal per unit temperature")
    parser.add_argument("--oracle-p-floor", type=float, default=None, help="oracle answer accuracy at zero overlap")
    parser.add_argument("--oracle-p-ceil", type=float, default=None, help="oracle answer accuracy at full overlap")
    parser.add_argument("--oracle-ramp-a", type=float, default=None, help="overlap where the oracle accuracy ramp starts")
    parser.add_argument("--oracle-ramp-b", type=float, default=None, help="overlap where the oracle accuracy ramp saturates")
    parser.add_argument("--timeout", type=float, default=None, help="per-request timeout for the http backend, seconds")
    parser.add_argument("--max-attempts", type=int, default=None, help="retry budget for transient http failures")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sparc",
        description="Two-stage perception/reasoning evaluation engine for vision-language backends.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="evaluate a dataset and write records.jsonl + summary.csv")
    _add_common_flags(p_run)

    p_ablate = sub.add_parser("ablate", help="run an ablation sweep and write curve CSVs")
    p_ablate.add_argument("kind", choices=["overlap", "expansion", "consistency", "resolution"], help="which sweep to run")
    _add_common_flags(p_ablate)
    p_ablate.add_argument("--steps", type=int, default=11, help="number of evenly spaced shift fractions for the overlap sweep")
    p_ablate.add_argument("--directions", type=int, default=4, help="seeded shift directions per sweep point")
    p_ablate.add_argument("--n", default=None, help="comma-separated rollout counts for the consistency sweep (default 1,4,8)")
    p_ablate.add_argument("--max-scale", type=float, default=10.0, help="cap on the expansion scale grid")
    p_ablate.add_argument("--budgets", default=None, help="comma-separated resolution budgets to sweep (default: the single --resolution value)")

    p_harvest = sub.add_parser("harvest", help="rejection-sample correct stage-1 traces into a JSONL file")
    _add_common_flags(p_harvest)
    p_harvest.add_argument("--out", default=None, help="output path for harvested traces (default <out-dir>/traces.jsonl)")

    p_report = sub.add_parser("report", help="merge summary CSVs into a token/accuracy Pareto table")
    p_report.add_argument("--inputs", nargs="+", required=True, help="summary CSV files to merge")
    p_report.add_argument("--out-dir", default=None, help="directory for pareto.csv and pareto.json")

    return parser


def _load_config_file(path: Optional[str]) -> Dict[str, object]:
    if not path:
        return {}
    try:
        if path.endswith(".json"):
            with open(path, "r", encoding="utf-8") as fh:
                doc = json.load(fh)
        else:
            with open(path, "rb") as fh:
                doc = tomllib.load(fh)
    except OSError as exc:
        raise CliError(f"cannot read config file {path!r}: {exc}")
    except (json.JSONDecodeError, tomllib.TOMLDecodeError) as exc:
        raise CliError(f"cannot parse config file {path!r}: {exc}")
    if not isinstance(doc, dict):
        raise CliError(f"config file {path!r} must contain a table/object at top level")
    flat = dict(doc)
    oracle = flat.pop("oracle", {})
    if isinstance(oracle, dict):
        for key, value in oracle.items():
            flat[f"oracle_{key}"] = value
    return flat


def _resolve_settings(args: argparse.Namespace) -> Dict[str, object]:
    settings = dict(DEFAULTS)
    settings.update(_load_config_file(getattr(args, "config", None)))
    for key in DEFAULTS:
        cli_value = getattr(args, key, None)
        if cli_value is not None:
            settings[key] = cli_value
    if getattr(args, "dataset", None) is not None:
        settings["dataset"] = args.dataset
    return settings


def _build_backend(settings: Dict[str, object]):
    if settings["backend"] == "oracle":
        return OracleBackend(
            OracleConfig(
                sigma_frac=float(settings["oracle_sigma_frac"]),
                p_floor=float(settings["oracle_p_floor"]),
                p_ceil=float(settings["oracle_p_ceil"]),
                ramp_a=float(settings["oracle_ramp_a"]),
                ramp_b=float(settings["oracle_ramp_b"]),
                seed=int(settings["seed"]),
                patch_px=int(settings["patch_px"]),
            )
        )
    if settings["backend"] == "http":
        url = str(settings.get("backend_url") or "")
        if not url:
            raise CliError("http backend needs --backend-url (or backend_url in the config file)")
        return HttpBackend(
            HttpBackendConfig(
                url=url,
                model_name=str(settings["model"]),
                timeout_s=float(settings["timeout"]),
                max_attempts=int(settings["max_attempts"]),
            )
        )
    raise CliError(f"unknown backend {settings['backend']!r}")


def _build_pipeline_config(settings: Dict[str, object]) -> PipelineConfig:
    try:
        budget = ResolutionBudget.from_label(str(settings["resolution"]))
    except ValueError:
        raise CliError(f"invalid --resolution {settings['resolution']!r}; use 256, 512 or full")
    coord = settings["coord_space"]
    temperature = settings["temperature"]
    return PipelineConfig(
        budget=budget,
        consistency_n=int(settings["consistency"]),
        ird_temperature=None if temperature is None else float(temperature),
        fusion=FusionConfig(iou_threshold=float(settings["wbf_iou"])),
        modality=str(settings["modality"]),
        point_side=int(settings["point_side"]),
        patch=TokenCounter(patch_px=int(settings["patch_px"])),
        global_seed=int(settings["seed"]),
        coord_space_hint=None if coord in (None, "auto") else str(coord),  # type: ignore[arg-type]
        model_name=str(settings["model"]),
    )


def _load_dataset_or_die(settings: Dict[str, object]):
    path = settings.get("dataset")
    if not path:
        raise CliError("--dataset is required")
    try:
        dataset = load_dataset(str(path))
    except DatasetError as exc:
        raise CliError(str(exc))
    if not dataset:
        raise CliError(f"dataset {path!r} contains no samples")
    return dataset


def _parse_budgets(settings: Dict[str, object], raw: Optional[str]) -> List[ResolutionBudget]:
    labels = [s.strip() for s in raw.split(",")] if raw else [str(settings["resolution"])]
    try:
        return [ResolutionBudget.from_label(label) for label in labels if label]
    except ValueError:
        raise CliError(f"invalid budget list {raw!r}; entries must be integers or 'full'")


def _out_path(settings: Dict[str, object], name: str) -> str:
    out_dir = str(settings["out_dir"])
    os.makedirs(out_dir, exist_ok=True)
    return os.path.join(out_dir, name)


def cmd_run(args: argparse.Namespace) -> int:
    settings = _resolve_settings(args)
    dataset = _load_dataset_or_die(settings)
    cfg = _build_pipeline_config(settings)
    backend = _build_backend(settings)
    records, summary = evaluate(dataset, cfg, backend, workers=int(settings["workers"]))
    write_records_jsonl(records, _out_path(settings, "records.jsonl"))
    write_summary_csv(summary, _out_path(settings, "summary.csv"))
    print(
        f"evaluated {summary.n_samples} samples: accuracy {summary.accuracy:.4f}, "
        f"mean fused crops {summary.mean_fused_crops:.2f}, errors {summary.n_errors}"
    )
    return EXIT_PARTIAL if summary.n_errors else EXIT_OK


def cmd_ablate(args: argparse.Namespace) -> int:
    settings = _resolve_settings(args)
    dataset = _load_dataset_or_die(settings)
    cfg = _build_pipeline_config(settings)
    backend = _build_backend(settings)
    workers = int(settings["workers"])
    budgets = _parse_budgets(settings, args.budgets if args.kind != "resolution" else (args.budgets or ",".join(RESOLUTION_LADDER)))

    try:
        if args.kind == "overlap":
            if args.steps < 2:
                raise CliError("--steps must be >= 2")
            grid = tuple(i / (args.steps - 1) for i in range(args.steps))
            spec = SweepSpec(kind="overlap", grid=grid, directions_per_point=args.directions, seed=int(settings["seed"]))
            rows = sweep_overlap(dataset, spec, cfg, backend, budgets=budgets, workers=workers)
            for budget in budgets:
                write_rows_csv([r for r in rows if r["budget"] == budget.label], _out_path(settings, f"ablate_overlap_{budget.label}.csv"))
        elif args.kind == "expansion":
            grid = tuple(s for s in EXPANSION_SCALES if s <= args.max_scale)
            spec = SweepSpec(kind="expansion", grid=grid, seed=int(settings["seed"]))
            rows = sweep_expansion(dataset, spec, cfg, backend, budgets=budgets, workers=workers)
            for budget in budgets:
                write_rows_csv([r for r in rows if r["budget"] == budget.label], _out_path(settings, f"ablate_expansion_{budget.label}.csv"))
        elif args.kind == "consistency":
            n_values = [int(v) for v in str(args.n or ",".join(map(str, CONSISTENCY_N_VALUES))).split(",") if v.strip()]
            rows = sweep_consistency(dataset, n_values, cfg, backend, budgets=budgets, workers=workers)
            for budget in budgets:
                write_rows_csv([r for r in rows if r["budget"] == budget.label], _out_path(settings, f"ablate_consistency_{budget.label}.csv"))
        else:  # resolution
            summaries = sweep_resolution(dataset, budgets, cfg, backend, workers=workers)
            write_summary_csv(summaries, _out_path(settings, "ablate_resolution.csv"))
    except ValueError as exc:
        raise CliError(str(exc))
    print(f"ablate {args.kind}: wrote results for {len(budgets)} budget(s) to {settings['out_dir']}")
    return EXIT_OK


def cmd_harvest(args: argparse.Namespace) -> int:
    settings = _resolve_settings(args)
    dataset = _load_dataset_or_die(settings)
    cfg = _build_pipeline_config(settings)
    backend = _build_backend(settings)
    out = args.out or _out_path(settings, "traces.jsonl")
    try:
        accepted = harvest_sft(dataset, cfg, backend, out, workers=int(settings["workers"]))
    except OSError as exc:
        raise CliError(f"cannot write traces to {out!r}: {exc}")
    print(f"accepted {accepted} / rejected {len(dataset) - accepted}")
    return EXIT_OK


def cmd_report(args: argparse.Namespace) -> int:
    rows = []
    for path in args.inputs:
        try:
            rows.extend(read_summary_csv(path))
        except (OSError, DatasetError) as exc:
            raise CliError(str(exc))
    if not rows:
        raise CliError("no summary rows found in the given inputs")
    pareto = pareto_report(rows)
    settings = {"out_dir": args.out_dir or "."}
    write_pareto(pareto, _out_path(settings, "pareto.csv"), _out_path(settings, "pareto.json"))
    frontier = sum(1 for r in pareto if not r.dominated)
    print(f"pareto: {len(pareto)} configurations, {frontier} on the frontier")
    return EXIT_OK


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "run": cmd_run,
        "ablate": cmd_ablate,
        "harvest": cmd_harvest,
        "report": cmd_report,
    }
    try:
        return handlers[args.command](args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FATAL


if __name__ == "__main__":
    sys.exit(main())
