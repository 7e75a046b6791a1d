"""Command-line entry point.

Subcommands chain the pipeline end to end: synth -> ingest/segment ->
train/evaluate -> report.  Exit codes: 0 success, 2 usage or configuration
problem, 3 data validation failure, 4 runtime failure; every failure prints
a one-line diagnostic to stderr.  Outputs carry no timestamps, so reruns
with identical flags and seed are byte-identical.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .errors import SwinglabError
from .experiment import (
    ExperimentConfig,
    TASKS,
    build_tables,
    child_seed,
    confusion_csv,
    metrics_table_csv,
    render_report,
    report_json,
    roc_curves_csv,
    run_experiment,
)
from .ingest import CleaningPolicy, ColumnMap, DatasetManifest, load_dataset
from .pipeline import SwingPipeline
from .preprocessing import PrincipalComponents, Standardizer
from .segmentation import SwingExtractionParams, extract_swings, segment_phases
from .svm import KERNEL_KINDS
from .synth import default_config, generate_dataset, load_truth, write_dataset

MAX_SEED = 2**64 - 1


class CliError(Exception):
    """Failure with a specific exit code and a one-line message."""

    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


def _positive_seed(value: str) -> int:
    try:
        seed = int(value)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"seed must be an integer, got {value!r}") from exc
    if not (0 <= seed <= MAX_SEED):
        raise argparse.ArgumentTypeError(f"seed must fit in 64 bits, got {value}")
    return seed


def _gamma(value: str) -> float | str:
    if value == "scale":
        return value
    try:
        g = float(value)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"gamma must be a real or 'scale', got {value!r}") from exc
    if g <= 0:
        raise argparse.ArgumentTypeError("gamma must be positive")
    return g


def _load_json_config(path: str | None) -> dict:
    if path is None:
        return {}
    p = Path(path)
    if not p.is_file():
        raise CliError(2, f"config file not found: {p}")
    try:
        data = json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise CliError(2, f"config file {p} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise CliError(2, f"config file {p} must hold a JSON object")
    return data


def _require_dir(path: str, what: str) -> Path:
    p = Path(path)
    if not p.is_dir():
        raise CliError(2, f"{what} directory not found: {p}")
    return p


def _load_data_dir(args) -> tuple[list, list]:
    """Recordings (cleaned, forehand-only by default) and truth, if present."""
    data = _require_dir(args.data, "data")
    manifest_path = data / "manifest.json"
    if not manifest_path.is_file():
        raise CliError(2, f"no manifest.json under {data}")
    manifest = DatasetManifest.from_path(manifest_path)
    recordings = load_dataset(manifest, data, forehand_only=not args.all_sessions)
    truth_path = data / "truth.json"
    truth = load_truth(truth_path) if truth_path.is_file() else []
    return recordings, truth


def _extraction(args) -> SwingExtractionParams:
    return SwingExtractionParams(
        threshold_frac=args.threshold_frac,
        refractory=args.refractory,
        pre_frames=args.pre_frames,
        post_frames=args.post_frames,
        min_swing_len=args.min_swing_len,
    )


def _experiment_config(args, kernels: tuple[str, ...], phase_kernel: str) -> ExperimentConfig:
    overrides = _load_json_config(getattr(args, "config", None))
    try:
        base = ExperimentConfig(
            folds=args.folds,
            test_frac=args.test_frac,
            kernels=kernels,
            phase_kernel=phase_kernel,
            features=args.features,
            C=args.c,
            gamma=args.gamma,
            degree=args.degree,
            coef0=args.coef0,
            tol=args.tol,
            max_iter=args.max_iter,
            n_components=args.n_components,
            variance_target=args.variance_target,
            max_train_samples=args.max_train_samples,
            extraction=_extraction(args),
            min_seg_len=args.min_seg_len,
            label_source=args.label_source,
        ).to_dict()
    except (TypeError, ValueError) as exc:
        raise CliError(2, f"bad configuration: {exc}") from exc
    known = set(base)
    for key, val in overrides.items():
        if key not in known:
            raise CliError(2, f"unknown config key {key!r}")
        if key == "extraction" and isinstance(val, dict):
            base[key] = {**base[key], **val}
        else:
            base[key] = val
    try:
        return ExperimentConfig(
            folds=int(base["folds"]),
            test_frac=float(base["test_frac"]),
            kernels=tuple(base["kernels"]),
            phase_kernel=base["phase_kernel"],
            features=base["features"],
            C=float(base["C"]),
            gamma=base["gamma"] if base["gamma"] == "scale" else float(base["gamma"]),
            degree=int(base["degree"]),
            coef0=float(base["coef0"]),
            tol=float(base["tol"]),
            max_iter=None if base["max_iter"] is None else int(base["max_iter"]),
            n_components=None if base["n_components"] is None else int(base["n_components"]),
            variance_target=float(base["variance_target"]),
            max_train_samples=(
                None if base["max_train_samples"] is None else int(base["max_train_samples"])
            ),
            extraction=SwingExtractionParams(**base["extraction"]),
            min_seg_len=int(base["min_seg_len"]),
            label_source=base["label_source"],
        )
    except (TypeError, ValueError) as exc:
        raise CliError(2, f"bad configuration: {exc}") from exc


def _cmd_synth(args) -> int:
    overrides = _load_json_config(args.config)
    if args.sample_rate is not None:
        overrides["sample_rate"] = args.sample_rate
    try:
        config = default_config(args.seed, overrides)
    except (KeyError, TypeError, ValueError) as exc:
        raise CliError(2, f"bad synth configuration: {exc}") from exc
    out = write_dataset(generate_dataset(config), args.out)
    n = len(list(out.glob("*.csv")))
    print(f"wrote {n} session files under {out}")
    return 0


def _cmd_ingest(args) -> int:
    cfg = _load_json_config(args.config)
    column_map = ColumnMap(**cfg["column_map"]) if "column_map" in cfg else ColumnMap()
    policy = CleaningPolicy(
        max_gap=args.max_gap, smooth=not args.no_smooth, smooth_window=args.smooth_window
    )
    data = _require_dir(args.data, "data")
    manifest_path = data / "manifest.json"
    if not manifest_path.is_file():
        raise CliError(2, f"no manifest.json under {data}")
    manifest = DatasetManifest.from_path(manifest_path)
    recordings = load_dataset(
        manifest, data, forehand_only=not args.all_sessions, column_map=column_map, policy=policy
    )
    doc = {
        "recordings": [
            {
                "participant_id": rec.participant_id,
                "skill": rec.skill.label,
                "handedness": rec.handedness.value,
                "session": rec.session.value,
                "frames": [[f.t, f.yaw, f.roll, f.pitch] for f in rec.frames],
            }
            for rec in recordings
        ]
    }
    Path(args.out).write_text(json.dumps(doc, indent=2) + "\n")
    print(f"wrote {len(recordings)} recordings to {args.out}")
    return 0


def _cmd_segment(args) -> int:
    recordings, _ = _load_data_dir(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    params = _extraction(args)
    n_swings = 0
    for rec in recordings:
        channels = rec.channel_matrix()
        if args.raw_channels:
            feats = channels
        else:
            std = Standardizer().fit(channels)
            feats = PrincipalComponents(variance_target=args.variance_target).fit_transform(
                std.transform(channels)
            )
        windows = extract_swings(rec, params)
        swings = []
        for idx, w in enumerate(windows):
            seg = segment_phases(feats[w.start : w.end], min_size=args.min_seg_len)
            labels = seg.labels()
            swings.append(
                {
                    "participant_id": rec.participant_id,
                    "swing_index": idx,
                    "breakpoints": list(seg.breakpoints),
                    "phases": [int(p) for p in labels],
                }
            )
            name = f"{rec.participant_id}_{rec.session.value}_swing{idx:02d}.csv"
            rows = ["frame,t,yaw,roll,pitch,phase"]
            for k in range(w.start, w.end):
                f = rec.frames[k]
                rows.append(
                    f"{k},{f.t!r},{f.yaw!r},{f.roll!r},{f.pitch!r},{int(labels[k - w.start])}"
                )
            (out / name).write_text("\n".join(rows) + "\n")
        base = f"{rec.participant_id}_{rec.session.value}_segments.json"
        (out / base).write_text(json.dumps(swings, indent=2) + "\n")
        n_swings += len(swings)
    print(f"segmented {n_swings} swings from {len(recordings)} recordings into {out}")
    return 0


def _cmd_train(args) -> int:
    if args.kernel == "all":
        raise CliError(2, "train builds one model; pick a single kernel")
    recordings, truth = _load_data_dir(args)
    config = _experiment_config(args, kernels=(args.kernel,), phase_kernel=args.kernel)
    skill_tab, phase_tab, label_source = build_tables(recordings, config, truth)
    table = skill_tab if args.task == "skill" else phase_tab
    n_classes = 2 if args.task == "skill" else 5
    pipe = SwingPipeline(
        n_classes=n_classes,
        kernel=args.kernel,
        C=config.C,
        gamma=config.gamma,
        degree=config.degree,
        coef0=config.coef0,
        tol=config.tol,
        max_iter=config.max_iter,
        n_components=config.n_components,
        variance_target=config.variance_target,
        max_train_samples=config.max_train_samples,
        subsample_seed=child_seed(args.seed, 3),
    )
    pipe.fit(table.X, table.y)
    bundle = {
        "task": args.task,
        "features": config.features,
        "label_source": label_source,
        "seed": args.seed,
        **pipe.to_dict(),
    }
    Path(args.out).write_text(json.dumps(bundle, indent=2) + "\n")
    print(f"trained {args.task}/{args.kernel} model on {len(table.y)} rows -> {args.out}")
    return 0


def _cmd_evaluate(args) -> int:
    recordings, truth = _load_data_dir(args)
    kernels = KERNEL_KINDS if args.kernel == "all" else (args.kernel,)
    phase_kernel = "rbf" if args.kernel == "all" else args.kernel
    config = _experiment_config(args, kernels=kernels, phase_kernel=phase_kernel)
    tasks = TASKS if args.task == "both" else (args.task,)
    result = run_experiment(
        recordings, config=config, seed=args.seed, truth=truth, tasks=tasks
    )
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(report_json(result.report))
    base = out.with_suffix("") if out.suffix == ".json" else out
    if "skill" in tasks:
        (base.parent / f"{base.name}_metrics.csv").write_text(
            metrics_table_csv(result.report)
        )
        for kernel, cm in result.skill_test_confusion.items():
            (base.parent / f"{base.name}_confusion_skill_{kernel}.csv").write_text(
                confusion_csv(cm)
            )
    if "phase" in tasks:
        (base.parent / f"{base.name}_roc.csv").write_text(roc_curves_csv(result.report))
        (base.parent / f"{base.name}_confusion_phase.csv").write_text(
            confusion_csv(result.phase_confusion)
        )
    print(f"wrote evaluation report to {out}")
    return 0


def _cmd_report(args) -> int:
    p = Path(args.input)
    if not p.is_file():
        raise CliError(2, f"report file not found: {p}")
    try:
        report = json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise CliError(3, f"report file {p} is not valid JSON: {exc}") from exc
    text = render_report(report)
    if args.out:
        Path(args.out).write_text(text)
        print(f"wrote {args.out}")
    else:
        sys.stdout.write(text)
    return 0


def _add_extraction_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--threshold-frac", type=float, default=0.4,
                   help="peak height as a fraction of the max angular speed")
    p.add_argument("--refractory", type=int, default=30,
                   help="minimum frames between detected swing peaks")
    p.add_argument("--pre-frames", type=int, default=40,
                   help="window frames kept before each peak")
    p.add_argument("--post-frames", type=int, default=60,
                   help="window frames kept after each peak")
    p.add_argument("--min-swing-len", type=int, default=20,
                   help="discard windows shorter than this")
    p.add_argument("--min-seg-len", type=int, default=3,
                   help="minimum frames per phase segment")


def _add_model_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--c", type=float, default=1.0, help="soft-margin penalty C")
    p.add_argument("--gamma", type=_gamma, default="scale",
                   help="kernel width: a positive real or 'scale'")
    p.add_argument("--degree", type=int, default=3, help="polynomial kernel degree")
    p.add_argument("--coef0", type=float, default=0.0, help="poly/sigmoid kernel offset")
    p.add_argument("--tol", type=float, default=1e-3, help="KKT tolerance")
    p.add_argument("--max-iter", type=int, default=None,
                   help="solver iteration cap (default: 10x training rows)")
    p.add_argument("--features", choices=("frames", "aggregates"), default="frames",
                   help="per-frame rows or per-swing aggregate rows")
    p.add_argument("--n-components", type=int, default=None,
                   help="projection dimensions (default: auto by variance)")
    p.add_argument("--variance-target", type=float, default=0.95,
                   help="explained-variance target for the auto projection")
    p.add_argument("--max-train-samples", type=int, default=1500,
                   help="cap on rows fed to the kernel solver")
    p.add_argument("--label-source", choices=("auto", "truth", "detector"), default="auto",
                   help="where phase labels come from")


def _add_data_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--data", required=True, help="dataset directory with manifest.json")
    p.add_argument("--all-sessions", action="store_true",
                   help="include backhand sessions (default: forehand only)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="swinglab",
        description="Swing analysis pipeline: generate, ingest, segment, train, evaluate.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic labeled dataset")
    p.add_argument("--seed", type=_positive_seed, required=True)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--config", help="JSON file overriding generator defaults")
    p.add_argument("--sample-rate", type=float, default=None, help="frames per second")
    p.set_defaults(func=_cmd_synth)

    p = sub.add_parser("ingest", help="parse and clean a dataset into one JSON file")
    _add_data_flags(p)
    p.add_argument("--out", required=True, help="output JSON path")
    p.add_argument("--config", help="JSON file with a column_map override")
    p.add_argument("--max-gap", type=int, default=3,
                   help="longest missing-value run to interpolate")
    p.add_argument("--smooth-window", type=int, default=5,
                   help="centered moving-average width (odd)")
    p.add_argument("--no-smooth", action="store_true", help="skip smoothing")
    p.set_defaults(func=_cmd_ingest)

    p = sub.add_parser("segment", help="detect swings and their phase boundaries")
    _add_data_flags(p)
    p.add_argument("--out", required=True, help="output directory")
    _add_extraction_flags(p)
    p.add_argument("--raw-channels", action="store_true",
                   help="segment on raw channels instead of projections")
    p.add_argument("--variance-target", type=float, default=0.95,
                   help="explained-variance target for the projection")
    p.set_defaults(func=_cmd_segment)

    p = sub.add_parser("train", help="fit one classification pipeline and save it")
    _add_data_flags(p)
    p.add_argument("--out", required=True, help="output bundle JSON path")
    p.add_argument("--seed", type=_positive_seed, required=True)
    p.add_argument("--config", help="JSON file overriding evaluation defaults")
    p.add_argument("--task", choices=("skill", "phase"), required=True)
    p.add_argument("--kernel", choices=(*KERNEL_KINDS, "all"), default="rbf")
    p.add_argument("--folds", type=int, default=5, help=argparse.SUPPRESS)
    p.add_argument("--test-frac", type=float, default=0.2, help=argparse.SUPPRESS)
    _add_model_flags(p)
    _add_extraction_flags(p)
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("evaluate", help="run the holdout + cross-validation experiment")
    _add_data_flags(p)
    p.add_argument("--out", required=True, help="output report JSON path")
    p.add_argument("--seed", type=_positive_seed, required=True)
    p.add_argument("--config", help="JSON file overriding evaluation defaults")
    p.add_argument("--task", choices=(*TASKS, "both"), default="both")
    p.add_argument("--kernel", choices=(*KERNEL_KINDS, "all"), default="all")
    p.add_argument("--folds", type=int, default=5)
    p.add_argument("--test-frac", type=float, default=0.2)
    _add_model_flags(p)
    _add_extraction_flags(p)
    p.set_defaults(func=_cmd_evaluate)

    p = sub.add_parser("report", help="render a report JSON as text")
    p.add_argument("input", help="report JSON path")
    p.add_argument("--out", help="write text here instead of stdout")
    p.set_defaults(func=_cmd_report)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse already printed usage
        return 0 if exc.code in (0, None) else 2
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except (SwinglabError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    except Exception as exc:  # pragma: no cover - last-resort diagnostics
        print(f"error: unexpected failure: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    raise SystemExit(main())
