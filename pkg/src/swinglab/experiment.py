"""Holdout + grouped cross-validation evaluation, assembled into reports.

The flow: split participants 80/20, run k-fold CV over the training side
per kernel for the skill task, refit on the whole training side and score
the held-out participants, then repeat once for the five-phase task (single
kernel) collecting the fold-averaged confusion matrix and per-class ROC.

Feature rows come from detected swing windows.  Phase labels come from the
generator truth when available, otherwise from the change-point detector.
Every random choice (splits, training subsamples) draws from a child seed
derived with fixed tags, so reports are byte-stable for a given seed and
independent of evaluation order.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import SingleClassError
from .ingest import Recording
from .metrics import ClassRoc, binary_metrics, confusion_matrix, per_class_roc
from .model_selection import grouped_kfold, split_holdout
from .pipeline import SwingPipeline
from .preprocessing import PrincipalComponents, Standardizer
from .segmentation import SwingExtractionParams, extract_swings, segment_phases
from .svm import KERNEL_KINDS
from .synth import TruthSwing

METRIC_KEYS = ("accuracy", "precision", "recall", "f1")
FEATURE_MODES = ("frames", "aggregates")
LABEL_SOURCES = ("auto", "truth", "detector")
N_PHASES = 5


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything an evaluation run depends on besides the data and seed."""

    folds: int = 5
    test_frac: float = 0.2
    kernels: tuple[str, ...] = KERNEL_KINDS
    phase_kernel: str = "rbf"
    features: str = "frames"
    C: float = 1.0
    gamma: float | str = "scale"
    degree: int = 3
    coef0: float = 0.0
    tol: float = 1e-3
    max_iter: int | None = None
    n_components: int | None = None
    variance_target: float = 0.95
    max_train_samples: int | None = 1500
    extraction: SwingExtractionParams = field(default_factory=SwingExtractionParams)
    min_seg_len: int = 3
    label_source: str = "auto"

    def __post_init__(self) -> None:
        if self.features not in FEATURE_MODES:
            raise ValueError(f"features must be one of {FEATURE_MODES}")
        if self.label_source not in LABEL_SOURCES:
            raise ValueError(f"label_source must be one of {LABEL_SOURCES}")
        bad = [k for k in (*self.kernels, self.phase_kernel) if k not in KERNEL_KINDS]
        if bad:
            raise ValueError(f"unknown kernel(s) {bad}; choose from {KERNEL_KINDS}")
        if not self.kernels:
            raise ValueError("need at least one kernel")
        if self.folds < 2:
            raise ValueError("folds must be >= 2")

    def to_dict(self) -> dict:
        e = self.extraction
        return {
            "folds": self.folds,
            "test_frac": self.test_frac,
            "kernels": list(self.kernels),
            "phase_kernel": self.phase_kernel,
            "features": self.features,
            "C": self.C,
            "gamma": self.gamma,
            "degree": self.degree,
            "coef0": self.coef0,
            "tol": self.tol,
            "max_iter": self.max_iter,
            "n_components": self.n_components,
            "variance_target": self.variance_target,
            "max_train_samples": self.max_train_samples,
            "extraction": {
                "threshold_frac": e.threshold_frac,
                "refractory": e.refractory,
                "pre_frames": e.pre_frames,
                "post_frames": e.post_frames,
                "min_swing_len": e.min_swing_len,
            },
            "min_seg_len": self.min_seg_len,
            "label_source": self.label_source,
        }


def child_seed(seed: int, *tags: int) -> int:
    """Independent sub-seed for one named consumer of the run seed."""
    return int(np.random.SeedSequence([int(seed), *map(int, tags)]).generate_state(1)[0])


@dataclass
class FeatureTable:
    """Rows for one task: features, integer labels, participant per row."""

    X: np.ndarray
    y: np.ndarray
    groups: np.ndarray

    def rows_for(self, participants: Sequence[str]) -> np.ndarray:
        return np.isin(self.groups, np.asarray(list(participants), dtype=object))


def _aggregate(seg: np.ndarray) -> np.ndarray:
    return np.concatenate([seg.mean(axis=0), seg.std(axis=0), seg.min(axis=0), seg.max(axis=0)])


def _truth_index(truth: Sequence[TruthSwing]) -> dict[tuple[str, str], list[TruthSwing]]:
    index: dict[tuple[str, str], list[TruthSwing]] = {}
    for t in truth:
        index.setdefault((t.participant_id, t.session.value), []).append(t)
    return index


def _detector_labels(channels: np.ndarray, start: int, end: int, config: ExperimentConfig):
    std = Standardizer().fit(channels)
    pca = PrincipalComponents(variance_target=config.variance_target).fit(std.transform(channels))
    feats = pca.transform(std.transform(channels[start:end]))
    return segment_phases(feats, min_size=config.min_seg_len).labels()


def build_tables(
    recordings: Sequence[Recording],
    config: ExperimentConfig,
    truth: Sequence[TruthSwing] | None = None,
) -> tuple[FeatureTable, FeatureTable, str]:
    """Skill and phase tables from detected swing windows.

    Returns (skill_table, phase_table, resolved_label_source).  With
    label_source "auto", generator truth is used whenever it is provided.
    """
    use_truth = config.label_source == "truth" or (
        config.label_source == "auto" and truth is not None and len(truth) > 0
    )
    if config.label_source == "truth" and not truth:
        raise ValueError("label_source 'truth' needs a truth table")
    index = _truth_index(truth) if use_truth else {}

    skill_X: list[np.ndarray] = []
    skill_y: list[int] = []
    skill_g: list[str] = []
    phase_X: list[np.ndarray] = []
    phase_y: list[np.ndarray] = []
    phase_g: list[str] = []

    for rec in recordings:
        channels = rec.channel_matrix()
        windows = extract_swings(rec, config.extraction)
        truth_list = index.get((rec.participant_id, rec.session.value), [])
        for w in windows:
            seg = channels[w.start : w.end]
            if use_truth:
                hits = [t for t in truth_list if w.start <= t.impact_frame < w.end]
                if not hits:
                    continue  # detector artifact with no matching real swing
                bkps = np.asarray(hits[0].breakpoints)
                labels = np.searchsorted(bkps, np.arange(w.start, w.end), side="right")
            else:
                labels = _detector_labels(channels, w.start, w.end, config)

            if config.features == "frames":
                skill_X.append(seg)
                skill_y.extend([int(rec.skill)] * len(seg))
                skill_g.extend([rec.participant_id] * len(seg))
                phase_X.append(seg)
                phase_y.append(labels)
                phase_g.extend([rec.participant_id] * len(seg))
            else:
                skill_X.append(_aggregate(seg)[None, :])
                skill_y.append(int(rec.skill))
                skill_g.append(rec.participant_id)
                for p in range(N_PHASES):
                    part = seg[labels == p]
                    if len(part) == 0:
                        continue
                    phase_X.append(_aggregate(part)[None, :])
                    phase_y.append(np.array([p]))
                    phase_g.append(rec.participant_id)

    skill = FeatureTable(
        X=np.concatenate(skill_X),
        y=np.asarray(skill_y, dtype=int),
        groups=np.asarray(skill_g, dtype=object),
    )
    phase = FeatureTable(
        X=np.concatenate(phase_X),
        y=np.concatenate(phase_y).astype(int),
        groups=np.asarray(phase_g, dtype=object),
    )
    return skill, phase, ("truth" if use_truth else "detector")


TASKS = ("skill", "phase")


@dataclass
class ExperimentResult:
    """Report mapping plus the matrices the CSV exports need."""

    report: dict
    skill_test_confusion: dict[str, np.ndarray]
    phase_confusion: np.ndarray | None
    phase_rocs: list[ClassRoc]


def _pipeline(config: ExperimentConfig, kernel: str, n_classes: int, sub_seed: int):
    return SwingPipeline(
        n_classes=n_classes,
        kernel=kernel,
        C=config.C,
        gamma=config.gamma,
        degree=config.degree,
        coef0=config.coef0,
        tol=config.tol,
        max_iter=config.max_iter,
        n_components=config.n_components,
        variance_target=config.variance_target,
        max_train_samples=config.max_train_samples,
        subsample_seed=sub_seed,
    )


def _jsonify(obj):
    if isinstance(obj, dict):
        return {k: _jsonify(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonify(v) for v in obj]
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return _jsonify(obj.tolist())
    return obj


def run_experiment(
    recordings: Sequence[Recording],
    *,
    config: ExperimentConfig,
    seed: int,
    truth: Sequence[TruthSwing] | None = None,
    tasks: Sequence[str] = TASKS,
) -> ExperimentResult:
    """The full evaluation flow; deterministic for a given seed."""
    unknown = [t for t in tasks if t not in TASKS]
    if unknown or not tasks:
        raise ValueError(f"tasks must be a non-empty subset of {TASKS}, got {list(tasks)}")
    participants: list[str] = []
    skill_of: dict[str, int] = {}
    for rec in recordings:
        if rec.participant_id not in skill_of:
            participants.append(rec.participant_id)
            skill_of[rec.participant_id] = int(rec.skill)
    if len(set(skill_of.values())) < 2:
        raise SingleClassError("dataset holds a single skill class")

    skill_tab, phase_tab, label_source = build_tables(recordings, config, truth)
    skills = [skill_of[p] for p in participants]
    train_val, test = split_holdout(
        participants, config.test_frac, child_seed(seed, 0), skills=skills
    )
    plan = grouped_kfold(train_val, config.folds, child_seed(seed, 1))

    skill_block: dict[str, dict] = {}
    skill_test_cm: dict[str, np.ndarray] = {}
    if "skill" in tasks:
        for k_idx, kernel in enumerate(config.kernels):
            fold_metrics: list[dict[str, float]] = []
            for f_idx, (tr, ho) in enumerate(plan.splits()):
                pipe = _pipeline(config, kernel, 2, child_seed(seed, 2, 0, k_idx, f_idx))
                m_tr, m_ho = skill_tab.rows_for(tr), skill_tab.rows_for(ho)
                pipe.fit(skill_tab.X[m_tr], skill_tab.y[m_tr])
                cm = confusion_matrix(skill_tab.y[m_ho], pipe.predict(skill_tab.X[m_ho]), 2)
                fold_metrics.append(binary_metrics(cm))
            cv = {m: float(np.mean([fm[m] for fm in fold_metrics])) for m in METRIC_KEYS}

            pipe = _pipeline(config, kernel, 2, child_seed(seed, 2, 0, k_idx, config.folds))
            m_tr, m_te = skill_tab.rows_for(train_val), skill_tab.rows_for(test)
            pipe.fit(skill_tab.X[m_tr], skill_tab.y[m_tr])
            cm = confusion_matrix(skill_tab.y[m_te], pipe.predict(skill_tab.X[m_te]), 2)
            skill_test_cm[kernel] = cm
            testing = {m: float(binary_metrics(cm)[m]) for m in METRIC_KEYS}
            skill_block[kernel] = {"cross_validation": cv, "testing": testing}

    phase_cm: np.ndarray | None = None
    rocs: list[ClassRoc] = []
    if "phase" in tasks:
        fold_cms: list[np.ndarray] = []
        for f_idx, (tr, ho) in enumerate(plan.splits()):
            pipe = _pipeline(
                config, config.phase_kernel, N_PHASES, child_seed(seed, 2, 1, 0, f_idx)
            )
            m_tr, m_ho = phase_tab.rows_for(tr), phase_tab.rows_for(ho)
            pipe.fit(phase_tab.X[m_tr], phase_tab.y[m_tr])
            fold_cms.append(
                confusion_matrix(phase_tab.y[m_ho], pipe.predict(phase_tab.X[m_ho]), N_PHASES)
            )
        phase_cm = np.mean(np.stack(fold_cms), axis=0)

        pipe = _pipeline(
            config, config.phase_kernel, N_PHASES, child_seed(seed, 2, 1, 0, config.folds)
        )
        m_tr, m_te = phase_tab.rows_for(train_val), phase_tab.rows_for(test)
        pipe.fit(phase_tab.X[m_tr], phase_tab.y[m_tr])
        rocs = per_class_roc(pipe, phase_tab.X[m_te], phase_tab.y[m_te], n_classes=N_PHASES)

    body: dict = {}
    if "skill" in tasks:
        body["skill"] = skill_block
    if "phase" in tasks:
        body["phase"] = {
            "confusion_matrix": phase_cm.tolist(),
            "roc": [r.to_dict() for r in rocs],
        }
    body["config"] = {**config.to_dict(), "label_source": label_source, "tasks": list(tasks)}
    body["seed"] = int(seed)
    return ExperimentResult(
        report=_jsonify(body),
        skill_test_confusion=skill_test_cm,
        phase_confusion=phase_cm,
        phase_rocs=rocs,
    )


def report_json(report: dict) -> str:
    return json.dumps(report, indent=2) + "\n"


def metrics_table_csv(report: dict) -> str:
    """The skill block as one row per kernel and evaluation stage."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["kernel", "stage", *METRIC_KEYS])
    for kernel, stages in report["skill"].items():
        for stage in ("cross_validation", "testing"):
            w.writerow([kernel, stage, *[repr(float(stages[stage][m])) for m in METRIC_KEYS]])
    return buf.getvalue()


def roc_curves_csv(report: dict) -> str:
    """All per-class ROC points; classes without a curve are skipped."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["class", "fpr", "tpr"])
    for entry in report["phase"]["roc"]:
        if entry["curve"] is None:
            continue
        for fpr, tpr in entry["curve"]:
            w.writerow([entry["class"], repr(float(fpr)), repr(float(tpr))])
    return buf.getvalue()


def confusion_csv(matrix) -> str:
    """Counts (or fold-averaged counts) with true labels on rows."""
    M = np.asarray(matrix)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["true", *[f"pred_{c}" for c in range(M.shape[1])]])
    for r, row in enumerate(M):
        vals = [int(v) if float(v).is_integer() else repr(float(v)) for v in row]
        w.writerow([r, *vals])
    return buf.getvalue()


def render_report(report: dict) -> str:
    """Plain-text view of a report JSON for terminal reading."""
    lines: list[str] = []
    lines.append(f"seed: {report.get('seed')}")
    lines.append("")
    if "skill" in report:
        lines.append("skill classification (positive class: intermediate)")
        header = f"  {'kernel':<10}{'stage':<18}" + "".join(f"{m:>11}" for m in METRIC_KEYS)
        lines.append(header)
        for kernel, stages in report["skill"].items():
            for stage in ("cross_validation", "testing"):
                vals = "".join(f"{stages[stage][m]:>11.3f}" for m in METRIC_KEYS)
                lines.append(f"  {kernel:<10}{stage:<18}" + vals)
        lines.append("")
    phase = report.get("phase", {})
    cm = phase.get("confusion_matrix")
    if cm:
        lines.append("phase confusion matrix (mean over folds; rows = true)")
        for row in cm:
            lines.append("  " + " ".join(f"{v:>9.2f}" for v in row))
        lines.append("")
    rocs = phase.get("roc")
    if rocs:
        lines.append("phase one-vs-rest AUC")
        for entry in rocs:
            auc = "n/a" if entry["auc"] is None else f"{entry['auc']:.3f}"
            lines.append(f"  class {entry['class']}: {auc}")
        lines.append("")
    cfg = report.get("config", {})
    if cfg:
        lines.append("config")
        for key, val in cfg.items():
            lines.append(f"  {key}: {json.dumps(val)}")
    return "\n".join(lines) + "\n"
