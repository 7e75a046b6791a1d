"""Wrist-IMU tennis swing analysis: ingest, segment, classify, evaluate."""

from .errors import (
    AllMissingError,
    BadComponentCountError,
    BadFoldCountError,
    BadProfileError,
    BadRangeError,
    DegenerateDataError,
    DimensionMismatchError,
    EmptyFileError,
    EmptySeriesError,
    LabelRangeError,
    LengthMismatchError,
    ManifestError,
    MissingColumnError,
    NonMonotoneTimeError,
    NoSwingsError,
    RecordingLoadError,
    SingleClassError,
    SwinglabError,
    TooFewParticipantsError,
    TooShortError,
)
from .experiment import (
    ExperimentConfig,
    ExperimentResult,
    FeatureTable,
    build_tables,
    render_report,
    run_experiment,
)
from .ingest import (
    CleaningPolicy,
    ColumnMap,
    DatasetManifest,
    Handedness,
    ImuFrame,
    ManifestEntry,
    Recording,
    Session,
    Skill,
    clean,
    frames_to_csv,
    load_dataset,
    parse_sensor_csv,
)
from .metrics import (
    ClassRoc,
    binary_metrics,
    confusion_matrix,
    per_class_roc,
    roc_auc,
    roc_curve_points,
)
from .model_selection import FoldPlan, grouped_kfold, split_holdout, stratified_subsample
from .pipeline import SwingPipeline
from .preprocessing import (
    MinMaxNormalizer,
    PrincipalComponents,
    Standardizer,
    normalize_minmax,
    standardize,
)
from .segmentation import (
    Dynp,
    Pelt,
    PhaseSegmentation,
    SwingExtractionParams,
    SwingPhase,
    SwingWindow,
    angular_speed,
    extract_swings,
    segment_cost_l2,
    segment_phases,
)
from .svm import (
    KernelSpec,
    KernelSvmClassifier,
    OneVsRestSvmClassifier,
    dual_objective,
    kernel_eval,
    kernel_matrix,
    smo_solve,
)
from .synth import (
    SwingProfile,
    SynthConfig,
    SynthDataset,
    TruthSwing,
    default_config,
    generate_dataset,
    generate_swing,
    load_truth,
    write_dataset,
)

__version__ = "0.1.0"

__all__ = [
    "AllMissingError",
    "BadComponentCountError",
    "BadFoldCountError",
    "BadProfileError",
    "BadRangeError",
    "ClassRoc",
    "CleaningPolicy",
    "ColumnMap",
    "DatasetManifest",
    "DegenerateDataError",
    "DimensionMismatchError",
    "Dynp",
    "EmptyFileError",
    "EmptySeriesError",
    "ExperimentConfig",
    "ExperimentResult",
    "FeatureTable",
    "FoldPlan",
    "Handedness",
    "ImuFrame",
    "KernelSpec",
    "KernelSvmClassifier",
    "LabelRangeError",
    "LengthMismatchError",
    "ManifestEntry",
    "ManifestError",
    "MinMaxNormalizer",
    "MissingColumnError",
    "NonMonotoneTimeError",
    "NoSwingsError",
    "OneVsRestSvmClassifier",
    "Pelt",
    "PhaseSegmentation",
    "PrincipalComponents",
    "Recording",
    "RecordingLoadError",
    "Session",
    "SingleClassError",
    "Skill",
    "Standardizer",
    "SwingExtractionParams",
    "SwingPhase",
    "SwingPipeline",
    "SwingProfile",
    "SwingWindow",
    "SwinglabError",
    "SynthConfig",
    "SynthDataset",
    "TooFewParticipantsError",
    "TooShortError",
    "TruthSwing",
    "angular_speed",
    "binary_metrics",
    "build_tables",
    "clean",
    "confusion_matrix",
    "default_config",
    "dual_objective",
    "extract_swings",
    "frames_to_csv",
    "generate_dataset",
    "generate_swing",
    "grouped_kfold",
    "kernel_eval",
    "kernel_matrix",
    "load_dataset",
    "load_truth",
    "normalize_minmax",
    "parse_sensor_csv",
    "per_class_roc",
    "render_report",
    "roc_auc",
    "roc_curve_points",
    "run_experiment",
    "segment_cost_l2",
    "segment_phases",
    "smo_solve",
    "split_holdout",
    "standardize",
    "stratified_subsample",
    "write_dataset",
]
