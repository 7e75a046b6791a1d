"""Small input-validation helpers used by the estimators."""

from __future__ import annotations

import numpy as np

from .errors import DimensionMismatchError, EmptySeriesError, LengthMismatchError


def as_float_matrix(X, *, name: str = "X", min_rows: int = 1) -> np.ndarray:
    """Coerce to a 2-D float array and check it is finite."""
    A = np.asarray(X, dtype=float)
    if A.ndim == 1:
        A = A[:, None]
    if A.ndim != 2:
        raise DimensionMismatchError(f"{name} must be 2-D, got {A.ndim}-D")
    if A.shape[0] < min_rows:
        raise EmptySeriesError(f"{name} needs at least {min_rows} row(s), got {A.shape[0]}")
    if A.shape[1] < 1:
        raise DimensionMismatchError(f"{name} needs at least one column")
    if not np.isfinite(A).all():
        raise ValueError(f"{name} contains NaN or Inf")
    return A


def as_float_vector(x, *, name: str = "x", min_len: int = 1) -> np.ndarray:
    A = np.asarray(x, dtype=float)
    if A.ndim != 1:
        raise DimensionMismatchError(f"{name} must be 1-D, got {A.ndim}-D")
    if A.shape[0] < min_len:
        raise EmptySeriesError(f"{name} needs at least {min_len} value(s), got {A.shape[0]}")
    if not np.isfinite(A).all():
        raise ValueError(f"{name} contains NaN or Inf")
    return A


def check_same_length(a, b, *, names: tuple[str, str] = ("a", "b")) -> None:
    if len(a) != len(b):
        raise LengthMismatchError(
            f"{names[0]} and {names[1]} differ in length: {len(a)} vs {len(b)}"
        )


def check_n_features(X: np.ndarray, expected: int, *, name: str = "X") -> None:
    if X.shape[1] != expected:
        raise DimensionMismatchError(
            f"{name} has {X.shape[1]} feature(s), model was fitted with {expected}"
        )
