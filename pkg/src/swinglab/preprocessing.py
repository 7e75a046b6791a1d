"""Feature scaling and principal component projection."""

from __future__ import annotations

import warnings

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from .errors import BadComponentCountError, DegenerateDataError
from .validation import as_float_matrix, as_float_vector, check_n_features

# Below this the population std is treated as exactly zero.
_STD_FLOOR = 1e-12


def standardize(series) -> tuple[np.ndarray, float, float]:
    """Center and scale a 1-D series by its population std.

    Returns (standardized, mean, std).  A constant series maps to zeros and
    reports std 0.
    """
    x = as_float_vector(series, name="series")
    mean = float(np.mean(x))
    std = float(np.std(x))
    if std < _STD_FLOOR:
        return np.zeros_like(x), mean, 0.0
    return (x - mean) / std, mean, std


def normalize_minmax(series) -> np.ndarray:
    """Map a 1-D series onto [0, 1]; constant input maps to zeros with a warning."""
    x = as_float_vector(series, name="series")
    lo, hi = float(np.min(x)), float(np.max(x))
    if hi - lo < _STD_FLOOR:
        warnings.warn("constant series; min-max normalization returns zeros", stacklevel=2)
        return np.zeros_like(x)
    return (x - lo) / (hi - lo)


class Standardizer(BaseEstimator, TransformerMixin):
    """Column-wise zero-mean unit-variance scaler (population std).

    Zero-variance columns are reported with ``scale_`` 0 and transform to
    zeros instead of dividing by zero.
    """

    def fit(self, X, y=None):
        A = as_float_matrix(X, name="X")
        self.mean_ = A.mean(axis=0)
        std = A.std(axis=0)
        std[std < _STD_FLOOR] = 0.0
        self.scale_ = std
        self.n_features_in_ = A.shape[1]
        return self

    def transform(self, X) -> np.ndarray:
        A = as_float_matrix(X, name="X")
        check_n_features(A, self.n_features_in_)
        safe = np.where(self.scale_ > 0.0, self.scale_, 1.0)
        Z = (A - self.mean_) / safe
        Z[:, self.scale_ == 0.0] = 0.0
        return Z

    def to_dict(self) -> dict:
        return {
            "mean": [float(v) for v in self.mean_],
            "scale": [float(v) for v in self.scale_],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Standardizer":
        est = cls()
        est.mean_ = np.asarray(d["mean"], dtype=float)
        est.scale_ = np.asarray(d["scale"], dtype=float)
        est.n_features_in_ = len(est.mean_)
        return est


class MinMaxNormalizer(BaseEstimator, TransformerMixin):
    """Column-wise min-max scaler onto [0, 1]; constant columns map to zeros."""

    def fit(self, X, y=None):
        A = as_float_matrix(X, name="X")
        self.min_ = A.min(axis=0)
        self.range_ = A.max(axis=0) - self.min_
        self.range_[self.range_ < _STD_FLOOR] = 0.0
        self.n_features_in_ = A.shape[1]
        return self

    def transform(self, X) -> np.ndarray:
        A = as_float_matrix(X, name="X")
        check_n_features(A, self.n_features_in_)
        safe = np.where(self.range_ > 0.0, self.range_, 1.0)
        Z = (A - self.min_) / safe
        Z[:, self.range_ == 0.0] = 0.0
        return Z


def _fix_signs(components: np.ndarray) -> np.ndarray:
    """Flip each row so its largest-magnitude entry is positive."""
    out = components.copy()
    for row in out:
        j = int(np.argmax(np.abs(row)))
        if row[j] < 0:
            row *= -1.0
    return out


class PrincipalComponents(BaseEstimator, TransformerMixin):
    """PCA via eigendecomposition of the sample covariance (n-1 denominator).

    ``n_components=None`` keeps the smallest k whose cumulative explained
    variance ratio reaches ``variance_target``.  Components are unit-norm
    rows, ordered by descending eigenvalue, with signs fixed so each row's
    largest-magnitude entry is positive.
    """

    def __init__(self, n_components: int | None = None, variance_target: float = 0.95):
        self.n_components = n_components
        self.variance_target = variance_target

    def fit(self, X, y=None):
        A = as_float_matrix(X, name="X")
        n, d = A.shape
        if n < 2:
            raise DegenerateDataError(f"covariance needs n >= 2 rows, got {n}")
        if self.n_components is not None and not (1 <= self.n_components <= d):
            raise BadComponentCountError(
                f"n_components must be in [1, {d}], got {self.n_components}"
            )

        self.mean_ = A.mean(axis=0)
        cov = np.atleast_2d(np.cov(A, rowvar=False, ddof=1))
        evals, evecs = np.linalg.eigh(cov)
        order = np.argsort(evals)[::-1]
        evals = evals[order]
        evecs = evecs[:, order].T  # rows are components

        trace = float(np.trace(cov))
        if trace <= 0.0:
            # all-constant data: define ratios as zeros rather than dividing by 0
            ratios = np.zeros(d)
        else:
            ratios = evals / trace

        if self.n_components is None:
            cum = np.cumsum(ratios)
            k = int(np.searchsorted(cum, self.variance_target) + 1)
            k = min(max(k, 1), d)
        else:
            k = self.n_components

        self.components_ = _fix_signs(evecs[:k])
        self.explained_variance_ = evals[:k]
        self.explained_variance_ratio_ = ratios[:k]
        self.n_components_ = k
        self.n_features_in_ = d
        return self

    def transform(self, X) -> np.ndarray:
        A = as_float_matrix(X, name="X")
        check_n_features(A, self.n_features_in_)
        return (A - self.mean_) @ self.components_.T

    def inverse_transform(self, S) -> np.ndarray:
        S = as_float_matrix(S, name="S")
        check_n_features(S, self.n_components_, name="S")
        return S @ self.components_ + self.mean_

    def to_dict(self) -> dict:
        return {
            "mean": [float(v) for v in self.mean_],
            "components": [[float(v) for v in row] for row in self.components_],
            "explained_variance_ratio": [float(v) for v in self.explained_variance_ratio_],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "PrincipalComponents":
        est = cls()
        est.mean_ = np.asarray(d["mean"], dtype=float)
        est.components_ = np.asarray(d["components"], dtype=float)
        est.explained_variance_ratio_ = np.asarray(d["explained_variance_ratio"], dtype=float)
        est.n_components_ = est.components_.shape[0]
        est.n_features_in_ = est.components_.shape[1]
        return est
