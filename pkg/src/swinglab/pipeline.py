"""Standardize -> project -> classify, as one estimator.

The preprocessing stages fit on everything they are given; the SVM stage
optionally trains on a class-proportional subsample so kernel solves stay
tractable on frame-level tables.  A fitted pipeline serializes to a single
JSON-able dict, so saved bundles carry everything inference needs.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin

from .model_selection import stratified_subsample
from .preprocessing import PrincipalComponents, Standardizer
from .svm import KernelSvmClassifier, OneVsRestSvmClassifier
from .validation import as_float_matrix, check_same_length


class SwingPipeline(BaseEstimator, ClassifierMixin):
    """Full classification pipeline over integer labels 0..n_classes-1.

    Binary problems (n_classes=2) train one machine whose positive class is
    label 1; larger ones train one machine per class and decide by argmax.
    """

    def __init__(
        self,
        n_classes: int = 2,
        kernel: str = "rbf",
        C: float = 1.0,
        gamma: float | str = "scale",
        degree: int = 3,
        coef0: float = 0.0,
        tol: float = 1e-3,
        max_iter: int | None = None,
        n_components: int | None = None,
        variance_target: float = 0.95,
        max_train_samples: int | None = 1500,
        subsample_seed: int = 0,
    ):
        self.n_classes = n_classes
        self.kernel = kernel
        self.C = C
        self.gamma = gamma
        self.degree = degree
        self.coef0 = coef0
        self.tol = tol
        self.max_iter = max_iter
        self.n_components = n_components
        self.variance_target = variance_target
        self.max_train_samples = max_train_samples
        self.subsample_seed = subsample_seed

    def _svm_params(self) -> dict:
        return {
            "kernel": self.kernel,
            "C": self.C,
            "gamma": self.gamma,
            "degree": self.degree,
            "coef0": self.coef0,
            "tol": self.tol,
            "max_iter": self.max_iter,
        }

    def fit(self, X, y):
        if self.n_classes < 2:
            raise ValueError("n_classes must be >= 2")
        A = as_float_matrix(X, name="X", min_rows=2)
        yv = np.asarray(y, dtype=int)
        check_same_length(A, yv, names=("X", "y"))
        if yv.min(initial=0) < 0 or yv.max(initial=0) >= self.n_classes:
            raise ValueError(f"labels must lie in [0, {self.n_classes})")

        self.standardizer_ = Standardizer().fit(A)
        Z = self.standardizer_.transform(A)
        self.pca_ = PrincipalComponents(
            n_components=self.n_components, variance_target=self.variance_target
        ).fit(Z)
        S = self.pca_.transform(Z)

        if self.max_train_samples is not None:
            keep = stratified_subsample(yv, self.max_train_samples, self.subsample_seed)
            S, yv = S[keep], yv[keep]
        if self.n_classes == 2:
            self.svm_ = KernelSvmClassifier(**self._svm_params())
            self.svm_.fit(S, np.where(yv == 1, 1.0, -1.0))
        else:
            self.svm_ = OneVsRestSvmClassifier(n_classes=self.n_classes, **self._svm_params())
            self.svm_.fit(S, yv)
        self.n_features_in_ = A.shape[1]
        self.classes_ = np.arange(self.n_classes)
        return self

    def _project(self, X) -> np.ndarray:
        return self.pca_.transform(self.standardizer_.transform(X))

    def decision_function(self, X) -> np.ndarray:
        """1-D scores for binary pipelines, (n, K) for multiclass ones."""
        return self.svm_.decision_function(self._project(X))

    def predict(self, X) -> np.ndarray:
        if self.n_classes == 2:
            return (self.decision_function(X) >= 0.0).astype(int)
        return self.svm_.predict(self._project(X))

    def to_dict(self) -> dict:
        return {
            "n_classes": int(self.n_classes),
            "standardizer": self.standardizer_.to_dict(),
            "pca": self.pca_.to_dict(),
            "model": self.svm_.to_dict(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SwingPipeline":
        n_classes = int(d["n_classes"])
        svm: KernelSvmClassifier | OneVsRestSvmClassifier
        if n_classes == 2:
            svm = KernelSvmClassifier.from_dict(d["model"])
        else:
            svm = OneVsRestSvmClassifier.from_dict(d["model"])
        spec = svm.kernel_spec_
        est = cls(
            n_classes=n_classes,
            kernel=spec.kind,
            C=float(d["model"]["C"]),
            gamma=spec.gamma,
            degree=spec.degree,
            coef0=spec.coef0,
        )
        est.standardizer_ = Standardizer.from_dict(d["standardizer"])
        est.pca_ = PrincipalComponents.from_dict(d["pca"])
        est.svm_ = svm
        est.n_features_in_ = est.standardizer_.n_features_in_
        est.classes_ = np.arange(n_classes)
        return est
