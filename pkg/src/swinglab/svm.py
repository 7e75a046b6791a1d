"""Kernel support vector machines trained with sequential minimal optimization.

The solver maximizes the standard dual

    W(alpha) = sum_i alpha_i - 1/2 sum_ij alpha_i alpha_j y_i y_j K_ij

subject to 0 <= alpha_i <= C and sum_i alpha_i y_i = 0, by repeatedly
optimizing one pair of multipliers in closed form.  The working pair is the
maximal KKT violator joined with the partner whose clipped pair update gains
the most, falling back to an |E_i - E_j| scan when no concave direction
moves.  Non-PSD kernels (sigmoid) make the pair subproblem non-concave;
those steps are resolved by comparing the dual objective at the two clip
bounds.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, replace

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin

from .errors import DimensionMismatchError, SingleClassError
from .validation import as_float_matrix, check_n_features, check_same_length

KERNEL_KINDS = ("rbf", "poly", "sigmoid")

# Multipliers at or below this are dropped from the support set.
SUPPORT_EPS = 1e-8
# Multipliers within this of a box bound count as sitting on it.
_BOUND_EPS = 1e-9


@dataclass(frozen=True)
class KernelSpec:
    """Kernel family and parameters.

    gamma may be the string "scale", resolved against the training matrix as
    1 / (n_features * var(X)); a non-positive variance resolves to 1.0.
    """

    kind: str = "rbf"
    gamma: float | str = "scale"
    degree: int = 3
    coef0: float = 0.0

    def __post_init__(self) -> None:
        if self.kind not in KERNEL_KINDS:
            raise ValueError(f"kernel kind must be one of {KERNEL_KINDS}, got {self.kind!r}")
        if isinstance(self.gamma, str):
            if self.gamma != "scale":
                raise ValueError(f"gamma must be a positive number or 'scale', got {self.gamma!r}")
        elif self.gamma <= 0:
            raise ValueError(f"gamma must be positive, got {self.gamma}")
        if self.degree < 1:
            raise ValueError(f"degree must be >= 1, got {self.degree}")

    def resolve(self, X: np.ndarray) -> "KernelSpec":
        if not isinstance(self.gamma, str):
            return self
        var = float(np.var(X))
        gamma = 1.0 / (X.shape[1] * var) if var > 0.0 else 1.0
        return replace(self, gamma=gamma)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "gamma": self.gamma if isinstance(self.gamma, str) else float(self.gamma),
            "degree": int(self.degree),
            "coef0": float(self.coef0),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "KernelSpec":
        return cls(
            kind=d["kind"], gamma=d["gamma"], degree=int(d["degree"]), coef0=float(d["coef0"])
        )


def kernel_matrix(spec: KernelSpec, X, Z) -> np.ndarray:
    """Gram matrix K[i, j] = k(X[i], Z[j]); gamma must already be numeric."""
    A = as_float_matrix(X, name="X")
    B = as_float_matrix(Z, name="Z")
    if A.shape[1] != B.shape[1]:
        raise DimensionMismatchError(
            f"X has {A.shape[1]} feature(s), Z has {B.shape[1]}"
        )
    if isinstance(spec.gamma, str):
        raise ValueError("gamma not resolved; call KernelSpec.resolve on training data first")
    g = float(spec.gamma)
    if spec.kind == "rbf":
        sq = (
            np.sum(A * A, axis=1)[:, None]
            + np.sum(B * B, axis=1)[None, :]
            - 2.0 * (A @ B.T)
        )
        return np.exp(-g * np.maximum(sq, 0.0))
    lin = g * (A @ B.T) + spec.coef0
    if spec.kind == "poly":
        return lin ** spec.degree
    return np.tanh(lin)


def kernel_eval(spec: KernelSpec, x, z) -> float:
    """Kernel value for a single pair of vectors."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    z = np.atleast_1d(np.asarray(z, dtype=float))
    if x.shape != z.shape or x.ndim != 1:
        raise DimensionMismatchError(f"vectors disagree in shape: {x.shape} vs {z.shape}")
    return float(kernel_matrix(spec, x[None, :], z[None, :])[0, 0])


def _bias(alpha: np.ndarray, y: np.ndarray, g: np.ndarray, C: float) -> float:
    """Intercept from the current multipliers.

    Free support vectors pin the bias exactly, so their mean is used; with
    none, the bound constraints leave an interval and its midpoint is taken.
    """
    lo = alpha <= _BOUND_EPS
    hi = alpha >= C - _BOUND_EPS
    free = ~lo & ~hi
    if np.any(free):
        return float(np.mean(y[free] - g[free]))
    pos, neg = y > 0, y < 0
    lowers = np.concatenate([(1.0 - g)[lo & pos], (-1.0 - g)[hi & neg]])
    uppers = np.concatenate([(-1.0 - g)[lo & neg], (1.0 - g)[hi & pos]])
    if len(lowers) and len(uppers):
        return float((lowers.max() + uppers.min()) / 2.0)
    if len(lowers):
        return float(lowers.max())
    if len(uppers):
        return float(uppers.min())
    return 0.0


def _violations(alpha: np.ndarray, y: np.ndarray, f: np.ndarray, C: float, tol: float) -> np.ndarray:
    """How far each point sits outside its KKT condition, beyond tol."""
    yf = y * f
    lo = alpha <= _BOUND_EPS
    hi = alpha >= C - _BOUND_EPS
    v = np.abs(yf - 1.0) - tol
    v = np.where(lo, (1.0 - tol) - yf, v)
    v = np.where(hi & ~lo, yf - (1.0 + tol), v)
    return v


@dataclass
class SmoResult:
    alpha: np.ndarray
    bias: float
    converged: bool
    n_iter: int


def smo_solve(
    K: np.ndarray,
    y: np.ndarray,
    C: float,
    *,
    tol: float = 1e-3,
    max_iter: int | None = None,
) -> SmoResult:
    """Run SMO on a precomputed Gram matrix; labels must be in {-1, +1}.

    max_iter defaults to 10 * n pair updates.  If the budget runs out (or no
    pair can make progress on a non-PSD kernel) the best iterate so far is
    returned with converged=False.
    """
    y = np.asarray(y, dtype=float)
    n = len(y)
    if max_iter is None:
        max_iter = 10 * n
    alpha = np.zeros(n)
    g = np.zeros(n)  # g_i = sum_j alpha_j y_j K_ij, the bias-free margin
    diag = np.diagonal(K)

    converged = False
    blocked: set[int] = set()
    n_iter = 0
    while n_iter < max_iter:
        b = _bias(alpha, y, g, C)
        viol = _violations(alpha, y, g + b, C, tol)
        if viol.max() <= 0.0:
            converged = True
            break
        usable = viol.copy()
        if blocked:
            usable[list(blocked)] = -np.inf
        i = int(np.argmax(usable))
        if usable[i] <= 0.0:
            break  # every violator is stuck; flagged below
        E = g - y  # bias cancels in every pairwise update
        # Pick the partner by the exact objective gain of the clipped pair
        # update, evaluated for every candidate at once.  Ranking by |E_i-E_j|
        # alone wastes iterations on pairs whose improving direction is blocked
        # by the box.
        same = y == y[i]
        tot = alpha[i] + alpha
        dif = alpha - alpha[i]
        L = np.where(same, np.maximum(tot - C, 0.0), np.maximum(dif, 0.0))
        H = np.where(same, np.minimum(tot, C), np.minimum(C + dif, C))
        eta = K[i, i] + diag - 2.0 * K[i]
        e_diff = E[i] - E
        with np.errstate(divide="ignore", invalid="ignore"):
            aj = np.clip(alpha + y * e_diff / eta, L, H)
            d = aj - alpha
            gain = y * e_diff * d - 0.5 * eta * d * d
        movable = (H - L >= 1e-12) & (eta > 1e-15) & (np.abs(d) >= 1e-10)
        movable[i] = False
        gain = np.where(movable, gain, -np.inf)
        j = int(np.argmax(gain))
        stepped = gain[j] > 1e-12 and _pair_step(i, j, alpha, y, g, K, C)
        if not stepped:
            # Concave candidates exhausted; scan non-concave directions where
            # the objective still improves at a box endpoint.
            order = np.argsort(-np.abs(e_diff))
            for j in order[:64]:
                j = int(j)
                if j == i:
                    continue
                if _pair_step(i, j, alpha, y, g, K, C):
                    stepped = True
                    break
        n_iter += 1
        if stepped:
            blocked.clear()
        else:
            blocked.add(i)

    bias = _bias(alpha, y, g, C)
    if not converged:
        converged = bool(_violations(alpha, y, g + bias, C, tol).max() <= 0.0)
    return SmoResult(alpha=alpha, bias=bias, converged=converged, n_iter=n_iter)


def _pair_step(
    i: int, j: int, alpha: np.ndarray, y: np.ndarray, g: np.ndarray, K: np.ndarray, C: float
) -> bool:
    """Optimize the pair (alpha_i, alpha_j) in place; True if it moved."""
    s = y[i] * y[j]
    if s < 0:
        d = alpha[j] - alpha[i]
        L = d if d > 0.0 else 0.0
        H = C + d if d < 0.0 else C
    else:
        t = alpha[i] + alpha[j]
        L = t - C if t > C else 0.0
        H = t if t < C else C
    if H - L < 1e-12:
        return False

    e_diff = (g[i] - y[i]) - (g[j] - y[j])
    eta = K[i, i] + K[j, j] - 2.0 * K[i, j]
    if eta > 1e-15:
        aj = alpha[j] + y[j] * e_diff / eta
        if aj < L:
            aj = L
        elif aj > H:
            aj = H
    else:
        # Non-concave directions peak at a clip bound; take the better one.
        def gain(t: float) -> float:
            d = t - alpha[j]
            return y[j] * e_diff * d - 0.5 * eta * d * d

        gain_L, gain_H = gain(L), gain(H)
        if max(gain_L, gain_H) <= 1e-12:
            return False
        aj = L if gain_L >= gain_H else H

    if abs(aj - alpha[j]) < 1e-10:
        return False
    ai = alpha[i] + s * (alpha[j] - aj)
    if ai < 0.0:  # guards float fuzz only
        ai = 0.0
    elif ai > C:
        ai = C
    g += (ai - alpha[i]) * y[i] * K[i] + (aj - alpha[j]) * y[j] * K[j]
    alpha[i] = ai
    alpha[j] = aj
    return True


class KernelSvmClassifier(BaseEstimator, ClassifierMixin):
    """Binary soft-margin kernel SVM; labels are -1 and +1.

    After fitting, ``support_vectors_``, ``dual_coef_`` (alpha_i * y_i) and
    ``intercept_`` describe the model.  ``converged_`` is False when the
    iteration budget ran out with KKT violations remaining; the model is
    still usable.
    """

    def __init__(
        self,
        kernel: str = "rbf",
        C: float = 1.0,
        gamma: float | str = "scale",
        degree: int = 3,
        coef0: float = 0.0,
        tol: float = 1e-3,
        max_iter: int | None = None,
    ):
        self.kernel = kernel
        self.C = C
        self.gamma = gamma
        self.degree = degree
        self.coef0 = coef0
        self.tol = tol
        self.max_iter = max_iter

    def _spec(self) -> KernelSpec:
        return KernelSpec(kind=self.kernel, gamma=self.gamma, degree=self.degree, coef0=self.coef0)

    def fit(self, X, y):
        A = as_float_matrix(X, name="X", min_rows=2)
        yv = np.asarray(y, dtype=float)
        check_same_length(A, yv, names=("X", "y"))
        labels = set(np.unique(yv).tolist())
        if not labels <= {-1.0, 1.0}:
            raise ValueError(f"labels must be -1/+1, got {sorted(labels)}")
        if len(labels) < 2:
            raise SingleClassError("training data holds a single class")
        if self.C <= 0:
            raise ValueError("C must be positive")

        spec = self._spec().resolve(A)
        K = kernel_matrix(spec, A, A)
        res = smo_solve(K, yv, float(self.C), tol=self.tol, max_iter=self.max_iter)
        if not res.converged:
            warnings.warn("SMO stopped before satisfying KKT within tol", stacklevel=2)

        sv = res.alpha > SUPPORT_EPS
        self.kernel_spec_ = spec
        self.gamma_ = float(spec.gamma)
        self.support_ = np.flatnonzero(sv)
        self.support_vectors_ = A[sv].copy()
        self.dual_coef_ = (res.alpha * yv)[sv]
        self.intercept_ = res.bias
        self.converged_ = res.converged
        self.n_iter_ = res.n_iter
        self.n_features_in_ = A.shape[1]
        self.classes_ = np.array([-1.0, 1.0])
        return self

    def decision_function(self, X) -> np.ndarray:
        A = as_float_matrix(X, name="X")
        check_n_features(A, self.n_features_in_)
        if len(self.support_vectors_) == 0:
            return np.full(A.shape[0], self.intercept_)
        K = kernel_matrix(self.kernel_spec_, A, self.support_vectors_)
        return K @ self.dual_coef_ + self.intercept_

    def predict(self, X) -> np.ndarray:
        # the zero decision value maps to +1
        return np.where(self.decision_function(X) >= 0.0, 1.0, -1.0)

    def to_dict(self) -> dict:
        return {
            "kernel": self.kernel_spec_.to_dict(),
            "C": float(self.C),
            "support_vectors": [[float(v) for v in row] for row in self.support_vectors_],
            "dual_coefs": [float(v) for v in self.dual_coef_],
            "bias": float(self.intercept_),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "KernelSvmClassifier":
        spec = KernelSpec.from_dict(d["kernel"])
        est = cls(
            kernel=spec.kind, C=d["C"], gamma=spec.gamma, degree=spec.degree, coef0=spec.coef0
        )
        est.kernel_spec_ = spec
        est.gamma_ = float(spec.gamma)
        est.support_vectors_ = np.asarray(d["support_vectors"], dtype=float)
        if est.support_vectors_.size == 0:
            est.support_vectors_ = est.support_vectors_.reshape(0, 1)
        est.dual_coef_ = np.asarray(d["dual_coefs"], dtype=float)
        est.intercept_ = float(d["bias"])
        est.support_ = np.arange(len(est.dual_coef_))
        est.converged_ = True
        est.n_iter_ = 0
        est.n_features_in_ = est.support_vectors_.shape[1]
        est.classes_ = np.array([-1.0, 1.0])
        return est


def dual_objective(K: np.ndarray, y: np.ndarray, alpha: np.ndarray) -> float:
    """W(alpha) for the binary dual; useful for optimality checks."""
    ya = alpha * np.asarray(y, dtype=float)
    return float(np.sum(alpha) - 0.5 * ya @ K @ ya)


class OneVsRestSvmClassifier(BaseEstimator, ClassifierMixin):
    """Multi-class SVM as one binary machine per class, argmax-decided.

    Labels are integers 0..n_classes-1.  A class absent from the training
    data keeps a constant -inf scorer and is recorded in
    ``missing_classes_``.  Ties in the argmax resolve to the lowest class.
    """

    def __init__(
        self,
        n_classes: int | None = None,
        kernel: str = "rbf",
        C: float = 1.0,
        gamma: float | str = "scale",
        degree: int = 3,
        coef0: float = 0.0,
        tol: float = 1e-3,
        max_iter: int | None = None,
    ):
        self.n_classes = n_classes
        self.kernel = kernel
        self.C = C
        self.gamma = gamma
        self.degree = degree
        self.coef0 = coef0
        self.tol = tol
        self.max_iter = max_iter

    def fit(self, X, y):
        A = as_float_matrix(X, name="X", min_rows=2)
        yv = np.asarray(y)
        check_same_length(A, yv, names=("X", "y"))
        if yv.ndim != 1 or not np.issubdtype(np.asarray(yv).dtype, np.number):
            raise ValueError("y must be a 1-D integer array")
        yv = yv.astype(int)
        if yv.min(initial=0) < 0:
            raise ValueError("labels must be >= 0")
        K_classes = self.n_classes if self.n_classes is not None else int(yv.max()) + 1
        present = np.unique(yv)
        if len(present) < 2:
            raise SingleClassError("training data holds a single class")

        spec = KernelSpec(
            kind=self.kernel, gamma=self.gamma, degree=self.degree, coef0=self.coef0
        ).resolve(A)
        gram = kernel_matrix(spec, A, A)

        machines: list[dict | None] = []
        missing: list[int] = []
        any_unconverged = False
        for c in range(K_classes):
            if c not in present:
                machines.append(None)
                missing.append(c)
                continue
            yc = np.where(yv == c, 1.0, -1.0)
            res = smo_solve(gram, yc, float(self.C), tol=self.tol, max_iter=self.max_iter)
            any_unconverged |= not res.converged
            sv = res.alpha > SUPPORT_EPS
            machines.append(
                {
                    "sv_idx": np.flatnonzero(sv),
                    "dual": (res.alpha * yc)[sv],
                    "bias": res.bias,
                    "converged": res.converged,
                }
            )
        if missing:
            warnings.warn(f"classes {missing} absent from training data", stacklevel=2)
        if any_unconverged:
            warnings.warn("SMO stopped before satisfying KKT within tol", stacklevel=2)

        self.kernel_spec_ = spec
        self.gamma_ = float(spec.gamma)
        self._X = A.copy()
        self._machines = machines
        self.n_classes_ = K_classes
        self.missing_classes_ = tuple(missing)
        self.converged_ = not any_unconverged
        self.n_features_in_ = A.shape[1]
        self.classes_ = np.arange(K_classes)
        return self

    def decision_function(self, X) -> np.ndarray:
        A = as_float_matrix(X, name="X")
        check_n_features(A, self.n_features_in_)
        used = sorted({i for m in self._machines if m is not None for i in m["sv_idx"]})
        lookup = {orig: pos for pos, orig in enumerate(used)}
        gram = (
            kernel_matrix(self.kernel_spec_, A, self._X[used])
            if used
            else np.zeros((A.shape[0], 0))
        )
        out = np.full((A.shape[0], self.n_classes_), -np.inf)
        for c, m in enumerate(self._machines):
            if m is None:
                continue
            cols = [lookup[i] for i in m["sv_idx"]]
            out[:, c] = gram[:, cols] @ m["dual"] + m["bias"]
        return out

    def predict(self, X) -> np.ndarray:
        return np.argmax(self.decision_function(X), axis=1)

    def to_dict(self) -> dict:
        models = []
        for c, m in enumerate(self._machines):
            if m is None:
                models.append({"class": c, "missing": True})
                continue
            models.append(
                {
                    "class": c,
                    "support_vectors": [
                        [float(v) for v in row] for row in self._X[m["sv_idx"]]
                    ],
                    "dual_coefs": [float(v) for v in m["dual"]],
                    "bias": float(m["bias"]),
                }
            )
        return {
            "classes": list(range(self.n_classes_)),
            "kernel": self.kernel_spec_.to_dict(),
            "C": float(self.C),
            "models": models,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "OneVsRestSvmClassifier":
        spec = KernelSpec.from_dict(d["kernel"])
        est = cls(
            n_classes=len(d["classes"]),
            kernel=spec.kind,
            C=d["C"],
            gamma=spec.gamma,
            degree=spec.degree,
            coef0=spec.coef0,
        )
        rows: list[np.ndarray] = []
        machines: list[dict | None] = []
        missing: list[int] = []
        for m in d["models"]:
            if m.get("missing"):
                machines.append(None)
                missing.append(int(m["class"]))
                continue
            sv = np.asarray(m["support_vectors"], dtype=float)
            start = sum(len(r) for r in rows)
            rows.append(sv)
            machines.append(
                {
                    "sv_idx": np.arange(start, start + len(sv)),
                    "dual": np.asarray(m["dual_coefs"], dtype=float),
                    "bias": float(m["bias"]),
                    "converged": True,
                }
            )
        est.kernel_spec_ = spec
        est.gamma_ = float(spec.gamma)
        est._X = (
            np.concatenate(rows) if rows else np.zeros((0, 1))
        )
        est._machines = machines
        est.n_classes_ = len(d["classes"])
        est.missing_classes_ = tuple(missing)
        est.converged_ = True
        est.n_features_in_ = est._X.shape[1] if est._X.size else 1
        est.classes_ = np.arange(est.n_classes_)
        return est
