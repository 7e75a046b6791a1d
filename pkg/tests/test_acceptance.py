"""Package-level quality gates.

One test per release-blocking property: solver optimality against brute
force, oracle agreement for the numeric building blocks, the leakage
guard, calibrated synthetic performance, exact noiseless recovery, and
CLI determinism.  Each test ends with a one-line verdict so a ``-s`` run
reads as a checklist.
"""

import json
import shutil
import subprocess
import sys
import time
from dataclasses import replace

import numpy as np
from scipy.optimize import brentq

from swinglab.experiment import ExperimentConfig, run_experiment
from swinglab.metrics import binary_metrics, confusion_matrix, roc_auc
from swinglab.model_selection import grouped_kfold
from swinglab.preprocessing import PrincipalComponents
from swinglab.segmentation import Dynp, Pelt, segment_phases
from swinglab.svm import (
    SUPPORT_EPS,
    KernelSvmClassifier,
    dual_objective,
    kernel_matrix,
)
from swinglab.synth import default_config, generate_swing

from oracles import (
    auc_concordance,
    best_fixed_count,
    best_penalized_dp,
    fix_signs,
    jacobi_eigh,
    random_feasible_alpha,
)


def test_smo_fits_are_kkt_optimal():
    """Every trained machine is a true maximizer of its dual program."""
    start = time.perf_counter()
    rng = np.random.default_rng(20240501)
    kernels = ("rbf", "poly", "sigmoid")
    tol = 1e-3
    for trial in range(25):
        n = int(rng.integers(4, 13))
        d = int(rng.integers(1, 4))
        X = rng.normal(size=(n, d))
        y = np.where(rng.random(n) < 0.5, -1.0, 1.0)
        y[0], y[1] = -1.0, 1.0
        if trial % 2:  # half the problems get a separating shift
            X[y > 0] += 1.5
        C = float(rng.choice([0.5, 1.0, 5.0]))
        est = KernelSvmClassifier(kernel=kernels[trial % 3], C=C, tol=tol).fit(X, y)

        alpha = np.zeros(n)
        alpha[est.support_] = est.dual_coef_ * y[est.support_]
        assert np.all(alpha >= -1e-12) and np.all(alpha <= C + 1e-9)
        assert abs(float(alpha @ y)) <= 1e-9

        margins = y * est.decision_function(X)
        for a, m in zip(alpha, margins):
            if a <= SUPPORT_EPS:
                assert m >= 1.0 - tol
            elif a >= C - SUPPORT_EPS:
                assert m <= 1.0 + tol
            else:
                assert abs(m - 1.0) <= tol

        K = kernel_matrix(est.kernel_spec_, X, X)
        best = dual_objective(K, y, alpha)
        slack = 1e-7 * max(1.0, abs(best))
        for _ in range(200):
            probe = random_feasible_alpha(y, C, rng)
            assert best >= dual_objective(K, y, probe) - slack

    # analytic two-point problem: the boundary is the midpoint
    two = KernelSvmClassifier(kernel="poly", degree=1, coef0=0.0, C=10.0).fit(
        [[0.0], [2.0]], [-1.0, 1.0]
    )
    root = brentq(lambda t: float(two.decision_function([[t]])[0]), 0.0, 2.0, xtol=1e-12)
    assert abs(root - 1.0) <= 1e-6

    elapsed = time.perf_counter() - start
    assert elapsed < 5.0
    print(f"smo kkt + dual dominance on 25 problems: PASS ({elapsed:.2f}s)")


def _step_signal(rng, n):
    """Piecewise-constant levels under noise; a quarter are pure noise."""
    if rng.random() < 0.25:
        return rng.normal(size=n)
    n_jumps = int(rng.integers(1, 4))
    cuts = np.sort(rng.choice(np.arange(1, n), size=min(n_jumps, n - 1), replace=False))
    bounds = (0, *cuts.tolist(), n)
    x = np.empty(n)
    for lvl, (a, b) in zip(rng.normal(scale=3.0, size=len(bounds) - 1),
                           zip(bounds, bounds[1:])):
        x[a:b] = lvl
    return x + rng.normal(scale=0.3, size=n)


def test_changepoint_solvers_match_exhaustive_search():
    """The DP solvers return exactly what brute force returns, ties included."""
    start = time.perf_counter()
    rng = np.random.default_rng(77)
    # enumeration stays feasible: high counts only on short signals
    caps = {1: 200, 2: 200, 3: 60, 4: 40}
    for trial in range(50):
        n_bkps = int(rng.integers(1, 5))
        min_size = int(rng.choice([2, 3, 5]))
        lo = max((n_bkps + 1) * min_size, 8)
        n = int(rng.integers(lo, caps[n_bkps] + 1))
        X = _step_signal(rng, n)
        if trial % 5 == 0:
            X = np.column_stack([X, _step_signal(rng, n)])
        got = Dynp(min_size=min_size).fit(X).predict(n_bkps)
        want, _ = best_fixed_count(X, n_bkps, min_size)
        assert got == want

    for _ in range(20):
        n = int(rng.integers(10, 61))
        min_size = int(rng.choice([1, 2, 3]))
        penalty = float(rng.choice([0.5, 2.0, 10.0]))
        X = _step_signal(rng, n)
        got = Pelt(min_size=min_size).fit(X).predict(penalty)
        want, _ = best_penalized_dp(X, penalty, min_size)
        assert got == want

    elapsed = time.perf_counter() - start
    assert elapsed < 30.0
    print(f"dynp == exhaustive on 50 signals, pelt == penalized dp on 20: "
          f"PASS ({elapsed:.2f}s)")


def test_pca_matches_covariance_eigensolver():
    """Components and variance ratios agree with an independent eigensolver."""
    rng = np.random.default_rng(4242)
    for _ in range(50):
        n = int(rng.integers(10, 21))
        # separated column scales keep the spectrum simple; eigenvectors of
        # near-tied eigenvalues are ill-conditioned for any implementation
        X = rng.normal(size=(n, 3)) * np.array([3.0, 1.0, 0.3])
        pca = PrincipalComponents(n_components=3).fit(X)
        centered = X - X.mean(axis=0)
        cov = centered.T @ centered / (n - 1)
        evals, evecs = jacobi_eigh(cov)

        got = fix_signs(np.asarray(pca.components_))
        assert np.max(np.abs(got - fix_signs(evecs))) <= 1e-8
        ratios = np.asarray(pca.explained_variance_ratio_)
        assert np.max(np.abs(ratios - evals / np.sum(evals))) <= 1e-8
        V = np.asarray(pca.components_)
        assert np.max(np.abs(V @ V.T - np.eye(3))) <= 1e-9
    print("pca components and ratios match the jacobi eigensolver on 50 matrices: PASS")


def test_metrics_match_hand_worked_values():
    """Frozen hand tallies, then AUC against pairwise concordance counting."""
    cm = confusion_matrix([1, 1, 1, 1, 1, 1, 0, 0, 0, 0],
                          [1, 1, 1, 1, 0, 0, 0, 0, 0, 1], 2)
    assert cm.tolist() == [[3, 1], [2, 4]]
    m = binary_metrics(cm)
    assert m["accuracy"] == 0.7
    assert m["precision"] == 0.8
    assert m["recall"] == 4 / 6
    assert m["f1"] == 2 * 0.8 * (4 / 6) / (0.8 + 4 / 6)

    auc, _ = roc_auc([0.9, 0.8, 0.7, 0.6], [1, 0, 1, 0])
    assert auc == 0.75

    rng = np.random.default_rng(9)
    for trial in range(50):
        n = int(rng.integers(4, 21))
        y = rng.integers(0, 2, size=n)
        if y.min() == y.max():
            y[0] = 1 - y[0]
        # discrete grids on odd trials force tied scores
        s = rng.integers(0, 5, size=n).astype(float) if trial % 2 else rng.normal(size=n)
        auc, _ = roc_auc(s, y)
        assert abs(auc - auc_concordance(s, y)) <= 1e-12
    print("metrics match hand-worked values; auc == concordance on 50 draws: PASS")


def test_grouped_folds_never_leak_participants():
    """No participant sits on both sides of any split, for any seed."""
    pids = [f"p{i:02d}" for i in range(1, 13)]
    for seed in range(100):
        plan = grouped_kfold(pids, 5, seed)
        assert [len(f) for f in plan.folds] == [3, 3, 2, 2, 2]
        for train, held_out in plan.splits():
            assert not set(train) & set(held_out)
            assert sorted(set(train) | set(held_out)) == pids
    print("grouped folds never leak participants across 100 seeded plans: PASS")


def test_default_synthetic_run_meets_quality_floor(default_dataset):
    """The stock seed-42 experiment clears its calibrated performance bars."""
    start = time.perf_counter()
    result = run_experiment(
        default_dataset.recordings,
        config=ExperimentConfig(),
        seed=42,
        truth=default_dataset.truth,
    )
    elapsed = time.perf_counter() - start
    report = result.report

    assert list(report["skill"]) == ["rbf", "poly", "sigmoid"]
    for block in report["skill"].values():
        for stage in ("cross_validation", "testing"):
            assert set(block[stage]) == {"accuracy", "precision", "recall", "f1"}

    cv_acc = report["skill"]["rbf"]["cross_validation"]["accuracy"]
    assert cv_acc >= 0.75

    aucs = [entry["auc"] for entry in report["phase"]["roc"]]
    assert len(aucs) == 5 and all(a is not None for a in aucs)
    assert min(aucs) >= 0.75
    assert max(aucs) >= 0.85

    assert elapsed < 120.0
    print(f"seed-42 run: rbf cv accuracy {cv_acc:.3f}, phase aucs "
          f"{[round(a, 3) for a in aucs]}: PASS ({elapsed:.1f}s)")


def test_noiseless_swings_recover_exact_breakpoints():
    """With the noise turned off, the detector reproduces the generator."""
    cfg = default_config(0)
    checked = 0
    for profile in (cfg.beginner, cfg.intermediate):
        quiet = replace(profile, noise=0.0)
        for seed in range(50):
            rng = np.random.default_rng(seed)
            frames, truth = generate_swing(quiet, rng)
            X = np.array([[f.yaw, f.roll, f.pitch] for f in frames])
            got = segment_phases(X, min_size=3)
            assert got.breakpoints == truth.breakpoints
            checked += 1
    assert checked == 100
    print("noiseless swings recover truth breakpoints, 100 of 100: PASS")


def test_evaluate_cli_is_deterministic(small_dataset_dir, tmp_path):
    """Two identical evaluate invocations write byte-identical reports."""
    exe = shutil.which("swinglab")
    base = [exe] if exe else [sys.executable, "-m", "swinglab.cli"]
    payloads = []
    for name in ("first", "second"):
        out = tmp_path / f"{name}.json"
        cmd = base + [
            "evaluate", "--data", str(small_dataset_dir), "--out", str(out),
            "--seed", "11", "--folds", "3",
            "--features", "aggregates", "--max-train-samples", "400",
        ]
        proc = subprocess.run(cmd, capture_output=True, text=True)
        assert proc.returncode == 0, proc.stderr
        payloads.append(out.read_bytes())
    assert payloads[0] == payloads[1]
    json.loads(payloads[0])  # and the payload is a well-formed report
    print("two identical cli evaluate runs are byte-identical: PASS")
