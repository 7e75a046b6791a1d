"""Independent reference implementations the tests check against.

Everything here is written the slow, obvious way on purpose: direct segment
means, explicit pair counting, textbook Jacobi rotations.  None of it shares
code with the library, so agreement is evidence rather than tautology.
"""

from __future__ import annotations

import itertools

import numpy as np


def jacobi_eigh(S: np.ndarray, sweeps: int = 64, eps: float = 1e-14):
    """Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.

    Returns (eigenvalues, eigenvectors) with eigenvalues descending and
    eigenvectors as rows.
    """
    A = np.array(S, dtype=float)
    n = A.shape[0]
    V = np.eye(n)
    for _ in range(sweeps):
        off = np.sqrt(max(np.sum(A * A) - np.sum(np.diag(A) ** 2), 0.0))
        if off < eps:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                if abs(A[p, q]) < eps:
                    continue
                # stable small-angle rotation zeroing A[p, q]; going through
                # cos(arctan(...)) instead loses half the digits near pi/2
                tau = (A[q, q] - A[p, p]) / (2.0 * A[p, q])
                t = np.sign(tau) / (abs(tau) + np.hypot(1.0, tau)) if tau else 1.0
                c = 1.0 / np.hypot(1.0, t)
                s = t * c
                J = np.eye(n)
                J[p, p] = J[q, q] = c
                J[p, q] = s
                J[q, p] = -s
                A = J.T @ A @ J
                V = V @ J
    evals = np.diag(A).copy()
    order = np.argsort(evals)[::-1]
    return evals[order], V[:, order].T


def fix_signs(rows: np.ndarray) -> np.ndarray:
    """Largest-magnitude entry of each row made positive (same rule as the
    library, restated here so the comparison is rule-to-rule)."""
    out = np.array(rows, dtype=float)
    for row in out:
        j = int(np.argmax(np.abs(row)))
        if row[j] < 0:
            row *= -1.0
    return out


def direct_cost(X: np.ndarray, a: int, b: int) -> float:
    """L2 segment cost by direct mean and deviations, no cumulative sums."""
    A = np.asarray(X, dtype=float)
    if A.ndim == 1:
        A = A[:, None]
    seg = A[a:b]
    mu = seg.mean(axis=0)
    return float(np.sum((seg - mu) ** 2))


def cost_table(X: np.ndarray) -> np.ndarray:
    """cost[a][b] for all 0 <= a < b <= n, computed by direct means."""
    A = np.asarray(X, dtype=float)
    if A.ndim == 1:
        A = A[:, None]
    n = A.shape[0]
    table = np.zeros((n + 1, n + 1))
    for a in range(n):
        for b in range(a + 1, n + 1):
            seg = A[a:b]
            mu = seg.mean(axis=0)
            table[a][b] = float(np.sum((seg - mu) ** 2))
    return table


def enumerate_breakpoints(n: int, n_bkps: int, min_size: int):
    """All valid ascending breakpoint tuples, in lexicographic order."""
    if n_bkps == 0:
        yield ()
        return
    positions = range(min_size, n - min_size + 1)
    for combo in itertools.combinations(positions, n_bkps):
        ok = True
        prev = 0
        for b in combo:
            if b - prev < min_size:
                ok = False
                break
            prev = b
        if ok and n - combo[-1] >= min_size:
            yield combo


def best_fixed_count(X, n_bkps: int, min_size: int):
    """Exhaustive minimizer for a fixed breakpoint count.

    Iterating combinations lexicographically and keeping strictly better
    candidates reproduces the smallest-tuple tie rule.
    """
    A = np.asarray(X, dtype=float)
    if A.ndim == 1:
        A = A[:, None]
    n = A.shape[0]
    table = cost_table(A)
    best_cost, best_bkps = np.inf, None
    for combo in enumerate_breakpoints(n, n_bkps, min_size):
        bounds = (0, *combo, n)
        cost = sum(table[a][b] for a, b in zip(bounds, bounds[1:]))
        if cost < best_cost:
            best_cost, best_bkps = cost, combo
    return list(best_bkps), best_cost


def best_penalized_enum(X, penalty: float, min_size: int):
    """Exhaustive penalized minimizer over every breakpoint count.

    Only usable for tiny n; the count grows roughly like 2^(n/min_size).
    Candidate order (ascending count, lexicographic within) matches the
    prefix-first tie rule.
    """
    A = np.asarray(X, dtype=float)
    if A.ndim == 1:
        A = A[:, None]
    n = A.shape[0]
    table = cost_table(A)
    best_cost, best_bkps = np.inf, None
    for k in range(0, n // min_size):
        for combo in enumerate_breakpoints(n, k, min_size):
            bounds = (0, *combo, n)
            cost = penalty * k + sum(table[a][b] for a, b in zip(bounds, bounds[1:]))
            if cost < best_cost:
                best_cost, best_bkps = cost, combo
    return list(best_bkps), best_cost


def best_penalized_dp(X, penalty: float, min_size: int):
    """Penalized optimum by forward dynamic programming, no pruning.

    F[t] covers the prefix [0, t); scanning t left to right is the mirror
    image of the library's suffix recursion, so shared mistakes are unlikely.
    """
    A = np.asarray(X, dtype=float)
    if A.ndim == 1:
        A = A[:, None]
    n = A.shape[0]
    m = min_size
    table = cost_table(A)
    F = np.full(n + 1, np.inf)
    F[0] = 0.0
    choice: dict[int, list[int]] = {0: []}
    for t in range(m, n + 1):
        # whole prefix as one segment
        best = table[0][t]
        bkps: list[int] = []
        for s in range(m, t - m + 1):
            v = F[s] + penalty + table[s][t]
            cand = choice[s] + [s]
            if v < best or (v == best and cand < bkps):
                best, bkps = v, cand
        F[t] = best
        choice[t] = bkps
    return choice[n], float(F[n])


def auc_concordance(scores, labels) -> float:
    """Pairwise concordance probability; ties count one half."""
    s = np.asarray(scores, dtype=float)
    y = np.asarray(labels, dtype=int)
    pos = s[y == 1]
    neg = s[y == 0]
    wins = ties = 0
    for p in pos:
        for q in neg:
            if p > q:
                wins += 1
            elif p == q:
                ties += 1
    return (wins + 0.5 * ties) / (len(pos) * len(neg))


def random_feasible_alpha(y: np.ndarray, C: float, rng: np.random.Generator) -> np.ndarray:
    """A random point of the dual feasible set {0 <= a <= C, sum a*y = 0}.

    Uniform box draws scaled per label group onto the smaller group sum;
    scaling down keeps every coordinate inside the box.
    """
    a = rng.uniform(0.0, C, size=len(y))
    pos = y > 0
    sp, sn = float(a[pos].sum()), float(a[~pos].sum())
    if sp <= 0.0 or sn <= 0.0:
        return np.zeros_like(a)
    t = min(sp, sn)
    a[pos] *= t / sp
    a[~pos] *= t / sn
    return a
