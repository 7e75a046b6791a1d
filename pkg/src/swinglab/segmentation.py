"""Offline change-point detection and swing phase segmentation.

The detectors minimize the summed L2 segment cost

    cost(a, b) = sum_{i in [a, b)} || x_i - mean(x[a:b]) ||^2

over piecewise-constant approximations of a multivariate signal.  ``Dynp``
solves for an exact breakpoint count by dynamic programming; ``Pelt``
minimizes cost + penalty * n_breakpoints with pruning that provably never
changes the optimum.  Both break cost ties toward the lexicographically
smallest breakpoint tuple.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import IntEnum
from typing import Sequence

import numpy as np
from scipy.signal import find_peaks
from sklearn.base import BaseEstimator

from .errors import BadRangeError, NoSwingsError, TooShortError
from .validation import as_float_matrix

from .ingest import Recording


def segment_cost_l2(signal, a: int, b: int) -> float:
    """L2 cost of the segment [a, b): squared deviation from the segment mean.

    Channels of a multivariate signal are summed.  Raises BadRangeError on an
    empty or out-of-bounds range.
    """
    X = as_float_matrix(signal, name="signal")
    n = X.shape[0]
    if not (0 <= a < b <= n):
        raise BadRangeError(f"bad segment range [{a}, {b}) for signal of length {n}")
    seg = X[a:b]
    dev = seg - seg.mean(axis=0)
    return float(np.sum(dev * dev))


class _L2CostCache:
    """Segment costs from cumulative sums; O(1) per query after O(n) setup.

    cost(a, b) = sum_ch [ S2 - S1^2 / (b - a) ] with S1, S2 the windowed
    sums of values and squares.  Tiny negative rounding residue is clamped.
    """

    def __init__(self, signal):
        X = as_float_matrix(signal, name="signal")
        zero = np.zeros((1, X.shape[1]))
        self._s1 = np.concatenate([zero, np.cumsum(X, axis=0)])
        self._s2 = np.concatenate([zero, np.cumsum(X * X, axis=0)])
        self.n = X.shape[0]

    def costs(self, a, b) -> np.ndarray:
        a = np.asarray(a, dtype=int)
        b = np.asarray(b, dtype=int)
        d1 = self._s1[b] - self._s1[a]
        d2 = self._s2[b] - self._s2[a]
        length = (b - a).astype(float)
        if d1.ndim == 1:  # single (a, b) pair
            out = float(np.sum(d2 - d1 * d1 / length))
            return np.maximum(out, 0.0)
        out = np.sum(d2 - d1 * d1 / length[:, None], axis=1)
        return np.maximum(out, 0.0)


class Dynp(BaseEstimator):
    """Exact change-point solver for a fixed number of breakpoints.

    Usage follows the fit/predict idiom: ``Dynp(min_size=3).fit(signal)``
    then ``predict(n_bkps)``.  Every segment has at least ``min_size``
    samples.  Returned breakpoints are interior indices, ascending.
    """

    def __init__(self, min_size: int = 3):
        self.min_size = min_size

    def fit(self, signal):
        if self.min_size < 1:
            raise ValueError("min_size must be >= 1")
        self._cache = _L2CostCache(signal)
        self.n_samples_ = self._cache.n
        return self

    def _candidates(self, j: int, s: int, table: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """First-breakpoint candidates t and their values for S[j][s].

        S[j][s] is the best cost of covering [s, n) with j breakpoints; the
        first one must leave room for the remaining j-1 on its right.
        """
        n, m = self.n_samples_, self.min_size
        ts = np.arange(s + m, n - j * m + 1)
        vals = self._cache.costs(np.full(len(ts), s), ts) + table[j - 1][ts]
        return ts, vals

    def predict(self, n_bkps: int) -> list[int]:
        n, m = self.n_samples_, self.min_size
        if n_bkps < 0:
            raise ValueError("n_bkps must be >= 0")
        if n < (n_bkps + 1) * m:
            raise TooShortError(
                f"need at least {(n_bkps + 1) * m} samples for {n_bkps} breakpoints, got {n}"
            )
        if n_bkps == 0:
            return []

        B = n_bkps
        table = np.full((B + 1, n + 1), np.inf)
        starts = np.arange(0, n - m + 1)
        table[0][starts] = self._cache.costs(starts, np.full(len(starts), n))
        for j in range(1, B + 1):
            for s in range(n - (j + 1) * m, -1, -1):
                _, vals = self._candidates(j, s, table)
                table[j][s] = vals.min()

        # Forward reconstruction: at each level take the smallest t that
        # reproduces the tabled optimum, which yields the lexicographically
        # smallest optimal tuple.  The candidate values are recomputed with
        # the identical vectorized expression, so float equality is exact.
        bkps: list[int] = []
        pos = 0
        for j in range(B, 0, -1):
            ts, vals = self._candidates(j, pos, table)
            hit = int(np.flatnonzero(vals == table[j][pos])[0])
            pos = int(ts[hit])
            bkps.append(pos)
        return bkps

    def fit_predict(self, signal, n_bkps: int) -> list[int]:
        return self.fit(signal).predict(n_bkps)


class Pelt(BaseEstimator):
    """Penalized change-point solver; exact despite pruning.

    Minimizes total L2 cost + penalty * n_breakpoints over all valid
    segmentations.  The classic prune rule is only safe immediately for
    min_size == 1, so candidates found dominated at position s are retired
    once the scan moves min_size further, which preserves exactness for any
    minimum segment length.
    """

    def __init__(self, min_size: int = 3):
        self.min_size = min_size

    def fit(self, signal):
        if self.min_size < 1:
            raise ValueError("min_size must be >= 1")
        self._cache = _L2CostCache(signal)
        self.n_samples_ = self._cache.n
        return self

    def predict(self, penalty: float) -> list[int]:
        n, m = self.n_samples_, self.min_size
        if penalty < 0:
            raise ValueError("penalty must be >= 0")
        if n < m:
            raise TooShortError(f"need at least {m} samples, got {n}")
        beta = float(penalty)
        cache = self._cache

        # G[s] = best penalized cost of covering the suffix [s, n).
        # Scanning right to left keeps every arithmetic expression identical
        # to the one the forward reconstruction below recomputes.
        G = np.full(n + 1, np.inf)
        active: list[int] = []
        retire_at: dict[int, int] = {}  # t -> exclude for all s <= retire_at[t]
        for s in range(n - m, -1, -1):
            t_new = s + m
            if t_new <= n - m:
                active.append(t_new)
            active = [t for t in active if retire_at.get(t, -1) < s]
            no_split = float(cache.costs(s, n))
            best = no_split
            if active:
                ts = np.array(active)
                vals = cache.costs(np.full(len(ts), s), ts) + beta + G[ts]
                vmin = float(vals.min())
                if vmin < best:
                    best = vmin
                # Candidate t is dominated for every position at least
                # min_size to the left once cost(s,t) + G[t] >= G[s].
                for t, v in zip(active, vals):
                    if v - beta >= best and t not in retire_at:
                        retire_at[t] = s - m
            G[s] = best

        bkps: list[int] = []
        pos = 0
        while True:
            if float(cache.costs(pos, n)) == G[pos]:
                break  # stopping here is optimal; prefixes sort first
            ts = np.arange(pos + m, n - m + 1)
            vals = cache.costs(np.full(len(ts), pos), ts) + beta + G[ts]
            hit = int(np.flatnonzero(vals == G[pos])[0])
            pos = int(ts[hit])
            bkps.append(pos)
        return bkps

    def fit_predict(self, signal, penalty: float) -> list[int]:
        return self.fit(signal).predict(penalty)


class SwingPhase(IntEnum):
    """The five stroke phases, in temporal order."""

    BACKSWING = 0
    BACKLOOP = 1
    FORWARD_SWING = 2
    FOLLOW_THROUGH = 3
    RECOVERY = 4


@dataclass(frozen=True)
class PhaseSegmentation:
    """Four interior breakpoints splitting a swing into the five phases."""

    breakpoints: tuple[int, int, int, int]
    n_frames: int

    def __post_init__(self) -> None:
        b = self.breakpoints
        if len(b) != 4:
            raise ValueError(f"need exactly 4 breakpoints, got {len(b)}")
        bounds = (0, *b, self.n_frames)
        for lo, hi in zip(bounds, bounds[1:]):
            if hi <= lo:
                raise ValueError(f"breakpoints must be interior and increasing: {b}")

    def labels(self) -> np.ndarray:
        """Per-frame phase ids: phase of frame i = count of breakpoints <= i."""
        idx = np.arange(self.n_frames)
        return np.searchsorted(np.asarray(self.breakpoints), idx, side="right").astype(int)

    def segments(self) -> list[tuple[int, int, SwingPhase]]:
        bounds = (0, *self.breakpoints, self.n_frames)
        return [
            (lo, hi, SwingPhase(i)) for i, (lo, hi) in enumerate(zip(bounds, bounds[1:]))
        ]


@dataclass(frozen=True)
class SwingWindow:
    """Half-open frame range [start, end) of one extracted swing."""

    start: int
    end: int
    peak: int

    def __post_init__(self) -> None:
        if not (self.start <= self.peak < self.end):
            raise ValueError(f"peak {self.peak} outside window [{self.start}, {self.end})")

    @property
    def length(self) -> int:
        return self.end - self.start


@dataclass(frozen=True)
class SwingExtractionParams:
    threshold_frac: float = 0.4
    refractory: int = 30
    pre_frames: int = 40
    post_frames: int = 60
    min_swing_len: int = 20

    def __post_init__(self) -> None:
        if not (0.0 < self.threshold_frac <= 1.0):
            raise ValueError("threshold_frac must be in (0, 1]")
        if min(self.refractory, self.pre_frames, self.post_frames) < 1:
            raise ValueError("refractory/pre_frames/post_frames must be >= 1")


def angular_speed(times: np.ndarray, channels: np.ndarray) -> np.ndarray:
    """Per-frame motion magnitude ||delta(yaw, roll, pitch)|| / delta(t).

    The first frame has no predecessor and gets speed 0.
    """
    dt = np.diff(times)
    if np.any(dt <= 0):
        raise ValueError("times must be strictly increasing")
    steps = np.diff(channels, axis=0)
    speed = np.linalg.norm(steps, axis=1) / dt
    return np.concatenate([[0.0], speed])


def extract_swings(
    recording: Recording, params: SwingExtractionParams | None = None
) -> list[SwingWindow]:
    """Locate swings as windows around angular-speed peaks.

    Peaks must exceed threshold_frac times the global maximum speed and be
    at least ``refractory`` frames apart; each window spans
    [peak - pre_frames, peak + post_frames], clamped to the session and
    truncated so windows never overlap.  Raises NoSwingsError when the
    session shows no activity.
    """
    p = params or SwingExtractionParams()
    channels = recording.channel_matrix()
    times = recording.times()
    if len(times) < 2:
        raise NoSwingsError("session too short to contain a swing")
    speed = angular_speed(times, channels)
    top = float(speed.max())
    peaks, _ = find_peaks(speed, height=p.threshold_frac * top, distance=p.refractory)
    if top <= 0.0 or len(peaks) == 0:
        raise NoSwingsError("no angular-speed peaks above threshold")

    n = len(times)
    windows: list[SwingWindow] = []
    for peak in peaks:
        start = max(int(peak) - p.pre_frames, 0)
        end = min(int(peak) + p.post_frames + 1, n)
        if windows and start < windows[-1].end:
            start = windows[-1].end
        if end - start >= p.min_swing_len and start <= peak < end:
            windows.append(SwingWindow(start=start, end=end, peak=int(peak)))
    if not windows:
        raise NoSwingsError("no window satisfied the minimum swing length")
    return windows


def segment_phases(features, min_size: int = 3) -> PhaseSegmentation:
    """Split one swing's per-frame features into the five stroke phases.

    Runs the exact DP detector with four breakpoints.  The swing must hold
    at least 5 * min_size frames.
    """
    X = as_float_matrix(features, name="features")
    n = X.shape[0]
    if n < 5 * min_size:
        raise TooShortError(f"need at least {5 * min_size} frames, got {n}")
    bkps = Dynp(min_size=min_size).fit(X).predict(4)
    return PhaseSegmentation(breakpoints=tuple(bkps), n_frames=n)
