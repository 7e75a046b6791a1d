"""Synthetic wrist-IMU swing sessions with exact phase ground truth.

A generated swing dwells at one attitude waypoint per phase and moves
between waypoints through short cosine-eased steps centered on the phase
boundaries.  Step samples sit at half-integer offsets, so the step midpoint
falls between two frames and the true boundary is the unique least-cost
breakpoint of a noiseless swing.  The approach movement from the ready
posture into the first dwell happens before frame 0 of the swing, as part
of session assembly.

All default profile numbers live in ``data/synth_defaults.json``; nothing
here hardcodes them.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import BadProfileError
from .ingest import Handedness, ImuFrame, Recording, Session, Skill
from .segmentation import PhaseSegmentation

_CHANNELS = 3
_N_PHASES = 5


@dataclass(frozen=True)
class SwingProfile:
    """Waypoints and variability knobs for one skill group.

    Durations are frame counts at the nominal tempo; jitters are fractional
    standard deviations.  ``noise`` is the per-frame angle noise in radians.
    """

    phase_durations: tuple[float, ...]
    duration_jitter: float
    tempo_jitter: float
    min_duration: int
    rest_posture: tuple[float, float, float]
    phase_targets: tuple[tuple[float, float, float], ...]
    transition_halfwidths: tuple[int, ...]
    amplitude_jitter: float
    noise: float

    def __post_init__(self) -> None:
        if len(self.phase_durations) != _N_PHASES:
            raise BadProfileError(f"need {_N_PHASES} phase durations")
        if len(self.phase_targets) != _N_PHASES or any(
            len(t) != _CHANNELS for t in self.phase_targets
        ):
            raise BadProfileError(f"need {_N_PHASES} targets of {_CHANNELS} angles")
        if len(self.transition_halfwidths) != _N_PHASES - 1:
            raise BadProfileError(f"need {_N_PHASES - 1} transition halfwidths")
        if any(h < 1 for h in self.transition_halfwidths):
            raise BadProfileError("transition halfwidths must be >= 1")
        if self.min_duration < 6:
            raise BadProfileError("min_duration must be >= 6 frames")
        if any(d < self.min_duration for d in self.phase_durations):
            raise BadProfileError("mean phase durations must be >= min_duration")
        if min(self.duration_jitter, self.tempo_jitter, self.amplitude_jitter) < 0:
            raise BadProfileError("jitters must be >= 0")
        if self.noise < 0:
            raise BadProfileError("noise must be >= 0")

    def to_dict(self) -> dict:
        return {
            "phase_durations": list(self.phase_durations),
            "duration_jitter": self.duration_jitter,
            "tempo_jitter": self.tempo_jitter,
            "min_duration": self.min_duration,
            "rest_posture": list(self.rest_posture),
            "phase_targets": [list(t) for t in self.phase_targets],
            "transition_halfwidths": list(self.transition_halfwidths),
            "amplitude_jitter": self.amplitude_jitter,
            "noise": self.noise,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SwingProfile":
        return cls(
            phase_durations=tuple(float(v) for v in d["phase_durations"]),
            duration_jitter=float(d["duration_jitter"]),
            tempo_jitter=float(d["tempo_jitter"]),
            min_duration=int(d["min_duration"]),
            rest_posture=tuple(float(v) for v in d["rest_posture"]),
            phase_targets=tuple(tuple(float(v) for v in t) for t in d["phase_targets"]),
            transition_halfwidths=tuple(int(v) for v in d["transition_halfwidths"]),
            amplitude_jitter=float(d["amplitude_jitter"]),
            noise=float(d["noise"]),
        )


@dataclass(frozen=True)
class SynthConfig:
    """Full recipe for one generated dataset.  The seed has no default."""

    seed: int
    beginner: SwingProfile
    intermediate: SwingProfile
    n_participants: int = 12
    beginner_fraction: float = 0.5
    session_plan: tuple[int, int, int] = (10, 10, 20)
    sample_rate: float = 50.0
    idle_mean_frames: float = 55.0
    idle_jitter_frames: float = 10.0
    idle_min_frames: int = 30
    approach_frames: int = 12
    return_frames: int = 10
    left_handed_every: int = 6

    def __post_init__(self) -> None:
        if self.n_participants < 2:
            raise BadProfileError("need at least 2 participants")
        if not (0.0 < self.beginner_fraction < 1.0):
            raise BadProfileError("beginner_fraction must be in (0, 1)")
        if self.sample_rate <= 0:
            raise BadProfileError("sample_rate must be positive")
        if len(self.session_plan) != 3 or any(s < 1 for s in self.session_plan):
            raise BadProfileError("session_plan must be three positive swing counts")
        if self.approach_frames < 2 or self.return_frames < 2:
            raise BadProfileError("approach_frames and return_frames must be >= 2")

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "n_participants": self.n_participants,
            "beginner_fraction": self.beginner_fraction,
            "session_plan": list(self.session_plan),
            "sample_rate": self.sample_rate,
            "idle_mean_frames": self.idle_mean_frames,
            "idle_jitter_frames": self.idle_jitter_frames,
            "idle_min_frames": self.idle_min_frames,
            "approach_frames": self.approach_frames,
            "return_frames": self.return_frames,
            "left_handed_every": self.left_handed_every,
            "profiles": {
                "beginner": self.beginner.to_dict(),
                "intermediate": self.intermediate.to_dict(),
            },
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SynthConfig":
        profiles = d["profiles"]
        return cls(
            seed=int(d["seed"]),
            beginner=SwingProfile.from_dict(profiles["beginner"]),
            intermediate=SwingProfile.from_dict(profiles["intermediate"]),
            n_participants=int(d.get("n_participants", 12)),
            beginner_fraction=float(d.get("beginner_fraction", 0.5)),
            session_plan=tuple(int(v) for v in d.get("session_plan", (10, 10, 20))),
            sample_rate=float(d.get("sample_rate", 50.0)),
            idle_mean_frames=float(d.get("idle_mean_frames", 55.0)),
            idle_jitter_frames=float(d.get("idle_jitter_frames", 10.0)),
            idle_min_frames=int(d.get("idle_min_frames", 30)),
            approach_frames=int(d.get("approach_frames", 12)),
            return_frames=int(d.get("return_frames", 10)),
            left_handed_every=int(d.get("left_handed_every", 6)),
        )


def default_settings() -> dict:
    """The packaged defaults as a plain dict (seed not included)."""
    text = resources.files("swinglab.data").joinpath("synth_defaults.json").read_text()
    return json.loads(text)


def default_config(seed: int, overrides: dict | None = None) -> SynthConfig:
    """Build a SynthConfig from the packaged defaults plus optional overrides."""
    settings = default_settings()
    if overrides:
        settings = _deep_merge(settings, overrides)
    settings["seed"] = seed
    return SynthConfig.from_dict(settings)


def _deep_merge(base: dict, extra: dict) -> dict:
    out = dict(base)
    for key, val in extra.items():
        if isinstance(val, dict) and isinstance(out.get(key), dict):
            out[key] = _deep_merge(out[key], val)
        else:
            out[key] = val
    return out


def _eased_step(n: int) -> np.ndarray:
    """Cosine ease sampled at half-integer offsets: midpoint between frames."""
    u = (np.arange(n) + 0.5) / n
    return (1.0 - np.cos(np.pi * u)) / 2.0


def _swing_arrays(
    profile: SwingProfile, rng: np.random.Generator
) -> tuple[np.ndarray, tuple[int, int, int, int]]:
    """One swing as an (n, 3) angle array plus its interior breakpoints."""
    tempo = float(np.exp(rng.normal(0.0, profile.tempo_jitter)))
    halves = profile.transition_halfwidths
    durations: list[int] = []
    for i, mean in enumerate(profile.phase_durations):
        d = mean * tempo * (1.0 + rng.normal(0.0, profile.duration_jitter))
        # each phase must hold its share of the neighbouring steps plus a dwell
        need = 1 + (halves[i - 1] if i > 0 else 0) + (halves[i] if i < _N_PHASES - 1 else 0)
        durations.append(max(int(round(d)), profile.min_duration, need))

    amp = 1.0 + rng.normal(0.0, profile.amplitude_jitter, size=_CHANNELS)
    amp = np.clip(amp, 1.0 - 3.0 * profile.amplitude_jitter, 1.0 + 3.0 * profile.amplitude_jitter)
    rest = np.asarray(profile.rest_posture, dtype=float)
    targets = np.asarray(profile.phase_targets, dtype=float)
    dwell = rest + (targets - rest) * amp  # (5, 3)

    bounds = np.concatenate([[0], np.cumsum(durations)])
    n = int(bounds[-1])
    x = np.empty((n, _CHANNELS))
    for i in range(_N_PHASES):
        x[bounds[i] : bounds[i + 1]] = dwell[i]
    for i, tau in enumerate(halves):
        b = int(bounds[i + 1])
        ease = _eased_step(2 * tau)[:, None]
        x[b - tau : b + tau] = dwell[i] + (dwell[i + 1] - dwell[i]) * ease

    if profile.noise > 0.0:
        x = x + rng.normal(0.0, profile.noise, size=x.shape)
    bkps = tuple(int(b) for b in bounds[1:_N_PHASES])
    return x, bkps


def generate_swing(
    profile: SwingProfile, rng: np.random.Generator, *, sample_rate: float = 50.0
) -> tuple[list[ImuFrame], PhaseSegmentation]:
    """One swing as frames starting at t=0 plus its true segmentation."""
    x, bkps = _swing_arrays(profile, rng)
    frames = [
        ImuFrame(t=i / sample_rate, yaw=float(r[0]), roll=float(r[1]), pitch=float(r[2]))
        for i, r in enumerate(x)
    ]
    return frames, PhaseSegmentation(breakpoints=bkps, n_frames=len(x))


@dataclass(frozen=True)
class TruthSwing:
    """Ground truth for one swing, in session-absolute frame indices."""

    participant_id: str
    session: Session
    swing_index: int
    impact_frame: int
    breakpoints: tuple[int, int, int, int]

    def to_dict(self) -> dict:
        return {
            "participant_id": self.participant_id,
            "session": self.session.value,
            "swing_index": self.swing_index,
            "impact_frame": self.impact_frame,
            "breakpoints": list(self.breakpoints),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TruthSwing":
        return cls(
            participant_id=str(d["participant_id"]),
            session=Session(d["session"]),
            swing_index=int(d["swing_index"]),
            impact_frame=int(d["impact_frame"]),
            breakpoints=tuple(int(b) for b in d["breakpoints"]),
        )


@dataclass
class SynthDataset:
    recordings: list[Recording]
    truth: list[TruthSwing]
    config: SynthConfig


def _idle_block(
    n: int, rest: np.ndarray, noise: float, rng: np.random.Generator
) -> np.ndarray:
    block = np.tile(rest, (n, 1))
    if noise > 0.0:
        block = block + rng.normal(0.0, noise, size=block.shape)
    return block


def _session_arrays(
    profile: SwingProfile,
    n_swings: int,
    config: SynthConfig,
    rng: np.random.Generator,
) -> tuple[np.ndarray, list[tuple[int, tuple[int, int, int, int]]]]:
    """Assemble idle / approach / swing blocks; returns angles and per-swing
    (offset, local breakpoints)."""
    rest = np.asarray(profile.rest_posture, dtype=float)
    blocks: list[np.ndarray] = []
    marks: list[tuple[int, tuple[int, int, int, int]]] = []
    offset = 0

    def idle_len() -> int:
        raw = rng.normal(config.idle_mean_frames, config.idle_jitter_frames)
        return max(int(round(raw)), config.idle_min_frames)

    for _ in range(n_swings):
        gap = _idle_block(idle_len(), rest, profile.noise, rng)
        blocks.append(gap)
        offset += len(gap)

        x, bkps = _swing_arrays(profile, rng)
        # ease from the ready posture into the first dwell and from the
        # final dwell back to it; neither movement is part of the swing,
        # so truth indices skip both
        ease = _eased_step(config.approach_frames)[:, None]
        approach = rest + (x[0] - rest) * ease
        if profile.noise > 0.0:
            approach = approach + rng.normal(0.0, profile.noise, size=approach.shape)
        blocks.append(approach)
        offset += len(approach)

        blocks.append(x)
        marks.append((offset, bkps))
        offset += len(x)

        ease = _eased_step(config.return_frames)[:, None]
        ret = x[-1] + (rest - x[-1]) * ease
        if profile.noise > 0.0:
            ret = ret + rng.normal(0.0, profile.noise, size=ret.shape)
        blocks.append(ret)
        offset += len(ret)

    blocks.append(_idle_block(idle_len(), rest, profile.noise, rng))
    return np.concatenate(blocks), marks


_SESSIONS = (Session.FOREHAND_10A, Session.FOREHAND_10B, Session.FOREHAND_20)


def generate_dataset(config: SynthConfig) -> SynthDataset:
    """Deterministically generate every participant's forehand sessions.

    Each participant consumes an independent child seed, so the output does
    not depend on generation order.
    """
    n_beginners = int(round(config.beginner_fraction * config.n_participants))
    width = max(2, len(str(config.n_participants)))
    children = np.random.SeedSequence(config.seed).spawn(config.n_participants)

    recordings: list[Recording] = []
    truth: list[TruthSwing] = []
    for i in range(config.n_participants):
        pid = f"p{i + 1:0{width}d}"
        skill = Skill.BEGINNER if i < n_beginners else Skill.INTERMEDIATE
        handed = (
            Handedness.LEFT
            if config.left_handed_every > 0 and (i + 1) % config.left_handed_every == 0
            else Handedness.RIGHT
        )
        profile = config.beginner if skill is Skill.BEGINNER else config.intermediate
        rng = np.random.default_rng(children[i])
        for session, n_swings in zip(_SESSIONS, config.session_plan):
            angles, marks = _session_arrays(profile, n_swings, config, rng)
            frames = tuple(
                ImuFrame(
                    t=k / config.sample_rate,
                    yaw=float(row[0]),
                    roll=float(row[1]),
                    pitch=float(row[2]),
                )
                for k, row in enumerate(angles)
            )
            recordings.append(
                Recording(
                    participant_id=pid,
                    skill=skill,
                    handedness=handed,
                    session=session,
                    frames=frames,
                )
            )
            for idx, (offset, bkps) in enumerate(marks):
                absolute = tuple(offset + b for b in bkps)
                truth.append(
                    TruthSwing(
                        participant_id=pid,
                        session=session,
                        swing_index=idx,
                        impact_frame=absolute[2],
                        breakpoints=absolute,
                    )
                )
    return SynthDataset(recordings=recordings, truth=truth, config=config)


def write_dataset(dataset: SynthDataset, out_dir: str | Path) -> Path:
    """Write CSVs, manifest.json, truth.json and config.json under out_dir."""
    from .ingest import DatasetManifest, ManifestEntry, frames_to_csv

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    entries = []
    for rec in dataset.recordings:
        name = f"{rec.participant_id}_{rec.session.value}.csv"
        (out / name).write_text(frames_to_csv(rec.frames))
        entries.append(
            ManifestEntry(
                participant_id=rec.participant_id,
                skill=rec.skill,
                handedness=rec.handedness,
                session=rec.session,
                csv_path=name,
            )
        )
    manifest = DatasetManifest(entries=tuple(entries))
    (out / "manifest.json").write_text(manifest.to_json())
    truth_rows = [t.to_dict() for t in dataset.truth]
    (out / "truth.json").write_text(json.dumps(truth_rows, indent=2) + "\n")
    (out / "config.json").write_text(json.dumps(dataset.config.to_dict(), indent=2) + "\n")
    return out


def load_truth(path: str | Path) -> list[TruthSwing]:
    data = json.loads(Path(path).read_text())
    return [TruthSwing.from_dict(d) for d in data]
