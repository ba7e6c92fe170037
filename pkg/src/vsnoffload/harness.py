"""Interest-point traces, synthetic workloads, experiment runs and their
CSV output."""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .coordinator import ProfileDictionary, coordinated_run
from .dynamics import RunState, run_distributed
from .model import FrameDistribution, ScenarioConfig

TRACE_HEADER = ("frame", "sensor", "x_norm")
CDF_POINTS = 100


class TraceError(ValueError):
    pass


@dataclass(frozen=True)
class TraceSet:
    """``frames[i][s]`` is the distribution of sensor ``s`` in frame ``i``."""

    frames: tuple[tuple[FrameDistribution, ...], ...]

    def __post_init__(self):
        frames = tuple(tuple(f) for f in self.frames)
        if frames and len({len(f) for f in frames}) != 1:
            raise TraceError("every frame must carry the same sensors")
        object.__setattr__(self, "frames", frames)

    @property
    def frame_count(self) -> int:
        return len(self.frames)

    @property
    def sensor_count(self) -> int:
        return len(self.frames[0]) if self.frames else 0

    def __len__(self):
        return len(self.frames)

    def __getitem__(self, i):
        return self.frames[i]

    def head(self, n: int) -> "TraceSet":
        return TraceSet(self.frames[:n])


def load_trace(path: str | Path) -> TraceSet:
    """Read a ``frame,sensor,x_norm`` CSV, one row per interest point.

    A row with an empty ``x_norm`` marks a sensor frame without interest
    points. Frame and sensor ids may be any integers; they are ordered and
    renumbered from 0. Every frame must list every sensor.
    """
    points: dict[int, dict[int, list[float]]] = {}
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise TraceError(f"{path}: no frames")
        if tuple(h.strip() for h in header) != TRACE_HEADER:
            raise TraceError(f"{path}:1: expected header {','.join(TRACE_HEADER)}")
        for row in reader:
            lineno = reader.line_num
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != 3:
                raise TraceError(f"{path}:{lineno}: expected 3 fields, got {len(row)}")
            try:
                f, s = int(row[0]), int(row[1])
                x = float(row[2]) if row[2].strip() else None
            except ValueError:
                raise TraceError(f"{path}:{lineno}: malformed row {row!r}") from None
            if x is not None and not (0.0 <= x <= 1.0):
                raise TraceError(f"{path}:{lineno}: x_norm {x} outside [0, 1]")
            pts = points.setdefault(f, {}).setdefault(s, [])
            if x is not None:
                pts.append(x)
    if not points:
        raise TraceError(f"{path}: no frames")
    sensors = sorted({s for per in points.values() for s in per})
    frames = []
    for f in sorted(points):
        missing = [s for s in sensors if s not in points[f]]
        if missing:
            raise TraceError(f"{path}: frame {f} has no rows for sensors {missing}")
        frames.append(tuple(FrameDistribution(points[f][s]) for s in sensors))
    return TraceSet(tuple(frames))


def save_trace(trace: TraceSet, path: str | Path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TRACE_HEADER)
        for i, frame in enumerate(trace.frames):
            for s, dist in enumerate(frame):
                if dist.point_count == 0:
                    w.writerow([i, s, ""])
                for x in dist.points.tolist():
                    w.writerow([i, s, repr(x)])


def exact_uniform(points: int) -> FrameDistribution:
    """Points at the centres of ``points`` equal cells."""
    return FrameDistribution([(k - 0.5) / points for k in range(1, points + 1)])


def synth_uniform(frames: int, S: int, points: int = 400, seed: int = 0, exact: bool = False) -> TraceSet:
    """Uniform interest points per sensor frame; ``exact`` places them on a
    lattice instead of drawing them (every frame then identical)."""
    if points < 1:
        raise ValueError("points must be >= 1")
    if exact:
        d = exact_uniform(points)
        return TraceSet(tuple((d,) * S for _ in range(frames)))
    rng = np.random.default_rng(seed)
    draws = rng.random((frames, S, points))
    return TraceSet(tuple(tuple(FrameDistribution(draws[i, s]) for s in range(S)) for i in range(frames)))


def synth_drifting(frames: int, S: int, points: int = 400, seed: int = 0, spread: float = 0.15,
                   period: int = 40) -> TraceSet:
    """Clustered interest points whose centre wanders across the frame, a
    stand-in for camera footage with moving objects."""
    rng = np.random.default_rng(seed)
    phase = rng.random(S) * 2 * math.pi
    out = []
    for i in range(frames):
        frame = []
        for s in range(S):
            centre = 0.5 + 0.3 * math.sin(2 * math.pi * i / period + phase[s])
            pts = np.clip(rng.normal(centre, spread, points), 0.0, 1.0)
            frame.append(FrameDistribution(pts))
        out.append(tuple(frame))
    return TraceSet(tuple(out))


# --------------------------------------------------------------------------
# experiments


@dataclass(frozen=True)
class ResultRow:
    frame: int
    system_T: float
    sensor_T: tuple[float, ...]
    reviser: str
    state: str
    algorithm: str = ""
    topology: int | None = None


@dataclass
class ExperimentResult:
    rows: list[ResultRow]
    state: RunState
    dictionary: ProfileDictionary | None = None


def run_experiment(cfg: ScenarioConfig, trace: TraceSet, coordination: int | None = None,
                   algorithm: str | None = None, frames: int | None = None,
                   L: int | None = None, M: int | None = None,
                   dictionary: ProfileDictionary | None = None,
                   topology: int | None = None) -> ExperimentResult:
    """Run ``algorithm`` over ``trace``; with ``coordination=R`` a
    coordinator installs a dictionary profile every R frames."""
    algorithm = algorithm or cfg.algorithm
    frames = min(cfg.frame_count if frames is None else frames, trace.frame_count)
    if trace.sensor_count != cfg.sensor_count:
        raise ValueError(f"trace has {trace.sensor_count} sensors, scenario has {cfg.sensor_count}")
    if frames < 1:
        raise ValueError("need at least one frame")
    frame_dists = trace.frames[:frames]
    if coordination is None:
        state = run_distributed(cfg, frame_dists, algorithm)
        dictionary = None
    else:
        state, dictionary = coordinated_run(cfg, frame_dists, algorithm, R=coordination, L=L, M=M,
                                            dictionary=dictionary)
    rows = [ResultRow(i, state.system_T[i], tuple(state.sensor_T[i]), state.reviser[i], str(state.states[i]),
                      state.algorithm, topology)
            for i in range(len(state.system_T))]
    return ExperimentResult(rows, state, dictionary)


@dataclass(frozen=True)
class Summary:
    frames: int
    mean: float
    min: float
    max: float
    p95: float
    # (probability, completion time) at CDF_POINTS evenly spaced probabilities
    cdf: tuple[tuple[float, float], ...]
    converged_at: int | None

    @property
    def tail_ratio(self) -> float:
        return self.p95 / self.mean


def summarize(rows: Sequence[ResultRow]) -> Summary:
    if not rows:
        raise ValueError("no rows to summarize")
    T = np.array([r.system_T for r in rows], dtype=float)
    probs = np.arange(1, CDF_POINTS + 1) / CDF_POINTS
    qs = np.quantile(T, probs, method="inverted_cdf")
    conv = next((r.frame for r in rows if r.state == "converged"), None)
    return Summary(len(rows), float(T.mean()), float(T.min()), float(T.max()),
                   float(np.quantile(T, 0.95, method="inverted_cdf")),
                   tuple((float(p), float(q)) for p, q in zip(probs, qs)), conv)


def results_csv(rows: Sequence[ResultRow]) -> str:
    S = len(rows[0].sensor_T) if rows else 0
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["frame", "system_t"] + [f"t_s{s + 1}" for s in range(S)] + ["reviser", "state"])
    for r in rows:
        w.writerow([r.frame, repr(r.system_T)] + [repr(t) for t in r.sensor_T] + [r.reviser, r.state])
    return buf.getvalue()


def write_results(rows: Sequence[ResultRow], path: str | Path):
    Path(path).write_text(results_csv(rows))


def cdf_csv(summary: Summary) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["probability", "system_t"])
    for p, t in summary.cdf:
        w.writerow([repr(p), repr(t)])
    return buf.getvalue()
