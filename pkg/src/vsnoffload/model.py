"""Scenario construction: domain types, node placement, radio-derived
coefficients and interest-point distributions.

Node and sensor indices are 0-based throughout the package. Cutpoints are
normalized horizontal coordinates in [0, 1]; pixel positions are
``round(x * w)``.
"""
from __future__ import annotations

import bisect
import json
import math
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Sequence

import numpy as np

PIXEL_TOL = 1e-9
WIDTH_TOL = 1e-12

ALGORITHMS = ("mo-a", "mo-s", "tt-a", "tt-s")
REVISION_MODES = ("async", "sync", "sync_s")


class ConfigError(ValueError):
    pass


class InfeasibleLink(ValueError):
    pass


# --------------------------------------------------------------------------
# configuration


@dataclass(frozen=True)
class ScenarioConfig:
    """Static parameters of one experiment.

    ``transmission_coeffs[s][n]`` is the time sensor ``s`` needs to send a
    whole frame to node ``n`` with the channel to itself;
    ``processing_coeffs[n]`` is the time node ``n`` needs to process one
    normalized load unit.
    """

    transmission_coeffs: tuple[tuple[float, ...], ...]
    processing_coeffs: tuple[float, ...]
    overlap: float = 0.06
    frame_width: int = 720
    alpha_d: float = 0.00125
    frame_count: int = 500
    algorithm: str = "tt-a"
    revision: str | None = None
    inter_refresh: int = 16
    candidate_count: int = 1
    quantile_count: int = 8
    dictionary_size: int = 64
    rng_seed: int = 0

    def __post_init__(self):
        C = tuple(tuple(float(c) for c in row) for row in self.transmission_coeffs)
        P = tuple(float(p) for p in self.processing_coeffs)
        object.__setattr__(self, "transmission_coeffs", C)
        object.__setattr__(self, "processing_coeffs", P)
        if self.revision is None:
            object.__setattr__(self, "revision", default_revision(self.algorithm))
        self.validate()

    @property
    def sensor_count(self) -> int:
        return len(self.transmission_coeffs)

    @property
    def node_count(self) -> int:
        return len(self.processing_coeffs)

    @property
    def scenario(self) -> str:
        return self.algorithm.split("-")[0]

    def validate(self):
        C, P = self.transmission_coeffs, self.processing_coeffs
        if len(C) < 1 or len(P) < 1:
            raise ConfigError("need at least one sensor and one processing node")
        if any(len(row) != len(P) for row in C):
            raise ConfigError("transmission_coeffs must be S x N with N = len(processing_coeffs)")
        if not all(c > 0 and math.isfinite(c) for row in C for c in row):
            raise ConfigError("transmission coefficients must be positive and finite")
        if not all(p > 0 and math.isfinite(p) for p in P):
            raise ConfigError("processing coefficients must be positive and finite")
        if not 0 < self.overlap < 0.5:
            raise ConfigError(f"overlap must lie in (0, 1/2), got {self.overlap}")
        if self.frame_width < 2:
            raise ConfigError("frame_width must be at least 2 pixels")
        if self.alpha_d < 0:
            raise ConfigError("alpha_d must be non-negative")
        if self.inter_refresh < 1:
            raise ConfigError("inter_refresh must be >= 1")
        if self.candidate_count < 1:
            raise ConfigError("candidate_count must be >= 1")
        if self.quantile_count < 2:
            raise ConfigError("quantile_count must be >= 2")
        if self.dictionary_size < 1:
            raise ConfigError("dictionary_size must be >= 1")
        if self.frame_count < 1:
            raise ConfigError("frame_count must be >= 1")
        if self.algorithm not in ALGORITHMS:
            raise ConfigError(f"unknown algorithm {self.algorithm!r}; expected one of {ALGORITHMS}")
        if self.revision not in REVISION_MODES:
            raise ConfigError(f"unknown revision mode {self.revision!r}")

    def with_(self, **changes) -> "ScenarioConfig":
        return replace(self, **changes)

    def to_dict(self) -> dict:
        out = {}
        for f in fields(self):
            v = getattr(self, f.name)
            if f.name == "transmission_coeffs":
                v = [list(row) for row in v]
            elif f.name == "processing_coeffs":
                v = list(v)
            out[f.name] = v
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "ScenarioConfig":
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(f"unknown configuration keys: {', '.join(unknown)}")
        missing = [k for k in ("transmission_coeffs", "processing_coeffs") if k not in data]
        if missing:
            raise ConfigError(f"missing configuration keys: {', '.join(missing)}")
        try:
            return cls(**data)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc


def default_revision(algorithm: str) -> str:
    return "async" if algorithm.endswith("-a") else "sync_s"


# Keys accepted in a scenario file. Either give the coefficient matrices
# directly or a topology index (plus optional radio section) to derive them.
SCENARIO_FILE_KEYS = {
    "topology", "side_length", "radio",
    "transmission_coeffs", "processing_coeffs",
    "overlap", "frame_width", "alpha_d", "frame_count", "algorithm",
    "revision", "inter_refresh", "candidate_count", "quantile_count",
    "dictionary_size", "rng_seed",
}


def load_config(path: str | Path, **overrides) -> ScenarioConfig:
    """Read a JSON scenario file; unknown keys are rejected."""
    data = json.loads(Path(path).read_text())
    if not isinstance(data, dict):
        raise ConfigError("scenario file must contain a JSON object")
    data.update({k: v for k, v in overrides.items() if v is not None})
    return config_from_mapping(data)


def config_from_mapping(data: dict) -> ScenarioConfig:
    unknown = sorted(set(data) - SCENARIO_FILE_KEYS)
    if unknown:
        raise ConfigError(f"unknown configuration keys: {', '.join(unknown)}")
    data = dict(data)
    topo = data.pop("topology", None)
    side = data.pop("side_length", 100.0)
    radio_data = data.pop("radio", None) or {}
    if topo is not None and "transmission_coeffs" not in data:
        bad = sorted(set(radio_data) - {f.name for f in fields(RadioParams)})
        if bad:
            raise ConfigError(f"unknown radio keys: {', '.join(bad)}")
        C = channel_coefficients(build_topology(int(topo), side), RadioParams(**radio_data))
        data["transmission_coeffs"] = C.tolist()
        data.setdefault("processing_coeffs", processing_coefficients(C, C.shape[0]).tolist())
    return ScenarioConfig.from_dict(data)


def save_config(cfg: ScenarioConfig, path: str | Path):
    Path(path).write_text(json.dumps(cfg.to_dict(), indent=2) + "\n")


# --------------------------------------------------------------------------
# topologies and radio


@dataclass(frozen=True)
class Topology:
    sensor_positions: tuple[tuple[float, float], ...]
    node_positions: tuple[tuple[float, float], ...]

    def __post_init__(self):
        for p in self.sensor_positions + self.node_positions:
            if not all(math.isfinite(c) for c in p):
                raise ValueError("positions must be finite")

    def distances(self) -> np.ndarray:
        s = np.asarray(self.sensor_positions, dtype=float)
        n = np.asarray(self.node_positions, dtype=float)
        return np.linalg.norm(s[:, None, :] - n[None, :, :], axis=-1)


def build_topology(index: int, side_length: float = 100.0) -> Topology:
    """Sensors on the corners of a square, processing nodes on a second
    square that moves from the side midpoints (index 1) to a congruent
    square shifted by 3/4 of the side (index 5) in four equal steps of
    shift, rotation and growth."""
    if index not in (1, 2, 3, 4, 5):
        raise ValueError(f"topology index must be in 1..5, got {index}")
    if side_length <= 0:
        raise ValueError("side_length must be positive")
    a = float(side_length)
    sensors = ((0.0, 0.0), (a, 0.0), (a, a), (0.0, a))
    base = np.array([(a / 2, 0.0), (a, a / 2), (a / 2, a), (0.0, a / 2)])
    center = np.array([a / 2, a / 2])
    k = index - 1
    base_side = a / math.sqrt(2.0)
    # 18.75 m, -11.25 deg and 7.32 m per step at a = 100 m
    side = base_side + k * (a - base_side) / 4
    theta = math.radians(-11.25 * k)
    rot = np.array([[math.cos(theta), -math.sin(theta)], [math.sin(theta), math.cos(theta)]])
    rel = (base - center) * (side / base_side)
    nodes = rel @ rot.T + center + 0.1875 * a * k
    # the transform is exact in closed form; snap float noise to the grid
    nodes = np.where(np.abs(nodes - np.round(nodes)) < 1e-9, np.round(nodes), nodes)
    return Topology(sensors, tuple((float(x), float(y)) for x, y in nodes))


@dataclass(frozen=True)
class RadioParams:
    bandwidth: float = 20e6
    noise_power: float = -70.0
    carrier_frequency: float = 2.4e9
    tx_power: float = 10.0
    frame_bits: float = 720 * 480 * 8

    def __post_init__(self):
        if self.bandwidth <= 0:
            raise ValueError("bandwidth must be positive")
        if self.frame_bits <= 0:
            raise ValueError("frame_bits must be positive")


def free_space_path_loss_db(distance: np.ndarray | float, frequency: float) -> np.ndarray:
    # Friis with isotropic antennas, distance in m and frequency in Hz
    return 20 * np.log10(distance) + 20 * np.log10(frequency) - 147.55


def channel_coefficients(topology: Topology, radio: RadioParams = RadioParams()) -> np.ndarray:
    """Seconds needed to send one full frame over each sensor-node link.

    Raises InfeasibleLink for coincident positions or links whose Shannon
    capacity underflows to zero.
    """
    dist = topology.distances()
    if np.any(dist <= 0):
        s, n = np.argwhere(dist <= 0)[0]
        raise InfeasibleLink(f"sensor {s} and node {n} share a position")
    snr_db = radio.tx_power - free_space_path_loss_db(dist, radio.carrier_frequency) - radio.noise_power
    capacity = radio.bandwidth * np.log2(1 + 10 ** (snr_db / 10))
    if np.any(~(capacity > 0)) or not np.all(np.isfinite(capacity)):
        s, n = np.argwhere(~(capacity > 0) | ~np.isfinite(capacity))[0]
        raise InfeasibleLink(f"link sensor {s} -> node {n} has no capacity (SNR {snr_db[s, n]:.2f} dB)")
    return radio.frame_bits / capacity


def processing_coefficients(C, S: int) -> np.ndarray:
    """Identical per-unit processing time for every node: ``S * min(C)``."""
    C = np.asarray(C, dtype=float)
    if C.size == 0 or np.any(C <= 0):
        raise ValueError("C must be nonempty and positive")
    return np.full(C.shape[1], S * C.min())


def scenario_from_topology(index: int, radio: RadioParams = RadioParams(),
                           side_length: float = 100.0, **kwargs) -> ScenarioConfig:
    C = channel_coefficients(build_topology(index, side_length), radio)
    P = processing_coefficients(C, C.shape[0])
    return ScenarioConfig(transmission_coeffs=C.tolist(), processing_coeffs=P.tolist(), **kwargs)


# --------------------------------------------------------------------------
# interest point distributions


class FrameDistribution:
    """Interest points of one sensor frame as sorted normalized x-coordinates."""

    __slots__ = ("points", "_list", "_hash")

    def __init__(self, points: Sequence[float] | np.ndarray = ()):
        pts = np.sort(np.asarray(points, dtype=float).ravel())
        if pts.size and (pts[0] < 0 or pts[-1] > 1 or not np.all(np.isfinite(pts))):
            raise ValueError("interest point coordinates must lie in [0, 1]")
        pts.setflags(write=False)
        self.points = pts
        self._list = pts.tolist()
        self._hash = hash(tuple(self._list))

    @property
    def point_count(self) -> int:
        return len(self._list)

    @property
    def total(self) -> float:
        return float(len(self._list))

    def cdf(self, x: float) -> float:
        return float(bisect.bisect_right(self._list, x))

    def count_between(self, a: float, b: float) -> float:
        """Points in (a, b]; the first slice also owns a point at exactly 0."""
        lo = bisect.bisect_right(self._list, a) if a > 0 else 0
        return float(bisect.bisect_right(self._list, b) - lo)

    def __eq__(self, other):
        return isinstance(other, FrameDistribution) and self._list == other._list

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return f"FrameDistribution(n={self.point_count})"


def cdf_eval(dist: FrameDistribution, x: float) -> float:
    """Number of interest points at or left of ``x``."""
    return dist.cdf(x)


def quantile_vector(dist: FrameDistribution, Q: int, w: int) -> tuple[int, ...]:
    """Smallest pixel positions ``q(p)`` in ``0..w`` with ``F(q/w) >= p/Q * total``.

    An empty distribution yields all zeros.
    """
    if Q < 2:
        raise ValueError("Q must be >= 2")
    n = dist.point_count
    if n == 0:
        return (0,) * (Q - 1)
    pts = dist._list
    out = []
    for p in range(1, Q):
        # rank of the ceil(p*n/Q)-th point, computed without float error
        k = -(-p * n // Q)
        x = pts[k - 1]
        px = math.ceil(x * w - PIXEL_TOL)
        # a pixel below x can satisfy F(px/w) >= k only if it reaches x itself
        while px > 0 and bisect.bisect_right(pts, (px - 1) / w) >= k:
            px -= 1
        while bisect.bisect_right(pts, px / w) < k:
            px += 1
        out.append(min(px, w))
    return tuple(out)


class PiecewiseLinearCDF:
    """Cumulative interest-point count, linear between knots ``(kx, ky)``.

    Has the same counting interface as FrameDistribution, so the engine and
    the width solver accept either. Repeated ``kx`` values encode jumps.
    """

    __slots__ = ("kx", "ky", "total", "_hash")

    def __init__(self, kx: Sequence[float], ky: Sequence[float]):
        self.kx = [float(v) for v in kx]
        self.ky = [float(v) for v in ky]
        if len(self.kx) != len(self.ky) or len(self.kx) < 2:
            raise ValueError("need matching knot lists with at least two knots")
        if self.kx[0] != 0.0 or self.kx[-1] != 1.0:
            raise ValueError("knots must span [0, 1]")
        self.total = self.ky[-1]
        self._hash = hash((tuple(self.kx), tuple(self.ky)))

    @classmethod
    def from_slices(cls, cutpoints: Sequence[float], counts: Sequence[float]) -> "PiecewiseLinearCDF":
        """Counts known only per slice, spread evenly inside each slice."""
        ky = [0.0]
        for c in counts:
            ky.append(ky[-1] + c)
        return cls(cutpoints, ky)

    def cdf(self, x: float) -> float:
        kx, ky = self.kx, self.ky
        if x <= 0:
            return 0.0
        if x >= 1:
            return self.total
        j = bisect.bisect_right(kx, x)
        x0, x1 = kx[j - 1], kx[j]
        if x1 == x0:
            return ky[j]
        return ky[j - 1] + (ky[j] - ky[j - 1]) * (x - x0) / (x1 - x0)

    def count_between(self, a: float, b: float) -> float:
        return self.cdf(b) - self.cdf(a)

    def __eq__(self, other):
        return isinstance(other, PiecewiseLinearCDF) and self.kx == other.kx and self.ky == other.ky

    def __hash__(self):
        return self._hash


class QuantileCDF(PiecewiseLinearCDF):
    """Piecewise-linear CDF through the knots ``(q(p)/w, p/Q * total)``."""

    __slots__ = ()

    def __init__(self, quantiles: Sequence[int], w: int, total: float):
        Q = len(quantiles) + 1
        super().__init__([0.0] + [q / w for q in quantiles] + [1.0],
                         [0.0] + [total * p / Q for p in range(1, Q)] + [float(total)])

    @classmethod
    def from_distribution(cls, dist: "FrameDistribution", Q: int, w: int) -> "QuantileCDF":
        return cls(quantile_vector(dist, Q, w), w, dist.total)


def uniform_cdf(total: float) -> QuantileCDF:
    return QuantileCDF((), 1, total)


# --------------------------------------------------------------------------
# allocations


@dataclass(frozen=True)
class Allocation:
    assignment: tuple[int, ...]
    cutpoints: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "assignment", tuple(int(n) for n in self.assignment))
        object.__setattr__(self, "cutpoints", tuple(float(x) for x in self.cutpoints))

    @property
    def slice_count(self) -> int:
        return len(self.assignment)

    @property
    def widths(self) -> tuple[float, ...]:
        x = self.cutpoints
        return tuple(x[v + 1] - x[v] for v in range(len(x) - 1))

    def slice_of(self, node: int) -> int | None:
        """Inverse of the assignment: the slice index sent to ``node``."""
        try:
            return self.assignment.index(node)
        except ValueError:
            return None

    def pixels(self, w: int) -> tuple[int, ...]:
        return tuple(int(round(x * w)) for x in self.cutpoints)

    @classmethod
    def from_pixels(cls, assignment, pixels, w: int) -> "Allocation":
        return cls(tuple(assignment), tuple(p / w for p in pixels))

    @classmethod
    def single(cls, node: int) -> "Allocation":
        return cls((node,), (0.0, 1.0))


@dataclass(frozen=True)
class AllocationProfile:
    allocations: tuple[Allocation, ...]

    def __post_init__(self):
        object.__setattr__(self, "allocations", tuple(self.allocations))

    def __len__(self):
        return len(self.allocations)

    def __getitem__(self, s: int) -> Allocation:
        return self.allocations[s]

    def __iter__(self):
        return iter(self.allocations)

    def replace(self, s: int, alloc: Allocation) -> "AllocationProfile":
        allocs = list(self.allocations)
        allocs[s] = alloc
        return AllocationProfile(tuple(allocs))

    @property
    def assignments(self) -> tuple[tuple[int, ...], ...]:
        return tuple(a.assignment for a in self.allocations)

    def key(self, w: int):
        """Hashable pixel-level identity of the profile."""
        return tuple((a.assignment, a.pixels(w)) for a in self.allocations)


@dataclass(frozen=True)
class Violation:
    sensor: int
    slice: int | None
    kind: str
    detail: str = ""

    def __str__(self):
        where = f"sensor {self.sensor}" + (f", slice {self.slice}" if self.slice is not None else "")
        return f"{self.kind} ({where}){': ' + self.detail if self.detail else ''}"


def validate_profile(profile: AllocationProfile, cfg: ScenarioConfig,
                     require_pixels: bool = True) -> list[Violation]:
    """Check the structural constraints on every allocation.

    Returns an empty list when the profile is valid.
    """
    out: list[Violation] = []
    S, N, o, w = cfg.sensor_count, cfg.node_count, cfg.overlap, cfg.frame_width
    if len(profile) != S:
        out.append(Violation(-1, None, "sensor-count", f"{len(profile)} allocations for {S} sensors"))
    for s, alloc in enumerate(profile):
        d, x = alloc.assignment, alloc.cutpoints
        if not d:
            out.append(Violation(s, None, "empty-assignment"))
            continue
        if len(set(d)) != len(d):
            out.append(Violation(s, None, "distinctness", f"assignment {d} repeats a node"))
        for v, n in enumerate(d):
            if not 0 <= n < N:
                out.append(Violation(s, v, "node-range", f"node {n} not in 0..{N - 1}"))
        if len(d) > N:
            out.append(Violation(s, None, "slice-count", f"{len(d)} slices for {N} nodes"))
        if len(x) != len(d) + 1:
            out.append(Violation(s, None, "cutpoint-count", f"{len(x)} cutpoints for {len(d)} slices"))
            continue
        if abs(x[0]) > WIDTH_TOL or abs(x[-1] - 1) > WIDTH_TOL:
            out.append(Violation(s, None, "normalization", f"cutpoints must run from 0 to 1, got {x[0]}..{x[-1]}"))
        for v in range(len(d)):
            y = x[v + 1] - x[v]
            if y < o - WIDTH_TOL:
                out.append(Violation(s, v, "width", f"width {y:.6g} below overlap {o}"))
        if require_pixels:
            for v, xv in enumerate(x):
                if abs(xv * w - round(xv * w)) > PIXEL_TOL * w:
                    out.append(Violation(s, v, "pixel", f"cutpoint {xv} is not on the {w}-pixel grid"))
    return out


def round_to_pixels(cutpoints: Sequence[float], w: int, overlap: float) -> tuple[float, ...]:
    """Snap interior cutpoints to the nearest pixel, then push cutpoints away
    from any slice narrower than the overlap (toward the wider neighbour).

    Raises ValueError when the slices cannot all be ``overlap`` wide.
    """
    V = len(cutpoints) - 1
    min_px = math.ceil(overlap * w - PIXEL_TOL)
    if V * min_px > w:
        raise ValueError(f"{V} slices of at least {min_px} px do not fit in {w} px")
    px = [0] + [int(round(x * w)) for x in cutpoints[1:-1]] + [w]
    for v in range(1, V):
        px[v] = max(px[v], px[v - 1] + min_px)
    for v in range(V - 1, 0, -1):
        px[v] = min(px[v], px[v + 1] - min_px)
    return tuple(p / w for p in px)
