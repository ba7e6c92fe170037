"""Timeline of one multi-view frame.

Transmission: every sensor starts at t=0 and sends its slices back to back.
While k sensors transmit, sensor s moves 1/(k*C[s][n]) normalized units per
second to its current node n (airtime fairness).

Processing: a node starts a slice once its last bit arrives and shares its
rate 1/P[n] among active slices in proportion to their remaining load, so
all slices that are active together finish together.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Sequence

from .model import AllocationProfile, ScenarioConfig, validate_profile

EVENT_TOL = 1e-12


class InvalidProfile(ValueError):
    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(str(v) for v in self.violations))


@dataclass
class SliceRecord:
    sensor: int
    slice: int
    node: int
    width: float
    volume: float
    load: float
    t_b: float = 0.0
    t_r: float = 0.0
    t_c: float = 0.0


@dataclass
class FrameTimeline:
    profile: AllocationProfile
    slices: list[SliceRecord]
    # (t0, t1, ((sensor, node), ...)) with the set of transmitting sensors
    tx_segments: list[tuple[float, float, tuple[tuple[int, int], ...]]]
    exp_C: dict[tuple[int, int], float] = field(default_factory=dict)
    exp_P: dict[tuple[int, int], float] = field(default_factory=dict)
    node_T: dict[tuple[int, int], float] = field(default_factory=dict)
    sensor_T: list[float] = field(default_factory=list)
    T: float = 0.0

    def slices_of(self, s: int) -> list[SliceRecord]:
        return [r for r in self.slices if r.sensor == s]

    def slice_at(self, s: int, n: int) -> SliceRecord | None:
        for r in self.slices:
            if r.sensor == s and r.node == n:
                return r
        return None

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["sensor", "slice", "node", "t_b", "t_r", "t_c"])
        for r in self.slices:
            w.writerow([r.sensor, r.slice, r.node, repr(r.t_b), repr(r.t_r), repr(r.t_c)])
        return buf.getvalue()


def slice_volume(width: float, v: int, V: int, overlap: float) -> float:
    """Data sent for slice ``v`` of ``V``: overlap on each interior border."""
    if V == 1:
        return width
    if v == 0 or v == V - 1:
        return width + overlap
    return width + 2 * overlap


def _build_slices(profile, cfg, dists) -> list[list[SliceRecord]]:
    o, a = cfg.overlap, cfg.alpha_d
    out = []
    for s, alloc in enumerate(profile):
        d, x = alloc.assignment, alloc.cutpoints
        V = len(d)
        dist = dists[s]
        recs = []
        for v in range(V):
            y = x[v + 1] - x[v]
            xi = dist.count_between(x[v], x[v + 1]) if a else 0.0
            recs.append(SliceRecord(s, v, d[v], y, slice_volume(y, v, V, o), y + a * xi))
        out.append(recs)
    return out


def _transmit(per_sensor: list[list[SliceRecord]], C) -> list:
    idx = [0] * len(per_sensor)
    rem = [recs[0].volume if recs else 0.0 for recs in per_sensor]
    active = [s for s, recs in enumerate(per_sensor) if recs]
    segments = []
    t = 0.0
    while active:
        k = len(active)
        finish = {}
        for s in active:
            rec = per_sensor[s][idx[s]]
            finish[s] = rem[s] * k * C[s][rec.node]
        dt = min(finish.values())
        done = [s for s in active if finish[s] - dt <= EVENT_TOL]
        segments.append((t, t + dt, tuple((s, per_sensor[s][idx[s]].node) for s in active)))
        for s in active:
            if s not in done:
                rem[s] -= dt / (k * C[s][per_sensor[s][idx[s]].node])
        t += dt
        for s in done:
            rec = per_sensor[s][idx[s]]
            rec.t_r = t
            idx[s] += 1
            if idx[s] < len(per_sensor[s]):
                nxt = per_sensor[s][idx[s]]
                nxt.t_b = t
                rem[s] = nxt.volume
        active = [s for s in active if idx[s] < len(per_sensor[s])]
    return segments


def _process(records: list[SliceRecord], P: Sequence[float]):
    by_node: dict[int, list[SliceRecord]] = {}
    for r in records:
        by_node.setdefault(r.node, []).append(r)
    for n, recs in by_node.items():
        recs.sort(key=lambda r: (r.t_r, r.sensor, r.slice))
        Pn = P[n]
        active: list[SliceRecord] = []
        t_now = 0.0
        remaining = 0.0
        for r in recs:
            if active:
                end = t_now + Pn * remaining
                if end <= r.t_r + EVENT_TOL:
                    for a in active:
                        a.t_c = end
                    active = []
                    remaining = 0.0
                else:
                    remaining -= (r.t_r - t_now) / Pn
            active.append(r)
            remaining += r.load
            t_now = r.t_r
        end = t_now + Pn * remaining
        for a in active:
            a.t_c = end


def simulate_frame(profile: AllocationProfile, cfg: ScenarioConfig, dists,
                   check: bool = True) -> FrameTimeline:
    """Event-driven timeline of one multi-view frame.

    ``dists[s]`` is any object with ``count_between(a, b)`` (a
    FrameDistribution or a QuantileCDF); it is only consulted when
    ``cfg.alpha_d > 0``. ``check=False`` skips profile validation for
    callers that construct profiles themselves.
    """
    if check:
        bad = validate_profile(profile, cfg, require_pixels=False)
        if bad:
            raise InvalidProfile(bad)
    C, P = cfg.transmission_coeffs, cfg.processing_coeffs
    per_sensor = _build_slices(profile, cfg, dists)
    segments = _transmit(per_sensor, C)
    records = [r for recs in per_sensor for r in recs]
    _process(records, P)
    tl = FrameTimeline(profile, records, segments)
    tl.exp_C, tl.exp_P = experienced_coefficients(tl)
    tl.node_T, tl.sensor_T, tl.T = completion_times(tl, len(per_sensor))
    return tl


def experienced_coefficients(timeline: FrameTimeline):
    """Per (sensor, node) effective transmission and processing coefficients:
    elapsed time divided by transmitted volume or processed load."""
    exp_C, exp_P = {}, {}
    for r in timeline.slices:
        exp_C[(r.sensor, r.node)] = (r.t_r - r.t_b) / r.volume
        exp_P[(r.sensor, r.node)] = (r.t_c - r.t_r) / r.load
    return exp_C, exp_P


def completion_times(timeline: FrameTimeline, sensor_count: int | None = None):
    """``(T_sn, T_s, T)``: slice, sensor (max over nodes) and system (max over
    sensors) completion times."""
    if sensor_count is None:
        sensor_count = len(timeline.profile)
    node_T = {(r.sensor, r.node): r.t_c for r in timeline.slices}
    sensor_T = [0.0] * sensor_count
    for (s, _), t in node_T.items():
        sensor_T[s] = max(sensor_T[s], t)
    return node_T, sensor_T, max(sensor_T) if sensor_T else 0.0


def reconstruct_completion(timeline: FrameTimeline) -> dict[tuple[int, int], float]:
    """Slice completion times rebuilt from experienced coefficients: the
    transmission of every slice up to and including this one, each charged
    at its own experienced coefficient and actual volume, plus processing."""
    out = {}
    for s in sorted({r.sensor for r in timeline.slices}):
        elapsed = 0.0
        for r in timeline.slices_of(s):
            elapsed += timeline.exp_C[(s, r.node)] * r.volume
            out[(s, r.node)] = elapsed + timeline.exp_P[(s, r.node)] * r.load
    return out


def reconstruct_completion_literal(timeline: FrameTimeline, overlap: float) -> dict[tuple[int, int], float]:
    """The completion-time expression with only ``2o`` of the current slice's
    transmission charged (previous slices charged in full). Kept to measure
    how far that form is from the simulated times."""
    out = {}
    for s in sorted({r.sensor for r in timeline.slices}):
        recs = timeline.slices_of(s)
        first = recs[0]
        c1 = timeline.exp_C[(s, first.node)] * first.volume
        out[(s, first.node)] = c1 + timeline.exp_P[(s, first.node)] * first.load
        for v in range(1, len(recs)):
            r = recs[v]
            prev = sum(timeline.exp_C[(s, q.node)] * (q.width + 2 * overlap) for q in recs[1:v])
            out[(s, r.node)] = (c1 + timeline.exp_C[(s, r.node)] * 2 * overlap + prev
                                + timeline.exp_P[(s, r.node)] * r.load)
    return out
