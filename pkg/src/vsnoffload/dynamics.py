"""Distributed allocation: what each sensor knows, how it best-responds,
and when it may revise.

Two information models are supported. Under measurement-only (``mo``) a
sensor sees nothing but the experienced coefficients of its own slices.
Under transmission-time signaling (``tt``) every processing node broadcasts
its processing coefficient together with the transmission interval, width
and interest-point count of every slice it received, from which a sensor
recovers the intrinsic link coefficients of everybody and can replay the
next frame with the engine.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Sequence

from .engine import FrameTimeline, simulate_frame, slice_volume
from .model import (Allocation, AllocationProfile, FrameDistribution, PiecewiseLinearCDF,
                    QuantileCDF, ScenarioConfig, round_to_pixels)
from .solver import (InfeasibleAllocation, PredictedCoefficients, best_single_sensor_allocation,
                     enumerate_assignments, optimal_widths_general, predicted_completion)

log = logging.getLogger(__name__)

MO, TT = "mo", "tt"
# a sensor only moves if it gains more than this fraction of its completion time
IMPROVE_RTOL = 1e-6
# local pixel search is run from the best seeds of this many assignments
REFINE_TOP = 3
REFINE_STEPS = (64, 32, 16, 8, 4, 2, 1)


# --------------------------------------------------------------------------
# bootstrap


def bootstrap_cutpoints(N: int, overlap: float) -> tuple[float, ...]:
    """Equal widths ``max(o, 1/N)``, renormalized to sum to one."""
    y = max(overlap, 1.0 / N)
    widths = [y] * N
    total = sum(widths)
    x = [0.0]
    for v in range(N - 1):
        x.append(x[-1] + widths[v] / total)
    x.append(1.0)
    return tuple(x)


def bootstrap_profile(cfg: ScenarioConfig) -> AllocationProfile:
    """Every sensor splits its frame evenly over the nodes in index order.

    If ``N`` slices of width ``o`` do not fit, only the first ``floor(1/o)``
    nodes are used.
    """
    N, o, w = cfg.node_count, cfg.overlap, cfg.frame_width
    V = min(N, max(1, math.floor(1.0 / o + 1e-12)))
    x = round_to_pixels(bootstrap_cutpoints(V, o), w, o)
    alloc = Allocation(tuple(range(V)), x)
    return AllocationProfile((alloc,) * cfg.sensor_count)


# --------------------------------------------------------------------------
# knowledge


@dataclass(frozen=True)
class BroadcastRecord:
    node: int
    sensor: int
    slice: int
    slice_count: int
    t_b: float
    t_r: float
    width: float
    interest_count: float
    processing_coeff: float


def node_broadcast(timeline: FrameTimeline, cfg: ScenarioConfig, dists) -> list[BroadcastRecord]:
    """What the processing nodes announce after a frame."""
    out = []
    profile = timeline.profile
    for r in timeline.slices:
        x = profile[r.sensor].cutpoints
        xi = dists[r.sensor].count_between(x[r.slice], x[r.slice + 1])
        out.append(BroadcastRecord(r.node, r.sensor, r.slice, profile[r.sensor].slice_count,
                                   r.t_b, r.t_r, r.width, xi, cfg.processing_coeffs[r.node]))
    return out


def recover_transmission_coeffs(records: Sequence[BroadcastRecord], overlap: float) -> dict[tuple[int, int], float]:
    """Intrinsic ``C[s][n]`` of every announced slice.

    The number of concurrent transmitters is piecewise constant between the
    announced interval endpoints, so the airtime a slice received is
    ``integral dt / k(t)`` over its interval, and ``C = airtime / volume``.
    """
    cuts = sorted({t for r in records for t in (r.t_b, r.t_r)})
    k_of = []
    for a, b in zip(cuts, cuts[1:]):
        mid = 0.5 * (a + b)
        k = len({r.sensor for r in records if r.t_b <= mid < r.t_r})
        k_of.append((a, b, k))
    out = {}
    for r in records:
        airtime = 0.0
        for a, b, k in k_of:
            lo, hi = max(a, r.t_b), min(b, r.t_r)
            if hi > lo and k:
                airtime += (hi - lo) / k
        vol = slice_volume(r.width, r.slice, r.slice_count, overlap)
        out[(r.sensor, r.node)] = airtime / vol
    return out


@dataclass(frozen=True)
class SensorKnowledge:
    """Information a sensor holds before planning its next frame.

    ``C`` and ``P`` map node -> experienced coefficient (measurement-only)
    or intrinsic coefficient (signaling). The signaling fields describe the
    other sensors as announced for the last frame.
    """

    sensor: int
    scenario: str
    C: dict = field(default_factory=dict)
    P: dict = field(default_factory=dict)
    predicted: FrameDistribution | None = None
    # signaling only
    C_matrix: dict = field(default_factory=dict)
    last_profile: AllocationProfile | None = None
    slice_counts: tuple = ()
    other_loads: dict = field(default_factory=dict)
    kappa: int = 1


def mo_update_knowledge(knowledge: SensorKnowledge | None, timeline: FrameTimeline, s: int,
                        dist: FrameDistribution | None = None) -> SensorKnowledge:
    """Store the experienced coefficients of the nodes ``s`` used; nodes it
    did not use keep their previous values."""
    C = dict(knowledge.C) if knowledge else {}
    P = dict(knowledge.P) if knowledge else {}
    for r in timeline.slices_of(s):
        C[r.node] = timeline.exp_C[(s, r.node)]
        P[r.node] = timeline.exp_P[(s, r.node)]
    return SensorKnowledge(s, MO, C, P, predicted=dist)


def tt_update_knowledge(knowledge: SensorKnowledge | None, records: Sequence[BroadcastRecord], s: int,
                        profile: AllocationProfile, overlap: float,
                        dist: FrameDistribution | None = None, alpha_d: float = 0.0) -> SensorKnowledge:
    """Fold one frame's broadcast into the signaling knowledge of ``s``.

    Link coefficients are static, so the first recovered value of each link
    is kept.
    """
    C_matrix = dict(knowledge.C_matrix) if knowledge else {}
    for key, c in recover_transmission_coeffs(records, overlap).items():
        C_matrix.setdefault(key, c)
    P = dict(knowledge.P) if knowledge else {}
    for r in records:
        P[r.node] = r.processing_coeff
    S = len(profile)
    counts = [[0.0] * profile[q].slice_count for q in range(S)]
    other_loads: dict[int, float] = {}
    for r in records:
        counts[r.sensor][r.slice] = r.interest_count
    slice_counts = tuple(PiecewiseLinearCDF.from_slices(profile[q].cutpoints, counts[q]) for q in range(S))
    own_end = max((r.t_r for r in records if r.sensor == s), default=0.0)
    kappa = len({r.sensor for r in records if r.t_b < own_end})
    C = {n: c for (q, n), c in C_matrix.items() if q == s}
    for r in records:
        if r.sensor != s:
            other_loads[r.node] = other_loads.get(r.node, 0.0) + r.width + alpha_d * r.interest_count
    return SensorKnowledge(s, TT, C, P, predicted=dist, C_matrix=C_matrix, last_profile=profile,
                           slice_counts=slice_counts, other_loads=other_loads, kappa=max(kappa, 1))


# --------------------------------------------------------------------------
# best responses


def _predicted_cdf(dist: FrameDistribution | None, cfg: ScenarioConfig):
    if dist is None or not cfg.alpha_d:
        return None
    return QuantileCDF.from_distribution(dist, cfg.quantile_count, cfg.frame_width)


def _allowed(assignments, nodes_known: set[int], N: int):
    if assignments is None:
        assignments = enumerate_assignments(N)
    return [d for d in assignments if set(d) <= nodes_known]


def mo_best_response(knowledge: SensorKnowledge, cfg: ScenarioConfig, assignments=None) -> Allocation | None:
    """Best single-sensor plan with the last experienced coefficients as
    predictions, rounded to pixels. Returns None if nothing is feasible
    within ``assignments``."""
    N = cfg.node_count
    known = set(knowledge.C)
    if not known:
        return None
    fill = max(max(knowledge.C.values()), max(knowledge.P.values()))
    pred = PredictedCoefficients(tuple(knowledge.C.get(n, fill) for n in range(N)),
                                 tuple(knowledge.P.get(n, fill) for n in range(N)),
                                 cfg.overlap, cfg.alpha_d, _predicted_cdf(knowledge.predicted, cfg))
    allowed = _allowed(assignments, known, N)
    try:
        plan = best_single_sensor_allocation(pred, "general", allowed)
        x = round_to_pixels(plan.cutpoints, cfg.frame_width, cfg.overlap)
    except (InfeasibleAllocation, ValueError):
        return None
    return Allocation(plan.assignment, x)


def mo_predicted_completion(knowledge: SensorKnowledge, alloc: Allocation, cfg: ScenarioConfig) -> float:
    N = cfg.node_count
    fill = max(max(knowledge.C.values()), max(knowledge.P.values()))
    pred = PredictedCoefficients(tuple(knowledge.C.get(n, fill) for n in range(N)),
                                 tuple(knowledge.P.get(n, fill) for n in range(N)),
                                 cfg.overlap, cfg.alpha_d, _predicted_cdf(knowledge.predicted, cfg))
    return predicted_completion(alloc.assignment, alloc.cutpoints, pred)


def lex_better(a: Sequence[float], b: Sequence[float], rtol: float) -> bool:
    """``a`` lexicographically smaller than ``b``, entries closer than
    ``rtol * b[0]`` counted as equal."""
    tol = rtol * abs(b[0])
    for ai, bi in zip(a, b):
        if ai < bi - tol:
            return True
        if ai > bi + tol:
            return False
    return False


class ReplayEvaluator:
    """Engine replay of the next frame with one sensor's allocation varied
    and every other sensor held at its last allocation."""

    def __init__(self, s: int, profile: AllocationProfile, cfg: ScenarioConfig, dists,
                 objective: str = "sensor"):
        if objective not in ("sensor", "system"):
            raise ValueError(f"unknown objective {objective!r}")
        self.s, self.profile, self.cfg, self.dists, self.objective = s, profile, cfg, dists, objective
        self.calls = 0
        self._memo = {}

    def key(self, alloc: Allocation) -> tuple[float, ...]:
        memo_key = (alloc.assignment, alloc.cutpoints)
        hit = self._memo.get(memo_key)
        if hit is not None:
            return hit
        self.calls += 1
        tl = simulate_frame(self.profile.replace(self.s, alloc), self.cfg, self.dists, check=False)
        if self.objective == "sensor":
            k = (tl.sensor_T[self.s],)
        else:
            k = tuple(sorted(tl.sensor_T, reverse=True))
        self._memo[memo_key] = k
        return k


def refine_pixels(alloc: Allocation, evaluator: ReplayEvaluator, w: int, overlap: float,
                  steps: Sequence[int] = REFINE_STEPS) -> tuple[Allocation, tuple]:
    """Coordinate descent over interior cutpoints in pixel steps."""
    min_px = math.ceil(overlap * w - 1e-9)
    d = alloc.assignment
    px = list(alloc.pixels(w))
    best = evaluator.key(alloc)
    V = len(d)
    for step in steps:
        moved = True
        rounds = 0
        while moved and rounds < 4 * w:
            moved = False
            rounds += 1
            for j in range(1, V):
                for sgn in (1, -1):
                    q = px[j] + sgn * step
                    if q - px[j - 1] < min_px or px[j + 1] - q < min_px:
                        continue
                    cand = px[:j] + [q] + px[j + 1:]
                    k = evaluator.key(Allocation.from_pixels(d, cand, w))
                    if lex_better(k, best, 1e-12):
                        px, best, moved = cand, k, True
                        break
    return Allocation.from_pixels(d, px, w), best


def replay_best_response(s: int, profile: AllocationProfile, cfg_eval: ScenarioConfig, dists,
                         seed_pred: PredictedCoefficients, objective: str = "sensor",
                         assignments=None, improve_rtol: float = IMPROVE_RTOL) -> Allocation:
    """Best allocation of sensor ``s`` against the others' fixed allocations.

    Seeds come from the equal-finish solver under ``seed_pred``; the best
    seeds are polished by pixel search; every candidate is scored by engine
    replay. The current allocation is kept unless beaten by more than
    ``improve_rtol`` of its value.
    """
    w, o = cfg_eval.frame_width, cfg_eval.overlap
    current = profile[s]
    if assignments is None:
        assignments = enumerate_assignments(cfg_eval.node_count)
    ev = ReplayEvaluator(s, profile, cfg_eval, dists, objective)
    seeds = {}
    for d in assignments:
        try:
            x = round_to_pixels(optimal_widths_general(d, seed_pred), w, o)
        except (InfeasibleAllocation, ValueError):
            continue
        seeds[(tuple(d), x)] = Allocation(d, x)
    allowed = {tuple(d) for d in assignments}
    if current.assignment in allowed:
        seeds[(current.assignment, current.cutpoints)] = current
    if not seeds:
        return current
    scored = sorted(seeds.values(), key=lambda a: (ev.key(a), a.assignment, a.pixels(w)))
    chosen, seen = [], set()
    for a in scored:
        if a.assignment not in seen:
            seen.add(a.assignment)
            chosen.append(a)
        if len(chosen) == REFINE_TOP:
            break
    if current.assignment in allowed and current.assignment not in seen:
        chosen.append(current)
    best, best_key = None, None
    for a in chosen:
        ref, k = refine_pixels(a, ev, w, o)
        if best is None or lex_better(k, best_key, 1e-12):
            best, best_key = ref, k
    if current.assignment in allowed:
        if not lex_better(best_key, ev.key(current), improve_rtol):
            return current
    return best


def tt_eval_setup(knowledge: SensorKnowledge, profile: AllocationProfile, cfg: ScenarioConfig):
    """Scenario and per-sensor load models a signaling sensor replays with."""
    S, N = cfg.sensor_count, cfg.node_count
    C = [[knowledge.C_matrix.get((q, n), 1.0) for n in range(N)] for q in range(S)]
    P = [knowledge.P.get(n, cfg.processing_coeffs[n]) for n in range(N)]
    cfg_eval = cfg.with_(transmission_coeffs=C, processing_coeffs=P)
    dists = list(knowledge.slice_counts) if knowledge.slice_counts else [FrameDistribution()] * S
    if knowledge.predicted is not None:
        dists[knowledge.sensor] = knowledge.predicted
    return cfg_eval, dists


def tt_seed_coefficients(knowledge: SensorKnowledge, cfg_eval: ScenarioConfig) -> PredictedCoefficients:
    """Contention-adjusted single-sensor coefficients for seeding: links
    slowed by the number of concurrent transmitters, nodes slowed by the
    load the others put on them."""
    s = knowledge.sensor
    N = cfg_eval.node_count
    C = tuple(knowledge.kappa * cfg_eval.transmission_coeffs[s][n] for n in range(N))
    P = tuple(cfg_eval.processing_coeffs[n] * (1.0 + knowledge.other_loads.get(n, 0.0)) for n in range(N))
    return PredictedCoefficients(C, P, cfg_eval.overlap, cfg_eval.alpha_d,
                                 _predicted_cdf(knowledge.predicted, cfg_eval))


def contention_seed(s: int, profile: AllocationProfile, cfg: ScenarioConfig, dists) -> PredictedCoefficients:
    """Seed coefficients for ``s`` computed directly from a known profile:
    every sensor transmitting concurrently, node loads of the others as
    placed in ``profile``."""
    N, S = cfg.node_count, cfg.sensor_count
    loads = [0.0] * N
    for q, alloc in enumerate(profile):
        if q == s:
            continue
        x = alloc.cutpoints
        for v, n in enumerate(alloc.assignment):
            xi = dists[q].count_between(x[v], x[v + 1]) if cfg.alpha_d else 0.0
            loads[n] += x[v + 1] - x[v] + cfg.alpha_d * xi
    own = dists[s] if isinstance(dists[s], FrameDistribution) else None
    return PredictedCoefficients(tuple(S * c for c in cfg.transmission_coeffs[s]),
                                 tuple(p * (1.0 + l) for p, l in zip(cfg.processing_coeffs, loads)),
                                 cfg.overlap, cfg.alpha_d, _predicted_cdf(own, cfg))


def tt_best_response(s: int, profile: AllocationProfile, knowledge: SensorKnowledge, cfg: ScenarioConfig,
                     assignments=None, objective: str = "sensor") -> Allocation:
    """Signaling best response of ``s`` given the others' last allocations."""
    cfg_eval, dists = tt_eval_setup(knowledge, profile, cfg)
    seed = tt_seed_coefficients(knowledge, cfg_eval)
    return replay_best_response(s, profile, cfg_eval, dists, seed, objective, assignments)


# --------------------------------------------------------------------------
# revision


def revisers(mode: str, frame: int, S: int) -> list[int]:
    """Sensors allowed to revise at ``frame``: round robin ``frame mod S``
    when asynchronous, everybody otherwise."""
    if mode == "async":
        return [frame % S]
    if mode in ("sync", "sync_s"):
        return list(range(S))
    raise ValueError(f"unknown revision mode {mode!r}")


def apply_revision(mode: str, frame: int, proposals: dict[int, Allocation | None],
                   previous: AllocationProfile, cfg: ScenarioConfig) -> AllocationProfile:
    """Next profile from the revising sensors' proposals.

    ``sync_s`` moves a sensor that keeps its assignment only ``1/S`` of the
    way to its proposal; a changed assignment is adopted as proposed.
    """
    S = len(previous)
    allocs = list(previous)
    for s in revisers(mode, frame, S):
        prop = proposals.get(s)
        if prop is None:
            continue
        prev = previous[s]
        if mode == "sync_s" and prop.assignment == prev.assignment:
            x = tuple(xn / S + (S - 1) * xp / S for xn, xp in zip(prop.cutpoints, prev.cutpoints))
            prop = Allocation(prop.assignment, round_to_pixels(x, cfg.frame_width, cfg.overlap))
        allocs[s] = prop
    return AllocationProfile(tuple(allocs))


# --------------------------------------------------------------------------
# equilibrium detection


class EquilibriumState(NamedTuple):
    kind: str  # "converged" | "cycle" | "transient"
    period: int = 0

    def __str__(self):
        return f"cycle({self.period})" if self.kind == "cycle" else self.kind


def _close(a: AllocationProfile, b: AllocationProfile, w: int, tol: float) -> bool:
    for x, y in zip(a, b):
        if x.assignment != y.assignment:
            return False
        if any(abs(p - q) > tol for p, q in zip(x.pixels(w), y.pixels(w))):
            return False
    return True


def detect_equilibrium(history: Sequence[AllocationProfile], window: int, w: int,
                       tol: float = 1.0) -> EquilibriumState:
    """Classify the tail of a profile history.

    ``converged``: the last ``window`` profiles all lie within ``tol`` pixels
    of the final one. ``cycle(p)``: over the last ``window`` profiles every
    profile matches the one ``p`` frames earlier, for the smallest such
    ``2 <= p <= window // 2``.
    """
    if len(history) < window or window < 1:
        return EquilibriumState("transient")
    tail = history[-window:]
    last = tail[-1]
    if all(_close(p, last, w, tol) for p in tail):
        return EquilibriumState("converged", 1)
    for p in range(2, window // 2 + 1):
        if all(_close(tail[t], tail[t - p], w, tol) for t in range(p, window)):
            return EquilibriumState("cycle", p)
    return EquilibriumState("transient")


def default_window(S: int) -> int:
    return 3 * S


def certify_tt(profile: AllocationProfile, cfg: ScenarioConfig, dists, objective: str = "sensor",
               rtol: float = IMPROVE_RTOL) -> list[tuple[int, Allocation, float, float]]:
    """Unilateral deviations that lower a sensor's engine-evaluated
    completion time by more than ``rtol * T`` (empty list: equilibrium)."""
    out = []
    base = simulate_frame(profile, cfg, dists)
    for s in range(cfg.sensor_count):
        seed = contention_seed(s, profile, cfg, dists)
        alt = replay_best_response(s, profile, cfg, dists, seed, objective, improve_rtol=rtol)
        if alt != profile[s]:
            new = simulate_frame(profile.replace(s, alt), cfg, dists)
            if new.sensor_T[s] < base.sensor_T[s] - rtol * base.T:
                out.append((s, alt, base.sensor_T[s], new.sensor_T[s]))
    return out


def certify_mo(profile: AllocationProfile, knowledge: Sequence[SensorKnowledge], cfg: ScenarioConfig,
               rtol: float = IMPROVE_RTOL) -> list[tuple[int, Allocation, float, float]]:
    """Deviations that lower a sensor's own predicted completion time, as
    computed from its measurements, by more than ``rtol``."""
    out = []
    for s, k in enumerate(knowledge):
        cur = mo_predicted_completion(k, profile[s], cfg)
        alt = mo_best_response(k, cfg)
        if alt is None:
            continue
        new = mo_predicted_completion(k, alt, cfg)
        if new < cur * (1 - rtol):
            out.append((s, alt, cur, new))
    return out


# --------------------------------------------------------------------------
# runs


@dataclass
class RunState:
    cfg: ScenarioConfig
    algorithm: str
    frame: int = 0
    profile: AllocationProfile | None = None
    knowledge: list = field(default_factory=list)
    profiles: list = field(default_factory=list)
    system_T: list = field(default_factory=list)
    sensor_T: list = field(default_factory=list)
    reviser: list = field(default_factory=list)
    states: list = field(default_factory=list)

    @property
    def frames_completed(self) -> int:
        return len(self.system_T)

    def first_converged(self) -> int | None:
        for i, st in enumerate(self.states):
            if st.kind == "converged":
                return i
        return None


def split_algorithm(algorithm: str, revision: str | None = None) -> tuple[str, str]:
    scen, _, rev = algorithm.lower().replace("/", "-").partition("-")
    if scen not in (MO, TT):
        raise ValueError(f"unknown algorithm {algorithm!r}")
    if revision is None:
        revision = {"a": "async", "s": "sync_s"}.get(rev)
        if revision is None:
            raise ValueError(f"unknown algorithm {algorithm!r}")
    return scen, revision


def propose(scenario: str, s: int, profile: AllocationProfile, knowledge: SensorKnowledge,
            cfg: ScenarioConfig, assignments=None) -> Allocation | None:
    if scenario == MO:
        return mo_best_response(knowledge, cfg, assignments)
    return tt_best_response(s, profile, knowledge, cfg, assignments)


def update_knowledge(scenario: str, knowledge: list, timeline: FrameTimeline, cfg: ScenarioConfig,
                     dists) -> list:
    S = cfg.sensor_count
    if scenario == MO:
        return [mo_update_knowledge(knowledge[s] if knowledge else None, timeline, s, dists[s]) for s in range(S)]
    records = node_broadcast(timeline, cfg, dists)
    return [tt_update_knowledge(knowledge[s] if knowledge else None, records, s, timeline.profile,
                                cfg.overlap, dists[s], cfg.alpha_d) for s in range(S)]


def run_distributed(cfg: ScenarioConfig, frame_dists: Sequence[Sequence], algorithm: str | None = None,
                    revision: str | None = None, initial_profile: AllocationProfile | None = None,
                    frames: int | None = None, window: int | None = None,
                    coordinator: Callable[[int, RunState], AllocationProfile | None] | None = None,
                    freeze_assignments: bool = False, stop_when_converged: bool = False) -> RunState:
    """Frame loop: revise, simulate, learn, record.

    ``frame_dists[i][s]`` is the interest-point distribution of sensor ``s``
    in frame ``i``; proposals for frame ``i`` use frame ``i-1`` as the
    prediction. ``coordinator(i, state)`` may return a profile to install
    at frame ``i`` instead of letting sensors revise; with
    ``freeze_assignments`` sensors may only move their cutpoints.
    ``stop_when_converged`` ends the run at the first converged frame.
    """
    algorithm = algorithm or cfg.algorithm
    scen, mode = split_algorithm(algorithm, revision or (cfg.revision if algorithm == cfg.algorithm else None))
    S = cfg.sensor_count
    frames = len(frame_dists) if frames is None else frames
    window = default_window(S) if window is None else window
    state = RunState(cfg, f"{scen}-{mode}")
    profile = initial_profile or bootstrap_profile(cfg)
    for i in range(frames):
        dists = frame_dists[i]
        who = "none"
        installed = coordinator(i, state) if coordinator is not None else None
        if installed is not None:
            profile = installed
            who = "coordinator"
        elif i > 0:
            revising = revisers(mode, i, S)
            proposals = {}
            for s in revising:
                allowed = [profile[s].assignment] if freeze_assignments else None
                proposals[s] = propose(scen, s, profile, state.knowledge[s], cfg, allowed)
            profile = apply_revision(mode, i, proposals, profile, cfg)
            who = str(revising[0]) if len(revising) == 1 else "all"
        tl = simulate_frame(profile, cfg, dists)
        state.knowledge = update_knowledge(scen, state.knowledge, tl, cfg, dists)
        state.frame = i
        state.profile = profile
        state.profiles.append(profile)
        state.system_T.append(tl.T)
        state.sensor_T.append(list(tl.sensor_T))
        state.reviser.append(who)
        st = detect_equilibrium(state.profiles, window, cfg.frame_width)
        state.states.append(st)
        log.info("frame=%d reviser=%s T=%.9g converged=%s", i, who, tl.T, st.kind == "converged")
        if stop_when_converged and st.kind == "converged":
            break
    return state


def isolation_profile(cfg: ScenarioConfig, dists=None) -> AllocationProfile:
    """Every sensor at the allocation that would be optimal if it were
    alone, with the true coefficients."""
    allocs = []
    for s in range(cfg.sensor_count):
        cdf = _predicted_cdf(dists[s], cfg) if dists is not None else None
        pred = PredictedCoefficients(cfg.transmission_coeffs[s], cfg.processing_coeffs, cfg.overlap,
                                     cfg.alpha_d, cdf)
        plan = best_single_sensor_allocation(pred, "general")
        allocs.append(Allocation(plan.assignment, round_to_pixels(plan.cutpoints, cfg.frame_width, cfg.overlap)))
    return AllocationProfile(tuple(allocs))
