"""Centralized operation: an off-line system optimizer, a dictionary of
near-optimal profiles keyed by quantile vectors, nearest-neighbor profile
selection, and runs where a coordinator installs profiles every R frames.
"""
from __future__ import annotations

import heapq
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from .dynamics import (IMPROVE_RTOL, REFINE_STEPS, RunState, bootstrap_profile, contention_seed,
                       isolation_profile, lex_better,
                       replay_best_response, run_distributed)
from .engine import simulate_frame
from .model import Allocation, AllocationProfile, QuantileCDF, ScenarioConfig, quantile_vector
from .solver import enumerate_assignments

log = logging.getLogger(__name__)

DICT_MAGIC = "# vsnoffload profile dictionary v1"


def _system_key(profile: AllocationProfile, cfg: ScenarioConfig, dists) -> tuple[float, ...]:
    tl = simulate_frame(profile, cfg, dists, check=False)
    return tuple(sorted(tl.sensor_T, reverse=True))


def joint_refine(profile: AllocationProfile, cfg: ScenarioConfig, dists,
                 steps: Sequence[int] = REFINE_STEPS) -> AllocationProfile:
    """Pixel descent on the system objective over moves of one cutpoint of
    one sensor and over shifts of the same cutpoint index at every sensor
    together. Single-sensor best responses cannot make the joint moves."""
    w, S = cfg.frame_width, cfg.sensor_count
    min_px = math.ceil(cfg.overlap * w - 1e-9)
    px = [list(a.pixels(w)) for a in profile]
    ds = profile.assignments
    memo: dict = {}

    def key(cand):
        k = tuple(tuple(c) for c in cand)
        if k not in memo:
            prof = AllocationProfile(tuple(Allocation.from_pixels(ds[s], cand[s], w) for s in range(S)))
            memo[k] = _system_key(prof, cfg, dists)
        return memo[k]

    def ok(c, j):
        return c[j] - c[j - 1] >= min_px and c[j + 1] - c[j] >= min_px

    vmax = max(len(d) for d in ds)
    moves = [((s,), j) for s in range(S) for j in range(1, len(ds[s]))]
    if S > 1:
        moves += [(tuple(s for s in range(S) if len(ds[s]) > j), j) for j in range(1, vmax)]
    best = key(px)
    for step in steps:
        moved, rounds = True, 0
        while moved and rounds < 4 * w:
            moved, rounds = False, rounds + 1
            for who, j in moves:
                for sgn in (1, -1):
                    cand = [list(c) for c in px]
                    for s in who:
                        cand[s][j] += sgn * step
                    if not all(ok(cand[s], j) for s in who):
                        continue
                    k = key(cand)
                    if lex_better(k, best, 1e-12):
                        px, best, moved = cand, k, True
                        break
    return AllocationProfile(tuple(Allocation.from_pixels(ds[s], px[s], w) for s in range(S)))


def _ttc_from(profile: AllocationProfile, dists, cfg: ScenarioConfig, max_rounds: int):
    S = cfg.sensor_count
    assignments = enumerate_assignments(cfg.node_count) if cfg.node_count <= 6 else None
    best, best_key = profile, _system_key(profile, cfg, dists)
    idle = 0
    for r in range(max_rounds):
        s = r % S
        seed = contention_seed(s, profile, cfg, dists)
        alt = replay_best_response(s, profile, cfg, dists, seed, "system",
                                   assignments or enumerate_assignments(cfg.node_count, pruned_by=seed.C),
                                   IMPROVE_RTOL)
        if alt == profile[s]:
            idle += 1
            if idle < S:
                continue
            joint = joint_refine(profile, cfg, dists)
            if not lex_better(_system_key(joint, cfg, dists), _system_key(profile, cfg, dists), IMPROVE_RTOL):
                break
            nxt = joint
        else:
            nxt = profile.replace(s, alt)
        idle = 0
        profile = nxt
        key = _system_key(profile, cfg, dists)
        if lex_better(key, best_key, 1e-12):
            best, best_key = profile, key
    return best, best_key


def ttc_optimize(dists, cfg: ScenarioConfig, max_rounds: int | None = None,
                 start: AllocationProfile | None = None) -> AllocationProfile:
    """Round-robin best responses where every sensor minimizes the system
    completion time, evaluated by the engine with the true coefficients.

    Whenever ``S`` consecutive best responses change nothing, a joint pixel
    descent over all sensors is tried; a search ends when that does not help
    either or after ``max_rounds`` best responses (default ``20 * S``).
    Without ``start`` the search runs once from the bootstrap profile and
    once from the isolation profile. Returns the best profile seen.
    """
    max_rounds = 20 * cfg.sensor_count if max_rounds is None else max_rounds
    starts = [start] if start is not None else [bootstrap_profile(cfg), isolation_profile(cfg, dists)]
    best, best_key = None, None
    for p0 in starts:
        p, k = _ttc_from(p0, dists, cfg, max_rounds)
        if best is None or lex_better(k, best_key, 1e-12):
            best, best_key = p, k
    return best


# --------------------------------------------------------------------------
# dictionary


@dataclass(frozen=True)
class DictionaryEntry:
    quantiles: tuple[tuple[int, ...], ...]
    profile: AllocationProfile
    T: float


@dataclass
class ProfileDictionary:
    frame_width: int
    entries: list[DictionaryEntry] = field(default_factory=list)

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def __getitem__(self, j: int) -> DictionaryEntry:
        return self.entries[j]

    def add(self, entry: DictionaryEntry):
        self.entries.append(entry)

    def with_assignments(self, assignments) -> list[DictionaryEntry]:
        """Entries whose stored profile uses exactly ``assignments``."""
        assignments = tuple(tuple(d) for d in assignments)
        return [e for e in self.entries if e.profile.assignments == assignments]

    def save(self, path: str | Path):
        """One tab-separated record per entry:

        ``T  quantiles  assignments  cutpoint_pixels``

        T is written with ``repr`` so it reads back exactly. The last three
        fields hold one comma-separated group per sensor, groups separated
        by ``|``. A header line carries ``w``, ``S`` and ``Q``.
        """
        w = self.frame_width
        S = len(self.entries[0].quantiles) if self.entries else 0
        Q = len(self.entries[0].quantiles[0]) + 1 if self.entries else 0
        lines = [DICT_MAGIC, f"# w={w} S={S} Q={Q}", "# T\tquantiles\tassignments\tcutpoint_pixels"]

        def groups(seqs):
            return "|".join(",".join(str(v) for v in seq) for seq in seqs)

        for e in self.entries:
            lines.append("\t".join([repr(float(e.T)), groups(e.quantiles),
                                    groups(e.profile.assignments),
                                    groups(a.pixels(w) for a in e.profile)]))
        Path(path).write_text("\n".join(lines) + "\n")

    @classmethod
    def load(cls, path: str | Path) -> "ProfileDictionary":
        text = Path(path).read_text().splitlines()
        if not text or text[0] != DICT_MAGIC:
            raise ValueError(f"{path}: not a profile dictionary")
        header = dict(kv.split("=") for kv in text[1][1:].split())
        w, S, Q = int(header["w"]), int(header["S"]), int(header["Q"])
        out = cls(w)

        def parse(field_text):
            return tuple(tuple(int(v) for v in g.split(",")) for g in field_text.split("|"))

        for lineno, line in enumerate(text[3:], start=4):
            if not line.strip():
                continue
            try:
                T_text, q_text, d_text, px_text = line.split("\t")
                q, d, px = parse(q_text), parse(d_text), parse(px_text)
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: malformed record ({exc})") from None
            if len(q) != S or any(len(v) != Q - 1 for v in q) or len(d) != S or len(px) != S:
                raise ValueError(f"{path}:{lineno}: record does not match header S={S} Q={Q}")
            profile = AllocationProfile(tuple(Allocation.from_pixels(d[s], px[s], w) for s in range(S)))
            out.add(DictionaryEntry(q, profile, float(T_text)))
        return out


def frame_quantiles(dists, cfg: ScenarioConfig) -> tuple[tuple[int, ...], ...]:
    return tuple(quantile_vector(d, cfg.quantile_count, cfg.frame_width) for d in dists)


def quantile_distance(qa, qb) -> int | float:
    """Sum over sensors and quantiles of squared pixel differences."""
    if len(qa) != len(qb) or any(len(a) != len(b) for a, b in zip(qa, qb)):
        raise ValueError("quantile vectors have different dimensions")
    return sum((x - y) ** 2 for a, b in zip(qa, qb) for x, y in zip(a, b))


def nearest_entries(q_pred, dictionary: ProfileDictionary, L: int) -> list[int]:
    """Indices of the ``L`` entries closest to ``q_pred``, nearest first,
    ties in insertion order. Uses a bounded max-heap."""
    if L < 1:
        raise ValueError("L must be >= 1")
    heap: list[tuple] = []
    for j, e in enumerate(dictionary.entries):
        item = (-quantile_distance(q_pred, e.quantiles), -j)
        if len(heap) < L:
            heapq.heappush(heap, item)
        elif item > heap[0]:
            heapq.heapreplace(heap, item)
    return [-j for _, j in sorted(heap, reverse=True)]


def predicted_dists(q_pred, totals: Sequence[float], cfg: ScenarioConfig) -> tuple[QuantileCDF, ...]:
    return tuple(QuantileCDF(q, cfg.frame_width, t) for q, t in zip(q_pred, totals))


def select_profile(q_pred, dictionary: ProfileDictionary, L: int, cfg: ScenarioConfig,
                   dists) -> AllocationProfile:
    """Among the ``L`` nearest entries, the stored profile with the smallest
    engine-evaluated completion time against ``dists`` (the predicted
    distributions). With ``L == 1`` the nearest entry is returned as is."""
    if not len(dictionary):
        raise ValueError("empty dictionary")
    idx = nearest_entries(q_pred, dictionary, L)
    if len(idx) == 1:
        return dictionary[idx[0]].profile
    best_j, best_T = None, math.inf
    for j in sorted(idx):
        T = simulate_frame(dictionary[j].profile, cfg, dists, check=False).T
        if T < best_T:
            best_j, best_T = j, T
    return dictionary[best_j].profile


def build_dictionary(training: Sequence[Sequence], cfg: ScenarioConfig, M: int | None = None,
                     max_rounds: int | None = None) -> ProfileDictionary:
    """One entry per training frame (the first ``M``): its quantile vectors,
    the system-optimized profile for it and that profile's completion time.
    Frames with identical distributions are optimized once."""
    M = cfg.dictionary_size if M is None else M
    out = ProfileDictionary(cfg.frame_width)
    solved: dict[tuple, tuple[AllocationProfile, float]] = {}
    for dists in list(training)[:max(M, 1)]:
        key = tuple(dists)
        if key not in solved:
            profile = ttc_optimize(dists, cfg, max_rounds)
            solved[key] = (profile, simulate_frame(profile, cfg, dists).T)
        profile, T = solved[key]
        out.add(DictionaryEntry(frame_quantiles(dists, cfg), profile, T))
    return out


def coordinated_run(cfg: ScenarioConfig, frame_dists: Sequence[Sequence], algorithm: str | None = None,
                    R: int | None = None, L: int | None = None, M: int | None = None,
                    dictionary: ProfileDictionary | None = None, frames: int | None = None,
                    window: int | None = None) -> tuple[RunState, ProfileDictionary]:
    """Distributed run in which every ``R``-th frame gets a profile chosen
    from the dictionary by the quantiles of the previous frame; in between
    sensors only move their cutpoints."""
    R = cfg.inter_refresh if R is None else R
    L = cfg.candidate_count if L is None else L
    if R < 1 or L < 1:
        raise ValueError("R and L must be >= 1")
    if dictionary is None:
        dictionary = build_dictionary(frame_dists, cfg, M)

    def coordinator(i: int, state: RunState):
        if i % R:
            return None
        last = frame_dists[i - 1] if i > 0 else frame_dists[0]
        q_pred = frame_quantiles(last, cfg)
        pred = predicted_dists(q_pred, [d.total for d in last], cfg)
        return select_profile(q_pred, dictionary, L, cfg, pred)

    state = run_distributed(cfg, frame_dists, algorithm, frames=frames, window=window,
                            coordinator=coordinator, freeze_assignments=True)
    return state, dictionary
