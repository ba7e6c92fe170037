"""Single-sensor load division and a brute-force optimum for small systems.

All solvers here work in the single-sensor model: slices go out back to
back at the predicted per-node transmission coefficients, and node ``d[v]``
starts processing slice ``v`` as soon as it has arrived.
"""
from __future__ import annotations

import bisect
import itertools
import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

from scipy.optimize import brentq

from .engine import simulate_frame, slice_volume
from .model import Allocation, AllocationProfile, QuantileCDF, ScenarioConfig

EXHAUSTIVE_NODE_LIMIT = 6
ORACLE_CALL_LIMIT = 10**7
TIE_RTOL = 1e-12


class InfeasibleAllocation(ValueError):
    """The equal-finish widths for this assignment include a slice narrower
    than the overlap; use fewer nodes."""


@dataclass(frozen=True)
class PredictedCoefficients:
    """Per-node coefficients one sensor plans with (indexed by node)."""

    C: tuple[float, ...]
    P: tuple[float, ...]
    overlap: float
    alpha_d: float = 0.0
    cdf: QuantileCDF | None = None

    def __post_init__(self):
        object.__setattr__(self, "C", tuple(float(c) for c in self.C))
        object.__setattr__(self, "P", tuple(float(p) for p in self.P))
        if len(self.C) != len(self.P):
            raise ValueError("C and P must have one entry per node")
        if not all(c > 0 for c in self.C) or not all(p > 0 for p in self.P):
            raise ValueError("predicted coefficients must be positive")

    def scaled(self, sigma: float) -> "PredictedCoefficients":
        return PredictedCoefficients(tuple(sigma * c for c in self.C), tuple(sigma * p for p in self.P),
                                     self.overlap, self.alpha_d, self.cdf)

    @property
    def interest_load(self) -> float:
        """Total interest-point load of the predicted frame, alpha_d * count."""
        return self.alpha_d * self.cdf.total if self.cdf is not None else 0.0


class Plan(NamedTuple):
    assignment: tuple[int, ...]
    cutpoints: tuple[float, ...]
    T: float


def _check_widths(x: Sequence[float], overlap: float, d) -> tuple[float, ...]:
    for v in range(len(x) - 1):
        if x[v + 1] - x[v] < overlap - 1e-12:
            raise InfeasibleAllocation(f"assignment {tuple(d)}: slice {v} width {x[v + 1] - x[v]:.4g} < {overlap}")
    return tuple(x)


def optimal_widths_linear(d: Sequence[int], pred: PredictedCoefficients) -> tuple[float, ...]:
    """Equal-finish cutpoints from the backward width recursion.

    Interest points are taken as evenly spread, so their load only inflates
    every processing coefficient by ``1 + alpha_d * count``.
    """
    V = len(d)
    if V == 0:
        raise ValueError("empty assignment")
    if V == 1:
        return (0.0, 1.0)
    o = pred.overlap
    f = 1.0 + pred.interest_load
    C = [pred.C[n] for n in d]
    P = [pred.P[n] * f for n in d]
    # y[v] = a[v] + b[v] * y[V-1]
    a = [0.0] * V
    b = [0.0] * V
    b[V - 1] = 1.0
    for v in range(V - 2, -1, -1):
        extra = o if v + 1 == V - 1 else 2 * o
        r = (P[v + 1] + C[v + 1]) / P[v]
        a[v] = extra * C[v + 1] / P[v] + r * a[v + 1]
        b[v] = r * b[v + 1]
    y_last = (1.0 - math.fsum(a)) / math.fsum(b)
    y = [a[v] + b[v] * y_last for v in range(V)]
    x = [0.0]
    for v in range(V - 1):
        x.append(x[-1] + y[v])
    x.append(1.0)
    return _check_widths(x, o, d)


def _invert(a: float, b: float, target: float, cdf: QuantileCDF | None) -> float:
    """Solve ``a*x + b*F(x) = target`` for x, F clamped outside [0, 1]."""
    if cdf is None or b == 0.0:
        return target / a
    kx, ky = cdf.kx, cdf.ky
    hk = [a * kx[j] + b * ky[j] for j in range(len(kx))]
    if target <= hk[0]:
        return kx[0] + (target - hk[0]) / a
    if target >= hk[-1]:
        return kx[-1] + (target - hk[-1]) / a
    j = bisect.bisect_right(hk, target) - 1
    x0, x1 = kx[j], kx[j + 1]
    if x1 == x0:
        return x0
    return x0 + (target - hk[j]) * (x1 - x0) / (hk[j + 1] - hk[j])


def _sweep(T: float, C, P, o: float, alpha: float, cdf) -> list[float]:
    """Cutpoints that make every node finish at T, solved left to right."""
    V = len(C)
    x = [0.0]
    F = cdf.cdf if (cdf is not None and alpha) else None
    A = 0.0
    for v in range(V):
        extra = o if v in (0, V - 1) else 2 * o
        a = C[v] + P[v]
        b = P[v] * alpha
        xp = x[-1]
        target = T - A - C[v] * extra + a * xp + (b * F(xp) if F else 0.0)
        xv = _invert(a, b, target, cdf if F else None)
        A += C[v] * (xv - xp + extra)
        x.append(xv)
    return x


def optimal_widths_general(d: Sequence[int], pred: PredictedCoefficients) -> tuple[float, ...]:
    """Equal-finish cutpoints when the interest-point load follows ``pred.cdf``.

    The target finish time is found by a bracketing root search on the
    position of the last cutpoint; for each trial time every cutpoint has a
    closed-form solution because the predicted CDF is piecewise linear.
    """
    V = len(d)
    if V == 0:
        raise ValueError("empty assignment")
    if V == 1:
        return (0.0, 1.0)
    o, alpha, cdf = pred.overlap, pred.alpha_d, pred.cdf
    C = [pred.C[n] for n in d]
    P = [pred.P[n] for n in d]

    def excess(T):
        return _sweep(T, C, P, o, alpha, cdf)[-1] - 1.0

    hi = max(C) * (1 + 2 * o) * V + max(P) * (1 + pred.interest_load)
    for _ in range(200):
        if excess(hi) >= 0:
            break
        hi *= 2
    T = brentq(excess, 0.0, hi, xtol=1e-15 * hi, rtol=8.9e-16, maxiter=200)
    x = _sweep(T, C, P, o, alpha, cdf)
    x[-1] = 1.0
    return _check_widths(x, o, d)


def predicted_node_times(d: Sequence[int], x: Sequence[float], pred: PredictedCoefficients) -> list[float]:
    """Predicted finish time of every node in ``d`` for cutpoints ``x``."""
    V = len(d)
    o, alpha, cdf = pred.overlap, pred.alpha_d, pred.cdf
    out = []
    A = 0.0
    for v, n in enumerate(d):
        y = x[v + 1] - x[v]
        A += pred.C[n] * slice_volume(y, v, V, o)
        xi = cdf.count_between(x[v], x[v + 1]) if (alpha and cdf is not None) else 0.0
        out.append(A + pred.P[n] * (y + alpha * xi))
    return out


def predicted_completion(d, x, pred: PredictedCoefficients) -> float:
    return max(predicted_node_times(d, x, pred))


def enumerate_assignments(N: int, V_max: int | None = None, pruned_by: Sequence[float] | None = None):
    """Partial permutations of ``range(N)``, shortest first, lexicographic
    within a length.

    With ``pruned_by`` (per-node transmission coefficients) only the
    orderings that visit nodes by increasing coefficient are produced, one
    per node subset; this is exact when processing coefficients are equal.
    """
    V_max = N if V_max is None else V_max
    if not 1 <= V_max <= N:
        raise ValueError(f"V_max must lie in 1..{N}")
    if pruned_by is not None:
        order = sorted(range(N), key=lambda n: (pruned_by[n], n))
        out = []
        for k in range(1, V_max + 1):
            out.extend(sorted(tuple(sorted(c, key=order.index)) for c in itertools.combinations(range(N), k)))
        return out
    if N > EXHAUSTIVE_NODE_LIMIT:
        raise ValueError(f"exhaustive enumeration is limited to N <= {EXHAUSTIVE_NODE_LIMIT}")
    return [p for k in range(1, V_max + 1) for p in itertools.permutations(range(N), k)]


def solve_widths(d, pred: PredictedCoefficients, mode: str = "general") -> tuple[float, ...]:
    if mode == "linear":
        return optimal_widths_linear(d, pred)
    if mode == "general":
        return optimal_widths_general(d, pred)
    raise ValueError(f"unknown width solver {mode!r}")


def argmin_plan(plans):
    """Smallest T; T values within a relative 1e-12 count as ties and go to
    the lexicographically smallest assignment, then cutpoints."""
    plans = list(plans)
    if not plans:
        return None
    best_T = min(p.T for p in plans)
    tied = [p for p in plans if p.T <= best_T * (1 + TIE_RTOL)]
    return min(tied, key=lambda p: (p.assignment, p.cutpoints))


def best_single_sensor_allocation(pred: PredictedCoefficients, mode: str = "general",
                                  assignments=None) -> Plan:
    """Best (assignment, cutpoints, predicted completion) over all
    assignments, or over ``assignments`` when given."""
    N = len(pred.C)
    if assignments is None:
        if N <= EXHAUSTIVE_NODE_LIMIT:
            assignments = enumerate_assignments(N)
        else:
            assignments = enumerate_assignments(N, pruned_by=pred.C)
    plans = []
    for d in assignments:
        try:
            x = solve_widths(d, pred, mode)
        except InfeasibleAllocation:
            continue
        plans.append(Plan(tuple(d), x, predicted_completion(d, x, pred)))
    best = argmin_plan(plans)
    if best is None:
        raise InfeasibleAllocation("no feasible assignment")
    return best


# --------------------------------------------------------------------------
# brute-force optimum


def _grid_cutpoints(V: int, positions: list[float], overlap: float):
    """Increasing interior cutpoints from ``positions`` with widths >= overlap."""
    if V == 1:
        yield (0.0, 1.0)
        return
    inner = [p for p in positions if overlap - 1e-12 <= p <= 1 - overlap + 1e-12]

    def rec(prefix, start):
        if len(prefix) == V:
            if 1.0 - prefix[-1] >= overlap - 1e-12:
                yield tuple(prefix) + (1.0,)
            return
        for j in range(start, len(inner)):
            p = inner[j]
            if p - prefix[-1] < overlap - 1e-12:
                continue
            yield from rec(prefix + [p], j + 1)

    yield from rec([0.0], 0)


def oracle_search_size(cfg: ScenarioConfig, pixel_stride: float) -> int:
    per_sensor = len(_sensor_options(cfg, pixel_stride))
    return per_sensor ** cfg.sensor_count


def _sensor_options(cfg: ScenarioConfig, pixel_stride: float) -> list[Allocation]:
    w, o = cfg.frame_width, cfg.overlap
    steps = int(math.floor(w / pixel_stride + 1e-9))
    positions = [k * pixel_stride / w for k in range(1, steps)]
    out = []
    for d in enumerate_assignments(cfg.node_count):
        for x in _grid_cutpoints(len(d), positions, o):
            out.append(Allocation(d, x))
    return out


def brute_force_ctm(cfg: ScenarioConfig, dists, pixel_stride: float,
                    max_calls: int = ORACLE_CALL_LIMIT) -> tuple[AllocationProfile, float]:
    """Minimum system completion time over every assignment profile with
    cutpoints on a ``pixel_stride`` grid, each evaluated by the engine."""
    if pixel_stride <= 0:
        raise ValueError("pixel_stride must be positive")
    if cfg.node_count > EXHAUSTIVE_NODE_LIMIT:
        raise ValueError(f"oracle is limited to N <= {EXHAUSTIVE_NODE_LIMIT}")
    options = _sensor_options(cfg, pixel_stride)
    size = len(options) ** cfg.sensor_count
    if size > max_calls:
        raise ValueError(f"oracle search space {size} exceeds {max_calls} engine calls")
    best, best_T = None, math.inf
    for combo in itertools.product(options, repeat=cfg.sensor_count):
        profile = AllocationProfile(combo)
        T = simulate_frame(profile, cfg, dists, check=False).T
        if T < best_T * (1 - TIE_RTOL):
            best, best_T = profile, T
    return best, best_T
