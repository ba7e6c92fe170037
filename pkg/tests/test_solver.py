import itertools
import math

import pytest
from hypothesis import assume, given, settings, strategies as st

from vsnoffload.engine import simulate_frame
from vsnoffload.model import Allocation, AllocationProfile, FrameDistribution, QuantileCDF, ScenarioConfig
from vsnoffload.solver import (InfeasibleAllocation, PredictedCoefficients, argmin_plan, Plan,
                               best_single_sensor_allocation, brute_force_ctm, enumerate_assignments,
                               optimal_widths_general, optimal_widths_linear, oracle_search_size,
                               predicted_completion, predicted_node_times)

from conftest import two_by_two


def widths(x):
    return [b - a for a, b in zip(x, x[1:])]


def test_linear_widths_prop1_fixture():
    pred = PredictedCoefficients((2.0, 2.0), (10.0, 10.0), 0.1)
    y = widths(optimal_widths_linear((0, 1), pred))
    assert y[0] == pytest.approx(6.1 / 11, abs=1e-9)
    assert y[1] == pytest.approx(4.9 / 11, abs=1e-9)


def test_linear_widths_no_overlap():
    pred = PredictedCoefficients((1.0, 1.0), (1.0, 1.0), 0.0)
    y = widths(optimal_widths_linear((0, 1), pred))
    assert y == pytest.approx([2 / 3, 1 / 3], abs=1e-9)


def test_general_matches_linear_without_interest_points():
    pred = PredictedCoefficients((2.0, 2.0), (10.0, 10.0), 0.1)
    assert optimal_widths_general((0, 1), pred) == pytest.approx(optimal_widths_linear((0, 1), pred), abs=1e-12)


def test_single_slice():
    pred = PredictedCoefficients((1.0,), (1.0,), 0.1)
    assert optimal_widths_linear((0,), pred) == (0.0, 1.0)
    assert optimal_widths_general((0,), pred) == (0.0, 1.0)


def test_infeasible_widths():
    # the second node is so slow it would get less than the overlap
    pred = PredictedCoefficients((1.0, 50.0), (1.0, 50.0), 0.1)
    with pytest.raises(InfeasibleAllocation):
        optimal_widths_linear((0, 1), pred)


def test_best_single_examples():
    plan = best_single_sensor_allocation(PredictedCoefficients((1.0, 1.0), (5.0, 5.0), 0.1))
    assert plan.assignment == (0, 1)
    # first slice 6.1/11 wide: 1 * (6.1/11 + 0.1) + 5 * 6.1/11
    assert plan.T == pytest.approx(6 * 6.1 / 11 + 0.1, rel=1e-12)
    far = best_single_sensor_allocation(PredictedCoefficients((1.0, 100.0), (1.0, 1.0), 0.1))
    assert far.assignment == (0,)
    assert far.T == pytest.approx(2.0)


def test_enumeration_order_and_pruning():
    assert enumerate_assignments(2) == [(0,), (1,), (0, 1), (1, 0)]
    assert len(enumerate_assignments(4)) == 4 + 12 + 24 + 24
    pruned = enumerate_assignments(3, pruned_by=(3.0, 1.0, 2.0))
    assert pruned[-1] == (1, 2, 0)
    assert len(pruned) == 7
    with pytest.raises(ValueError):
        enumerate_assignments(7)


def test_argmin_ties_go_to_smallest_assignment():
    plans = [Plan((1, 0), (0.0, 0.5, 1.0), 2.0), Plan((0, 1), (0.0, 0.5, 1.0), 2.0 * (1 + 1e-14))]
    assert argmin_plan(plans).assignment == (0, 1)


def test_general_solver_point_mass_vs_grid():
    # all interest points in one place: the left-to-right sweep must still equalize finishes
    cdf = QuantileCDF((300, 300, 300), 720, 400.0)
    pred = PredictedCoefficients((1.0, 1.5), (2.0, 2.0), 0.05, alpha_d=0.01, cdf=cdf)
    x = optimal_widths_general((0, 1), pred)
    T = predicted_completion((0, 1), x, pred)
    best = min(predicted_completion((0, 1), (0.0, k / 1000, 1.0), pred) for k in range(50, 951))
    assert T <= best + 1e-12
    # the jump makes exact equal finish impossible; the cut lands on it
    assert x[1] * 720 == pytest.approx(300)


# random instances

coef = st.floats(0.05, 5.0)


@st.composite
def predictions(draw, equal_P=False, with_cdf=False, continuous=False):
    N = draw(st.integers(1, 4))
    C = tuple(draw(coef) for _ in range(N))
    P = (draw(coef),) * N if equal_P else tuple(draw(coef) for _ in range(N))
    o = draw(st.sampled_from([0.0, 0.01, 0.05, 0.1]))
    cdf, alpha = None, 0.0
    if with_cdf:
        if continuous:
            q = sorted(draw(st.lists(st.integers(1, 719), min_size=3, max_size=3, unique=True)))
        else:
            q = sorted(draw(st.lists(st.integers(0, 720), min_size=3, max_size=3)))
        cdf, alpha = QuantileCDF(q, 720, 400.0), draw(st.sampled_from([0.0, 0.00125, 0.01]))
    return PredictedCoefficients(C, P, o, alpha, cdf)


@settings(max_examples=150, deadline=None)
@given(predictions(with_cdf=True, continuous=True))
def test_equal_finish(pred):
    for d in enumerate_assignments(len(pred.C)):
        try:
            x = optimal_widths_general(d, pred)
        except InfeasibleAllocation:
            continue
        times = predicted_node_times(d, x, pred)
        assert max(times) - min(times) < 1e-8 * max(times)


@settings(max_examples=150, deadline=None)
@given(predictions())
def test_linear_and_general_agree(pred):
    for d in enumerate_assignments(len(pred.C)):
        try:
            lin = optimal_widths_linear(d, pred)
        except InfeasibleAllocation:
            with pytest.raises(InfeasibleAllocation):
                optimal_widths_general(d, pred)
            continue
        assert optimal_widths_general(d, pred) == pytest.approx(lin, abs=1e-9)


@settings(max_examples=150, deadline=None)
@given(predictions(), st.floats(0.01, 100.0))
def test_scaling_leaves_cutpoints_and_choice(pred, sigma):
    base = best_single_sensor_allocation(pred)
    scaled = best_single_sensor_allocation(pred.scaled(sigma))
    assert scaled.assignment == base.assignment
    assert scaled.cutpoints == pytest.approx(base.cutpoints, abs=1e-9)
    assert abs(scaled.T - sigma * base.T) <= 1e-12 * sigma * base.T
    for d in enumerate_assignments(len(pred.C)):
        try:
            x = optimal_widths_linear(d, pred)
        except InfeasibleAllocation:
            continue
        assert optimal_widths_linear(d, pred.scaled(sigma)) == pytest.approx(x, abs=1e-9)


@settings(max_examples=150, deadline=None)
@given(predictions(equal_P=True))
def test_equal_processing_prefers_fast_links_first(pred):
    # with identical nodes the best ordering of any node subset visits fast links first
    C = pred.C
    assume(len(set(C)) == len(C))
    plan = best_single_sensor_allocation(pred)
    assert list(plan.assignment) == sorted(plan.assignment, key=lambda n: C[n])


@settings(max_examples=150, deadline=None)
@given(predictions(with_cdf=True))
def test_best_two_slice_plan_beats_grid(pred):
    # no grid cutpoint improves the chosen two-slice plan, CDF jumps included
    plan = best_single_sensor_allocation(pred)
    if len(plan.assignment) != 2:
        return
    o = pred.overlap
    for k in range(1, 400):
        c = k / 400
        if c >= o and 1 - c >= o:
            assert predicted_completion(plan.assignment, (0.0, c, 1.0), pred) >= plan.T * (1 - 1e-9)


# oracle

def test_oracle_prop1_instance():
    cfg = two_by_two(((1.0, 1.0), (1.0, 1.0)))
    prof, T = brute_force_ctm(cfg, [FrameDistribution()] * 2, 7.2)
    assert T < 6.31
    assert T == pytest.approx(simulate_frame(prof, cfg, [FrameDistribution()] * 2).T)


def test_oracle_single_sensor_matches_solver():
    cfg = ScenarioConfig(((1.0, 1.4),), (2.0, 3.0), overlap=0.05, alpha_d=0.0)
    prof, T = brute_force_ctm(cfg, [FrameDistribution()], 7.2)
    plan = best_single_sensor_allocation(PredictedCoefficients(cfg.transmission_coeffs[0], cfg.processing_coeffs, 0.05))
    assert plan.T <= T * (1 + 1e-12)
    assert T <= plan.T * 1.02


def test_oracle_guard():
    cfg = ScenarioConfig(((1.0,) * 4,) * 4, (1.0,) * 4, overlap=0.05, alpha_d=0.0)
    assert oracle_search_size(cfg, 7.2) > 10**7
    with pytest.raises(ValueError, match="exceeds"):
        brute_force_ctm(cfg, [FrameDistribution()] * 4, 7.2)
