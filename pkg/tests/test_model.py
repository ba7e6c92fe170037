import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from vsnoffload.model import (Allocation, AllocationProfile, ConfigError, FrameDistribution, InfeasibleLink,
                              PiecewiseLinearCDF, QuantileCDF, RadioParams, ScenarioConfig, Topology,
                              build_topology, cdf_eval, channel_coefficients, free_space_path_loss_db,
                              load_config, processing_coefficients, quantile_vector, round_to_pixels,
                              save_config, scenario_from_topology, validate_profile)

from conftest import lattice, two_by_two


# topologies

def test_topology_1_nodes_at_side_midpoints():
    t = build_topology(1, 100)
    assert set(t.node_positions) == {(50.0, 0.0), (100.0, 50.0), (50.0, 100.0), (0.0, 50.0)}
    assert t.sensor_positions == ((0.0, 0.0), (100.0, 0.0), (100.0, 100.0), (0.0, 100.0))


def test_topology_5_is_shifted_square():
    t = build_topology(5, 100)
    assert set(t.node_positions) == {(75.0, 75.0), (175.0, 75.0), (175.0, 175.0), (75.0, 175.0)}


def _square_side(nodes):
    p = np.asarray(nodes)
    return float(np.linalg.norm(p[0] - p[1]))


def test_topology_3_shift_rotation_growth():
    t1, t3 = build_topology(1), build_topology(3)
    assert _square_side(t1.node_positions) == pytest.approx(70.7107, abs=1e-4)
    # two steps of a quarter of the 29.29 m total growth
    assert _square_side(t3.node_positions) == pytest.approx(70.7107 + 2 * 7.3223, abs=1e-3)
    centre = np.mean(t3.node_positions, axis=0)
    assert centre == pytest.approx([87.5, 87.5])
    v1 = np.subtract(t1.node_positions[0], (50, 50))
    v3 = np.subtract(t3.node_positions[0], centre)
    angle = math.degrees(math.atan2(v3[1], v3[0]) - math.atan2(v1[1], v1[0]))
    assert angle == pytest.approx(-22.5)


def test_topology_index_range():
    with pytest.raises(ValueError):
        build_topology(0)
    with pytest.raises(ValueError):
        build_topology(6)


def test_topology_positions_must_be_finite():
    with pytest.raises(ValueError):
        Topology(((0.0, math.nan),), ((1.0, 1.0),))


# radio

def test_channel_example_at_50m():
    assert float(free_space_path_loss_db(50.0, 2.4e9)) == pytest.approx(74.0, abs=0.05)
    radio = RadioParams()
    C = channel_coefficients(build_topology(1), radio)
    # sensor 0 at (0,0) and node 0 at (50,0)
    capacity = radio.frame_bits / C[0, 0]
    assert capacity / 1e6 == pytest.approx(46.1, abs=0.1)


def test_channel_symmetry_and_monotonicity():
    C = channel_coefficients(build_topology(1))
    d = build_topology(1).distances()
    # sensors 0 and 1 are both 50 m from node 0
    assert C[0, 0] == C[1, 0]
    order = np.argsort(d.ravel(), kind="stable")
    assert np.all(np.diff(C.ravel()[order]) >= 0)


def test_channel_linear_in_frame_bits():
    t = build_topology(2)
    C1 = channel_coefficients(t, RadioParams())
    C2 = channel_coefficients(t, RadioParams(frame_bits=2 * 720 * 480 * 8))
    assert np.allclose(C2, 2 * C1, rtol=1e-15)


def test_channel_rejects_coincident_positions():
    t = Topology(((0.0, 0.0),), ((0.0, 0.0),))
    with pytest.raises(InfeasibleLink):
        channel_coefficients(t)


def test_processing_coefficient_rule():
    C = np.array([[0.05, 0.1], [0.2, 0.3], [0.07, 0.08], [0.06, 0.5]])
    assert processing_coefficients(C, 4).tolist() == [0.2, 0.2]
    assert processing_coefficients(C[:1], 1).tolist() == [0.05, 0.05]
    assert np.allclose(processing_coefficients(3 * C, 4), 3 * processing_coefficients(C, 4))


# config

def test_config_defaults_and_invariants():
    cfg = two_by_two(((1, 1), (1, 1)))
    assert cfg.sensor_count == 2 and cfg.node_count == 2
    assert cfg.revision == "async"
    assert ScenarioConfig(((1,),), (1,), algorithm="mo-s").revision == "sync_s"
    for bad in [dict(overlap=0.5), dict(overlap=0.0), dict(frame_width=1), dict(alpha_d=-1),
                dict(inter_refresh=0), dict(candidate_count=0), dict(quantile_count=1),
                dict(algorithm="xx"), dict(processing_coeffs=(0.0,)), dict(transmission_coeffs=((-1.0,),))]:
        kw = dict(transmission_coeffs=((1.0,),), processing_coeffs=(1.0,))
        kw.update(bad)
        with pytest.raises(ConfigError):
            ScenarioConfig(**kw)


def test_config_file_roundtrip(tmp_path):
    cfg = scenario_from_topology(2, algorithm="tt-s", inter_refresh=8)
    path = tmp_path / "scen.json"
    save_config(cfg, path)
    assert load_config(path) == cfg


def test_config_file_from_topology_and_unknown_keys(tmp_path):
    path = tmp_path / "scen.json"
    path.write_text(json.dumps({"topology": 4, "radio": {"tx_power": 10.0}, "algorithm": "mo-a"}))
    cfg = load_config(path)
    assert cfg == scenario_from_topology(4, algorithm="mo-a")
    path.write_text(json.dumps({"topology": 4, "colour": "red"}))
    with pytest.raises(ConfigError, match="colour"):
        load_config(path)


# distributions

def test_cdf_eval_examples():
    d = FrameDistribution([0.1, 0.2, 0.9])
    assert cdf_eval(d, 0.5) == 2
    assert cdf_eval(d, 1.0) == 3
    assert cdf_eval(lattice(400), 0.5) == 200


def test_distribution_rejects_out_of_range():
    with pytest.raises(ValueError):
        FrameDistribution([0.5, 1.2])


def test_quantile_examples():
    assert quantile_vector(lattice(4000), 4, 720) == (180, 360, 540)
    assert quantile_vector(FrameDistribution([100 / 720] * 7), 5, 720) == (100, 100, 100, 100)
    assert quantile_vector(FrameDistribution([0.1, 0.2, 0.9]), 2, 720) == (144,)
    assert quantile_vector(FrameDistribution(), 4, 720) == (0, 0, 0)


def test_quantile_exact_uniform_400():
    assert quantile_vector(lattice(400), 4, 720) == (180, 360, 540)


points = st.lists(st.floats(0, 1, allow_nan=False), min_size=1, max_size=60)


@settings(max_examples=200, deadline=None)
@given(points, st.integers(2, 12))
def test_quantile_monotone_and_duplication_invariant(pts, Q):
    d = FrameDistribution(pts)
    q = quantile_vector(d, Q, 720)
    assert len(q) == Q - 1
    assert all(a <= b for a, b in zip(q, q[1:]))
    assert quantile_vector(FrameDistribution(pts + pts), Q, 720) == q
    # infimum definition checked by brute force on the pixel grid
    n = d.point_count
    for p, qp in enumerate(q, start=1):
        assert Q * d.cdf(qp / 720) >= p * n
        assert qp == 0 or Q * d.cdf((qp - 1) / 720) < p * n


@settings(max_examples=200, deadline=None)
@given(points, st.lists(st.floats(0, 1), min_size=2, max_size=10))
def test_cdf_monotone_and_bounded(pts, xs):
    d = FrameDistribution(pts)
    xs = sorted(xs)
    vals = [cdf_eval(d, x) for x in xs]
    assert all(a <= b for a, b in zip(vals, vals[1:]))
    assert all(0 <= v <= d.point_count for v in vals)


def test_quantile_cdf_passes_through_knots():
    d = lattice(400)
    q = QuantileCDF.from_distribution(d, 4, 720)
    assert q.total == 400
    assert q.cdf(0.25) == pytest.approx(100)
    assert q.cdf(0.125) == pytest.approx(50)
    assert q.count_between(0.25, 0.75) == pytest.approx(200)


def test_piecewise_cdf_from_slices():
    f = PiecewiseLinearCDF.from_slices((0.0, 0.4, 1.0), (10, 30))
    assert f.cdf(0.2) == pytest.approx(5)
    assert f.cdf(0.7) == pytest.approx(25)
    assert f.total == 40


# allocations

def test_validate_profile_examples():
    cfg = two_by_two(((1, 1), (1, 1)))
    ok = Allocation((0, 1), (0.0, 0.55, 1.0))
    assert validate_profile(AllocationProfile((ok, ok)), cfg) == []
    thin = Allocation((0, 1), (0.0, 0.05, 1.0))
    bad = validate_profile(AllocationProfile((thin, ok)), cfg)
    assert [(v.sensor, v.slice, v.kind) for v in bad] == [(0, 0, "width")]
    dup = Allocation((0, 0), (0.0, 0.5, 1.0))
    assert [v.kind for v in validate_profile(AllocationProfile((ok, dup)), cfg)] == ["distinctness"]


def test_validate_profile_pixel_and_normalization():
    cfg = two_by_two(((1, 1), (1, 1)))
    off_grid = Allocation((0, 1), (0.0, 6.1 / 11, 1.0))
    kinds = [v.kind for v in validate_profile(AllocationProfile((off_grid, off_grid)), cfg)]
    assert kinds == ["pixel", "pixel"]
    assert validate_profile(AllocationProfile((off_grid, off_grid)), cfg, require_pixels=False) == []
    short = Allocation((0, 1), (0.0, 0.5, 0.9))
    assert "normalization" in [v.kind for v in validate_profile(AllocationProfile((short, short)), cfg)]
    wrong = Allocation((0, 5), (0.0, 0.5, 1.0))
    assert "node-range" in [v.kind for v in validate_profile(AllocationProfile((wrong, wrong)), cfg)]


@settings(max_examples=200, deadline=None)
@given(st.lists(st.floats(0, 1), min_size=0, max_size=5), st.sampled_from([0.02, 0.06, 0.1, 0.2]))
def test_round_to_pixels_respects_overlap(inner, o):
    w = 720
    x = [0.0] + sorted(inner) + [1.0]
    V = len(x) - 1
    min_px = math.ceil(o * w - 1e-9)
    if V * min_px > w:
        with pytest.raises(ValueError):
            round_to_pixels(x, w, o)
        return
    r = round_to_pixels(x, w, o)
    px = [round(v * w) for v in r]
    assert px[0] == 0 and px[-1] == w
    assert all(abs(v * w - p) < 1e-9 for v, p in zip(r, px))
    assert all(b - a >= min_px for a, b in zip(px, px[1:]))
