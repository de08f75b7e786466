import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from repalloc.game import is_repercussion_game, mask_of, repercussion_reward, repercussion_transform
from repalloc.utility import g_alpha, real_time_utility, utility_fn
from repalloc.wireless import (
    DEFAULT_MODEL,
    WIMAX,
    CellEvaluator,
    NetworkModel,
    Topology,
    WiFiModel,
    WiMAXModel,
    alpha_station_rewards,
    build_topology,
    golden_topology,
    load_topology,
    reward_bounds,
    save_topology,
    station_rewards,
    topology_game,
    wifi_goodput,
    wimax_goodput,
)


def test_wifi_anchors():
    assert [wifi_goodput(DEFAULT_MODEL, p) for p in (1, 2, 3)] == [2.245, 1.225, 0.824]
    assert wifi_goodput(DEFAULT_MODEL, 5) == pytest.approx(2.472 * 0.97**2 / 5)
    with pytest.raises(ValueError):
        wifi_goodput(DEFAULT_MODEL, 0)


def test_wifi_shape():
    w = WiFiModel()
    per_user = [w.goodput(p) for p in range(1, 60)]
    assert all(b < a for a, b in zip(per_user, per_user[1:]))
    cap = [w.capacity(p) for p in range(1, 60)]
    assert int(np.argmax(cap)) + 1 == 3
    assert all(b < a for a, b in zip(cap[2:], cap[3:]))
    assert all(b > a for a, b in zip(cap[:2], cap[1:3]))


def test_wifi_formula_mode():
    w = WiFiModel(mode="formula")
    vals = [w.goodput(p) for p in range(1, 10)]
    assert all(v > 0 for v in vals) and all(b < a for a, b in zip(vals, vals[1:]))
    t_tbo, t_w = w.collision_times(1)
    assert t_w == 0 and w.goodput(1) == pytest.approx(8.0 / (1.785 + 1.091 + 2 * t_tbo))
    with pytest.raises(ValueError):
        WiFiModel(mode="bianchi")
    with pytest.raises(ValueError):
        WiFiModel(table=(1.0, 2.0))


def test_wimax_anchors():
    m = WiMAXModel()
    assert m.zone_rates == (9.58, 8.88, 6.80, 4.50, 3.37, 2.21, 1.65, 1.08)
    assert wimax_goodput(DEFAULT_MODEL, "QAM64 3/4", 1) == 9.58
    assert wimax_goodput(DEFAULT_MODEL, "QAM64 2/3", 4) == pytest.approx(2.22)
    assert wimax_goodput(DEFAULT_MODEL, "QAM16 1/2", 4) == pytest.approx(1.125)
    assert wimax_goodput(DEFAULT_MODEL, 5, 1) == 2.21
    with pytest.raises(ValueError):
        wimax_goodput(DEFAULT_MODEL, 8, 1)


@given(st.lists(st.integers(0, 7), min_size=1, max_size=12))
def test_wimax_aggregate_bound(zones):
    agg = sum(wimax_goodput(DEFAULT_MODEL, z, len(zones)) for z in zones)
    assert agg <= 9.58 + 1e-12
    assert math.isclose(agg, 9.58) == all(z == 0 for z in zones)


def test_build_topology():
    t = build_topology(30, 9, 3, seed=4)
    assert t == build_topology(30, 9, 3, seed=4)
    assert t != build_topology(30, 9, 3, seed=5)
    assert t.standard and all(len(set(cs)) == 3 for cs in t.choice_sets)
    assert all(0 <= z < 8 for z in t.zones)
    solo = build_topology(5, 3, 1, seed=0)
    assert all(cs == (WIMAX,) for cs in solo.choice_sets)
    with pytest.raises(ValueError):
        build_topology(5, 1, 3, seed=0)
    with pytest.raises(ValueError):
        build_topology(5, 3, 0, seed=0)


def test_generated_topology_is_frozen():
    frozen = golden_topology("generated20")
    assert build_topology(20, 9, 3, seed=2024) == frozen


def test_fairness_topology_transcription():
    t = golden_topology()
    assert t.n_users == 20 and t.wifi_cells == tuple(range(1, 10)) and t.standard
    assert t.choice_sets[0] == (0, 8, 1) and t.zones[0] == 1
    assert t.choice_sets[15] == (0, 6, 5) and t.zones[15] == 0
    assert t.choice_sets[19] == (0, 8, 4) and t.zones[19] == 3


def test_topology_round_trip(tmp_path):
    t = build_topology(7, 4, 2, seed=1)
    save_topology(t, tmp_path / "t.json")
    assert load_topology(tmp_path / "t.json") == t
    flagged = Topology([0, 0], [1, 2], [[1, 2], [0]])
    assert not flagged.standard
    with pytest.raises(ValueError):
        Topology([0], [1], [[1, 1]])
    with pytest.raises(ValueError):
        Topology([0], [1], [[5]])


def test_station_reward_examples():
    assert station_rewards(DEFAULT_MODEL, 3, [0]) == pytest.approx([2.245])
    np.testing.assert_allclose(station_rewards(DEFAULT_MODEL, 3, [0, 4]), [0.205, 0.205])
    r = station_rewards(DEFAULT_MODEL, WIMAX, [0, 5])
    assert r[0] == pytest.approx(9.58 / 2 - (2.21 - 2.21 / 2))
    assert r[0] == pytest.approx(3.685)


def test_alpha_station_rewards():
    zones = [0, 3, 6]
    np.testing.assert_allclose(alpha_station_rewards(DEFAULT_MODEL, WIMAX, zones, 0),
                               station_rewards(DEFAULT_MODEL, WIMAX, zones))
    assert alpha_station_rewards(DEFAULT_MODEL, 2, [1], 2)[0] == pytest.approx(-1 / 2.245)
    g = lambda x: -1 / x
    expect = g(1.225) - (g(2.245) - g(1.225))
    np.testing.assert_allclose(alpha_station_rewards(DEFAULT_MODEL, 2, [1, 1], 2), [expect, expect])


def test_station_rewards_match_definition():
    rng = np.random.default_rng(0)
    top = build_topology(6, 2, 3, seed=3)
    for alpha in (0, 1, 2):
        base = topology_game(top, alpha=alpha)
        for _ in range(30):
            cell = int(rng.integers(3))
            users = [n for n in range(6) if cell in top.choice_sets[n] and rng.random() < 0.7]
            if not users:
                continue
            got = alpha_station_rewards(DEFAULT_MODEL, cell, [top.zones[n] for n in users], alpha)
            want = [repercussion_reward(base, n, cell, mask_of(users)) for n in users]
            np.testing.assert_allclose(got, want, atol=1e-12)


def test_cell_games_satisfy_symmetry():
    for seed in range(5):
        top = build_topology(5, 2, 2, seed=seed)
        for alpha in (0, 2):
            ok, witness = is_repercussion_game(repercussion_transform(topology_game(top, alpha=alpha)))
            assert ok, witness


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from([0.0, 1.0, 2.0]), st.booleans(), st.booleans())
def test_vectorized_rewards_match_station(seed, alpha, realtime, noisy):
    rng = np.random.default_rng(seed)
    n, n_cells = 25, 5
    cells = rng.integers(-1, n_cells, size=n)
    zones = rng.integers(0, 8, size=n)
    rt = rng.random(n) < 0.4 if realtime else None
    U = utility_fn(alpha, rt, 0.5)
    ev = CellEvaluator(DEFAULT_MODEL, n_cells, p_max=4)
    u = ev.throughputs(cells, zones)
    measured = np.where(cells >= 0, np.maximum(u + rng.normal(0, 0.3, n), 0.05), np.nan) if noisy else None
    r, _ = ev.rewards(cells, zones, U, measured)
    for c in range(n_cells):
        idx = np.flatnonzero(cells == c)
        if len(idx) == 0:
            continue
        own_rt = rt[idx] if rt is not None else np.zeros(len(idx), bool)
        p = len(idx)
        cur = u[idx] if measured is None else measured[idx]
        minus = [DEFAULT_MODEL.throughput(c, zones[m], p - 1) for m in idx] if p > 1 else []
        f = lambda x, k: real_time_utility(x, 0.5) if own_rt[k] else g_alpha(x, alpha)
        own = np.array([f(cur[k], k) for k in range(p)])
        d = np.array([f(minus[k], k) - own[k] for k in range(p)]) if p > 1 else np.zeros(p)
        want = own - (d.sum() - d)
        np.testing.assert_allclose(r[idx], want, atol=1e-10)
    assert np.all(np.isnan(r[cells < 0]))


def test_reward_bounds_contain_rewards():
    rng = np.random.default_rng(5)
    top = build_topology(15, 4, 3, seed=9)
    for alpha in (0.0, 2.0):
        U = lambda x: g_alpha(x, alpha)
        lo, hi = reward_bounds(DEFAULT_MODEL, top.max_loads(), top.zones, [U])
        ev = CellEvaluator(DEFAULT_MODEL, top.n_cells)
        for _ in range(200):
            alloc = [int(rng.integers(3)) for _ in range(15)]
            r, _ = ev.rewards(top.cells_of(alloc), np.array(top.zones), U)
            assert lo - 1e-12 <= r.min() and r.max() <= hi + 1e-12
    lo, hi = reward_bounds(DEFAULT_MODEL, [1, 1], range(8), [lambda x: x])
    assert hi == 9.58 and lo == 1.08


def test_model_config():
    m = NetworkModel.from_dict({"wifi": {"table": [3.0, 1.5], "decay": 0.9}})
    assert m.wifi.goodput(2) == 1.5 and m.wifi.goodput(3) == pytest.approx(3.0 * 0.9 / 3)
    assert NetworkModel.from_dict(m.to_dict()) == m
    with pytest.raises(ValueError):
        NetworkModel.from_dict({"lte": {}})


def test_utilities():
    assert g_alpha(5, 0) == 5 and g_alpha(2, 2) == -0.5 and g_alpha(math.e, 1) == pytest.approx(1)
    with pytest.raises(ValueError):
        g_alpha(0.0, 1)
    assert real_time_utility(0.4, 0.5) == 0
    assert real_time_utility(0.5, 0.5) == pytest.approx(1 - math.exp(-0.5))
    assert real_time_utility(60, 0.5) == pytest.approx(1)
    with pytest.raises(ValueError):
        real_time_utility(1, 0)
