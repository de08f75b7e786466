"""Acceptance checks, one test per criterion.

Each test records a short measurement string; the summary hook in
conftest.py prints one PASS/FAIL line per criterion at the end of the run.
"""

import time
from pathlib import Path

import numpy as np
import pytest

from repalloc.dynamics import TwoByTwoPotential, replicator_field, run_to_limit, two_by_two_basin_check
from repalloc.fairness import local_opt_check, local_search, objective
from repalloc.game import (
    expected_payoff,
    from_matrix,
    golden_game,
    is_pure_nash,
    is_repercussion_game,
    potential_mixed,
    potential_pure,
    pure_nash_set,
    random_allocation_game,
    recover_base_payoffs,
    repercussion_transform,
    to_matrix,
)
from repalloc.learning import RewardScale, StepPolicy, ThresholdRule, run_learning, sample_increments
from repalloc.simulator import ScenarioConfig, compare_policies, run_scenario
from repalloc.wireless import DEFAULT_MODEL, golden_allocations, golden_topology, wifi_goodput, wimax_goodput

DYNAMIC = Path(__file__).resolve().parents[1] / "configs" / "dynamic.json"


def criterion(number, title):
    return pytest.mark.criterion(number, title)


class Timer:
    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.t0


def random_interior(rng, game):
    return [rng.dirichlet(np.ones(len(a))) for a in game.action_sets]


@criterion(1, "golden transform")
def test_golden_transform(record_property):
    with Timer() as tm:
        mismatches = []
        for name in ("three_player", "two_by_three"):
            base = golden_game(name)
            computed = to_matrix(repercussion_transform(base))
            printed = to_matrix(golden_game(f"{name}_companion"))
            for s, a, b in zip(base.profiles(), computed, printed):
                mismatches += [(name, s, n, a[n], b[n]) for n in range(base.n_players) if a[n] != b[n]]
    record_property("detail", f"{len(mismatches)} mismatching entries {mismatches}; {tm.elapsed:.3f}s")
    assert tm.elapsed < 1
    assert not mismatches


@criterion(2, "characterization and round trip")
def test_characterization(record_property):
    rng = np.random.default_rng(2)
    with Timer() as tm:
        three = golden_game("three_player")
        two3 = golden_game("two_by_three")
        accepted = [is_repercussion_game(repercussion_transform(three))[0],
                    is_repercussion_game(golden_game("two_by_three_companion"))[0]]
        family = []
        for _ in range(200):
            A, b, C, D, c, B = rng.integers(-20, 21, size=6).tolist()
            g = from_matrix([["A", "B"], ["A", "B"]], [[A + b - C, A], [b, B], [c, C], [D + c - B, D]])
            family.append(is_repercussion_game(g)[0])
        raw_rejected = not is_repercussion_game(two3)[0]
        round_trip = all(
            to_matrix(repercussion_transform(recover_base_payoffs(repercussion_transform(g)))) ==
            to_matrix(repercussion_transform(g)) for g in (three, two3))
        printed_three = is_repercussion_game(golden_game("three_player_companion"))[0]
    record_property("detail", f"companions accepted {accepted}, 2x2 family {sum(family)}/200, raw 2x3 rejected "
                              f"{raw_rejected}, round trip {round_trip}, printed 3-player matrix accepted "
                              f"{printed_three}; {tm.elapsed:.3f}s")
    assert all(accepted) and all(family) and raw_rejected and round_trip
    assert tm.elapsed < 1


@criterion(3, "potential gradient")
def test_potential_gradient(record_property):
    rng = np.random.default_rng(3)
    h = 1e-4
    worst = 0.0
    with Timer() as tm:
        for _ in range(100):
            g = random_allocation_game(rng, int(rng.integers(1, 4)), max_actions=3)
            c = repercussion_transform(g)
            q = random_interior(rng, g)
            for n, acts in enumerate(g.action_sets):
                for k, i in enumerate(acts):
                    up = [r.copy() for r in q]
                    dn = [r.copy() for r in q]
                    up[n][k] += h
                    dn[n][k] -= h
                    fd = (potential_mixed(g, up) - potential_mixed(g, dn)) / (2 * h)
                    worst = max(worst, abs(fd - expected_payoff(c, q, n, i)))
    record_property("detail", f"max |dF - f| = {worst:.2e}; {tm.elapsed:.2f}s")
    assert worst <= 1e-9
    assert tm.elapsed < 10


@criterion(4, "pure Nash sets")
def test_pure_nash_sets(record_property):
    rng = np.random.default_rng(4)
    with Timer() as tm:
        two3 = golden_game("two_by_three")
        nash = set(pure_nash_set(repercussion_transform(two3)))
        pots = {s: potential_pure(two3, s) for s in nash}
        raw_three = pure_nash_set(golden_game("three_player"))
        empty = 0
        for _ in range(1000):
            g = random_allocation_game(rng, int(rng.integers(1, 5)), max_actions=3)
            empty += not pure_nash_set(repercussion_transform(g))
    record_property("detail", f"2x3 companion {sorted(nash)} potentials {pots}, raw 3-player {raw_three}, "
                              f"random games without pure Nash {empty}/1000; {tm.elapsed:.1f}s")
    assert nash == {("A", "A"), ("B", "C")}
    assert pots == {("A", "A"): 9, ("B", "C"): 10}
    assert raw_three == []
    assert empty == 0
    assert tm.elapsed < 30


@criterion(5, "ODE trajectories and basins")
def test_ode_trajectories(record_property):
    rng = np.random.default_rng(5)
    with Timer() as tm:
        c3 = repercussion_transform(golden_game("three_player"))
        tr3, lim3 = run_to_limit(c3, [np.array([0.5, 0.5])] * 3)
        c23 = repercussion_transform(golden_game("two_by_three"))
        tr23, lim23 = run_to_limit(c23, [np.array([0.5, 0.5]), np.full(3, 1 / 3)])
        monotone = tr3.potential_monotone(1e-6) and tr23.potential_monotone(1e-6)
        seen = ok = 0
        while seen < 100:
            g = random_allocation_game(rng, 2, max_actions=2)
            if [len(a) for a in g.action_sets] != [2, 2]:
                continue
            c = repercussion_transform(g)
            pot = TwoByTwoPotential.from_game(c)
            maxima = pot.local_maxima()
            vals = pot.corner_values()
            if len(maxima) != 2 or vals[maxima[0]] == vals[maxima[1]]:
                continue
            seen += 1
            ok += two_by_two_basin_check(c)
    record_property("detail", f"3-player -> {lim3.profile}, 2x3 -> {lim23.profile} "
                              f"(final {np.round(tr23.states[-1], 4).tolist()}), monotone {monotone}, "
                              f"2x2 global maximum reached {ok}/{seen}; {tm.elapsed:.1f}s")
    assert lim3.profile == ("A", "A", "A")
    assert lim23.profile == ("A", "A")
    np.testing.assert_allclose(tr23.states[-1], [1, 0, 1, 0, 0], atol=1e-3)
    assert monotone
    assert ok == seen
    assert tm.elapsed < 60


@criterion(6, "learning convergence")
def test_learning_convergence(record_property):
    c = repercussion_transform(golden_game("two_by_three"))
    nash = set(pure_nash_set(c))
    rule = ThresholdRule(0.01, 0.05)
    at_nash = off_nash = 0
    with Timer() as tm:
        for seed in range(200):
            res = run_learning(c, StepPolicy("CSS", eps=0.01), rule=rule, seed=seed, max_iters=20_000)
            if res.converged:
                if res.profile in nash and is_pure_nash(c, res.profile):
                    at_nash += 1
                else:
                    off_nash += 1
    record_property("detail", f"pure Nash {at_nash}/200, non-Nash stops {off_nash}; {tm.elapsed:.1f}s")
    assert at_nash >= 190
    assert off_nash == 0
    assert tm.elapsed < 120


@criterion(7, "drift of the learning rule")
def test_drift(record_property):
    rng = np.random.default_rng(7)
    eps = 0.1
    pol = StepPolicy("CSS", eps=eps)
    worst = 0.0
    with Timer() as tm:
        for _ in range(10):
            c = repercussion_transform(random_allocation_game(rng, int(rng.integers(2, 4)), max_actions=3))
            scale = RewardScale.for_game(c, pol)
            q = random_interior(rng, c)
            field = replicator_field(c, q)
            mean, se = sample_increments(c, q, eps, scale, 100_000, rng)
            for n in range(c.n_players):
                target = eps * scale.factor[n] * field[n]
                gap = np.abs(mean[n] - target)
                # a lone action never moves: spread is rounding noise, checked exactly
                fixed = se[n] <= 1e-12
                assert np.all(gap[fixed] <= 1e-12)
                if not fixed.all():
                    worst = max(worst, float(np.max(gap[~fixed] / se[n][~fixed])))
    record_property("detail", f"largest deviation {worst:.2f} standard errors; {tm.elapsed:.1f}s")
    assert worst <= 3
    assert tm.elapsed < 60


@criterion(8, "wireless anchors")
def test_wireless_anchors(record_property):
    with Timer() as tm:
        wifi = [wifi_goodput(DEFAULT_MODEL, p) for p in (1, 2, 3)]
        zones = DEFAULT_MODEL.wimax.zone_rates
        shared = (wimax_goodput(DEFAULT_MODEL, "QAM64 2/3", 4), wimax_goodput(DEFAULT_MODEL, "QAM16 1/2", 4))
    record_property("detail", f"wifi {wifi}, zones {zones}, shared {shared}")
    assert wifi == [2.245, 1.225, 0.824]
    assert zones == (9.58, 8.88, 6.80, 4.50, 3.37, 2.21, 1.65, 1.08)
    assert shared == pytest.approx((2.22, 1.125), abs=1e-9)
    assert tm.elapsed < 1


@criterion(9, "fairness scenario")
def test_fairness_scenario(record_property):
    with Timer() as tm:
        top = golden_topology()
        alloc = golden_allocations()
        eff = objective(top, alloc["efficient"], 0)
        fair = objective(top, alloc["fair"], 0)
        loads = (top.wifi_loads(alloc["efficient"]), top.wifi_loads(alloc["fair"]))
        cert = (local_opt_check(top, alloc["efficient"], 0)[0], local_opt_check(top, alloc["fair"], 2)[0])
    record_property("detail", f"efficient {eff:.3f}, fair {fair:.3f}, loads {loads}, local optima {cert}; "
                              f"{tm.elapsed:.2f}s")
    assert eff == pytest.approx(31.29, abs=0.02)
    assert fair == pytest.approx(28.34, abs=0.02)
    assert loads == ([3, 2, 3, 2, 1, 2, 1, 2, 3], [1, 2, 2, 2, 2, 2, 1, 2, 2])
    assert cert == (True, True)
    assert tm.elapsed < 5


@criterion(10, "step heuristics")
def test_step_heuristics(record_property):
    iters, ratios, cus_thr = [], [], []
    css_conv = css_better = css_better_all = 0
    with Timer() as tm:
        for seed in range(30):
            cfg = ScenarioConfig(n_users=(20, 30, 40)[seed % 3], seed=seed)
            cus = run_scenario(cfg)
            best = local_search(cus.topology, 0, starts=30, seed=seed).objective
            iters.append(cus.iterations)
            ratios.append(cus.final_throughput / best)
            css = run_scenario(cfg.replace(step="CSS_L"))
            better = css.final_throughput >= cus.final_throughput - 1e-9
            css_better_all += better
            if css.converged:
                css_conv += 1
                css_better += better
    share = css_better / css_conv if css_conv else float("nan")
    record_property("detail", f"CUS mean iterations {np.mean(iters):.1f}, mean throughput ratio "
                              f"{np.mean(ratios):.3f} (min {np.min(ratios):.3f}); CSS_L converged {css_conv}/30, "
                              f">= CUS when converged {css_better}/{css_conv}, >= CUS overall {css_better_all}/30; "
                              f"{tm.elapsed:.0f}s")
    assert np.mean(iters) <= 100
    assert np.mean(ratios) >= 0.9
    assert css_conv > 0 and share >= 0.7
    assert tm.elapsed < 600


@criterion(11, "baseline ordering")
def test_baseline_ordering(record_property):
    base = ScenarioConfig.load(DYNAMIC)
    both = vs_selfish = vs_gan = vs_payoff = 0
    with Timer() as tm:
        for seed in range(30):
            runs = compare_policies(base.replace(seed=seed))
            thr = {p: m.mean_throughput() for p, m in runs.items()}
            a = thr["algorithm"]
            s, g = a >= thr["selfish_best"], a >= thr["gan_wifi_first"]
            vs_selfish += s
            vs_gan += g
            both += s and g
            vs_payoff += a >= thr["throughput_payoff"]
    record_property("detail", f"algorithm >= selfish and GAN {both}/30 (selfish {vs_selfish}, GAN {vs_gan}), "
                              f"repercussion >= throughput payoff {vs_payoff}/30; {tm.elapsed:.0f}s")
    assert both >= 21
    assert vs_payoff >= 16
    assert tm.elapsed < 600


@criterion(12, "handover scalability")
def test_handover_scalability(record_property):
    means = {}
    with Timer() as tm:
        for choices in (2, 3):
            for n in (20, 50, 100):
                h = [run_scenario(ScenarioConfig(n_users=n, choices=choices, seed=s)).mean_handovers()
                     for s in range(20)]
                means[(choices, n)] = round(float(np.mean(h)), 2)
    record_property("detail", f"mean handovers {means}; {tm.elapsed:.0f}s")
    assert all(v <= 20 for (c, _), v in means.items() if c == 2)
    assert all(v <= 25 for (c, _), v in means.items() if c == 3)
    assert tm.elapsed < 600
