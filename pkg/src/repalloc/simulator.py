"""Scenario engine: synchronous learning rounds over a wireless topology.

One iteration is one unit of time.  Users sample a cell from their strategy,
stations compute rewards from their own load, users update and thresholds
are applied.  Once every user is pure, users monitor their (noiseless)
reward and restart from a uniform strategy when it moves by more than the
rerun tolerance while their cell is stable.  Optional Poisson arrivals bring
users with an exponential workload (Mb); a user leaves once the volume it
received reaches its workload.
"""

from __future__ import annotations

import csv
import dataclasses
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .fairness import local_opt_check
from .learning import RewardScale, ThresholdRule, apply_thresholds, cus_step, running_rank, step_policy
from .utility import g_alpha, real_time_utility, utility_fn
from .wireless import (
    WIMAX,
    CellEvaluator,
    NetworkModel,
    Topology,
    build_topology,
    draw_user,
    reward_bounds,
)

POLICIES = ("algorithm", "throughput_payoff", "gan_wifi_first", "selfish_best")
STREAMS = {"topology": 0, "arrivals": 1, "noise": 2, "agents": 3}
NOISE_FLOOR = 1e-3
BLOCK = 128

# user modes
INACTIVE, LEARNING, WAITING, MONITORING, FIXED = range(5)


class ConfigError(ValueError):
    pass


@dataclass
class ScenarioConfig:
    n_users: int = 20
    n_wifi: int = 9
    choices: int = 3
    seed: int = 0
    policy: str = "algorithm"
    step: str = "CUS"
    gamma: float = 0.1
    rank_rate: float = 0.05
    delta_m: float = 0.05
    delta_M: float = 0.3
    alpha: float = 0.0
    max_iters: int = 20_000
    converge_window: int = 50
    rerun_tolerance: float = 0.05
    dynamic: bool = False
    horizon: int = 20000
    warmup: int = 1000
    arrival_rate: float = 0.002
    mean_workload: float = 12000.0
    mice_fraction: float = 0.0
    size_ratio: float = 20.0
    mice_to_wifi: bool = False
    noise_var: float = 0.0
    realtime_fraction: float = 0.0
    realtime_threshold: float = 0.5
    max_users: int = 100
    topology: str | None = None
    model: dict = field(default_factory=dict)

    def validate(self) -> "ScenarioConfig":
        def need(cond, msg):
            if not cond:
                raise ConfigError(msg)

        need(self.n_users >= 0 and self.n_wifi >= 0, "n_users and n_wifi must be non-negative")
        need(self.choices >= 1, "choices must be at least 1")
        need(self.topology is not None or self.n_wifi >= self.choices - 1, "not enough WiFi cells for the choices")
        need(self.policy in POLICIES, f"policy must be one of {POLICIES}")
        try:
            step_policy(self.step)
            ThresholdRule(self.delta_m, self.delta_M)
            NetworkModel.from_dict(self.model)
        except (ValueError, TypeError) as e:
            raise ConfigError(str(e)) from None
        need(self.gamma > 0, "gamma must be positive")
        need(0 <= self.rank_rate <= 1, "rank_rate must lie in [0, 1]")
        need(self.alpha >= 0, "alpha must be non-negative")
        need(self.max_iters >= 1 and self.converge_window >= 1, "max_iters and converge_window must be positive")
        need(self.rerun_tolerance >= 0, "rerun_tolerance must be non-negative")
        need(self.horizon >= 1 and 0 <= self.warmup < self.horizon, "need 0 <= warmup < horizon")
        need(self.arrival_rate >= 0 and self.mean_workload > 0 and self.size_ratio > 0, "rates and sizes must be positive")
        need(0 <= self.mice_fraction <= 1 and 0 <= self.realtime_fraction <= 1, "fractions must lie in [0, 1]")
        need(self.noise_var >= 0, "noise variance must be non-negative")
        need(self.realtime_threshold > 0, "real-time threshold must be positive")
        need(self.max_users >= 1, "max_users must be positive")
        return self

    @classmethod
    def from_dict(cls, d: dict) -> "ScenarioConfig":
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = set(d) - names
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        try:
            cfg = cls(**d)
        except TypeError as e:
            raise ConfigError(str(e)) from None
        return cfg.validate()

    @classmethod
    def load(cls, path) -> "ScenarioConfig":
        try:
            data = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as e:
            raise ConfigError(f"cannot read config {path}: {e}") from None
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        return cls.from_dict(data)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def replace(self, **kw) -> "ScenarioConfig":
        return dataclasses.replace(self, **kw).validate()


def stream(seed, name: str, *extra) -> np.random.Generator:
    """Named, independent random stream derived from the master seed."""
    return np.random.default_rng([int(seed), STREAMS[name], *map(int, extra)])


# --------------------------------------------------------------------------
# traffic


@dataclass(frozen=True)
class UserSpec:
    arrival: int
    zone: int
    choices: tuple[int, ...]
    workload: float = math.inf
    kind: str = "elephant"  # elephant or mouse
    realtime: bool = False


def elephant_traffic_share(mice_fraction: float, size_ratio: float) -> float:
    """Expected share of the volume carried by elephants."""
    e = (1 - mice_fraction) * size_ratio
    return e / (e + mice_fraction) if e + mice_fraction > 0 else 0.0


def size_ratio_for_share(mice_fraction: float, share: float) -> float:
    """Elephant/mouse mean size ratio giving the requested elephant volume share."""
    return share * mice_fraction / ((1 - share) * (1 - mice_fraction))


def _draw_class(rng, cfg: ScenarioConfig):
    mouse = rng.random() < cfg.mice_fraction
    mean = cfg.mean_workload / cfg.size_ratio if mouse else cfg.mean_workload
    realtime = rng.random() < cfg.realtime_fraction
    return ("mouse" if mouse else "elephant"), float(rng.exponential(mean)), bool(realtime)


def traffic_mix_process(cfg: ScenarioConfig, seed=None, topology: Topology | None = None) -> list[UserSpec]:
    """Every user of a run: the initial population at t=0 then Poisson arrivals.

    Cell attributes come from the topology stream, times and workloads from
    the arrivals stream.  Static runs get infinite workloads.
    """
    seed = cfg.seed if seed is None else seed
    arr = stream(seed, "arrivals")
    topo = stream(seed, "topology", 1)
    if topology is None:
        topology = build_topology(cfg.n_users, cfg.n_wifi, cfg.choices, stream(seed, "topology").integers(2**63))
    users = []
    for n in range(topology.n_users):
        kind, w, rt = _draw_class(arr, cfg)
        users.append(UserSpec(0, topology.zones[n], topology.choice_sets[n],
                              w if cfg.dynamic else math.inf, kind, rt))
    if cfg.dynamic and cfg.arrival_rate > 0:
        wifi = topology.wifi_cells
        for t in range(1, cfg.horizon):
            for _ in range(arr.poisson(cfg.arrival_rate)):
                kind, w, rt = _draw_class(arr, cfg)
                zone, cs = draw_user(topo, len(wifi), min(cfg.choices, len(wifi) + 1))
                cs = (WIMAX, *(wifi[c - 1] for c in cs[1:]))
                users.append(UserSpec(t, zone, cs, w, kind, rt))
    return users


def scenario_topology(cfg: ScenarioConfig) -> Topology:
    if cfg.topology is not None:
        from .wireless import golden_topology, load_topology

        path = Path(cfg.topology)
        return load_topology(path) if path.suffix == ".json" else golden_topology(cfg.topology)
    return build_topology(cfg.n_users, cfg.n_wifi, cfg.choices, stream(cfg.seed, "topology").integers(2**63))


# --------------------------------------------------------------------------
# baseline policies


def policy_gan_wifi_first(choices) -> int:
    """Index of the first WiFi cell in the choice set, else of the WiMAX cell."""
    for j, c in enumerate(choices):
        if c != WIMAX:
            return j
    return 0


def policy_selfish_best(zone: int, choices, loads, model: NetworkModel) -> int:
    """Index of the cell giving the best own throughput on joining; ties go to the lowest cell id."""
    best, best_u = None, -math.inf
    for j in sorted(range(len(choices)), key=lambda j: choices[j]):
        c = choices[j]
        u = model.throughput(c, zone, int(loads[c]) + 1)
        if u > best_u:
            best, best_u = j, u
    return best


# --------------------------------------------------------------------------
# metrics


@dataclass
class RunMetrics:
    converged: bool
    iterations: int
    throughput: np.ndarray
    active: np.ndarray
    handovers: np.ndarray
    learning: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=int))
    allocation: list[int] | None = None
    topology: Topology | None = None
    episodes: list[int] = field(default_factory=list)
    reruns: int = 0
    departures: int = 0
    utility: float = 0.0
    local_opt: bool | None = None
    kinds: list[str] = field(default_factory=list)
    warmup: int = 0
    log: list = field(default_factory=list, repr=False)

    @property
    def final_throughput(self) -> float:
        return float(self.throughput[-1]) if len(self.throughput) else 0.0

    def mean_throughput(self, warmup: int | None = None) -> float:
        w = self.warmup if warmup is None else warmup
        tail = self.throughput[w:] if len(self.throughput) > w else self.throughput
        return float(np.mean(tail)) if len(tail) else 0.0

    def mean_handovers(self, kind: str | None = None) -> float:
        h = self.handovers if kind is None else self.handovers[[k == kind for k in self.kinds]]
        return float(np.mean(h)) if len(h) else 0.0

    def summary(self) -> dict:
        return {
            "converged": self.converged,
            "iterations": self.iterations,
            "final_throughput": round(self.final_throughput, 6),
            "mean_throughput": round(self.mean_throughput(), 6),
            "mean_handovers": round(self.mean_handovers(), 6),
            "users": len(self.handovers),
            "reruns": self.reruns,
            "departures": self.departures,
            "episodes": len(self.episodes),
            "mean_episode": round(float(np.mean(self.episodes)), 3) if self.episodes else None,
            "utility": round(self.utility, 6),
            "local_opt": self.local_opt,
            "allocation": self.allocation,
        }

    def to_csv(self, path) -> None:
        """Columns: iteration, active_users, learning_users, global_throughput."""
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["iteration", "active_users", "learning_users", "global_throughput"])
            for t, (a, l, x) in enumerate(zip(self.active, self.learning, self.throughput), start=1):
                w.writerow([t, int(a), int(l), f"{x:.6f}"])


def mean_ci(values, z: float = 1.96) -> tuple[float, float]:
    """Mean and half-width of the normal-approximation confidence interval."""
    v = np.asarray(values, dtype=float)
    if len(v) < 2:
        return (float(v.mean()) if len(v) else math.nan), math.nan
    return float(v.mean()), float(z * v.std(ddof=1) / math.sqrt(len(v)))


# --------------------------------------------------------------------------
# engine


def _scale_for(cfg: ScenarioConfig, model: NetworkModel, top: Topology, pol, users) -> RewardScale:
    """Per-user affine reward scale from bounds over the user's own cells and zone."""
    utils = [lambda x: g_alpha(x, cfg.alpha)]
    if cfg.realtime_fraction > 0:
        utils.append(lambda x: real_time_utility(x, cfg.realtime_threshold))
    n_cells = max(top.n_cells, max((max(u.choices) for u in users), default=0) + 1)
    if cfg.dynamic:
        loads = np.full(n_cells, cfg.max_users)
        zones = range(len(model.wimax.zone_rates))
    else:
        loads = np.zeros(n_cells, dtype=int)
        for u in users:
            loads[list(u.choices)] += 1
        zones = sorted({u.zone for u in users})
    cache = {}
    lo, hi = np.zeros(len(users)), np.zeros(len(users))
    for n, u in enumerate(users):
        key = (u.choices, u.zone)
        if key not in cache:
            mine = np.zeros(n_cells, dtype=int)
            mine[list(u.choices)] = loads[list(u.choices)]
            if cfg.policy == "throughput_payoff":
                vals = [float(U(np.array(model.throughput(c, u.zone, p))))
                        for c in u.choices for p in range(1, int(mine[c]) + 1) for U in utils]
                cache[key] = (min(vals), max(vals))
            else:
                cache[key] = reward_bounds(model, mine, zones, utils, own_zones=[u.zone])
        lo[n], hi[n] = cache[key]
    hi = np.where(hi > lo, hi, lo + 1.0)
    return RewardScale.for_bounds(lo, hi, pol)


def run_scenario(cfg: ScenarioConfig, users: list[UserSpec] | None = None,
                 topology: Topology | None = None, keep_log: bool = False) -> RunMetrics:
    """Run one scenario; deterministic given the config (and the optional event stream).

    With ``keep_log`` the metrics carry, for every simulated iteration, the
    realized choice index of each user (-1 when absent).
    """
    cfg.validate()
    model = NetworkModel.from_dict(cfg.model)
    top = topology if topology is not None else scenario_topology(cfg)
    if users is None:
        users = traffic_mix_process(cfg, topology=top)
    pol = step_policy(cfg.step)
    if pol.kind == "CUS":
        # the 1/reward_max bound already keeps steps admissible; the cap only guards reward_max == 0
        pol = dataclasses.replace(pol, gamma=cfg.gamma, cap=1e9)
    rank_rate = cfg.rank_rate if pol.kind == "CUS" else 0.0
    rule = ThresholdRule(cfg.delta_m, cfg.delta_M)
    scale = _scale_for(cfg, model, top, pol, users)
    learn = cfg.policy in ("algorithm", "throughput_payoff")
    repercussion = cfg.policy == "algorithm"

    N = len(users)
    width = max((len(u.choices) for u in users), default=1)
    lookup = np.full((N, width), -1, dtype=int)
    n_choices = np.array([len(u.choices) for u in users], dtype=int)
    for n, u in enumerate(users):
        lookup[n, :len(u.choices)] = u.choices
    zones = np.array([u.zone for u in users], dtype=int)
    arrival = np.array([u.arrival for u in users], dtype=int)
    remaining = np.array([u.workload for u in users], dtype=float)
    rt = np.array([u.realtime for u in users], dtype=bool)
    mice = np.array([u.kind == "mouse" for u in users], dtype=bool)
    U = utility_fn(cfg.alpha, rt, cfg.realtime_threshold)
    n_cells = max(top.n_cells, int(lookup.max(initial=0)) + 1)
    ev = CellEvaluator(model, n_cells, p_max=max(8, min(N, 256)))

    mode = np.full(N, INACTIVE)
    q = np.zeros((N, width))
    choice = np.full(N, -1)
    last = np.full(N, -1)
    handovers = np.zeros(N, dtype=int)
    rmax = np.zeros(N)
    rmean = np.full(N, np.nan)
    rdev = np.zeros(N)
    t_local = np.zeros(N, dtype=int)
    baseline = np.zeros(N)
    agent_rngs: dict[int, np.random.Generator] = {}
    ubuf = np.zeros((N, BLOCK))
    drawn = np.zeros(N, dtype=int)
    noise_rng = stream(cfg.seed, "noise")
    sigma = math.sqrt(cfg.noise_var)
    valid = np.arange(width)[None, :] < n_choices[:, None]

    horizon = cfg.horizon if cfg.dynamic else cfg.max_iters + cfg.converge_window
    thr, act, learning = [], [], []
    log = []
    episodes = []
    reruns = departures = 0
    settled_since = None
    unsettled_since = 0
    converged_at = None
    by_arrival = {}
    for n in range(N):
        by_arrival.setdefault(int(arrival[n]), []).append(n)

    def restart(idx):
        q[idx] = valid[idx] / n_choices[idx, None]
        rmax[idx] = 0.0
        rmean[idx] = np.nan
        rdev[idx] = 0.0
        t_local[idx] = 0
        mode[idx] = LEARNING

    next_arrivals = sorted(by_arrival)
    t = -1
    while t + 1 < horizon:
        t += 1
        # arrivals
        for n in by_arrival.get(t, ()):
            agent_rngs[n] = stream(cfg.seed, "agents", n)
            fixed = not learn or (cfg.mice_to_wifi and mice[n])
            if fixed:
                if cfg.policy == "selfish_best":
                    loads = ev.loads(np.where(mode != INACTIVE, choice_cells(lookup, choice), -1))
                    j = policy_selfish_best(int(zones[n]), users[n].choices, loads, model)
                else:
                    j = policy_gan_wifi_first(users[n].choices)
                q[n] = 0.0
                q[n, j] = 1.0
                choice[n] = j
                mode[n] = FIXED
            else:
                restart([n])
        active = mode != INACTIVE
        # only learning users draw, each from its own stream
        lrn = np.flatnonzero(mode == LEARNING)
        if len(lrn):
            k = drawn[lrn] % BLOCK
            for n in lrn[k == 0]:
                ubuf[n] = agent_rngs[n].random(BLOCK)
            drawn[lrn] += 1
            uu = ubuf[lrn, k]
            cum = np.cumsum(q[lrn], axis=1)
            lastpos = width - 1 - np.argmax(q[lrn][:, ::-1] > 0, axis=1)
            cum[np.arange(len(lrn)), lastpos] = np.inf
            choice[lrn] = np.argmax(uu[:, None] < cum, axis=1)
        cells = np.where(active, choice_cells(lookup, choice), -1)
        moved = active & (last >= 0) & (choice != last)
        handovers += moved
        last = np.where(active, choice, last)
        if keep_log:
            log.append((t, np.where(active, choice, -1)))

        u_model = ev.throughputs(cells, zones)
        thr.append(float(np.nansum(u_model)))
        act.append(int(active.sum()))
        if learn:
            measured = None
            if sigma > 0 and len(lrn):
                noise = noise_rng.normal(0.0, sigma, N)
                measured = np.where(active, np.maximum(u_model + noise, NOISE_FLOOR), np.nan)
            if repercussion:
                r_raw, _ = ev.rewards(cells, zones, U, measured)
            else:
                src = u_model if measured is None else measured
                r_raw = np.where(active, U(np.where(active, src, 1.0)), np.nan)
            upd = np.flatnonzero(mode == LEARNING)
            if len(upd):
                t_local[upd] += 1
                if rank_rate > 0:
                    r, rmean[upd], rdev[upd] = running_rank(r_raw[upd], rmean[upd], rdev[upd], rank_rate)
                else:
                    r = np.clip((r_raw[upd] + scale.shift[upd]) * scale.factor[upd], 0.0, None)
                rmax[upd] = np.maximum(rmax[upd], r)
                ch = choice[upd]
                qc = q[upd, ch]
                if pol.kind == "CUS":
                    eps = cus_step(qc, rmax[upd], pol.gamma, pol.cap)
                elif pol.kind == "CSS":
                    eps = np.full(len(upd), pol.eps)
                else:
                    eps = np.array([pol.epsilon(int(tl)) for tl in t_local[upd]])
                a = np.minimum(eps * r, 1.0)
                qn = (1.0 - a)[:, None] * q[upd]
                qn[np.arange(len(upd)), ch] += a
                qn = apply_thresholds(qn, rule)
                q[upd] = qn
                pure = qn.max(axis=1) == 1.0
                mode[upd[pure]] = WAITING
                # a pure row keeps its realized action
                choice[upd[pure]] = np.argmax(qn[pure], axis=1)

            # monitoring starts once every user is pure; checks run on stable cells
            cells = np.where(active, choice_cells(lookup, choice), -1)
            all_pure = not np.any(mode == LEARNING)
            unstable = np.bincount(cells[mode == LEARNING], minlength=n_cells) > 0
            watch = (mode == MONITORING) & ~unstable[np.maximum(cells, 0)]
            if all_pure or watch.any():
                if repercussion:
                    r_clean, _ = ev.rewards(cells, zones, U)
                else:
                    r_clean = np.where(active, U(np.where(active, ev.throughputs(cells, zones), 1.0)), np.nan)
                m = np.flatnonzero(watch)
                diff = np.abs(r_clean[m] - baseline[m])
                trig = m[diff > cfg.rerun_tolerance * np.abs(baseline[m]) + 1e-12]
                if len(trig):
                    restart(trig)
                    reruns += len(trig)
                elif all_pure:
                    w = mode == WAITING
                    baseline[w] = r_clean[w]
                    mode[w] = MONITORING

        # departures
        if cfg.dynamic:
            remaining[active] -= np.nan_to_num(u_model[active])
            gone = active & (remaining <= 0)
            if gone.any():
                mode[gone] = INACTIVE
                choice[gone] = -1
                departures += int(gone.sum())

        now_active = mode != INACTIVE
        learning.append(int(np.sum(mode == LEARNING)))
        settled = bool(np.all((mode[now_active] == MONITORING) | (mode[now_active] == FIXED)))
        if settled:
            if settled_since is None:
                settled_since = t
                episodes.append(t + 1 - unsettled_since)
        else:
            if settled_since is not None:
                unsettled_since = t
            settled_since = None
        if not cfg.dynamic:
            if settled and t + 1 - settled_since >= cfg.converge_window:
                converged_at = settled_since + 1
                break
            if t + 1 >= cfg.max_iters and settled_since is None:
                break
        elif settled:
            # nothing changes until the next arrival or departure: skip ahead
            stop = next((a for a in next_arrivals if a > t), horizon)
            live = np.flatnonzero(now_active)
            rate = np.nan_to_num(ev.throughputs(np.where(now_active, choice_cells(lookup, choice), -1), zones)[live])
            if len(live) and np.all(rate > 0):
                stop = min(stop, t + int(np.min(np.ceil(remaining[live] / rate))))
            quiet = max(0, min(stop, horizon) - t - 1)
            if quiet and len(live) and np.all(rate > 0):
                thr.extend([float(rate.sum())] * quiet)
                act.extend([len(live)] * quiet)
                learning.extend([0] * quiet)
                remaining[live] -= quiet * rate
                t += quiet
            elif quiet and not len(live):
                thr.extend([0.0] * quiet)
                act.extend([0] * quiet)
                learning.extend([0] * quiet)
                t += quiet

    n_run = len(thr)
    final_active = mode != INACTIVE
    alloc = None
    lopt = None
    converged = converged_at is not None if not cfg.dynamic else settled_since is not None
    if not cfg.dynamic:
        alloc = [int(c) for c in choice]
        if converged:
            sub = Topology(zones.tolist(), top.wifi_cells, [u.choices for u in users])
            lopt = local_opt_check(sub, alloc, cfg.alpha, model)[0] if not rt.any() else None
    cells = np.where(final_active, choice_cells(lookup, choice), -1)
    u_fin = ev.throughputs(cells, zones)
    util = float(np.nansum(np.where(final_active, U(np.where(final_active, u_fin, 1.0)), np.nan)))
    return RunMetrics(
        converged=bool(converged),
        iterations=int(converged_at if converged_at is not None else n_run),
        throughput=np.array(thr),
        active=np.array(act),
        learning=np.array(learning),
        handovers=handovers,
        allocation=alloc,
        topology=top,
        episodes=episodes,
        reruns=reruns,
        departures=departures,
        utility=util,
        local_opt=lopt,
        kinds=[u.kind for u in users],
        warmup=cfg.warmup if cfg.dynamic else 0,
        log=log,
    )


def choice_cells(lookup: np.ndarray, choice: np.ndarray) -> np.ndarray:
    out = lookup[np.arange(len(choice)), np.maximum(choice, 0)]
    return np.where(choice >= 0, out, -1)


# --------------------------------------------------------------------------
# comparisons


def compare_policies(cfg: ScenarioConfig, policies=POLICIES) -> dict[str, RunMetrics]:
    """Run several policies on the same topology and event stream."""
    top = scenario_topology(cfg)
    users = traffic_mix_process(cfg, topology=top)
    return {p: run_scenario(cfg.replace(policy=p), users, top) for p in policies}


def mice_policy_compare(cfg: ScenarioConfig) -> dict:
    """All users learn vs. mice go straight to WiFi, on one event stream.

    Returns the throughput gain (percent) of the second variant and the mean
    handovers of both.
    """
    top = scenario_topology(cfg)
    users = traffic_mix_process(cfg, topology=top)
    a = run_scenario(cfg.replace(policy="algorithm", mice_to_wifi=False), users, top)
    b = run_scenario(cfg.replace(policy="algorithm", mice_to_wifi=True), users, top)
    ta, tb = a.mean_throughput(), b.mean_throughput()
    return {
        "all_learn_throughput": ta,
        "mice_wifi_throughput": tb,
        "gain_percent": 100.0 * (tb - ta) / ta if ta > 0 else 0.0,
        "all_learn_handovers": a.mean_handovers(),
        "mice_wifi_handovers": b.mean_handovers(),
        "runs": (a, b),
    }

