"""Distributed stochastic learning of pure equilibria.

Every agent keeps a probability row over its actions, samples one action per
round, receives a non-negative reward and moves its row towards the sampled
action by ``eps * reward``.  Agents only see their own choice and reward.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .game import AllocationGame, is_pure_nash, potential_pure


@dataclass(frozen=True)
class StepPolicy:
    """Step-size schedule.

    kinds: ``CSS`` (constant ``eps``), ``CUS`` (largest step keeping every
    coordinate change below ``gamma``, capped at ``cap``), ``DSSSA``
    (``numerator / (((t-1) mod cycle) + 1)``) and ``DSSCSS``
    (``numerator / t`` before ``switch``, then ``plateau``).  ``t`` starts at 1.
    """

    kind: str
    eps: float = 0.01
    gamma: float = 0.1
    cap: float = 1.0
    cycle: int = 10
    numerator: float = 3.0
    switch: int = 120
    plateau: float = 4.0

    def __post_init__(self):
        if self.kind not in ("CSS", "CUS", "DSSSA", "DSSCSS"):
            raise ValueError(f"unknown step policy {self.kind!r}")
        if self.kind == "CSS" and not self.eps > 0:
            raise ValueError("eps must be positive")
        if self.kind == "CUS" and not (self.gamma > 0 and self.cap > 0):
            raise ValueError("gamma and cap must be positive")

    @property
    def max_step(self) -> float:
        """Largest step the schedule can produce; used to size reward scaling."""
        if self.kind == "CSS":
            return self.eps
        if self.kind == "CUS":
            return 1.0
        if self.kind == "DSSSA":
            return self.numerator
        return max(self.numerator, self.plateau)

    def epsilon(self, t, q_chosen=None, reward_max=None):
        """Step at iteration ``t``; CUS also needs the chosen probability and the reward bound.

        Works elementwise on arrays.
        """
        if self.kind == "CSS":
            return self.eps if np.ndim(q_chosen) == 0 else np.full(np.shape(q_chosen), self.eps)
        if self.kind == "DSSSA":
            return self.numerator / (((t - 1) % self.cycle) + 1)
        if self.kind == "DSSCSS":
            return self.numerator / t if t < self.switch else self.plateau
        return cus_step(q_chosen, reward_max, self.gamma, self.cap)


def step_policy(name: str) -> StepPolicy:
    """Named schedules: CSS_L, CSS_M, CSS_H, CUS, DSSSA, DSSCSS."""
    table = {
        "CSS_L": StepPolicy("CSS", eps=0.01),
        "CSS_M": StepPolicy("CSS", eps=0.1),
        "CSS_H": StepPolicy("CSS", eps=1.0),
        "CUS": StepPolicy("CUS", gamma=0.1, cap=1.0),
        "DSSSA": StepPolicy("DSSSA", numerator=3.0, cycle=10),
        "DSSCSS": StepPolicy("DSSCSS", numerator=4.0, switch=120, plateau=4.0),
    }
    try:
        return table[name]
    except KeyError:
        raise ValueError(f"unknown step policy {name!r}; choose from {sorted(table)}") from None


POLICY_NAMES = ("CUS", "DSSSA", "DSSCSS", "CSS_L", "CSS_M", "CSS_H")


def cus_step(q_chosen, reward_max, gamma: float = 0.1, cap: float = 1.0):
    """Largest eps such that every coordinate moves by at most ``gamma``.

    The largest coordinate change of an update is ``eps * r * (1 - q_S)``;
    it is bounded using ``reward_max``, the largest reward seen so far.  The
    step is also kept below ``1 / reward_max`` so the row stays in [0, 1].
    """
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    q_chosen = np.asarray(q_chosen, dtype=float)
    r = np.asarray(reward_max, dtype=float)
    spread = r * (1.0 - q_chosen)
    with np.errstate(divide="ignore", invalid="ignore"):
        eps = np.minimum(gamma / spread, 1.0 / r)
    # a pure chosen row does not move whatever the step
    eps = np.where(spread > 0, np.minimum(eps, cap), cap)
    return float(eps) if eps.ndim == 0 else eps


def running_rank(r, mean, dev, rate: float = 0.05):
    """Place rewards in [0, 1] relative to each agent's recent rewards.

    ``mean`` and ``dev`` are exponential moving averages of the reward and of
    its absolute deviation (nan before the first reward).  Returns the ranks
    ``clip(0.5 + (r - mean) / (2 dev), 0, 1)`` (0.5 when ``dev`` is zero)
    and the updated averages.  Invariant under positive affine maps of an
    agent's rewards.
    """
    if not 0 < rate <= 1:
        raise ValueError("rate must lie in (0, 1]")
    r = np.asarray(r, dtype=float)
    first = np.isnan(mean)
    mean = np.where(first, r, mean)
    dev = np.where(first, 0.0, dev)
    gap = r - mean
    safe = np.where(dev > 0, dev, 1.0)
    rank = np.where(dev > 0, np.clip(0.5 + gap / (2.0 * safe), 0.0, 1.0), 0.5)
    return rank, mean + rate * gap, (1.0 - rate) * dev + rate * np.abs(gap)


@dataclass(frozen=True)
class ThresholdRule:
    delta_m: float = 0.05
    delta_M: float = 0.3

    def __post_init__(self):
        if not (0 < self.delta_m < 1 - self.delta_M <= 1):
            raise ValueError("need 0 < delta_m < 1 - delta_M <= 1")


def apply_thresholds(q, rule: ThresholdRule = ThresholdRule()) -> np.ndarray:
    """Snap small entries to 0 and large ones to 1, then renormalize.

    An entry above ``1 - delta_M`` makes the row pure.  Accepts one row or a
    2-D array of rows.
    """
    q = np.array(q, dtype=float)
    one = q.ndim == 1
    q2 = np.atleast_2d(q)
    hi = q2 > 1.0 - rule.delta_M
    lo = q2 < rule.delta_m
    snapped = np.where(lo, 0.0, q2)
    rows = hi.any(axis=1)
    snapped[rows] = hi[rows].astype(float)
    sums = snapped.sum(axis=1, keepdims=True)
    if np.any(sums == 0):
        # every entry below delta_m (only possible for rows of many actions)
        snapped = np.where(sums == 0, q2, snapped)
        sums = snapped.sum(axis=1, keepdims=True)
    out = snapped / sums
    return out[0] if one else out


@dataclass
class AgentState:
    strategy: np.ndarray
    policy: StepPolicy
    rng: np.random.Generator | None = None
    reward_max: float = 0.0

    def __post_init__(self):
        self.strategy = np.asarray(self.strategy, dtype=float)
        check_row(self.strategy)

    def sample(self) -> int:
        return _sample(self.strategy, self.rng.random())


def check_row(q, tol: float = 1e-9) -> None:
    if q.ndim != 1 or len(q) == 0:
        raise ValueError("strategy must be a non-empty vector")
    if np.any(q < 0) or np.any(q > 1) or abs(q.sum() - 1.0) > tol:
        raise ValueError(f"strategy {q} is not a probability vector")


def agent_update(state: AgentState, chosen: int, reward: float, t: int) -> AgentState:
    """One step: ``q += eps * r * (e_chosen - q)``."""
    if reward < 0:
        raise ValueError("reward must be non-negative; shift the rewards first")
    rmax = max(state.reward_max, reward)
    pol = state.policy
    eps = pol.eps if pol.kind == "CSS" else pol.epsilon(t, state.strategy[chosen], rmax)
    a = eps * reward
    if a > 1 + 1e-12 and state.strategy[chosen] < 1.0:
        raise ValueError(f"eps*r = {a:.4g} > 1; scale rewards down by at least {a:.4g} "
                         f"(e.g. RewardScale with max_step={state.policy.max_step})")
    a = min(a, 1.0)
    q = (1.0 - a) * state.strategy
    q[chosen] += a
    return AgentState(q, pol, state.rng, rmax)


def _sample(q: np.ndarray, u: float) -> int:
    acc = 0.0
    for i, p in enumerate(q):
        acc += p
        if u < acc:
            return i
    return int(np.flatnonzero(q)[-1])


def _threshold_row(q: np.ndarray, rule: ThresholdRule) -> np.ndarray:
    if q.max() > 1.0 - rule.delta_M:
        out = np.zeros_like(q)
        out[int(np.argmax(q))] = 1.0
        return out
    if q.min() < rule.delta_m:
        return apply_thresholds(q, rule)
    return q


def is_pure_row(q) -> bool:
    return bool(np.max(q) == 1.0)


@dataclass(frozen=True)
class RewardScale:
    """Affine map ``(r + shift) / ((upper + shift) * max(1, max_step))``.

    With ``upper`` an upper bound of the raw rewards and ``shift`` making
    them non-negative, scaled rewards lie in [0, 1 / max(1, max_step)], so
    ``eps * r <= 1`` for every step the schedule can produce.  ``shift`` and
    ``upper`` may be per-player arrays; the result is clipped at 0.
    """

    shift: float | np.ndarray = 0.0
    upper: float | np.ndarray = 1.0
    max_step: float = 1.0

    def __post_init__(self):
        if np.any(np.asarray(self.shift) < 0):
            raise ValueError("shift must be non-negative")
        if not np.all(np.asarray(self.upper) + np.asarray(self.shift) > 0):
            raise ValueError("upper + shift must be positive")

    @property
    def factor(self):
        return 1.0 / ((np.asarray(self.upper, dtype=float) + self.shift) * max(1.0, self.max_step))

    def __call__(self, r):
        return np.clip((np.asarray(r, dtype=float) + self.shift) * self.factor, 0.0, None)

    @classmethod
    def for_bounds(cls, lower, upper, policy: StepPolicy) -> "RewardScale":
        shift = np.maximum(0.0, -np.asarray(lower, dtype=float))
        upper = np.asarray(upper, dtype=float)
        if shift.ndim == 0:
            shift, upper = float(shift), float(upper)
        return cls(shift=shift, upper=upper, max_step=policy.max_step)

    @classmethod
    def for_game(cls, game: AllocationGame, policy: StepPolicy, per_player: bool = True) -> "RewardScale":
        """Bounds from the tabulated rewards, per player by default.

        Positive affine maps applied player by player leave the equilibria
        unchanged and keep the potential non-decreasing along the mean dynamics.
        """
        lo = np.full(game.n_players, np.inf)
        hi = np.full(game.n_players, -np.inf)
        for d in game.tabulate().table.values():
            for n, v in d.items():
                lo[n] = min(lo[n], float(v))
                hi[n] = max(hi[n], float(v))
        if not per_player:
            lo, hi = lo.min(), hi.max()
        hi = np.where(hi > lo, hi, lo + 1.0)  # constant rewards: any positive range
        return cls.for_bounds(lo, hi, policy)


@dataclass
class LearningResult:
    converged: bool
    iterations: int
    profile: tuple | None
    final_q: list[np.ndarray]
    handovers: list[int]
    is_nash: bool | None = None
    log: list = field(default_factory=list, repr=False)

    def summary(self) -> dict:
        return {
            "converged": self.converged,
            "iterations": self.iterations,
            "profile": None if self.profile is None else list(self.profile),
            "handovers": self.handovers,
            "is_nash": self.is_nash,
            "final_q": [r.tolist() for r in self.final_q],
        }


def agent_streams(seed, n_agents: int) -> list[np.random.Generator]:
    """Independent per-agent generators derived from one seed."""
    return [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(n_agents)]


def run_learning(game: AllocationGame, policy: StepPolicy | str, rule: ThresholdRule | None = ThresholdRule(),
                 seed=0, max_iters: int = 20_000, scale: RewardScale | None = None, q0=None,
                 keep_log: bool = False) -> LearningResult:
    """Synchronous rounds of the learning rule on ``game`` until every row is pure.

    Rewards are the game's own payoffs (repercussion rewards for a companion
    game), passed through ``scale``.  ``rule=None`` disables the thresholds.
    """
    if isinstance(policy, str):
        policy = step_policy(policy)
    if scale is None:
        scale = RewardScale.for_game(game, policy)
    N = game.n_players
    rngs = agent_streams(seed, N)
    if q0 is None:
        q0 = [np.full(len(a), 1.0 / len(a)) for a in game.action_sets]
    agents = [AgentState(np.array(q, dtype=float), policy, rng) for q, rng in zip(q0, rngs)]
    acts = game.action_sets
    cache: dict[tuple, np.ndarray] = {}
    handovers = [0] * N
    last = [-1] * N
    log = []
    # uniforms are drawn in blocks from each agent's own stream
    block = 256
    buf = np.empty((N, 0))
    t = 0
    while t < max_iters and not all(is_pure_row(a.strategy) for a in agents):
        if t % block == 0:
            buf = np.stack([a.rng.random(block) for a in agents])
        u = buf[:, t % block]
        t += 1
        choice = tuple(_sample(a.strategy, u[n]) for n, a in enumerate(agents))
        rewards = cache.get(choice)
        if rewards is None:
            prof = tuple(acts[n][c] for n, c in enumerate(choice))
            rewards = scale(game.profile_payoffs(prof))
            cache[choice] = rewards
        for n in range(N):
            c = choice[n]
            if last[n] >= 0 and last[n] != c:
                handovers[n] += 1
            last[n] = c
            a = agent_update(agents[n], c, float(rewards[n]), t)
            if rule is not None:
                a.strategy = _threshold_row(a.strategy, rule)
            agents[n] = a
        if keep_log:
            prof = tuple(acts[n][c] for n, c in enumerate(choice))
            log.append((t, choice, rewards.copy(), [float(a.strategy.max()) for a in agents],
                        float(potential_pure(game, prof))))
    q = [a.strategy for a in agents]
    converged = all(is_pure_row(r) for r in q)
    profile = tuple(acts[n][int(np.argmax(r))] for n, r in enumerate(q)) if converged else None
    nash = is_pure_nash(game, profile) if converged else None
    return LearningResult(converged, t, profile, q, handovers, nash, log)


def write_learning_log(result: LearningResult, path) -> None:
    """CSV: iteration, choice_n, reward_n, maxprob_n for every agent, potential."""
    if not result.log:
        raise ValueError("no log recorded; run with keep_log=True")
    N = len(result.final_q)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["iteration", *(f"choice_{n}" for n in range(N)), *(f"reward_{n}" for n in range(N)),
                    *(f"maxprob_{n}" for n in range(N)), "potential"])
        for t, choice, rewards, maxp, pot in result.log:
            w.writerow([t, *choice, *(f"{r:.8g}" for r in rewards), *(f"{p:.8g}" for p in maxp), f"{pot:.8g}"])


def expected_increment(game: AllocationGame, q, eps: float, scale: RewardScale) -> list[np.ndarray]:
    """Exact mean one-step increment of every row under the product distribution ``q``.

    Equals ``eps`` times the replicator field of the scaled game; used as an
    oracle for Monte-Carlo checks.
    """
    import itertools

    out = [np.zeros(len(a)) for a in game.action_sets]
    for choice in itertools.product(*(range(len(a)) for a in game.action_sets)):
        p = math.prod(q[n][c] for n, c in enumerate(choice))
        if p == 0:
            continue
        prof = tuple(game.action_sets[n][c] for n, c in enumerate(choice))
        r = scale(game.profile_payoffs(prof))
        for n, c in enumerate(choice):
            e = np.zeros(len(q[n]))
            e[c] = 1.0
            out[n] += p * eps * r[n] * (e - q[n])
    return out


def sample_increments(game: AllocationGame, q, eps: float, scale: RewardScale, n_samples: int,
                      rng: np.random.Generator):
    """Monte-Carlo one-step increments; returns (mean, standard error) per row."""
    N = game.n_players
    choices = [rng.choice(len(q[n]), size=n_samples, p=q[n]) for n in range(N)]
    cache = {}
    rewards = np.empty((n_samples, N))
    keys = np.stack(choices, axis=1)
    uniq, inv = np.unique(keys, axis=0, return_inverse=True)
    for k, row in enumerate(uniq):
        prof = tuple(game.action_sets[n][c] for n, c in enumerate(row))
        cache[k] = scale(game.profile_payoffs(prof))
    table = np.stack([cache[k] for k in range(len(uniq))])
    rewards[:] = table[inv.reshape(-1)]
    means, ses = [], []
    for n in range(N):
        onehot = np.eye(len(q[n]))[choices[n]]
        inc = eps * rewards[:, n:n + 1] * (onehot - q[n][None, :])
        means.append(inc.mean(axis=0))
        ses.append(inc.std(axis=0, ddof=1) / math.sqrt(n_samples))
    return means, ses


__all__ = [
    "AgentState", "LearningResult", "RewardScale", "StepPolicy", "ThresholdRule", "agent_streams",
    "agent_update", "apply_thresholds", "cus_step", "expected_increment", "is_pure_row",
    "run_learning", "sample_increments", "step_policy", "write_learning_log", "POLICY_NAMES",
]
