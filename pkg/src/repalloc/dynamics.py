"""Replicator dynamics on allocation games.

States are handled as flat vectors (player rows concatenated); helpers
convert to and from the per-player list form used in :mod:`repalloc.game`.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .game import AllocationGame, CompanionGame, bit, mask_of, MAX_OUTCOMES

DEFAULT_STEP = 0.01
CORNER_EPS = 1e-4
CONVERGED_STEPS = 100
DRIFT_LIMIT = 1e-6


class IntegrationError(RuntimeError):
    pass


class PayoffEvaluator:
    """Vectorized f_{n,i}(q) for a fixed game.

    For every coordinate (n, i) the payoffs on all loads reachable from the
    other potential users of i are tabulated once.  Entries are padded to a
    common number of opponents with a dummy coordinate of probability 0, so
    one tensor expression evaluates every expectation.
    """

    def __init__(self, game: AllocationGame):
        self.game = game
        self.sizes = [len(a) for a in game.action_sets]
        self.offsets = np.concatenate([[0], np.cumsum(self.sizes)]).astype(int)
        self.dim = int(self.offsets[-1])
        rows = []
        for n, acts in enumerate(game.action_sets):
            for i in acts:
                others = [m for m in game.users_of(i) if m != n]
                if 2 ** len(others) > MAX_OUTCOMES:
                    raise ValueError(f"too many load outcomes for player {n} on {i!r}")
                rows.append((n, i, others))
        kmax = max(len(o) for _, _, o in rows)
        if 2 ** kmax * len(rows) > MAX_OUTCOMES:
            raise ValueError("game too large for exact expectations")
        codes = np.arange(2 ** kmax)
        # bits[c, j]: opponent slot j present in subset c
        self._bits = ((codes[:, None] >> np.arange(kmax)[None, :]) & 1).astype(bool)
        self._idx = np.full((len(rows), kmax), self.dim, dtype=int)  # index dim = dummy slot
        self._vals = np.zeros((len(rows), 2 ** kmax))
        for r, (n, i, others) in enumerate(rows):
            for j, m in enumerate(others):
                self._idx[r, j] = self.offsets[m] + game.action_sets[m].index(i)
            for c in range(2 ** len(others)):
                sub = [others[j] for j in range(len(others)) if c >> j & 1]
                self._vals[r, c] = float(game.payoff(n, i, bit(n) | mask_of(sub)))

    def flatten(self, q) -> np.ndarray:
        return np.concatenate([np.asarray(r, dtype=float) for r in q])

    def unflatten(self, x) -> list[np.ndarray]:
        return [np.array(x[a:b]) for a, b in zip(self.offsets[:-1], self.offsets[1:])]

    def payoffs(self, x: np.ndarray) -> np.ndarray:
        p = np.append(x, 0.0)[self._idx]  # (D, kmax)
        w = np.where(self._bits[None, :, :], p[:, None, :], 1.0 - p[:, None, :]).prod(axis=2)
        return (w * self._vals).sum(axis=1)

    def row_means(self, x: np.ndarray, f: np.ndarray) -> np.ndarray:
        """f-bar_n repeated over each player's coordinates."""
        prod = x * f
        means = np.add.reduceat(prod, self.offsets[:-1])
        return np.repeat(means, self.sizes)

    def field(self, x: np.ndarray) -> np.ndarray:
        f = self.payoffs(x)
        return x * (f - self.row_means(x, f))

    def potential(self, x: np.ndarray) -> float:
        """Sum over coordinates of q_{n,i} f_{n,i}; the potential when built on a base game."""
        return float(x @ self.payoffs(x))


def _base(game):
    return game.base if isinstance(game, CompanionGame) else game


def replicator_field(game: AllocationGame, q) -> list[np.ndarray]:
    """dq_{n,i}/dt = q_{n,i} (f_{n,i}(q) - f-bar_n(q)), using the game's own payoffs."""
    ev = PayoffEvaluator(game)
    return ev.unflatten(ev.field(ev.flatten(q)))


@dataclass
class Trajectory:
    action_sets: tuple
    times: np.ndarray
    states: np.ndarray  # shape (len(times), dim)
    potential_series: np.ndarray
    converged_at: float | None = None

    @property
    def offsets(self):
        sizes = [len(a) for a in self.action_sets]
        return np.concatenate([[0], np.cumsum(sizes)]).astype(int)

    def profile(self, k: int = -1) -> list[np.ndarray]:
        off = self.offsets
        x = self.states[k]
        return [np.array(x[a:b]) for a, b in zip(off[:-1], off[1:])]

    @property
    def final(self) -> list[np.ndarray]:
        return self.profile(-1)

    def potential_monotone(self, tol_per_time: float = 1e-6) -> bool:
        dF = np.diff(self.potential_series)
        dt = np.diff(self.times)
        return bool(np.all(dF >= -tol_per_time * dt))

    def columns(self) -> list[str]:
        return [f"q_{n}_{a}" for n, acts in enumerate(self.action_sets) for a in acts]

    def to_csv(self, path) -> None:
        """Columns: time, every q_{n,i} (player-major), F."""
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["time", *self.columns(), "F"])
            for t, x, F in zip(self.times, self.states, self.potential_series):
                w.writerow([f"{t:.6g}", *(f"{v:.10g}" for v in x), f"{F:.10g}"])


def _near_corner(x: np.ndarray, offsets, eps: float) -> bool:
    for a, b in zip(offsets[:-1], offsets[1:]):
        if x[a:b].max() < 1.0 - eps:
            return False
    return True


def integrate(game: AllocationGame, q0, horizon: float, step: float = DEFAULT_STEP,
              stop_on_convergence: bool = False, eps: float = CORNER_EPS,
              window: int = CONVERGED_STEPS, record_every: int = 1) -> Trajectory:
    """Fixed-step RK4 integration of the replicator dynamics.

    Rows are clipped at zero and renormalized after every step; a row-sum
    drift above 1e-6 before renormalization aborts with
    :class:`IntegrationError`.  With ``stop_on_convergence`` the run ends
    once every row has stayed within ``eps`` of a corner for ``window``
    consecutive steps.
    """
    if step <= 0:
        raise ValueError("step must be positive")
    ev = PayoffEvaluator(game)
    pot = PayoffEvaluator(_base(game))
    x = ev.flatten(q0)
    off = ev.offsets
    sums = np.add.reduceat(x, off[:-1])
    if np.any(np.abs(sums - 1) > 1e-9) or np.any(x < 0):
        raise ValueError("initial point is not a mixed profile")
    n_steps = int(round(horizon / step))
    times, states, pots = [0.0], [x.copy()], [pot.potential(x)]
    streak = 0
    converged_at = None
    for k in range(1, n_steps + 1):
        k1 = ev.field(x)
        k2 = ev.field(x + 0.5 * step * k1)
        k3 = ev.field(x + 0.5 * step * k2)
        k4 = ev.field(x + step * k3)
        x = x + step / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
        np.maximum(x, 0.0, out=x)
        sums = np.add.reduceat(x, off[:-1])
        drift = np.max(np.abs(sums - 1.0))
        if drift > DRIFT_LIMIT:
            raise IntegrationError(f"simplex drift {drift:.3g} at t={k * step:.4g}; reduce the step")
        x = x / np.repeat(sums, ev.sizes)
        done = False
        if stop_on_convergence:
            streak = streak + 1 if _near_corner(x, off, eps) else 0
            if streak >= window:
                converged_at = k * step
                done = True
        if k % record_every == 0 or done or k == n_steps:
            times.append(k * step)
            states.append(x.copy())
            pots.append(pot.potential(x))
        if done:
            break
    return Trajectory(game.action_sets, np.array(times), np.array(states), np.array(pots), converged_at)


@dataclass
class LimitClass:
    kind: str  # "pure", "mixed" or "undecided"
    profile: tuple | None = None
    support: list = field(default_factory=list)


def classify_limit(traj: Trajectory, eps: float = CORNER_EPS, window: int = CONVERGED_STEPS) -> LimitClass:
    """Classify where a trajectory ended.

    ``pure``: every row within ``eps`` of the same corner over the last
    ``window`` recorded states.  ``mixed``: motion per unit time below eps
    but not at a corner (reported with its support, never rounded).
    ``undecided``: still moving.
    """
    off = traj.offsets
    tail = traj.states[-window:] if len(traj.states) >= window else traj.states
    x = traj.states[-1]
    corner = tuple(int(np.argmax(x[a:b])) for a, b in zip(off[:-1], off[1:]))
    if len(traj.states) >= window and all(_near_corner(s, off, eps) for s in tail):
        corners = {tuple(int(np.argmax(s[a:b])) for a, b in zip(off[:-1], off[1:])) for s in tail}
        if corners == {corner}:
            prof = tuple(acts[c] for acts, c in zip(traj.action_sets, corner))
            return LimitClass("pure", prof)
    span = traj.times[-1] - traj.times[-len(tail)]
    speed = np.max(np.abs(tail[-1] - tail[0])) / span if span > 0 else np.inf
    if speed < eps:
        support = []
        for n, (acts, a, b) in enumerate(zip(traj.action_sets, off[:-1], off[1:])):
            support.extend((n, acts[j]) for j in range(b - a) if x[a + j] > eps)
        return LimitClass("mixed", None, support)
    return LimitClass("undecided")


def run_to_limit(game: AllocationGame, q0, step: float = DEFAULT_STEP, max_horizon: float = 500.0,
                 eps: float = CORNER_EPS, window: int = CONVERGED_STEPS):
    traj = integrate(game, q0, max_horizon, step, stop_on_convergence=True, eps=eps, window=window)
    return traj, classify_limit(traj, eps, window)


@dataclass(frozen=True)
class TwoByTwoPotential:
    """Potential of a 2-player 2-action game at its four corners.

    ``x`` (``y``) is the probability that player 1 (player 2) plays its first
    action.  Index convention: ``k01 = F(x=1, y=0)``, ``k10 = F(x=0, y=1)``,
    ``k00 = F(0, 0)``, ``k11 = F(1, 1)``.
    """

    k00: float
    k01: float
    k10: float
    k11: float

    @property
    def K(self) -> float:
        return self.k11 + self.k00 - self.k01 - self.k10

    @classmethod
    def from_game(cls, game: AllocationGame) -> "TwoByTwoPotential":
        from .game import potential_pure

        if [len(a) for a in game.action_sets] != [2, 2]:
            raise ValueError("need two players with two actions each")
        (a1, b1), (a2, b2) = game.action_sets
        F = lambda s: float(potential_pure(game, s))
        return cls(k00=F((b1, b2)), k01=F((a1, b2)), k10=F((b1, a2)), k11=F((a1, a2)))

    def field(self, x: float, y: float) -> tuple[float, float]:
        return (x * (1 - x) * (self.k01 - self.k00 + self.K * y),
                y * (1 - y) * (self.k10 - self.k00 + self.K * x))

    def corner_values(self) -> dict:
        """Potential keyed by (x, y) corner."""
        return {(0, 0): self.k00, (1, 0): self.k01, (0, 1): self.k10, (1, 1): self.k11}

    def local_maxima(self) -> list[tuple[int, int]]:
        v = self.corner_values()
        out = []
        for (x, y), val in v.items():
            if val > v[(1 - x, y)] and val > v[(x, 1 - y)]:
                out.append((x, y))
        return out


def two_by_two_basin_check(game: AllocationGame, step: float = DEFAULT_STEP) -> bool:
    """Does the dynamics started at (1/2, 1/2) reach a corner of maximal potential?"""
    pot = TwoByTwoPotential.from_game(game)
    traj, lim = run_to_limit(game, [np.array([0.5, 0.5]), np.array([0.5, 0.5])], step=step)
    if lim.kind != "pure":
        return False
    v = pot.corner_values()
    best = max(v.values())
    (a1, b1), (a2, b2) = game.action_sets
    x = 1 if lim.profile[0] == a1 else 0
    y = 1 if lim.profile[1] == a2 else 0
    return v[(x, y)] == best
