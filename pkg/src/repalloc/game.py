"""Allocation games, repercussion utilities and the associated potential.

A player's payoff in an allocation game only depends on the set of players
sharing her resource.  Loads are stored as integer bitmasks over players
(bit ``n`` set iff player ``n`` uses the resource).
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Rational
from pathlib import Path
from typing import Callable, Hashable, Iterator, Sequence

import numpy as np

Resource = Hashable
PureProfile = tuple
MixedProfile = list  # list of 1-D probability arrays, one per player

MAX_OUTCOMES = 10**6
ROW_TOL = 1e-9


class NotAllocationGameError(ValueError):
    """Raised when a payoff matrix is not an allocation game."""


class NotRepercussionGameError(ValueError):
    """Raised when rewards violate the pairwise symmetry identity."""


# --------------------------------------------------------------------------
# load helpers


def bit(n: int) -> int:
    return 1 << n


def members(mask: int) -> list[int]:
    """Players present in a load bitmask, in increasing order."""
    out = []
    n = 0
    while mask:
        if mask & 1:
            out.append(n)
        mask >>= 1
        n += 1
    return out


def mask_of(players) -> int:
    m = 0
    for n in players:
        m |= 1 << n
    return m


def load_mask(profile: Sequence, resource: Resource) -> int:
    return mask_of(n for n, s in enumerate(profile) if s == resource)


def load_vector(profile: Sequence, resource: Resource) -> tuple[int, ...]:
    """0/1 load vector of ``resource`` under a pure profile."""
    return tuple(1 if s == resource else 0 for s in profile)


def vector_to_mask(vec: Sequence[int]) -> int:
    if any(v not in (0, 1) for v in vec):
        raise ValueError(f"load vector entries must be 0/1, got {vec}")
    return mask_of(n for n, v in enumerate(vec) if v)


# --------------------------------------------------------------------------
# games


@dataclass(frozen=True)
class AllocationGame:
    """Players, per-player action sets and a load-based payoff.

    Payoffs come either from a dense ``table`` mapping ``(resource, mask)``
    to a dict ``{player: payoff}`` or from an ``oracle(n, resource, mask)``.
    """

    action_sets: tuple[tuple[Resource, ...], ...]
    table: dict | None = None
    oracle: Callable[[int, Resource, int], float] | None = None
    labels: tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "action_sets", tuple(tuple(a) for a in self.action_sets))
        if not self.action_sets:
            raise ValueError("game needs at least one player")
        for n, acts in enumerate(self.action_sets):
            if not acts:
                raise ValueError(f"player {n} has an empty action set")
            if len(set(acts)) != len(acts):
                raise ValueError(f"player {n} has duplicate actions {acts}")
        if (self.table is None) == (self.oracle is None):
            raise ValueError("give exactly one of table / oracle")

    @property
    def n_players(self) -> int:
        return len(self.action_sets)

    @property
    def resources(self) -> list:
        seen = []
        for acts in self.action_sets:
            for a in acts:
                if a not in seen:
                    seen.append(a)
        return seen

    def users_of(self, resource: Resource) -> list[int]:
        return [n for n, acts in enumerate(self.action_sets) if resource in acts]

    def payoff(self, n: int, resource: Resource, mask: int):
        if not mask >> n & 1:
            raise ValueError(f"player {n} is not in load {bin(mask)} of {resource!r}")
        if self.table is not None:
            try:
                return self.table[(resource, mask)][n]
            except KeyError:
                raise KeyError(f"no payoff for player {n} on {resource!r} with load {bin(mask)}") from None
        return self.oracle(n, resource, mask)

    def profile_payoffs(self, profile: Sequence) -> list:
        self.check_profile(profile)
        return [self.payoff(n, s, load_mask(profile, s)) for n, s in enumerate(profile)]

    def check_profile(self, profile: Sequence) -> None:
        if len(profile) != self.n_players:
            raise ValueError(f"profile {profile} has wrong length")
        for n, s in enumerate(profile):
            if s not in self.action_sets[n]:
                raise ValueError(f"action {s!r} not available to player {n}")

    def profiles(self) -> Iterator[tuple]:
        """All pure profiles in row-major order (last player fastest)."""
        return itertools.product(*self.action_sets)

    def realizable_loads(self) -> Iterator[tuple[Resource, int]]:
        """Every ``(resource, mask)`` reached by some pure profile."""
        for i in self.resources:
            users = self.users_of(i)
            forced = [n for n in users if len(self.action_sets[n]) == 1]
            free = [n for n in users if len(self.action_sets[n]) > 1]
            base = mask_of(forced)
            for k in range(len(free) + 1):
                for sub in itertools.combinations(free, k):
                    m = base | mask_of(sub)
                    if m:
                        yield i, m

    def all_loads(self) -> Iterator[tuple[Resource, int]]:
        """Every non-empty subset of each resource's potential users."""
        for i in self.resources:
            users = self.users_of(i)
            for k in range(1, len(users) + 1):
                for sub in itertools.combinations(users, k):
                    yield i, mask_of(sub)

    def tabulate(self) -> "AllocationGame":
        """Dense copy of an oracle-backed game (all loads, realizable or not)."""
        if self.table is not None:
            return self
        table = {}
        for i, m in self.all_loads():
            table[(i, m)] = {n: self.oracle(n, i, m) for n in members(m)}
        return AllocationGame(self.action_sets, table=table, labels=self.labels)

    def entries(self) -> Iterator:
        g = self.tabulate()
        for d in g.table.values():
            yield from d.values()

    def is_exact(self) -> bool:
        """True when every tabulated payoff is an int or a Fraction."""
        return all(isinstance(v, (int, Rational)) and not isinstance(v, bool) for v in self.entries())


@dataclass(frozen=True)
class CompanionGame(AllocationGame):
    """Game whose payoffs are the repercussion utilities of ``base``.

    ``shift`` is added to every reward (equivalently to every base payoff).
    """

    base: AllocationGame | None = field(default=None)
    shift: float = 0

    def __post_init__(self):
        super().__post_init__()
        if self.base is None:
            raise ValueError("companion game needs a base game")
        if self.shift < 0:
            raise ValueError("shift must be non-negative")


# --------------------------------------------------------------------------
# construction and file format


def from_matrix(action_sets, payoffs, labels=()) -> AllocationGame:
    """Build a dense allocation game from per-profile payoff vectors.

    ``payoffs`` maps each pure profile (tuple of actions) to the N payoffs,
    or is a sequence in row-major profile order.  Raises
    :class:`NotAllocationGameError` when two profiles with the same load on
    a player's resource give that player different payoffs.
    """
    action_sets = tuple(tuple(a) for a in action_sets)
    profiles = list(itertools.product(*action_sets))
    if not isinstance(payoffs, dict):
        payoffs = list(payoffs)
        if len(payoffs) != len(profiles):
            raise ValueError(f"expected {len(profiles)} payoff rows, got {len(payoffs)}")
        payoffs = dict(zip(profiles, payoffs))
    table: dict = {}
    for s in profiles:
        u = payoffs[s]
        if len(u) != len(action_sets):
            raise ValueError(f"profile {s}: expected {len(action_sets)} payoffs")
        for n, i in enumerate(s):
            key = (i, load_mask(s, i))
            cell = table.setdefault(key, {})
            if n in cell and cell[n] != u[n]:
                raise NotAllocationGameError(
                    f"player {n} on {i!r}: payoff {cell[n]} vs {u[n]} for the same load {bin(key[1])} (profile {s})"
                )
            cell[n] = u[n]
    return AllocationGame(action_sets, table=table, labels=tuple(labels))


def to_matrix(game: AllocationGame) -> list[list]:
    return [game.profile_payoffs(s) for s in game.profiles()]


def _parse_number(x):
    if isinstance(x, str):
        return Fraction(x)
    return x


def load_game(path) -> AllocationGame:
    """Read a matrix game file (JSON).

    Format::

        {"players": N,
         "actions": [[labels of player 0], ..., [labels of player N-1]],
         "payoffs": [[u_0, ..., u_{N-1}], ...]}   # row-major, last player fastest

    Payoff entries may be numbers or fraction strings such as ``"7/2"``.
    """
    data = json.loads(Path(path).read_text())
    return game_from_dict(data)


def game_from_dict(data: dict) -> AllocationGame:
    actions = data["actions"]
    if int(data.get("players", len(actions))) != len(actions):
        raise ValueError("'players' does not match the number of action lists")
    rows = [[_parse_number(v) for v in row] for row in data["payoffs"]]
    return from_matrix(actions, rows, labels=tuple(data.get("labels", ())))


def game_to_dict(game: AllocationGame) -> dict:
    def enc(v):
        if isinstance(v, Fraction) and v.denominator != 1:
            return f"{v.numerator}/{v.denominator}"
        if isinstance(v, Fraction):
            return int(v)
        return v

    return {
        "players": game.n_players,
        "actions": [list(a) for a in game.action_sets],
        "payoffs": [[enc(v) for v in row] for row in to_matrix(game)],
    }


def save_game(game: AllocationGame, path) -> None:
    Path(path).write_text(json.dumps(game_to_dict(game), indent=1) + "\n")


DATA_DIR = Path(__file__).parent / "data"


def golden_game(name: str) -> AllocationGame:
    """One of the shipped example games: ``three_player``, ``two_by_three``, ``two_by_two``."""
    return load_game(DATA_DIR / f"game_{name}.json")


# --------------------------------------------------------------------------
# repercussion utilities


def repercussion_reward(base: AllocationGame, n: int, resource, mask: int):
    """Own payoff minus the payoff loss inflicted on co-located players."""
    r = base.payoff(n, resource, mask)
    without = mask & ~bit(n)
    for m in members(without):
        r -= base.payoff(m, resource, without) - base.payoff(m, resource, mask)
    return r


def repercussion_reward_sum_form(base: AllocationGame, n: int, resource, mask: int):
    """Same quantity written as total payoff with and without ``n``."""
    without = mask & ~bit(n)
    total = sum(base.payoff(m, resource, mask) for m in members(mask))
    return total - sum(base.payoff(m, resource, without) for m in members(without))


def repercussion_transform(game: AllocationGame, shift=0) -> CompanionGame:
    """Companion game with repercussion-utility payoffs."""
    if game.table is not None:
        table = {}
        for (i, m) in game.table:
            table[(i, m)] = {n: repercussion_reward(game, n, i, m) + shift for n in members(m)}
        return CompanionGame(game.action_sets, table=table, labels=game.labels, base=game, shift=shift)

    def oracle(n, i, m):
        return repercussion_reward(game, n, i, m) + shift

    return CompanionGame(game.action_sets, oracle=oracle, labels=game.labels, base=game, shift=shift)


def _default_tol(game: AllocationGame) -> float:
    return 0.0 if game.is_exact() else 1e-9


def symmetry_violation(game: AllocationGame, tol: float | None = None):
    """First ``(resource, mask, n, m, gap)`` breaking the pairwise symmetry, else None.

    Pairs whose reduced loads are not realizable (a player with a single
    action) are skipped.
    """
    g = game.tabulate()
    if tol is None:
        tol = _default_tol(g)
    t = g.table
    for (i, mask) in sorted(t, key=lambda k: (str(k[0]), k[1])):
        ps = members(mask)
        for a, b in itertools.combinations(ps, 2):
            ka, kb = (i, mask & ~bit(b)), (i, mask & ~bit(a))
            if ka not in t or kb not in t:
                continue
            lhs = t[(i, mask)][a] - t[ka][a]
            rhs = t[(i, mask)][b] - t[kb][b]
            if abs(lhs - rhs) > tol:
                return i, mask, a, b, lhs - rhs
    return None


def is_repercussion_game(game: AllocationGame, tol: float | None = None):
    """Check the pairwise symmetry characterization.

    Returns ``(ok, witness)`` where witness is the first violating
    ``(resource, mask, n, m, gap)`` or None.
    """
    w = symmetry_violation(game, tol)
    return w is None, w


def recover_base_payoffs(companion: AllocationGame, order: Callable[[list[int]], list[int]] | None = None,
                         tol: float | None = None) -> AllocationGame:
    """Recover a payoff u whose repercussion utilities are ``companion``.

    For a load with K players ``a(1..K)``, every player gets
    ``(1/K) * sum_k r_{a(k+1)}(load minus a(1..k))``.  ``order`` permutes the
    enumeration of co-located players (the result does not depend on it).
    Exact (Fraction) arithmetic is used when the rewards are rational.
    """
    g = companion.tabulate()
    ok, witness = is_repercussion_game(g, tol)
    if not ok:
        raise NotRepercussionGameError(f"symmetry identity fails at {witness}")
    exact = g.is_exact()
    t = g.table
    table = {}
    for (i, mask) in t:
        seq = members(mask)
        if order is not None:
            seq = list(order(seq))
        total = 0
        cur = mask
        for p in seq:
            if (i, cur) not in t:
                raise KeyError(f"load {bin(cur)} on {i!r} is needed but not realizable")
            total += t[(i, cur)][p]
            cur &= ~bit(p)
        k = len(seq)
        val = Fraction(total) / k if exact else total / k
        if exact and val.denominator == 1:
            val = int(val)
        table[(i, mask)] = {n: val for n in seq}
    return AllocationGame(g.action_sets, table=table, labels=g.labels)


def shift_payoffs(game: AllocationGame, c) -> AllocationGame:
    """Add ``c`` to every payoff.  For a companion game the shift is carried by the base."""
    if isinstance(game, CompanionGame):
        return repercussion_transform(game.base, shift=game.shift + c)
    if game.table is not None:
        table = {k: {n: v + c for n, v in d.items()} for k, d in game.table.items()}
        return AllocationGame(game.action_sets, table=table, labels=game.labels)
    f = game.oracle
    return AllocationGame(game.action_sets, oracle=lambda n, i, m: f(n, i, m) + c, labels=game.labels)


def positive_shift(game: AllocationGame, floor=1) -> float:
    """Smallest shift making every tabulated payoff at least ``floor``."""
    lo = min(game.entries())
    return max(0, floor - lo)


# --------------------------------------------------------------------------
# pure-profile analysis


def potential_pure(game: AllocationGame, profile: Sequence):
    """Sum of payoffs at a pure profile.

    For a companion game this is evaluated on the base game, i.e. it is the
    potential of the repercussion game.
    """
    g = game.base if isinstance(game, CompanionGame) else game
    return sum(g.profile_payoffs(profile))


def reward_sum(game: AllocationGame, profile: Sequence):
    """Sum of the game's own payoffs (repercussion rewards for a companion game)."""
    return sum(game.profile_payoffs(profile))


def improving_deviation(game: AllocationGame, profile: Sequence, tol=0):
    """First ``(n, action, gain)`` strictly improving player n's payoff, else None."""
    game.check_profile(profile)
    for n, s in enumerate(profile):
        cur = game.payoff(n, s, load_mask(profile, s))
        for j in game.action_sets[n]:
            if j == s:
                continue
            alt = game.payoff(n, j, load_mask(profile, j) | bit(n))
            if alt - cur > tol:
                return n, j, alt - cur
    return None


def is_pure_nash(game: AllocationGame, profile: Sequence, tol=0) -> bool:
    return improving_deviation(game, profile, tol) is None


def pure_nash_set(game: AllocationGame, tol=0) -> list[tuple]:
    return [s for s in game.profiles() if is_pure_nash(game, s, tol)]


# --------------------------------------------------------------------------
# mixed profiles


def uniform_profile(game: AllocationGame) -> MixedProfile:
    return [np.full(len(a), 1.0 / len(a)) for a in game.action_sets]


def pure_to_mixed(game: AllocationGame, profile: Sequence) -> MixedProfile:
    game.check_profile(profile)
    q = []
    for acts, s in zip(game.action_sets, profile):
        row = np.zeros(len(acts))
        row[acts.index(s)] = 1.0
        q.append(row)
    return q


def check_mixed(game: AllocationGame, q, tol=ROW_TOL) -> None:
    if len(q) != game.n_players:
        raise ValueError("mixed profile has the wrong number of rows")
    for n, (acts, row) in enumerate(zip(game.action_sets, q)):
        row = np.asarray(row, dtype=float)
        if row.shape != (len(acts),):
            raise ValueError(f"row {n} has shape {row.shape}, expected ({len(acts)},)")
        if np.any(row < -tol) or abs(row.sum() - 1.0) > tol:
            raise ValueError(f"row {n} is not a probability vector: {row}")


def is_pure_mixed(q, tol=0.0) -> bool:
    return all(np.any(np.abs(np.asarray(r) - 1.0) <= tol) for r in q)


def mixed_to_pure(game: AllocationGame, q) -> tuple:
    return tuple(acts[int(np.argmax(r))] for acts, r in zip(game.action_sets, q))


def _prob_on(game: AllocationGame, q, m: int, resource) -> float:
    acts = game.action_sets[m]
    if resource not in acts:
        return 0.0
    return float(q[m][acts.index(resource)])


def conditional_loads(game: AllocationGame, q, n: int, resource) -> Iterator[tuple[int, float]]:
    """Distribution of the load on ``resource`` given that player n uses it.

    Yields ``(mask, weight)`` pairs; weights are probabilities on the simplex.
    """
    certain = bit(n)
    uncertain = []
    for m in game.users_of(resource):
        if m == n:
            continue
        p = _prob_on(game, q, m, resource)
        # exact 0/1 shortcuts only; other values enter multilinearly so that
        # off-simplex perturbations (finite differences) stay exact
        if p == 1.0:
            certain |= bit(m)
        elif p != 0.0:
            uncertain.append((m, p))
    if 2 ** len(uncertain) > MAX_OUTCOMES:
        raise ValueError(
            f"exact expectation needs {2 ** len(uncertain)} outcomes (limit {MAX_OUTCOMES})"
        )
    for bits in itertools.product((0, 1), repeat=len(uncertain)):
        mask, prob = certain, 1.0
        for b, (m, p) in zip(bits, uncertain):
            if b:
                mask |= bit(m)
                prob *= p
            else:
                prob *= 1.0 - p
        yield mask, prob


def expected_payoff(game: AllocationGame, q, n: int, resource) -> float:
    """Expected payoff of player n given she plays ``resource`` (independent of q_n)."""
    if resource not in game.action_sets[n]:
        raise ValueError(f"{resource!r} is not an action of player {n}")
    return sum(prob * float(game.payoff(n, resource, mask)) for mask, prob in conditional_loads(game, q, n, resource))


def expected_payoffs(game: AllocationGame, q) -> list[np.ndarray]:
    """All f_{n,i}(q), shaped like q."""
    return [np.array([expected_payoff(game, q, n, i) for i in acts]) for n, acts in enumerate(game.action_sets)]


def mean_payoff(game: AllocationGame, q, n: int) -> float:
    f = expected_payoffs(game, q)[n]
    return float(np.dot(q[n], f))


def potential_mixed(game: AllocationGame, q) -> float:
    """Potential F(q): total expected payoff of the base game.

    Pass either the original allocation game or its companion game (the
    companion's base is then used).
    """
    g = game.base if isinstance(game, CompanionGame) else game
    total = 0.0
    for n, acts in enumerate(g.action_sets):
        for k, i in enumerate(acts):
            if q[n][k] == 0:
                continue
            total += float(q[n][k]) * expected_payoff(g, q, n, i)
    return total


def random_allocation_game(rng: np.random.Generator, n_players: int, max_actions: int = 3,
                           n_resources: int | None = None, low: int = -10, high: int = 10) -> AllocationGame:
    """Random allocation game with integer payoffs on every load.

    Each player draws between 1 and ``max_actions`` distinct resources out of
    ``n_resources`` (default ``max_actions``).
    """
    n_resources = n_resources or max_actions
    action_sets = []
    for _ in range(n_players):
        k = int(rng.integers(1, max_actions + 1))
        picks = sorted(rng.choice(n_resources, size=min(k, n_resources), replace=False).tolist())
        action_sets.append(tuple(f"R{r}" for r in picks))
    skeleton = AllocationGame(action_sets, oracle=lambda n, i, m: 0)
    table = {}
    for i, m in skeleton.all_loads():
        table[(i, m)] = {n: int(rng.integers(low, high + 1)) for n in members(m)}
    return AllocationGame(tuple(action_sets), table=table)
