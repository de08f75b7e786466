"""alpha-fair objectives over user-cell allocations and their optimization.

An allocation gives, for every user, an index into its choice set.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .utility import g_alpha, real_time_utility  # noqa: F401  (re-exported)
from .wireless import DEFAULT_MODEL, WIMAX, CellEvaluator, NetworkModel, Topology

ENUM_LIMIT = 10**7
CHUNK = 50_000
TIE_TOL = 1e-9


class SearchSpaceTooLarge(ValueError):
    pass


def throughputs(top: Topology, allocation, model: NetworkModel = DEFAULT_MODEL) -> np.ndarray:
    ev = CellEvaluator(model, top.n_cells, p_max=max(top.n_users, 1))
    return ev.throughputs(top.cells_of(allocation), np.array(top.zones))


def objective(top: Topology, allocation, alpha: float = 0.0, model: NetworkModel = DEFAULT_MODEL) -> float:
    """Sum over users of G_alpha(throughput)."""
    return float(np.sum(g_alpha(throughputs(top, allocation, model), alpha)))


@dataclass
class OptimizationResult:
    allocation: list[int]
    objective: float
    method: str
    certificate: str
    alpha: float
    throughputs: list[float] = field(default_factory=list)
    evaluated: int = 0

    def report(self, top: Topology | None = None) -> str:
        lines = [f"method: {self.method}", f"certificate: {self.certificate}", f"alpha: {self.alpha:g}",
                 f"objective: {self.objective:.6f}", f"total throughput: {sum(self.throughputs):.4f} Mb/s",
                 "user choice cell throughput"]
        for n, (a, u) in enumerate(zip(self.allocation, self.throughputs)):
            cell = top.choice_sets[n][a] if top is not None else "-"
            lines.append(f"{n:4d} {a:6d} {cell!s:>4} {u:10.4f}")
        if top is not None:
            lines.append("wifi loads: " + " ".join(map(str, top.wifi_loads(self.allocation))))
        return "\n".join(lines) + "\n"


class _Batch:
    """Objective of many allocations at once."""

    def __init__(self, top: Topology, alpha: float, model: NetworkModel):
        self.top = top
        self.alpha = alpha
        self.ev = CellEvaluator(model, top.n_cells, p_max=max(top.n_users, 1))
        width = max(len(cs) for cs in top.choice_sets)
        self.lookup = np.full((top.n_users, width), -1, dtype=int)
        for n, cs in enumerate(top.choice_sets):
            self.lookup[n, :len(cs)] = cs
        self.zones = np.array(top.zones)
        self.radices = np.array([len(cs) for cs in top.choice_sets])

    def decode(self, start: int, stop: int) -> np.ndarray:
        """Allocations number start..stop-1 in lexicographic order (last user fastest)."""
        k = np.arange(start, stop, dtype=np.int64)
        out = np.empty((len(k), len(self.radices)), dtype=int)
        for n in range(len(self.radices) - 1, -1, -1):
            k, out[:, n] = np.divmod(k, self.radices[n])
        return out

    def values(self, allocs: np.ndarray) -> np.ndarray:
        cells = np.take_along_axis(self.lookup, allocs.T, axis=1).T  # (M, N)
        counts = (cells[:, :, None] == np.arange(self.top.n_cells)).sum(axis=1)
        p = np.take_along_axis(counts, cells, axis=1)
        rates = self.ev.rates[self.zones][None, :]
        u = np.where(cells == WIMAX, rates / p, self.ev._wifi_at(p))
        return np.sum(g_alpha(u, self.alpha), axis=1)


def exhaustive_optimum(top: Topology, alpha: float = 0.0, limit: int = ENUM_LIMIT,
                       model: NetworkModel = DEFAULT_MODEL) -> OptimizationResult:
    """Global optimum by enumeration; ties go to the lexicographically smallest allocation."""
    size = math.prod(len(cs) for cs in top.choice_sets)
    if size > limit:
        raise SearchSpaceTooLarge(f"{size} allocations exceed the limit {limit}; use local_search instead")
    b = _Batch(top, alpha, model)
    best_val, best = -np.inf, None
    for start in range(0, size, CHUNK):
        allocs = b.decode(start, min(size, start + CHUNK))
        vals = b.values(allocs)
        m = vals.max()
        if m > best_val + TIE_TOL:
            k = int(np.flatnonzero(vals >= m - TIE_TOL)[0])
            best_val, best = float(vals[k]), allocs[k].tolist()
    return _result(top, best, alpha, model, "exhaustive", "global", size)


def _result(top, alloc, alpha, model, method, cert, evaluated):
    u = throughputs(top, alloc, model)
    return OptimizationResult(list(map(int, alloc)), float(np.sum(g_alpha(u, alpha))), method, cert, alpha,
                              u.tolist(), evaluated)


class _State:
    """Allocation with incremental objective updates for single moves."""

    def __init__(self, top: Topology, alpha: float, model: NetworkModel, alloc):
        self.top, self.alpha, self.model = top, alpha, model
        self.rates = np.array(model.wimax.zone_rates)
        self.alloc = list(alloc)
        self.counts = np.zeros(top.n_cells, dtype=int)
        self.zone_counts = np.zeros(len(self.rates), dtype=int)
        for n, a in enumerate(self.alloc):
            self._add(n, top.choice_sets[n][a])
        self._wifi_cache: dict[int, float] = {}

    def _add(self, n, cell, k=1):
        self.counts[cell] += k
        if cell == WIMAX:
            self.zone_counts[self.top.zones[n]] += k

    def cell_value(self, cell: int, p: int, zone_counts=None) -> float:
        if p == 0:
            return 0.0
        if cell == WIMAX:
            zc = self.zone_counts if zone_counts is None else zone_counts
            nz = zc > 0
            return float(np.sum(zc[nz] * g_alpha(self.rates[nz] / p, self.alpha)))
        v = self._wifi_cache.get(p)
        if v is None:
            v = p * g_alpha(self.model.wifi.goodput(p), self.alpha)
            self._wifi_cache[p] = v
        return v

    def gain(self, n: int, new_choice: int) -> float:
        top = self.top
        a = top.choice_sets[n][self.alloc[n]]
        b = top.choice_sets[n][new_choice]
        if a == b:
            return 0.0
        z = top.zones[n]
        before = self.cell_value(a, self.counts[a]) + self.cell_value(b, self.counts[b])
        if a == WIMAX:
            zc = self.zone_counts.copy()
            zc[z] -= 1
            after = self.cell_value(a, self.counts[a] - 1, zc) + self.cell_value(b, self.counts[b] + 1)
        elif b == WIMAX:
            zc = self.zone_counts.copy()
            zc[z] += 1
            after = self.cell_value(a, self.counts[a] - 1) + self.cell_value(b, self.counts[b] + 1, zc)
        else:
            after = self.cell_value(a, self.counts[a] - 1) + self.cell_value(b, self.counts[b] + 1)
        return after - before

    def move(self, n: int, new_choice: int) -> None:
        cs = self.top.choice_sets[n]
        self._add(n, cs[self.alloc[n]], -1)
        self._add(n, cs[new_choice], 1)
        self.alloc[n] = new_choice

    def best_move(self, tol: float):
        best = None
        for n, cs in enumerate(self.top.choice_sets):
            for j in range(len(cs)):
                if j == self.alloc[n]:
                    continue
                g = self.gain(n, j)
                if g > tol and (best is None or g > best[2]):
                    best = (n, j, g)
        return best


def local_opt_check(top: Topology, allocation, alpha: float = 0.0, model: NetworkModel = DEFAULT_MODEL,
                    tol: float = TIE_TOL):
    """(True, None) if no single user can switch and raise the objective by more than tol.

    Otherwise (False, (user, choice index, gain)) for the best such switch.
    """
    s = _State(top, alpha, model, allocation)
    move = s.best_move(tol)
    return move is None, move


def local_search(top: Topology, alpha: float = 0.0, starts: int = 100, seed=0,
                 model: NetworkModel = DEFAULT_MODEL, tol: float = TIE_TOL) -> OptimizationResult:
    """Best-improvement single-switch ascent from random allocations; keeps the best local optimum."""
    rng = np.random.default_rng(seed)
    best_val, best = -np.inf, None
    moves = 0
    for _ in range(starts):
        alloc = [int(rng.integers(len(cs))) for cs in top.choice_sets]
        s = _State(top, alpha, model, alloc)
        while (m := s.best_move(tol)) is not None:
            s.move(m[0], m[1])
            moves += 1
        val = objective(top, s.alloc, alpha, model)
        if val > best_val + TIE_TOL or (abs(val - best_val) <= TIE_TOL and s.alloc < best):
            best_val, best = val, list(s.alloc)
    return _result(top, best, alpha, model, "local-search", "local", moves)


def optimize(top: Topology, alpha: float = 0.0, limit: int = ENUM_LIMIT, starts: int = 100, seed=0,
             model: NetworkModel = DEFAULT_MODEL) -> OptimizationResult:
    """Exhaustive search when the space fits under ``limit``, local search otherwise."""
    try:
        return exhaustive_optimum(top, alpha, limit, model)
    except SearchSpaceTooLarge:
        return local_search(top, alpha, starts, seed, model)
