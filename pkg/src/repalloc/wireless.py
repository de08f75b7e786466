"""Throughput models for WiFi and WiMAX cells, topologies and station rewards.

Cell 0 is the WiMAX cell; WiFi cells are numbered from 1.  All throughputs
are in Mb/s and times in ms.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .game import AllocationGame, members
from .utility import g_alpha

WIMAX = 0
DATA_DIR = Path(__file__).parent / "data"

ZONE_NAMES = ("QAM64 3/4", "QAM64 2/3", "QAM16 3/4", "QAM16 1/2",
              "QPSK 3/4", "QPSK 1/2", "BPSK 3/4", "BPSK 1/2")
ZONE_RATES = (9.58, 8.88, 6.80, 4.50, 3.37, 2.21, 1.65, 1.08)
WIFI_TABLE = (2.245, 1.225, 0.824)


@dataclass(frozen=True)
class WiFiModel:
    """Per-user TCP goodput in a WiFi cell as a function of its load.

    ``table`` mode returns calibrated per-user values for small loads and,
    beyond the table, splits an aggregate capacity that decays geometrically
    (``decay`` per extra user) from the last tabulated aggregate.
    ``formula`` mode evaluates ``L / (p (T_DATA + T_ACK + 2 T_TBO + 2 T_W))``
    with a simple collision model; it is not calibrated.
    """

    mode: str = "table"
    table: tuple[float, ...] = WIFI_TABLE
    decay: float = 0.97
    packet_kbit: float = 8.0
    t_data: float = 1.785
    t_ack: float = 1.091
    slot: float = 0.02
    cw_min: int = 32
    tau: float = 0.06

    def __post_init__(self):
        if self.mode not in ("table", "formula"):
            raise ValueError(f"unknown WiFi model mode {self.mode!r}")
        object.__setattr__(self, "table", tuple(float(v) for v in self.table))
        if self.mode == "table":
            if not self.table or any(b >= a for a, b in zip(self.table, self.table[1:])):
                raise ValueError("table goodputs must be strictly decreasing")
            if not 0 < self.decay < 1:
                raise ValueError("decay must lie in (0, 1)")

    def collision_times(self, p: int) -> tuple[float, float]:
        """(T_TBO, T_W) in ms for ``p`` stations contending.

        Collision probability per attempt is ``1 - (1 - tau)^(p - 1)``;
        the backoff window doubles on every collision.
        """
        c = 1.0 - (1.0 - self.tau) ** (p - 1)
        retries = c / (1.0 - c)
        t_tbo = self.slot * (self.cw_min - 1) / 2.0 * (1.0 + 2.0 * retries)
        t_w = retries * (self.t_data + self.t_ack) / 2.0
        return t_tbo, t_w

    def goodput(self, p: int) -> float:
        if p < 1 or int(p) != p:
            raise ValueError("load must be a positive integer")
        p = int(p)
        if self.mode == "formula":
            t_tbo, t_w = self.collision_times(p)
            return self.packet_kbit / (p * (self.t_data + self.t_ack + 2 * t_tbo + 2 * t_w))
        k = len(self.table)
        if p <= k:
            return self.table[p - 1]
        return self.table[-1] * k * self.decay ** (p - k) / p

    def capacity(self, p: int) -> float:
        """Aggregate goodput of the cell with ``p`` users."""
        return p * self.goodput(p)

    def goodput_array(self, p_max: int) -> np.ndarray:
        """``out[p]`` = per-user goodput at load p (``out[0]`` = nan)."""
        return np.array([np.nan] + [self.goodput(p) for p in range(1, p_max + 1)])


@dataclass(frozen=True)
class WiMAXModel:
    """OFDMA cell: a user of zone z gets ``zone_rates[z] / p`` with p users."""

    zone_rates: tuple[float, ...] = ZONE_RATES
    zone_names: tuple[str, ...] = ZONE_NAMES

    def __post_init__(self):
        object.__setattr__(self, "zone_rates", tuple(float(v) for v in self.zone_rates))
        if len(self.zone_names) != len(self.zone_rates):
            object.__setattr__(self, "zone_names", tuple(f"zone {z}" for z in range(len(self.zone_rates))))
        if any(r <= 0 for r in self.zone_rates):
            raise ValueError("zone rates must be positive")

    def zone_index(self, zone) -> int:
        if isinstance(zone, str):
            return self.zone_names.index(zone)
        z = int(zone)
        if not 0 <= z < len(self.zone_rates):
            raise ValueError(f"no zone {zone}")
        return z

    def goodput(self, zone, p: int) -> float:
        if p < 1:
            raise ValueError("load must be at least 1")
        return self.zone_rates[self.zone_index(zone)] / p


@dataclass(frozen=True)
class NetworkModel:
    wifi: WiFiModel = field(default_factory=WiFiModel)
    wimax: WiMAXModel = field(default_factory=WiMAXModel)

    def throughput(self, cell: int, zone: int, p: int) -> float:
        """Per-user goodput in ``cell`` with ``p`` users, for a user of WiMAX zone ``zone``."""
        return self.wimax.goodput(zone, p) if cell == WIMAX else self.wifi.goodput(p)

    @classmethod
    def from_dict(cls, d: dict | None) -> "NetworkModel":
        d = dict(d or {})
        unknown = set(d) - {"wifi", "wimax"}
        if unknown:
            raise ValueError(f"unknown model keys {sorted(unknown)}")
        wifi = WiFiModel(**{k: tuple(v) if isinstance(v, list) else v for k, v in d.get("wifi", {}).items()})
        wimax = WiMAXModel(**{k: tuple(v) for k, v in d.get("wimax", {}).items()})
        return cls(wifi, wimax)

    def to_dict(self) -> dict:
        return {"wifi": {"mode": self.wifi.mode, "table": list(self.wifi.table), "decay": self.wifi.decay},
                "wimax": {"zone_rates": list(self.wimax.zone_rates)}}


DEFAULT_MODEL = NetworkModel()


def wifi_goodput(model: WiFiModel | NetworkModel, p: int) -> float:
    m = model.wifi if isinstance(model, NetworkModel) else model
    return m.goodput(p)


def wimax_goodput(model: WiMAXModel | NetworkModel, zone, p: int) -> float:
    m = model.wimax if isinstance(model, NetworkModel) else model
    return m.goodput(zone, p)


# --------------------------------------------------------------------------
# topologies


@dataclass(frozen=True)
class Topology:
    """One WiMAX cell (id 0) with per-user zones, WiFi cells and choice sets."""

    zones: tuple[int, ...]
    wifi_cells: tuple[int, ...]
    choice_sets: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        object.__setattr__(self, "zones", tuple(int(z) for z in self.zones))
        object.__setattr__(self, "wifi_cells", tuple(int(c) for c in self.wifi_cells))
        object.__setattr__(self, "choice_sets", tuple(tuple(int(c) for c in cs) for cs in self.choice_sets))
        if len(self.zones) != len(self.choice_sets):
            raise ValueError("need one zone per user")
        if WIMAX in self.wifi_cells:
            raise ValueError("cell 0 is reserved for WiMAX")
        cells = {WIMAX, *self.wifi_cells}
        for n, cs in enumerate(self.choice_sets):
            if not cs:
                raise ValueError(f"user {n} has no choice")
            if len(set(cs)) != len(cs):
                raise ValueError(f"user {n} has repeated choices {cs}")
            if not set(cs) <= cells:
                raise ValueError(f"user {n} lists unknown cells {cs}")

    @property
    def n_users(self) -> int:
        return len(self.choice_sets)

    @property
    def n_cells(self) -> int:
        return max(self.wifi_cells, default=0) + 1

    @property
    def standard(self) -> bool:
        """Every user's first choice is the WiMAX cell."""
        return all(cs[0] == WIMAX for cs in self.choice_sets)

    def cells_of(self, allocation) -> np.ndarray:
        """Cell ids from per-user choice indices."""
        if len(allocation) != self.n_users:
            raise ValueError("allocation length differs from the number of users")
        out = np.empty(self.n_users, dtype=int)
        for n, (cs, a) in enumerate(zip(self.choice_sets, allocation)):
            if not 0 <= a < len(cs):
                raise ValueError(f"user {n} has no choice index {a}")
            out[n] = cs[a]
        return out

    def wifi_loads(self, allocation) -> list[int]:
        counts = np.bincount(self.cells_of(allocation), minlength=self.n_cells)
        return [int(counts[c]) for c in self.wifi_cells]

    def max_loads(self) -> np.ndarray:
        """Number of users able to join each cell."""
        out = np.zeros(self.n_cells, dtype=int)
        for cs in self.choice_sets:
            out[list(cs)] += 1
        return out

    def restrict(self, users) -> "Topology":
        users = list(users)
        return Topology([self.zones[n] for n in users], self.wifi_cells, [self.choice_sets[n] for n in users])

    def to_dict(self) -> dict:
        return {"wimax_cell": WIMAX, "wifi_cells": list(self.wifi_cells), "zones": list(self.zones),
                "choice_sets": [list(cs) for cs in self.choice_sets]}

    @classmethod
    def from_dict(cls, d: dict) -> "Topology":
        if d.get("wimax_cell", WIMAX) != WIMAX:
            raise ValueError("the WiMAX cell must have id 0")
        return cls(d["zones"], d["wifi_cells"], d["choice_sets"])


def save_topology(top: Topology, path) -> None:
    Path(path).write_text(json.dumps(top.to_dict(), indent=1) + "\n")


def load_topology(path) -> Topology:
    return Topology.from_dict(json.loads(Path(path).read_text()))


def golden_topology(name: str = "fairness") -> Topology:
    return load_topology(DATA_DIR / f"topology_{name}.json")


def golden_allocations(name: str = "fairness") -> dict[str, list[int]]:
    return json.loads((DATA_DIR / f"allocations_{name}.json").read_text())


def draw_user(rng: np.random.Generator, n_wifi: int, choices: int, n_zones: int = len(ZONE_RATES)):
    """(zone, choice set) of one user: WiMAX first, then distinct uniform WiFi cells."""
    zone = int(rng.integers(n_zones))
    wifi = rng.choice(n_wifi, size=choices - 1, replace=False) + 1 if choices > 1 else []
    return zone, (WIMAX, *(int(c) for c in wifi))


def build_topology(n_users: int, n_wifi: int, choices_per_user: int, seed) -> Topology:
    if choices_per_user < 1:
        raise ValueError("every user needs at least one choice")
    if n_wifi < choices_per_user - 1:
        raise ValueError("not enough WiFi cells for the requested choices")
    rng = np.random.default_rng(seed)
    users = [draw_user(rng, n_wifi, choices_per_user) for _ in range(n_users)]
    return Topology([z for z, _ in users], range(1, n_wifi + 1), [cs for _, cs in users])


# --------------------------------------------------------------------------
# station-side rewards


def cell_throughputs(model: NetworkModel, cell: int, zones) -> np.ndarray:
    """Goodput of every user connected to ``cell`` (``zones`` lists their WiMAX zones)."""
    p = len(zones)
    return np.array([model.throughput(cell, z, p) for z in zones])


def station_rewards(model: NetworkModel, cell: int, zones, utility=None, measured=None) -> np.ndarray:
    """Repercussion reward of each connected user, from the cell's own load only.

    ``r_n = U(u_n) - sum_{m != n} (U(u_m without n) - U(u_m))``.  ``utility``
    defaults to the identity; ``measured`` optionally replaces the current
    throughputs (the counterfactual ones always come from the model).
    """
    U = (lambda x: x) if utility is None else utility
    p = len(zones)
    cur = cell_throughputs(model, cell, zones) if measured is None else np.asarray(measured, dtype=float)
    own = np.array([U(x) for x in cur])
    if p == 1:
        return own
    minus = np.array([model.throughput(cell, z, p - 1) for z in zones])
    d = np.array([U(a) for a in minus]) - own
    return own - (d.sum() - d)


def alpha_station_rewards(model: NetworkModel, cell: int, zones, alpha: float, measured=None) -> np.ndarray:
    return station_rewards(model, cell, zones, lambda x: g_alpha(x, alpha), measured)


def topology_game(top: Topology, model: NetworkModel = DEFAULT_MODEL, alpha: float = 0.0) -> AllocationGame:
    """Allocation game whose resources are cell ids and payoffs ``G_alpha`` of goodput."""

    def oracle(n, cell, mask):
        p = len(members(mask))
        return g_alpha(model.throughput(cell, top.zones[n], p), alpha)

    return AllocationGame(top.choice_sets, oracle=oracle)


# --------------------------------------------------------------------------
# vectorized evaluation for many users


class CellEvaluator:
    """Throughputs and rewards of a whole assignment at once.

    ``cells`` and ``zones`` are aligned user arrays; inactive users carry
    cell -1 and are ignored.
    """

    def __init__(self, model: NetworkModel, n_cells: int, p_max: int = 64):
        self.model = model
        self.n_cells = n_cells
        self.rates = np.array(model.wimax.zone_rates)
        self._wifi = model.wifi.goodput_array(p_max)

    def _wifi_at(self, p: np.ndarray) -> np.ndarray:
        need = int(p.max(initial=0))
        if need >= len(self._wifi):
            self._wifi = self.model.wifi.goodput_array(max(need, 2 * len(self._wifi)))
        return self._wifi[p]

    def loads(self, cells: np.ndarray) -> np.ndarray:
        return np.bincount(cells[cells >= 0], minlength=self.n_cells)

    def per_user(self, cells: np.ndarray, zones: np.ndarray, p: np.ndarray) -> np.ndarray:
        """Goodput at per-user load ``p`` (entries with p < 1 give nan)."""
        safe = np.maximum(p, 1)
        out = np.where(cells == WIMAX, self.rates[zones] / safe, self._wifi_at(safe))
        return np.where((p >= 1) & (cells >= 0), out, np.nan)

    def throughputs(self, cells: np.ndarray, zones: np.ndarray) -> np.ndarray:
        counts = self.loads(cells)
        p = np.where(cells >= 0, counts[np.maximum(cells, 0)], 0)
        return self.per_user(cells, zones, p)

    def rewards(self, cells: np.ndarray, zones: np.ndarray, utility=None, measured=None):
        """(rewards, model throughputs); rewards are nan for inactive users."""
        U = (lambda x: x) if utility is None else utility
        active = cells >= 0
        counts = self.loads(cells)
        p = np.where(active, counts[np.maximum(cells, 0)], 0)
        u = self.per_user(cells, zones, p)
        cur = u if measured is None else np.where(active, measured, np.nan)
        own = U(np.where(active, cur, 1.0))
        minus = self.per_user(cells, zones, p - 1)
        shared = active & (p > 1)
        d = np.where(shared, U(np.where(shared, minus, 1.0)) - own, 0.0)
        D = np.bincount(cells[active], weights=d[active], minlength=self.n_cells)
        r = own - (D[np.maximum(cells, 0)] - d)
        return np.where(active, r, np.nan), u


def reward_bounds(model: NetworkModel, max_loads, zones_present, utilities, own_zones=None) -> tuple[float, float]:
    """Lower and upper bounds of station rewards over all reachable loads.

    ``max_loads[c]`` bounds the load of cell c, ``zones_present`` lists the
    WiMAX zones that can occur and ``utilities`` the utility functions in use.
    ``own_zones`` restricts the zones of the rewarded user itself (default:
    ``zones_present``), which gives tighter bounds for a single user.
    """
    lo, hi = np.inf, -np.inf
    rates = [model.wimax.zone_rates[z] for z in sorted(set(zones_present))] or list(model.wimax.zone_rates)
    own_rates = rates if own_zones is None else [model.wimax.zone_rates[z] for z in sorted(set(own_zones))]
    for cell, pmax in enumerate(max_loads):
        if pmax < 1:
            continue
        for p in range(1, int(pmax) + 1):
            if cell == WIMAX:
                now = [r / p for r in rates]
                before = [r / (p - 1) for r in rates] if p > 1 else None
                mine = [r / p for r in own_rates]
            else:
                now = mine = [model.wifi.goodput(p)]
                before = [model.wifi.goodput(p - 1)] if p > 1 else None
            own = [float(U(np.array(x))) for U in utilities for x in mine]
            if before is None:
                dmin = dmax = 0.0
            else:
                ds = [float(U(np.array(b))) - float(U(np.array(x))) for U in utilities for b, x in zip(before, now)]
                dmin, dmax = min(ds), max(ds)
            lo = min(lo, min(own) - (p - 1) * dmax)
            hi = max(hi, max(own) - (p - 1) * dmin)
    return lo, hi
