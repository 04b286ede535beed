"""Exact Gillespie simulation of the controlled two-state process.

A run couples the direct-method CTMC sampler with a resource-allocation
strategy recomputed after every state-changing event (or on a fixed
interval when configured). Independent runs share nothing mutable, so any
number can execute concurrently.

Stream discipline: a run's seed feeds one SeedSequence that spawns two
child streams, (0) environment = initial infection plus all CTMC draws,
(1) strategy = random-allocation draws. Two draws leave the environment
stream per event: waiting time, then node pick.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import _engine
from .dynamics import RateModel
from .graph import Graph
from .strategies import STRATEGY_NAMES, lrsr_ranking, mcm_ordering

_VERSION = "0.1.0"

_MODE_BY_STRATEGY = {
    "glrie": _engine.MODE_GLRIE,
    "lrie": _engine.MODE_LRIE,
    "lrsr": _engine.MODE_STATIC,
    "mcm": _engine.MODE_STATIC,
    "rand": _engine.MODE_RAND,
}


class NetworkState:
    """Binary node states plus a coherent infected-neighbor-count cache."""

    def __init__(self, graph: Graph, states):
        self.graph = graph
        self.states = np.asarray(states, dtype=np.uint8).copy()
        if self.states.shape != (graph.n,):
            raise ValueError("state vector length must equal node count")
        self.infected_neighbor_counts = self._count_from_scratch()
        self.infected_count = int(self.states.sum())

    @classmethod
    def from_infected(cls, graph: Graph, infected) -> "NetworkState":
        x = np.zeros(graph.n, dtype=np.uint8)
        x[np.asarray(list(infected), dtype=np.int64)] = 1
        return cls(graph, x)

    @classmethod
    def random_fraction(cls, graph: Graph, fraction: float, rng: np.random.Generator):
        if not (0.0 < fraction <= 1.0):
            raise ValueError("initial infection fraction must be in (0, 1]")
        k = max(1, int(round(fraction * graph.n)))
        ids = rng.choice(graph.n, size=k, replace=False)
        return cls.from_infected(graph, ids)

    def _count_from_scratch(self) -> np.ndarray:
        counts = np.zeros(self.graph.n, dtype=np.int32)
        for i in np.flatnonzero(self.states):
            counts[self.graph.neighbors(int(i))] += 1
        return counts

    def flip(self, i: int) -> None:
        """Toggle node i, keeping the neighbor-count cache coherent."""
        if self.states[i]:
            self.states[i] = 0
            self.infected_count -= 1
            self.infected_neighbor_counts[self.graph.neighbors(i)] -= 1
        else:
            self.states[i] = 1
            self.infected_count += 1
            self.infected_neighbor_counts[self.graph.neighbors(i)] += 1

    def infected_nodes(self) -> np.ndarray:
        return np.flatnonzero(self.states)

    def copy(self) -> "NetworkState":
        return NetworkState(self.graph, self.states)

    def check_coherent(self) -> None:
        assert np.array_equal(self.infected_neighbor_counts, self._count_from_scratch())
        assert self.infected_count == int(self.states.sum())


@dataclass
class SimConfig:
    """Per-run knobs: horizon, budget/strength, initial condition, seeding.

    initial_infection is either a fraction in (0, 1] or an explicit node
    set. realloc_interval 0 means reallocate after every event. The seed
    may be an int or a sequence of ints (SeedSequence entropy), which is
    how the experiment harness derives per-run streams.
    """

    t_max: float = 20.0
    budget: int = 10
    rho: float = 1.0
    initial_infection: object = 0.2
    seed: object = 0
    realloc_interval: float = 0.0

    def __post_init__(self):
        if self.t_max <= 0:
            raise ValueError("t_max must be positive")
        if self.budget < 0:
            raise ValueError("budget must be nonnegative")
        if self.rho < 0:
            raise ValueError("rho must be nonnegative")
        if self.realloc_interval < 0:
            raise ValueError("realloc_interval must be nonnegative")
        if isinstance(self.initial_infection, float) and not (0.0 < self.initial_infection <= 1.0):
            raise ValueError("initial infection fraction must be in (0, 1]")


@dataclass
class Trajectory:
    """Time-stamped event log of one run; the source of every metric.

    Events are (time, node, new_state) with strictly increasing times.
    final_time is the extinction time when the run ended absorbed in the
    all-healthy state, else t_max.
    """

    n_nodes: int
    t_max: float
    initial_infected: np.ndarray
    times: np.ndarray
    nodes: np.ndarray
    new_states: np.ndarray
    final_time: float
    metadata: dict = field(default_factory=dict)

    def infected_count_steps(self):
        """(event times, counts) where counts[k] is N_I after k events."""
        deltas = np.where(self.new_states == 1, 1, -1)
        counts = np.concatenate(([self.initial_infected.size],
                                 self.initial_infected.size + np.cumsum(deltas)))
        return self.times, counts

    def counts_at(self, grid) -> np.ndarray:
        times, counts = self.infected_count_steps()
        return counts[np.searchsorted(times, np.asarray(grid), side="right")]

    def extinction_event_time(self):
        """First event time at which N_I hits zero, or None."""
        times, counts = self.infected_count_steps()
        hits = np.flatnonzero(counts[1:] == 0)
        if self.initial_infected.size == 0:
            return 0.0
        return float(times[hits[0]]) if hits.size else None

    def save(self, path) -> None:
        header = {
            "n_nodes": self.n_nodes,
            "t_max": self.t_max,
            "final_time": self.final_time,
            "initial_infected": [int(i) for i in self.initial_infected],
            "metadata": self.metadata,
        }
        lines = ["# drasim trajectory v1", "# " + json.dumps(header, sort_keys=True)]
        for t, nd, s in zip(self.times, self.nodes, self.new_states):
            lines.append(f"{t!r} {nd} {s}")
        Path(path).write_text("\n".join(lines) + "\n")

    @classmethod
    def load(cls, path) -> "Trajectory":
        text = Path(path).read_text()
        lines = text.splitlines()
        if not lines or not lines[0].startswith("# drasim trajectory"):
            raise ValueError(f"{path}: not a drasim trajectory file")
        header = json.loads(lines[1][2:])
        times, nodes, states = [], [], []
        for line in lines[2:]:
            if not line.strip():
                continue
            t, nd, s = line.split()
            times.append(float(t))
            nodes.append(int(nd))
            states.append(int(s))
        return cls(
            n_nodes=int(header["n_nodes"]),
            t_max=float(header["t_max"]),
            initial_infected=np.asarray(header["initial_infected"], dtype=np.int32),
            times=np.asarray(times, dtype=np.float64),
            nodes=np.asarray(nodes, dtype=np.int32),
            new_states=np.asarray(states, dtype=np.uint8),
            final_time=float(header["final_time"]),
            metadata=header.get("metadata", {}),
        )


def build_rate_tables(g: Graph, model: RateModel):
    """Tabulate I(n, d_i) and H(n, d_i) per node for n = 0..d_i.

    Also validates the RateModel invariants once: rates nonnegative, I
    nondecreasing and H nonincreasing in the infected-neighbor count.
    Returns (offsets, itab, htab) flat arrays for the kernels.
    """
    degs = g.degrees
    off = np.zeros(g.n + 1, dtype=np.int64)
    np.cumsum(degs + 1, out=off[1:])
    itab = np.empty(int(off[-1]))
    htab = np.empty(int(off[-1]))
    rows: dict[int, tuple[np.ndarray, np.ndarray]] = {}
    for d in np.unique(degs):
        d = int(d)
        irow = np.empty(d + 1)
        hrow = np.empty(d + 1)
        for n in range(d + 1):
            iv = float(model.infection(n, d))
            hv = float(model.recovery(n, d))
            if iv < 0 or hv < 0:
                raise ValueError(f"negative rate at (n={n}, d={d})")
            if n > 0 and iv < irow[n - 1]:
                raise ValueError(f"infection rate decreasing at (n={n}, d={d})")
            if n > 0 and hv > hrow[n - 1]:
                raise ValueError(f"recovery rate increasing at (n={n}, d={d})")
            irow[n] = iv
            hrow[n] = hv
        rows[d] = (irow, hrow)
    for i in range(g.n):
        irow, hrow = rows[int(degs[i])]
        itab[off[i]:off[i + 1]] = irow
        htab[off[i]:off[i + 1]] = hrow
    return off, itab, htab


def step(g: Graph, state: NetworkState, model: RateModel, resources, rho: float,
         rng: np.random.Generator):
    """One Gillespie direct-method transition, mutating ``state``.

    Returns (waiting_time, flipped_node), or None when the total rate is
    zero (absorption; extinction is the usual case).
    """
    targets = getattr(resources, "targets", resources) or ()
    lam = np.zeros(g.n)
    lam_total = 0.0
    counts = state.infected_neighbor_counts
    for v in range(g.n):
        n_v = int(counts[v])
        d_v = g.degree(v)
        if state.states[v]:
            lv = model.recovery(n_v, d_v) + (rho if v in targets else 0.0)
        else:
            lv = model.infection(n_v, d_v)
        lam[v] = lv
        lam_total += lv
    if lam_total <= 0.0:
        return None
    wait = -np.log1p(-rng.random()) / lam_total
    target = rng.random() * lam_total
    acc = 0.0
    node = g.n - 1
    for v in range(g.n):
        acc += lam[v]
        if acc >= target:
            node = v
            break
    state.flip(node)
    return wait, node


def _spawn_streams(seed):
    ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    env_ss, strat_ss = ss.spawn(2)
    return (
        np.random.Generator(np.random.PCG64(env_ss)),
        np.random.Generator(np.random.PCG64(strat_ss)),
    )


def initial_state(g: Graph, cfg: SimConfig, rng: np.random.Generator) -> NetworkState:
    if isinstance(cfg.initial_infection, float):
        return NetworkState.random_fraction(g, cfg.initial_infection, rng)
    return NetworkState.from_infected(g, cfg.initial_infection)


def run(g: Graph, model: RateModel, strategy: str, cfg: SimConfig,
        priority=None, debug_every: int = 0) -> Trajectory:
    """Simulate one controlled trajectory under the named strategy.

    priority optionally supplies a precomputed static ranking for lrsr/mcm
    (they are recomputed per graph otherwise). debug_every > 0 verifies the
    incremental neighbor-count cache against a recount every that many
    events.
    """
    name = strategy.lower()
    if name not in STRATEGY_NAMES:
        raise ValueError(f"unknown strategy {strategy!r}; expected one of {STRATEGY_NAMES}")
    rng_env, rng_strat = _spawn_streams(cfg.seed)
    state0 = initial_state(g, cfg, rng_env)
    init = np.sort(state0.infected_nodes()).astype(np.int32)

    off, itab, htab = build_rate_tables(g, model)
    mode = _MODE_BY_STRATEGY[name]
    rank_of = np.zeros(g.n, dtype=np.int64)
    if mode == _engine.MODE_STATIC:
        if priority is None:
            priority = lrsr_ranking(g) if name == "lrsr" else mcm_ordering(g)
        rank_of[np.asarray(priority, dtype=np.int64)] = np.arange(g.n)
    frozen = np.zeros(g.n, dtype=np.uint8)

    times, nodes, states, final_time = _engine.gillespie_run(
        g.indptr, g.indices, off, itab, htab,
        state0.states, mode, rank_of, frozen,
        cfg.budget, cfg.rho, cfg.t_max, cfg.realloc_interval, debug_every,
        rng_env, rng_strat,
    )
    meta = {
        "strategy": name,
        "seed": cfg.seed if isinstance(cfg.seed, int) else list(cfg.seed),
        "t_max": cfg.t_max,
        "budget": cfg.budget,
        "rho": cfg.rho,
        "realloc_interval": cfg.realloc_interval,
        "model": _model_meta(model),
        "version": _VERSION,
    }
    return Trajectory(
        n_nodes=g.n,
        t_max=cfg.t_max,
        initial_infected=init,
        times=times,
        nodes=nodes,
        new_states=states,
        final_time=float(final_time),
        metadata=meta,
    )


def _model_meta(model: RateModel) -> dict:
    out = {"kind": model.kind}
    if model.params is not None:
        out.update({k: v for k, v in vars(model.params).items()})
    return out


def infected_count_derivative(g: Graph, state: NetworkState, model: RateModel,
                              resources, rho: float) -> float:
    """Instantaneous drift of the expected infected count at the given state.

    Equals -sum_i H_i X_i - rho * sum_i R_i X_i + sum_i I_i (1 - X_i); the
    Monte-Carlo companion is :func:`mc_infected_increment`.
    """
    targets = set(getattr(resources, "targets", resources) or ())
    counts = state.infected_neighbor_counts
    total = 0.0
    for i in range(g.n):
        n_i = int(counts[i])
        d_i = g.degree(i)
        if state.states[i]:
            total -= model.recovery(n_i, d_i)
            if i in targets:
                total -= rho
        else:
            total += model.infection(n_i, d_i)
    return total


def mc_infected_increment(g: Graph, state: NetworkState, model: RateModel,
                          resources, rho: float, horizon: float, runs: int,
                          seed) -> tuple[float, float]:
    """Monte-Carlo estimate of (E[N_I(horizon)] - N_I(0)) / horizon.

    The treated set stays frozen for the (short) horizon. Returns
    (estimate, standard error), both in rate units.
    """
    targets = set(getattr(resources, "targets", resources) or ())
    for i in targets:
        if not state.states[i]:
            raise ValueError(f"resource allocated to healthy node {i}")
    r0 = np.zeros(g.n, dtype=np.uint8)
    r0[list(targets)] = 1
    off, itab, htab = build_rate_tables(g, model)
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))
    sum_d, sum_d2 = _engine.mc_increment(
        g.indptr, g.indices, off, itab, htab,
        state.states, r0, rho, horizon, runs, rng,
    )
    mean = sum_d / runs
    var = max(0.0, sum_d2 / runs - mean * mean) * runs / (runs - 1)
    stderr = np.sqrt(var / runs)
    return mean / horizon, stderr / horizon
