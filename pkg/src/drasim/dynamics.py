"""Node transition-rate models for the two-state recurrent process.

A node's infection rate I(n, d) and recovery rate H(n, d) depend on the
network state only through its infected-neighbor count n and degree d.
Provided families: linear SIS (rates beta*n and delta) and the saturating
sigmoid pair. Custom (n, d) rate functions plug into the same interface.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable


@dataclass(frozen=True)
class SigmoidParams:
    """Saturation / steepness parameters of the sigmoid rate family.

    s_inf, a_inf shape the infection rate; s_heal, a_heal the competing
    healthy diffusion; delta is the baseline self-recovery rate.
    """

    s_inf: float
    a_inf: float
    s_heal: float = 0.0
    a_heal: float = 0.0
    delta: float = 1.0

    def __post_init__(self):
        for name in ("s_inf", "a_inf", "s_heal", "a_heal", "delta"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be nonnegative")


@dataclass(frozen=True)
class LinearSisParams:
    beta: float
    delta: float = 1.0

    def __post_init__(self):
        if self.beta < 0 or self.delta < 0:
            raise ValueError("beta and delta must be nonnegative")


def sigmoid_infection(n: int, d: int, p: SigmoidParams) -> float:
    """Infection rate s_inf * (1 - 2 / (1 + exp(4 * a_inf * n))).

    Computed as s_inf * tanh(2 * a_inf * n), the overflow-safe form of the
    same expression. Zero at n = 0, saturating toward s_inf.
    """
    return p.s_inf * math.tanh(2.0 * p.a_inf * n)


def sigmoid_recovery(n: int, d: int, p: SigmoidParams) -> float:
    """Recovery rate s_heal * (1 - 2 / (1 + exp(4 * a_heal * (d - n)))) + delta.

    Grows with the healthy-neighbor count d - n; equals delta exactly when
    every neighbor is infected.
    """
    return p.s_heal * math.tanh(2.0 * p.a_heal * (d - n)) + p.delta


def linear_sis_rates(n: int, d: int, p: LinearSisParams) -> tuple[float, float]:
    """Standard SIS rates: (beta * n, delta)."""
    return (p.beta * n, p.delta)


@dataclass(frozen=True)
class RateModel:
    """A pair of pure (n, d) -> rate functions plus a kind tag.

    infection must be nondecreasing in n with infection(0, d) == 0 for the
    provided families; recovery must be nonincreasing in n. Evaluations are
    pure, so a model is safe to share across concurrent workers.
    """

    infection: Callable[[int, int], float]
    recovery: Callable[[int, int], float]
    kind: str
    params: object = None

    @classmethod
    def sigmoid(cls, params: SigmoidParams) -> "RateModel":
        return cls(
            infection=lambda n, d: sigmoid_infection(n, d, params),
            recovery=lambda n, d: sigmoid_recovery(n, d, params),
            kind="sigmoid",
            params=params,
        )

    @classmethod
    def linear_sis(cls, params: LinearSisParams) -> "RateModel":
        return cls(
            infection=lambda n, d: params.beta * n,
            recovery=lambda n, d: params.delta,
            kind="linear_sis",
            params=params,
        )

    @classmethod
    def custom(cls, infection, recovery) -> "RateModel":
        return cls(infection=infection, recovery=recovery, kind="custom")

    @classmethod
    def from_config(cls, spec: dict) -> "RateModel":
        kind = spec.get("kind")
        if kind == "sigmoid":
            keys = {"s_inf", "a_inf", "s_heal", "a_heal", "delta"}
            return cls.sigmoid(SigmoidParams(**{k: v for k, v in spec.items() if k in keys}))
        if kind == "linear_sis":
            keys = {"beta", "delta"}
            return cls.linear_sis(LinearSisParams(**{k: v for k, v in spec.items() if k in keys}))
        raise ValueError(f"unknown model kind {kind!r}")


def node_poisson_rate(state, i: int, model: RateModel, resources, rho: float) -> float:
    """Total transition intensity of node i in the given network state.

    Healthy nodes flip at I(n_i, d_i); infected nodes at H(n_i, d_i) plus
    rho when treated. ``resources`` is anything supporting ``i in resources``
    over treated node ids (a ResourceAllocation works via its targets).

    Raises ValueError if a resource sits on a healthy node, which signals an
    allocation bug upstream.
    """
    targets = getattr(resources, "targets", resources)
    treated = targets is not None and i in targets
    n = int(state.infected_neighbor_counts[i])
    d = state.graph.degree(i)
    if state.states[i]:
        return model.recovery(n, d) + (rho if treated else 0.0)
    if treated:
        raise ValueError(f"resource allocated to healthy node {i}")
    return model.infection(n, d)
