"""Time-dependent coupling multipliers G(t) and their binding to couplings.

The gaussian bump drops from 1 at the endpoints to exp(-6.25) ~ 1.93e-3 at
mid-protocol and is symmetric about T/2; the two half-Gaussians join there
with matching (near-zero) slope.  A speedup factor s > 1 compresses the bump
width while keeping the total duration T, so fast and slow runs share a time
axis.  The cosine variant reaches an exact zero at T/2.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

__all__ = [
    "Schedule",
    "CouplingAssignment",
    "evaluate",
    "evaluate_array",
    "coupling_at",
    "tunneling_at",
]

KINDS = ("gaussian_bump", "cosine", "constant", "position")


@dataclass(frozen=True)
class Schedule:
    """Dimensionless multiplier G(t) applied to selected couplings."""

    kind: str
    T: float
    speedup: float = 1.0
    L: Optional[float] = None
    path: Optional[Callable[[float], float]] = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown schedule kind {self.kind!r}")
        if self.T <= 0:
            raise ValueError("schedule duration must be positive")
        if self.speedup <= 0:
            raise ValueError("speedup must be positive")
        if self.kind == "position" and (self.L is None or self.path is None):
            raise ValueError("position schedule needs a cavity length and a path")


def _check_time(schedule: Schedule, t: float) -> float:
    # tolerate end-of-run rounding from t = nsteps * dt
    slack = 1e-9 * schedule.T
    if t < -slack or t > schedule.T + slack:
        raise ValueError(f"t={t} outside [0, {schedule.T}]")
    return min(max(t, 0.0), schedule.T)


def evaluate(schedule: Schedule, t: float) -> float:
    """G(t) for a single instant; errors outside [0, T]."""
    t = _check_time(schedule, t)
    T, s = schedule.T, schedule.speedup
    if schedule.kind == "gaussian_bump":
        u = t if t <= 0.5 * T else T - t
        return float(np.exp(-((5.0 * s * u / T) ** 2)))
    if schedule.kind == "cosine":
        return float(0.5 * (1.0 + np.cos(2.0 * np.pi * t / T)))
    if schedule.kind == "constant":
        return 1.0
    x = schedule.path(t)
    return float(np.sin(np.pi * x / schedule.L))


def evaluate_array(schedule: Schedule, ts: np.ndarray) -> np.ndarray:
    """Vectorized ``evaluate`` (the propagator calls this once per run)."""
    ts = np.asarray(ts, dtype=float)
    T, s = schedule.T, schedule.speedup
    slack = 1e-9 * T
    if ts.min() < -slack or ts.max() > T + slack:
        raise ValueError("times outside [0, T]")
    ts = np.clip(ts, 0.0, T)
    if schedule.kind == "gaussian_bump":
        u = np.where(ts <= 0.5 * T, ts, T - ts)
        return np.exp(-((5.0 * s * u / T) ** 2))
    if schedule.kind == "cosine":
        return 0.5 * (1.0 + np.cos(2.0 * np.pi * ts / T))
    if schedule.kind == "constant":
        return np.ones_like(ts)
    return np.array([evaluate(schedule, t) for t in ts])


@dataclass(frozen=True)
class CouplingAssignment:
    """Binding of schedules to couplings g[i,k] and tunnel amplitudes
    mu_at[i,j,k]; anything unlisted stays at its base value.

    couplings  entries (cavity i, atom k, schedule)
    tunnels    entries (cavity i, cavity j, atom k, schedule)
    """

    couplings: tuple = ()
    tunnels: tuple = ()

    def __post_init__(self):
        seen = set()
        for i, k, sched in self.couplings:
            if (i, k) in seen:
                raise ValueError(f"duplicate coupling assignment ({i},{k})")
            seen.add((i, k))
            if not isinstance(sched, Schedule):
                raise TypeError("assignment entries need a Schedule")
        edges = set()
        for i, j, k, sched in self.tunnels:
            key = (min(i, j), max(i, j), k)
            if key in edges:
                raise ValueError(f"duplicate tunnel assignment {key}")
            edges.add(key)
            if not isinstance(sched, Schedule):
                raise TypeError("assignment entries need a Schedule")


def coupling_at(params, assignment: CouplingAssignment, t: float) -> np.ndarray:
    """Instantaneous couplings: g_now[i,k] = g_base[i,k] * G_ik(t)."""
    g_now = params.g_base.copy()
    for i, k, sched in assignment.couplings:
        g_now[i, k] *= evaluate(sched, t)
    return g_now


def tunneling_at(params, assignment: CouplingAssignment, t: float) -> np.ndarray:
    """Instantaneous tunnel amplitudes with scheduled entries scaled."""
    mu = params.mu_at.copy()
    for i, j, k, sched in assignment.tunnels:
        val = evaluate(sched, t)
        mu[i, j, k] *= val
        mu[j, i, k] *= val
    return mu
