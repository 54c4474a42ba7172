"""Canned experiment registry: every numerical study reproduced by the engine.

All physical defaults live in the packaged config files (configs/*.cfg) so
the choices are explicit and overridable.  Parameters are given in rad/s;
``time.unit_seconds`` converts the paper-style duration and step numbers
(T_units, dt_units) into seconds, which fixes the dimensionless phase budget
g*T actually integrated:

  one-cavity runs   g*T = 2e8 * 1000 * 8.75e-9 = 1750 rad.  The source
                    analysis gives T and dt but never g for these runs; the
                    budget is calibrated so the one-photon emission peak
                    lands at its reported scale (~3e-6), while the two-photon
                    peak is budget-independent.
  two-cavity runs   g*T = 2e8 * 200 * 4e-8 = 1600 rad, smooth per-step
                    phases for the krylov backend, and slow enough that
                    adding the second singlet weakens the emission.
"""

from __future__ import annotations

import importlib.resources
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .darkspace import (
    CavityGraph,
    compose_pairs,
    graph_singlet_pair,
    singlet_pair,
    singlet_state,
)
from .hilbert import AtomSpec, HilbertSpace, enumerate_space
from .observables import (
    obs_dark_overlap,
    obs_fidelity,
    obs_free_photon,
    obs_photon_config,
    obs_population,
    obs_split_atoms,
    obs_witness,
)
from .operators import ModelParams
from .propagator import EvolutionConfig, Model, TrajectoryRecord, evolve
from .schedules import CouplingAssignment, Schedule

__all__ = [
    "ExperimentSpec",
    "ComparisonSummary",
    "EXPERIMENTS",
    "list_experiments",
    "load_config",
    "build_experiment",
    "run_experiment",
    "compare_runs",
]

EXPERIMENTS = {
    "E1": ("one-cavity-2atoms: singlet under the slow gaussian deformation"),
    "E2": ("one-cavity-4atoms: two singlets, g2(t)=g4(t)=g1*G(t)"),
    "E2f": ("one-cavity-4atoms-fast: E2 with the bump compressed 10x"),
    "E2c": ("one-cavity-4atoms-cosine: E2 with the cosine schedule"),
    "E3": ("spectral-flow: eigenvalues of the 4-atom model over E2's schedule"),
    "E4": ("two-cavity-2atoms: tunneling model, g of atom 2 -> 0 in both cavities"),
    "E5": ("two-cavity-tunneling-ramp: couplings constant, tunnel amplitude ramps"),
    "E6": ("two-cavity-4atoms: two graph singlets, atoms 2 and 4 detune"),
}

# key -> python type; every config file must bind exactly the keys its
# family uses, and overrides must name existing keys
SCHEMA = {
    "model.cavities": int,
    "model.atoms": int,
    "model.mobile": bool,
    "model.sector": int,
    "params.omega": float,
    "params.g": float,
    "params.mu_ph": float,
    "params.mu_at": float,
    "time.unit_seconds": float,
    "time.T_units": float,
    "time.dt_units": float,
    "schedule.kind": str,
    "schedule.speedup": float,
    "scheduled_atoms": str,
    "scheduled_tunnels": str,
    "frame": str,
    "backend": str,
    "sample_every": int,
    "cache_quantum": float,
    "initial": str,
    "kind": str,
    "spectrum.samples": int,
    "debug.break_hermiticity": bool,
}


@dataclass
class ExperimentSpec:
    name: str
    description: str
    kind: str  # trajectory | spectrum
    model: Model
    schedule: Schedule
    initial: np.ndarray
    config: EvolutionConfig
    observers: dict[str, Callable]
    raw: dict[str, str]
    spectrum_samples: int = 0


@dataclass
class ComparisonSummary:
    observable: str
    max_a: float
    max_b: float
    ratio: float
    sup_distance: float


def _parse_bool(s: str) -> bool:
    if s.lower() in ("true", "1", "yes"):
        return True
    if s.lower() in ("false", "0", "no"):
        return False
    raise ValueError(f"not a boolean: {s!r}")


def parse_config_text(text: str) -> dict[str, str]:
    out = {}
    for ln, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {ln}: expected 'key = value'")
        key, val = (part.strip() for part in line.split("=", 1))
        if key in out:
            raise ValueError(f"line {ln}: duplicate key {key!r}")
        out[key] = val
    return out


def _coerce(key: str, val: str):
    if key not in SCHEMA:
        raise ValueError(f"unknown config key {key!r}")
    typ = SCHEMA[key]
    if typ is bool:
        return _parse_bool(val)
    try:
        return typ(val)
    except ValueError:
        raise ValueError(f"config key {key!r} expects {typ.__name__}, got {val!r}")


def load_config(name: str, overrides: Optional[dict[str, str]] = None) -> dict:
    """Packaged defaults for one experiment (or a user .cfg file path)
    plus type-checked overrides."""
    if name in EXPERIMENTS:
        text = (
            importlib.resources.files("tcdark.configs")
            .joinpath(f"{name}.cfg")
            .read_text(encoding="utf-8")
        )
    else:
        from pathlib import Path

        path = Path(name)
        if path.suffix != ".cfg" or not path.exists():
            raise KeyError(
                f"unknown experiment {name!r}; available: "
                f"{', '.join(EXPERIMENTS)} (or a path to a .cfg file)"
            )
        text = path.read_text(encoding="utf-8")
    raw = parse_config_text(text)
    for key, val in (overrides or {}).items():
        if key not in raw and key not in SCHEMA:
            raise ValueError(f"unknown config key {key!r}")
        raw[key] = val
    return raw


def _atom_list(s: str) -> list[int]:
    s = s.strip()
    if not s:
        return []
    return [int(tok) for tok in s.split(",")]


def build_experiment(name: str, overrides: Optional[dict[str, str]] = None) -> ExperimentSpec:
    raw = load_config(name, overrides)
    cfg = {k: _coerce(k, v) for k, v in raw.items()}

    cavities = cfg["model.cavities"]
    n_atoms = cfg["model.atoms"]
    mobile = cfg["model.mobile"]
    sector = cfg["model.sector"]
    space = enumerate_space(cavities, AtomSpec(n_atoms, mobile=mobile), sector=sector)

    unit = cfg["time.unit_seconds"]
    if unit <= 0:
        raise ValueError("time.unit_seconds must be positive")
    g = cfg["params.g"] * unit
    omega = cfg["params.omega"] * unit
    mu_ph_amp = cfg.get("params.mu_ph", 0.0) * unit
    mu_at_amp = cfg.get("params.mu_at", 0.0) * unit
    mu_ph = np.zeros((cavities, cavities))
    mu_at = np.zeros((cavities, cavities, n_atoms))
    if cavities > 1:
        mu_ph[0, 1] = mu_ph[1, 0] = mu_ph_amp
        mu_at[0, 1, :] = mu_at[1, 0, :] = mu_at_amp
    params = ModelParams(
        omega=omega,
        g_base=np.full((cavities, n_atoms), g),
        mu_ph=mu_ph,
        mu_at=mu_at,
        frame=cfg["frame"],
    )

    T = cfg["time.T_units"]
    schedule = Schedule(cfg["schedule.kind"], T=T, speedup=cfg["schedule.speedup"])
    couplings = tuple(
        (i, k, schedule)
        for k in _atom_list(cfg["scheduled_atoms"])
        for i in range(cavities)
    )
    tunnels = tuple(
        (0, 1, k, schedule) for k in _atom_list(cfg.get("scheduled_tunnels", ""))
    )
    assignment = CouplingAssignment(couplings=couplings, tunnels=tunnels)
    model = Model(space=space, params=params, assignment=assignment)

    initial = _initial_state(cfg["initial"], space)
    evo = EvolutionConfig(
        dt=cfg["time.dt_units"],
        T=T,
        backend=cfg["backend"],
        sample_every=cfg["sample_every"],
        cache_quantum=cfg["cache_quantum"],
    )
    observers = _observer_set(space, initial, cavities, n_atoms)
    observers["G"] = _schedule_observer(schedule)
    if name not in EXPERIMENTS:
        from pathlib import Path

        name = Path(name).stem
    return ExperimentSpec(
        name=name,
        description=EXPERIMENTS.get(name, "user-defined experiment"),
        kind=cfg.get("kind", "trajectory"),
        model=model,
        schedule=schedule,
        initial=initial,
        config=evo,
        observers=observers,
        raw=raw,
        spectrum_samples=cfg.get("spectrum.samples", 0),
    )


def _initial_state(recipe: str, space: HilbertSpace) -> np.ndarray:
    two_cavity_graph = CavityGraph(vertices=(0, 1), edges=((0, 1),))
    if recipe == "two_atom_singlet":
        return singlet_state(space, 0, 1, cavity=0)
    if recipe == "two_pair_singlets":
        return compose_pairs(space, [(0, 1, singlet_pair(0)), (2, 3, singlet_pair(0))])
    if recipe == "graph_difference":
        pair = graph_singlet_pair(two_cavity_graph)
        return compose_pairs(space, [(0, 1, pair)])
    if recipe == "two_pair_graph_differences":
        pair = graph_singlet_pair(two_cavity_graph)
        return compose_pairs(space, [(0, 1, pair), (2, 3, pair)])
    raise ValueError(f"unknown initial-state recipe {recipe!r}")


def _photon_configs(space: HilbertSpace) -> list[tuple[int, ...]]:
    return sorted({st.photons for st in space.basis})


def _schedule_observer(schedule: Schedule) -> Callable:
    """The deformation multiplier itself, recorded alongside the physics."""
    from .schedules import evaluate

    def f(state, ctx):
        return evaluate(schedule, ctx.t)

    return f


def _observer_set(space, initial, cavities, n_atoms) -> dict[str, Callable]:
    obs: dict[str, Callable] = {}
    obs["P_free"] = obs_free_photon(space)
    for config in _photon_configs(space):
        label = " ".join(str(n) for n in config)
        obs[f"P_ph[{label}]"] = obs_photon_config(space, config)
    obs["fidelity_init"] = obs_fidelity(initial)
    if cavities == 1 and n_atoms == 2:
        obs["fidelity_dark"] = obs_dark_overlap(space)
    if cavities == 1 and n_atoms == 4:
        obs["witness"] = obs_witness(space)
        # populations of the single-photon states (one excited atom left)
        for st in space.basis:
            if sum(st.photons) == 1:
                obs[f"pop[{st.label()}]"] = obs_population(space, st)
    if cavities == 1 and n_atoms == 2:
        for st in space.basis:
            if sum(st.photons) == 0:
                obs[f"pop[{st.label()}]"] = obs_population(space, st)
    if cavities > 1:
        obs["P_split"] = obs_split_atoms(space)
    return obs


def run_experiment(spec: ExperimentSpec) -> TrajectoryRecord:
    """Deterministic trajectory for one built experiment."""
    if spec.kind != "trajectory":
        raise ValueError(
            f"experiment {spec.name} is a {spec.kind} preset; "
            "use the spectrum command"
        )
    return evolve(spec.initial, spec.model, spec.config, spec.observers)


def compare_runs(a: TrajectoryRecord, b: TrajectoryRecord, observable: str) -> ComparisonSummary:
    """Max values, their ratio, and the sup-norm curve distance (b resampled
    onto a's grid when needed)."""
    for rec in (a, b):
        if observable not in rec.series:
            raise ValueError(f"observable {observable!r} missing from a run")
    ya = a.series[observable]
    if a.times.shape == b.times.shape and np.allclose(a.times, b.times):
        yb = b.series[observable]
    else:
        yb = np.interp(a.times, b.times, b.series[observable])
    max_a = float(ya.max())
    max_b = float(yb.max())
    ratio = max_a / max_b if max_b != 0 else np.inf
    return ComparisonSummary(
        observable=observable,
        max_a=max_a,
        max_b=max_b,
        ratio=ratio,
        sup_distance=float(np.abs(ya - yb).max()),
    )
