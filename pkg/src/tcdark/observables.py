"""Measured quantities: amplitudes, populations, free-photon probability,
reduced photon density matrix, spectra and spectral flow.

Observable names used in TrajectoryRecord series and CSV headers are stable
strings:

  P_free          probability of at least one photon in any cavity
  P_ph[<config>]  marginal probability of a photon configuration, e.g.
                  "P_ph[1]" or "P_ph[0 1]"
  pop[<label>]    population of one basis state, labelled as in
                  HilbertSpace.labels()
  P_split         probability that the atoms do not all share one cavity
  fidelity_init   squared overlap with the initial state
  fidelity_dark   squared overlap with the instantaneous dark subspace
  witness         darkness witness |g2 g4 l(0101) - g1 g3 l(1010)|
  level[<j>]      j-th eigenvalue in ascending order (spectral flow)
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .darkspace import darkness_witness, dark_subspace
from .hilbert import BasisState, HilbertSpace
from .operators import OperatorMatrix, build_hamiltonian
from .propagator import Model
from .schedules import coupling_at, tunneling_at

__all__ = [
    "PhotonDensity",
    "SpectralFlow",
    "amplitude",
    "free_photon_probability",
    "photon_number_probability",
    "reduced_photon_density",
    "fidelity",
    "spectrum",
    "spectral_flow",
    "obs_free_photon",
    "obs_photon_config",
    "obs_population",
    "obs_fidelity",
    "obs_dark_overlap",
    "obs_witness",
    "obs_split_atoms",
    "count_humps",
]

DEGENERACY_REL_TOL = 1e-9


@dataclass
class PhotonDensity:
    """Field density matrix over photon configurations (atoms traced out)."""

    labels: list[tuple[int, ...]]
    matrix: np.ndarray

    def __post_init__(self):
        m = self.matrix
        if np.abs(m - m.conj().T).max() > 1e-12:
            raise ValueError("photon density not Hermitian")
        if abs(np.trace(m).real - 1.0) > 1e-10:
            raise ValueError("photon density trace != 1")
        if np.linalg.eigvalsh(m).min() < -1e-12:
            raise ValueError("photon density not positive semidefinite")

    @property
    def purity(self) -> float:
        return float(np.trace(self.matrix @ self.matrix).real)


@dataclass
class SpectralFlow:
    """Sorted eigenvalues per sampled time with adjacent-degeneracy flags."""

    times: np.ndarray
    levels: np.ndarray      # (ntimes, dim), ascending per row
    degenerate: np.ndarray  # (ntimes, dim-1) bools, gap below tolerance


def amplitude(state: np.ndarray, space: HilbertSpace, label: BasisState) -> complex:
    """Complex coefficient of one basis state."""
    return complex(state[space.index_of(label)])


def _free_mask(space: HilbertSpace) -> np.ndarray:
    return np.array([sum(st.photons) > 0 for st in space.basis])


def free_photon_probability(state: np.ndarray, space: HilbertSpace) -> float:
    """Probability of at least one explicit photon in any cavity."""
    return float(np.sum(np.abs(state[_free_mask(space)]) ** 2))


def photon_number_probability(
    state: np.ndarray, space: HilbertSpace, config: Sequence[int]
) -> float:
    """Marginal probability of one photon configuration (summed over atoms)."""
    config = tuple(config)
    if len(config) != space.cavities:
        raise ValueError("photon config has wrong number of cavities")
    mask = np.array([st.photons == config for st in space.basis])
    return float(np.sum(np.abs(state[mask]) ** 2))


def reduced_photon_density(state: np.ndarray, space: HilbertSpace) -> PhotonDensity:
    """Partial trace of |psi><psi| over the atomic factor.

    The source analysis writes the trace subscript as the photon index; a
    field density matrix must trace out the atoms, which is what this does
    (diagonal equals photon_number_probability per configuration).
    """
    groups: dict[tuple[int, ...], dict] = {}
    for j, st in enumerate(space.basis):
        groups.setdefault(st.photons, {})[st.atoms] = j
    labels = sorted(groups)
    n = len(labels)
    rho = np.zeros((n, n), dtype=complex)
    for a, la in enumerate(labels):
        ga = groups[la]
        for b, lb in enumerate(labels):
            gb = groups[lb]
            acc = 0.0 + 0.0j
            for atoms, ja in ga.items():
                jb = gb.get(atoms)
                if jb is not None:
                    acc += state[ja] * np.conj(state[jb])
            rho[a, b] = acc
    return PhotonDensity(labels=labels, matrix=rho)


def fidelity(state: np.ndarray, reference: np.ndarray) -> float:
    """|<reference|state>|^2."""
    if state.shape != reference.shape:
        raise ValueError("states live in different spaces")
    return float(np.abs(np.vdot(reference, state)) ** 2)


def spectrum(h) -> np.ndarray:
    """Real eigenvalues of a Hermitian operator, ascending."""
    if isinstance(h, OperatorMatrix):
        if h.hermiticity_residual() > 1e-10:
            raise ValueError("non-Hermitian input to spectrum")
        m = h.toarray()
    else:
        m = np.asarray(h)
        if m.size and np.abs(m - m.conj().T).max() > 1e-10 * max(np.abs(m).max(), 1e-300):
            raise ValueError("non-Hermitian input to spectrum")
    return np.linalg.eigvalsh(m)


def spectral_flow(model: Model, times: Sequence[float]) -> SpectralFlow:
    """Eigenvalues of H(t) over sampled times, sorted by energy per time
    (matching level numbering by increasing energy, not adiabatic tracking)."""
    times = np.asarray(list(times), dtype=float)
    levels = np.empty((times.size, model.space.dim))
    for n, t in enumerate(times):
        g_now = coupling_at(model.params, model.assignment, t)
        mu_now = tunneling_at(model.params, model.assignment, t)
        h = build_hamiltonian(model.space, model.params, g_now, mu_at_now=mu_now)
        levels[n] = spectrum(h)
    gaps = np.diff(levels, axis=1)
    ranges = levels.max(axis=1) - levels.min(axis=1)
    tol = DEGENERACY_REL_TOL * ranges[:, None]
    degenerate = gaps <= tol
    return SpectralFlow(times=times, levels=levels, degenerate=degenerate)


# ---------------------------------------------------------------------------
# observer factories for evolve(); each returns f(state, ctx) -> float

def obs_free_photon(space: HilbertSpace) -> Callable:
    mask = _free_mask(space)

    def f(state, ctx):
        return float(np.sum(np.abs(state[mask]) ** 2))

    return f


def obs_photon_config(space: HilbertSpace, config: Sequence[int]) -> Callable:
    config = tuple(config)
    mask = np.array([st.photons == config for st in space.basis])

    def f(state, ctx):
        return float(np.sum(np.abs(state[mask]) ** 2))

    return f


def obs_population(space: HilbertSpace, label: BasisState) -> Callable:
    j = space.index_of(label)

    def f(state, ctx):
        return float(np.abs(state[j]) ** 2)

    return f


def obs_fidelity(reference: np.ndarray) -> Callable:
    ref = reference.copy()

    def f(state, ctx):
        return float(np.abs(np.vdot(ref, state)) ** 2)

    return f


def obs_dark_overlap(space: HilbertSpace) -> Callable:
    """Squared overlap with the instantaneous (vacuum-supported) dark
    subspace of the current couplings."""

    def f(state, ctx):
        db = dark_subspace(space, ctx.g_now)
        if db.nullity == 0:
            return 0.0
        proj = db.vectors @ (db.vectors.conj().T @ state)
        return float(np.linalg.norm(proj) ** 2)

    return f


def obs_witness(space: HilbertSpace) -> Callable:
    def f(state, ctx):
        return darkness_witness(state, space, ctx.g_now)

    return f


def obs_split_atoms(space: HilbertSpace) -> Callable:
    """Probability that the atoms occupy more than one distinct cavity."""
    mask = np.array([
        len({pos for _, pos in st.atoms}) > 1 for st in space.basis
    ])

    def f(state, ctx):
        return float(np.sum(np.abs(state[mask]) ** 2))

    return f


def count_humps(
    values: np.ndarray, threshold: float, smooth_window: Optional[int] = None
) -> int:
    """Number of excursions of the (lightly smoothed) curve above threshold.

    The probability curves carry fast Rabi oscillation on top of their slow
    envelope, so raw local-maxima counting is meaningless; an excursion of
    the smoothed curve above the floor is what reads as one hump in the
    time-series figures.  The default window spans 2% of the series so the
    averaging scale tracks the protocol duration, not the sampling stride.
    """
    y = np.asarray(values, dtype=float)
    if smooth_window is None:
        smooth_window = max(11, y.size // 50)
    k = min(smooth_window, max(1, 2 * (y.size // 2) - 1))
    if k % 2 == 0:
        k += 1
    if k > 1:
        y = np.convolve(y, np.ones(k) / k, mode="same")
    above = y > threshold
    if above.size == 0:
        return 0
    starts = int(above[0]) + int(np.sum(above[1:] & ~above[:-1]))
    return starts
