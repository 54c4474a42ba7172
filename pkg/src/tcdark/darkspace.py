"""Dark and black subspaces, singlet construction, and the darkness witness.

Dark states are the photon-vacuum states annihilated by the photon-creating
interaction V+; they cannot emit into any cavity mode.  For mobile atoms an
atom may first tunnel and only then emit, so the stable ("black") subspace is
the numerical kernel of V+ U_delta for a short evolution U_delta, again
restricted to photon-vacuum support.

Kernels are computed numerically by SVD.  The basis vectors printed for the
four-atom kernel in the source analysis carry sign inconsistencies, so they
are treated as documentation; tests assert span membership of independently
verified vectors instead.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.linalg

from .hilbert import BasisState, HilbertSpace
from .operators import ModelParams, OperatorMatrix, build_hamiltonian, interaction_raising
from .schedules import CouplingAssignment, coupling_at, tunneling_at

__all__ = [
    "CavityGraph",
    "DarkBasis",
    "nullspace",
    "dark_subspace",
    "black_subspace",
    "graph_dark_state",
    "singlet_state",
    "pair_state",
    "compose_pairs",
    "darkness_witness",
    "is_dark",
]

DEFAULT_TOL = 1e-10


@dataclass(frozen=True)
class CavityGraph:
    """Cavity connectivity through tunnel bridges."""

    vertices: tuple[int, ...]
    edges: tuple[tuple[int, int], ...]

    def distances(self) -> dict[int, int]:
        """BFS path lengths from cavity 0; raises on a disconnected graph."""
        adj = {v: [] for v in self.vertices}
        for a, b in self.edges:
            adj[a].append(b)
            adj[b].append(a)
        if 0 not in adj:
            raise ValueError("graph must contain cavity 0")
        dist = {0: 0}
        queue = deque([0])
        while queue:
            v = queue.popleft()
            for w in adj[v]:
                if w not in dist:
                    dist[w] = dist[v] + 1
                    queue.append(w)
        if len(dist) != len(self.vertices):
            raise ValueError("cavity graph is not connected")
        return dist

    def check_even(self) -> dict[int, int]:
        """Distances if the graph is even (bipartite); error otherwise."""
        dist = self.distances()
        for a, b in self.edges:
            if (dist[a] + dist[b]) % 2 == 0:
                raise ValueError(
                    "graph not even: it contains an odd cycle, so no "
                    "two-atom dark state exists"
                )
        return dist


@dataclass
class DarkBasis:
    """Orthonormal kernel basis with the threshold used to extract it."""

    space: HilbertSpace
    vectors: np.ndarray  # (dim, nullity), orthonormal columns
    tol: float
    rank: int

    @property
    def nullity(self) -> int:
        return self.vectors.shape[1]

    def residuals(self, op: OperatorMatrix) -> np.ndarray:
        return np.array([
            np.linalg.norm(op.apply(self.vectors[:, j]))
            for j in range(self.nullity)
        ])

    def contains(self, vec: np.ndarray, tol: float = 1e-8) -> bool:
        """Span membership: the projection residual of ``vec`` is below tol."""
        v = vec / np.linalg.norm(vec)
        proj = self.vectors @ (self.vectors.conj().T @ v)
        return np.linalg.norm(v - proj) < tol


def nullspace(a, tol: float = DEFAULT_TOL, space: Optional[HilbertSpace] = None) -> DarkBasis:
    """Orthonormal numerical kernel via singular values below tol * sigma_max."""
    if isinstance(a, OperatorMatrix):
        space = a.space
        m = a.toarray()
    else:
        m = np.asarray(a, dtype=complex)
    if not np.all(np.isfinite(m)):
        raise ValueError("non-finite matrix entries")
    _, s, vh = np.linalg.svd(m)
    smax = s[0] if s.size else 0.0
    rank = int(np.sum(s > tol * smax)) if smax > 0 else 0
    kernel = vh[rank:].conj().T
    return DarkBasis(space=space, vectors=kernel, tol=tol, rank=rank)


def _vacuum_indices(space: HilbertSpace) -> np.ndarray:
    return np.array([
        j for j, st in enumerate(space.basis) if sum(st.photons) == 0
    ])


def _embedded_kernel(space, matrix, columns, tol) -> DarkBasis:
    """Kernel of ``matrix`` restricted to ``columns``, embedded in the space."""
    sub = matrix[:, columns]
    _, s, vh = np.linalg.svd(sub)
    smax = s[0] if s.size else 0.0
    rank = int(np.sum(s > tol * smax)) if smax > 0 else 0
    kernel_sub = vh[rank:].conj().T
    vectors = np.zeros((space.dim, kernel_sub.shape[1]), dtype=complex)
    vectors[columns, :] = kernel_sub
    return DarkBasis(space=space, vectors=vectors, tol=tol, rank=rank)


def dark_subspace(
    space: HilbertSpace,
    g_now: np.ndarray,
    tol: float = DEFAULT_TOL,
    require_vacuum: bool = True,
) -> DarkBasis:
    """Kernel of V+ restricted to photon-vacuum support (the physical dark
    subspace).  ``require_vacuum=False`` returns the raw kernel of the
    sector-truncated V+, which also contains photon-carrying vectors whose
    images merely leave the truncated basis."""
    vp = interaction_raising(space, g_now)
    if not require_vacuum:
        return nullspace(vp, tol)
    return _embedded_kernel(space, vp.toarray(), _vacuum_indices(space), tol)


def black_subspace(
    space: HilbertSpace,
    params: ModelParams,
    assignment: CouplingAssignment,
    delta: float,
    tol: float = DEFAULT_TOL,
    require_vacuum: bool = True,
) -> DarkBasis:
    """Numerical kernel of V+ U_delta with U_delta = exp(-i H(0) delta).

    States that are dark now and remain dark after a short evolution; for
    mobile atoms this excludes dark vectors that tunnel into bright ones.
    """
    if delta <= 0:
        raise ValueError("delta must be positive")
    g0 = coupling_at(params, assignment, 0.0)
    mu0 = tunneling_at(params, assignment, 0.0)
    h0 = build_hamiltonian(space, params, g_now=g0, mu_at_now=mu0)
    u = scipy.linalg.expm(-1j * delta * h0.toarray())
    m = interaction_raising(space, g0).toarray() @ u
    if require_vacuum:
        return _embedded_kernel(space, m, _vacuum_indices(space), tol)
    return nullspace(m, tol, space=space)


def pair_state(configs: dict) -> dict:
    """Normalize a pair-amplitude map {((l,p),(l,p)): amp}."""
    norm = np.sqrt(sum(abs(a) ** 2 for a in configs.values()))
    return {k: a / norm for k, a in configs.items()}


def singlet_pair(cavity: int) -> dict:
    """(|01> - |10>)/sqrt(2) with both atoms in ``cavity``."""
    return pair_state({
        ((0, cavity), (1, cavity)): 1.0,
        ((1, cavity), (0, cavity)): -1.0,
    })


def graph_singlet_pair(graph: CavityGraph) -> dict:
    """Sum over cavities of per-cavity singlets with sign (-1)^d(i)."""
    dist = graph.check_even()
    configs = {}
    for i in sorted(graph.vertices):
        sign = -1.0 if dist[i] % 2 else 1.0
        for cfg, amp in singlet_pair(i).items():
            configs[cfg] = configs.get(cfg, 0.0) + sign * amp
    return pair_state(configs)


def compose_pairs(space: HilbertSpace, pairs: list) -> np.ndarray:
    """Product state over disjoint atom pairs at photon vacuum.

    ``pairs`` holds (atom_a, atom_b, config-map) triples; atoms not covered
    by any pair sit at level 0 in their home cavity.
    """
    covered = set()
    for a, b, _ in pairs:
        if a == b:
            raise ValueError("pair atoms must be distinct")
        covered |= {a, b}
    home = space.atom_spec.home
    vec = np.zeros(space.dim, dtype=complex)
    for j, st in enumerate(space.basis):
        if sum(st.photons) != 0:
            continue
        amp = 1.0
        ok = True
        for k, (lvl, pos) in enumerate(st.atoms):
            if k not in covered and (lvl != 0 or pos != home[k]):
                ok = False
                break
        if not ok:
            continue
        for a, b, cfg in pairs:
            amp *= cfg.get((st.atoms[a], st.atoms[b]), 0.0)
            if amp == 0.0:
                break
        vec[j] = amp
    n = np.linalg.norm(vec)
    if n < 1e-12:
        raise ValueError("state has no support in this space")
    return vec / n


def singlet_state(
    space: HilbertSpace, atom_a: int, atom_b: int, cavity: int = 0
) -> np.ndarray:
    """Photon vacuum (x) antisymmetric pair (|01> - |10>)/sqrt(2) for atoms
    a,b located in ``cavity``; the remaining atoms sit de-excited at home."""
    if atom_a == atom_b:
        raise ValueError("singlet atoms must be distinct")
    if not space.atom_spec.mobile:
        for atom in (atom_a, atom_b):
            if space.atom_spec.home[atom] != cavity:
                raise ValueError(
                    f"atom {atom} is fixed at cavity "
                    f"{space.atom_spec.home[atom]}, not {cavity}"
                )
    return compose_pairs(space, [(atom_a, atom_b, singlet_pair(cavity))])


def graph_dark_state(graph: CavityGraph, space: HilbertSpace) -> np.ndarray:
    """Two-atom dark state sum_i (-1)^d(i) |s^i> of an even cavity graph."""
    if space.atom_spec.count != 2 or not space.atom_spec.mobile:
        raise ValueError("graph dark state needs a 2-mobile-atom space")
    return compose_pairs(space, [(0, 1, graph_singlet_pair(graph))])


def _zero_photon_level_index(space: HilbertSpace, levels) -> int:
    home = space.atom_spec.home
    atoms = tuple((lvl, home[k]) for k, lvl in enumerate(levels))
    return space.index_of(BasisState((0,) * space.cavities, atoms))


def darkness_witness(state: np.ndarray, space: HilbertSpace, g_now: np.ndarray) -> float:
    """|g2 g4 lambda(|0101>) - g1 g3 lambda(|1010>)| over the zero-photon
    block of the four-atom model; identically zero on the deformed dark span."""
    if space.atom_spec.count != 4:
        raise ValueError("witness defined for the 4-atom model")
    g_now = np.atleast_2d(np.asarray(g_now, dtype=float))
    g1, g2, g3, g4 = g_now[0, :4]
    lam_0101 = state[_zero_photon_level_index(space, (0, 1, 0, 1))]
    lam_1010 = state[_zero_photon_level_index(space, (1, 0, 1, 0))]
    return float(abs(g2 * g4 * lam_0101 - g1 * g3 * lam_1010))


def is_dark(state: np.ndarray, space: HilbertSpace, g_now: np.ndarray) -> float:
    """Residual ||V+ psi||; zero iff the state is exactly dark."""
    return float(np.linalg.norm(interaction_raising(space, g_now).apply(state)))
