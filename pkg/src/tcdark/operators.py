"""Ladder operators and model Hamiltonians over enumerated Hilbert spaces.

Every Hamiltonian is stored divided by hbar, i.e. as an angular frequency
(rad/s, or rad per chosen time unit), and the propagator integrates
exp(-i H dt) directly.  In the rotating frame the resonant omega*N term is
dropped; it commutes with everything else on resonance, so populations are
identical to the lab frame.

Operators are assembled column-by-column from their action on basis states.
Images that fall outside a sector-restricted basis are projected to zero;
for excitation-conserving Hamiltonians this projection is exact.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Optional

import numpy as np
import scipy.sparse as sp

from .hilbert import BasisState, HilbertSpace, total_excitation

__all__ = [
    "DENSE_LIMIT",
    "ModelParams",
    "OperatorMatrix",
    "photon_annihilation",
    "atomic_lowering",
    "atom_tunnel",
    "excitation_number",
    "interaction_raising",
    "collective_lowering",
    "build_hamiltonian",
]

DENSE_LIMIT = 256  # dense storage up to this dimension, CSR above


@dataclass(frozen=True, eq=False)
class ModelParams:
    """Physical parameters of the (possibly tunneling) multi-cavity model.

    omega      shared atom/field angular frequency
    g_base     (cavities, atoms) coupling amplitudes g_k^i
    mu_ph      (cavities, cavities) photon hopping amplitudes, symmetric
    mu_at      (cavities, cavities, atoms) atom tunneling amplitudes
    frame      'rotating' drops the omega*N term, 'lab' keeps it
    """

    omega: float
    g_base: np.ndarray
    mu_ph: Optional[np.ndarray] = None
    mu_at: Optional[np.ndarray] = None
    frame: str = "rotating"

    def __post_init__(self):
        g = np.atleast_2d(np.asarray(self.g_base, dtype=float))
        object.__setattr__(self, "g_base", g)
        k = g.shape[0]
        mu_ph = self.mu_ph
        if mu_ph is None:
            mu_ph = np.zeros((k, k))
        mu_ph = np.asarray(mu_ph, dtype=float)
        object.__setattr__(self, "mu_ph", mu_ph)
        mu_at = self.mu_at
        if mu_at is None:
            mu_at = np.zeros((k, k, g.shape[1]))
        mu_at = np.asarray(mu_at, dtype=float)
        object.__setattr__(self, "mu_at", mu_at)

        if self.frame not in ("lab", "rotating"):
            raise ValueError(f"unknown frame {self.frame!r}")
        if not np.isfinite(self.omega):
            raise ValueError("omega must be finite")
        if not np.all(np.isfinite(g)) or np.any(g < 0):
            raise ValueError("couplings must be finite and non-negative")
        for name, m in (("mu_ph", mu_ph), ("mu_at", mu_at)):
            if not np.all(np.isfinite(m)):
                raise ValueError(f"{name} must be finite")
            if not np.allclose(m, np.swapaxes(m, 0, 1)):
                raise ValueError(f"{name} must be symmetric in the cavity pair")
            if np.any(np.abs(np.diagonal(m, axis1=0, axis2=1)) > 0):
                raise ValueError(f"{name} must have zero diagonal")

    @property
    def cavities(self) -> int:
        return self.g_base.shape[0]

    @property
    def atoms(self) -> int:
        return self.g_base.shape[1]


class OperatorMatrix:
    """Complex matrix over a HilbertSpace (dense <= DENSE_LIMIT, CSR above)."""

    def __init__(self, space: HilbertSpace, matrix):
        if matrix.shape != (space.dim, space.dim):
            raise ValueError(
                f"matrix shape {matrix.shape} does not match dim {space.dim}"
            )
        self.space = space
        if space.dim <= DENSE_LIMIT:
            self._m = np.asarray(
                matrix.toarray() if sp.issparse(matrix) else matrix,
                dtype=complex,
            )
        else:
            self._m = sp.csr_matrix(matrix, dtype=complex)

    @property
    def dim(self) -> int:
        return self.space.dim

    @property
    def is_sparse(self) -> bool:
        return sp.issparse(self._m)

    def toarray(self) -> np.ndarray:
        return self._m.toarray() if self.is_sparse else self._m.copy()

    def apply(self, vec: np.ndarray) -> np.ndarray:
        return self._m @ vec

    def dagger(self) -> "OperatorMatrix":
        return OperatorMatrix(self.space, self._m.conj().T)

    def __add__(self, other: "OperatorMatrix") -> "OperatorMatrix":
        self._check_space(other)
        return OperatorMatrix(self.space, self._m + other._m)

    def __sub__(self, other: "OperatorMatrix") -> "OperatorMatrix":
        self._check_space(other)
        return OperatorMatrix(self.space, self._m - other._m)

    def __mul__(self, scalar) -> "OperatorMatrix":
        return OperatorMatrix(self.space, self._m * scalar)

    __rmul__ = __mul__

    def __matmul__(self, other: "OperatorMatrix") -> "OperatorMatrix":
        self._check_space(other)
        return OperatorMatrix(self.space, self._m @ other._m)

    def _check_space(self, other):
        if other.space is not self.space and other.space.basis != self.space.basis:
            raise ValueError("operators act on different spaces")

    def max_abs(self) -> float:
        if self.is_sparse:
            return float(np.abs(self._m.data).max()) if self._m.nnz else 0.0
        return float(np.abs(self._m).max()) if self._m.size else 0.0

    def hermiticity_residual(self) -> float:
        """max |A - A^dag| relative to max |A| (0 for the zero matrix)."""
        diff = (self - self.dagger()).max_abs()
        scale = self.max_abs()
        return diff / scale if scale > 0 else diff

    def commutator_residual(self, other: "OperatorMatrix") -> float:
        """max |[A,B]| relative to max|A| max|B|."""
        comm = (self @ other - other @ self).max_abs()
        scale = self.max_abs() * other.max_abs()
        return comm / scale if scale > 0 else comm

    def triplets(self) -> Iterable[tuple[int, int, float, float]]:
        """Nonzero entries as (row, col, re, im) for plain-text dumps."""
        coo = sp.coo_matrix(self._m)
        order = np.lexsort((coo.col, coo.row))
        for n in order:
            v = coo.data[n]
            yield int(coo.row[n]), int(coo.col[n]), float(v.real), float(v.imag)


StateAction = Callable[[BasisState], Iterable[tuple[complex, BasisState]]]


def materialize(space: HilbertSpace, action: StateAction) -> OperatorMatrix:
    """Assemble the matrix of a state-level action; images outside the basis
    are dropped (sector projection)."""
    rows, cols, vals = [], [], []
    index = space.index
    for j, st in enumerate(space.basis):
        for coeff, img in action(st):
            i = index.get(img)
            if i is not None and coeff != 0:
                rows.append(i)
                cols.append(j)
                vals.append(coeff)
    m = sp.coo_matrix(
        (np.asarray(vals, dtype=complex), (rows, cols)),
        shape=(space.dim, space.dim),
    ).tocsr()
    return OperatorMatrix(space, m)


def _annihilate_photon(st: BasisState, cavity: int):
    n = st.photons[cavity]
    if n == 0:
        return None
    ph = list(st.photons)
    ph[cavity] -= 1
    return np.sqrt(n), BasisState(tuple(ph), st.atoms)


def _create_photon(st: BasisState, cavity: int):
    n = st.photons[cavity]
    ph = list(st.photons)
    ph[cavity] += 1
    return np.sqrt(n + 1), BasisState(tuple(ph), st.atoms)


def _lower_atom(st: BasisState, atom: int, at_position: Optional[int]):
    lvl, pos = st.atoms[atom]
    if lvl == 0:
        return None
    if at_position is not None and pos != at_position:
        return None
    atoms = list(st.atoms)
    atoms[atom] = (0, pos)
    return 1.0, BasisState(st.photons, tuple(atoms))


def photon_annihilation(space: HilbertSpace, cavity: int) -> OperatorMatrix:
    """a_i with the standard sqrt(n) ladder coefficients."""
    if not (0 <= cavity < space.cavities):
        raise ValueError(f"cavity {cavity} outside 0..{space.cavities - 1}")

    def action(st):
        out = _annihilate_photon(st, cavity)
        return [out] if out else []

    return materialize(space, action)


def atomic_lowering(
    space: HilbertSpace, atom: int, at_position: Optional[int] = None
) -> OperatorMatrix:
    """sigma_k, optionally acting only when atom k occupies ``at_position``."""
    if not (0 <= atom < space.atom_spec.count):
        raise ValueError(f"atom {atom} outside 0..{space.atom_spec.count - 1}")

    def action(st):
        out = _lower_atom(st, atom, at_position)
        return [out] if out else []

    return materialize(space, action)


def atom_tunnel(space: HilbertSpace, atom: int, i: int, j: int) -> OperatorMatrix:
    """Hermitian position hop of one atom between cavities i and j,
    preserving its level; photons untouched."""
    if i == j:
        raise ValueError("tunnel endpoints must differ")

    def action(st):
        lvl, pos = st.atoms[atom]
        if pos == i:
            new_pos = j
        elif pos == j:
            new_pos = i
        else:
            return []
        atoms = list(st.atoms)
        atoms[atom] = (lvl, new_pos)
        return [(1.0, BasisState(st.photons, tuple(atoms)))]

    return materialize(space, action)


def excitation_number(space: HilbertSpace) -> OperatorMatrix:
    """Diagonal operator of the total excitation N."""
    diag = np.array([total_excitation(st) for st in space.basis], dtype=complex)
    if space.dim <= DENSE_LIMIT:
        return OperatorMatrix(space, np.diag(diag))
    return OperatorMatrix(space, sp.diags(diag).tocsr())


def interaction_raising(space: HilbertSpace, g_now: np.ndarray) -> OperatorMatrix:
    """Photon-creating interaction V+ = sum_{i,k} g[i,k] a_i^dag sigma_ik.

    sigma_ik lowers atom k when it sits in cavity i, so for each excited atom
    only its current cavity contributes.
    """
    g_now = np.atleast_2d(np.asarray(g_now, dtype=float))
    _check_g_shape(space, g_now)

    def action(st):
        out = []
        for k, (lvl, pos) in enumerate(st.atoms):
            if lvl == 1 and g_now[pos, k] != 0.0:
                c_ph, mid = _create_photon(
                    BasisState(st.photons, _with_atom(st.atoms, k, (0, pos))), pos
                )
                out.append((g_now[pos, k] * c_ph, mid))
        return out

    return materialize(space, action)


def _with_atom(atoms, k, value):
    lst = list(atoms)
    lst[k] = value
    return tuple(lst)


def _check_g_shape(space: HilbertSpace, g: np.ndarray):
    want = (space.cavities, space.atom_spec.count)
    if g.shape != want:
        raise ValueError(f"coupling array shape {g.shape}, expected {want}")


def collective_lowering(atomic_space: HilbertSpace, g: np.ndarray) -> OperatorMatrix:
    """sigma_bar = sum_k g_k sigma_k over an atoms-only (zero-photon) space."""
    g = np.asarray(g, dtype=float).ravel()
    if any(sum(st.photons) != 0 for st in atomic_space.basis):
        raise ValueError("collective lowering needs an atoms-only space")
    if g.size != atomic_space.atom_spec.count:
        raise ValueError(
            f"{g.size} couplings for {atomic_space.atom_spec.count} atoms"
        )

    def action(st):
        out = []
        for k in range(g.size):
            low = _lower_atom(st, k, None)
            if low and g[k] != 0.0:
                out.append((g[k], low[1]))
        return out

    return materialize(atomic_space, action)


def _photon_hop(space: HilbertSpace, i: int, j: int) -> OperatorMatrix:
    """a_j^dag a_i + a_i^dag a_j."""

    def action(st):
        out = []
        for src, dst in ((i, j), (j, i)):
            low = _annihilate_photon(st, src)
            if low:
                c1, mid = low
                c2, fin = _create_photon(mid, dst)
                out.append((c1 * c2, fin))
        return out

    return materialize(space, action)


def build_hamiltonian(
    space: HilbertSpace,
    params: ModelParams,
    g_now: Optional[np.ndarray] = None,
    mu_at_now: Optional[np.ndarray] = None,
) -> OperatorMatrix:
    """H(t)/hbar: omega*N (lab frame only) + interaction + photon hopping
    + atom tunneling.  ``g_now`` and ``mu_at_now`` default to the base values
    in ``params``; schedules pass the instantaneous ones."""
    if g_now is None:
        g_now = params.g_base
    g_now = np.atleast_2d(np.asarray(g_now, dtype=float))
    _check_g_shape(space, g_now)
    if not np.all(np.isfinite(g_now)):
        raise ValueError("non-finite couplings")
    if mu_at_now is None:
        mu_at_now = params.mu_at

    vplus = interaction_raising(space, g_now)
    h = vplus + vplus.dagger()
    if params.frame == "lab":
        h = h + params.omega * excitation_number(space)
    for i in range(space.cavities):
        for j in range(i + 1, space.cavities):
            if params.mu_ph[i, j] != 0.0:
                h = h + params.mu_ph[i, j] * _photon_hop(space, i, j)
            for k in range(space.atom_spec.count):
                if mu_at_now[i, j, k] != 0.0:
                    h = h + mu_at_now[i, j, k] * atom_tunnel(space, k, i, j)
    return h
