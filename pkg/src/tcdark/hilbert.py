"""Truncated Hilbert spaces for two-level atoms in coupled optical cavities.

A basis state records the photon occupation of every cavity plus an ordered
(level, position) pair per atom.  Atoms are distinguishable and two-level
(extension point for d-level atoms deliberately not taken).  Fixed atoms sit
at a constant home cavity; mobile atoms carry the cavity index as a genuine
degree of freedom.  Enumeration is lexicographic over (photons, atoms), so
basis indices are reproducible across runs and platforms.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import Iterable, Optional

__all__ = [
    "AtomSpec",
    "BasisState",
    "HilbertSpace",
    "total_excitation",
    "enumerate_space",
    "atomic_space",
]


@dataclass(frozen=True)
class AtomSpec:
    """Number of atoms and whether they can tunnel between cavities.

    ``home`` gives the resting cavity of each atom; it is the constant
    position for fixed atoms and the default placement for initial states of
    mobile ones.  Defaults to cavity 0 for every atom.
    """

    count: int
    mobile: bool = False
    home: Optional[tuple[int, ...]] = None

    def __post_init__(self):
        if self.count < 1:
            raise ValueError(f"need at least one atom, got {self.count}")
        if self.home is None:
            object.__setattr__(self, "home", (0,) * self.count)
        elif len(self.home) != self.count:
            raise ValueError(
                f"home has {len(self.home)} entries for {self.count} atoms"
            )


@dataclass(frozen=True)
class BasisState:
    """Occupation-number record: photons per cavity, (level, position) per atom."""

    photons: tuple[int, ...]
    atoms: tuple[tuple[int, int], ...]

    def label(self) -> str:
        """Human-readable form ``|n1 n2|l@p l@p ...>`` used in CSV headers."""
        ph = " ".join(str(n) for n in self.photons)
        at = " ".join(f"{lvl}@{pos}" for lvl, pos in self.atoms)
        return f"|{ph}|{at}⟩"

    def sort_key(self):
        return (self.photons, self.atoms)


def total_excitation(state: BasisState) -> int:
    """Total excitation N = photons + excited atoms (conserved under RWA)."""
    return sum(state.photons) + sum(lvl for lvl, _ in state.atoms)


class HilbertSpace:
    """Ordered basis of :class:`BasisState` with O(1) index lookup.

    Immutable after construction; safe to share across workers.
    """

    def __init__(
        self,
        cavities: int,
        atom_spec: AtomSpec,
        sector: Optional[int],
        cutoff: int,
        basis: Iterable[BasisState],
    ):
        self.cavities = cavities
        self.atom_spec = atom_spec
        self.sector = sector
        self.cutoff = cutoff
        self.basis = tuple(basis)
        self.index = {st: i for i, st in enumerate(self.basis)}

    @property
    def dim(self) -> int:
        return len(self.basis)

    def index_of(self, state: BasisState) -> int:
        try:
            return self.index[state]
        except KeyError:
            raise LookupError(f"state {state.label()} not in this space") from None

    def __contains__(self, state: BasisState) -> bool:
        return state in self.index

    def labels(self) -> list[str]:
        return [st.label() for st in self.basis]

    def __repr__(self):
        return (
            f"HilbertSpace(cavities={self.cavities}, atoms={self.atom_spec.count}, "
            f"mobile={self.atom_spec.mobile}, sector={self.sector}, "
            f"cutoff={self.cutoff}, dim={self.dim})"
        )


def enumerate_space(
    cavities: int,
    atom_spec: AtomSpec,
    sector: Optional[int] = None,
    cutoff: Optional[int] = None,
) -> HilbertSpace:
    """Enumerate all basis states within the photon cutoff (and sector, if set).

    The cutoff bounds the *total* photon number; it defaults to the sector
    excitation, which is exact under RWA conservation.  A larger explicit
    cutoff is allowed for conservation-leakage tests.
    """
    if cavities < 1:
        raise ValueError("need at least one cavity")
    if cutoff is None:
        if sector is None:
            raise ValueError("need a sector or an explicit photon cutoff")
        cutoff = sector
    if cutoff < 0:
        raise ValueError("cutoff must be non-negative")
    if sector is not None and cutoff < sector and sector > cutoff + atom_spec.count:
        # atoms can hold sector - cutoff excitations; beyond that the sector
        # is unreachable and the empty-space error below would fire anyway
        raise ValueError(f"cutoff {cutoff} below sector {sector}")
    for h in atom_spec.home:
        if not (0 <= h < cavities):
            raise ValueError(f"home cavity {h} outside 0..{cavities - 1}")

    if atom_spec.mobile:
        positions = [tuple(range(cavities))] * atom_spec.count
    else:
        positions = [(h,) for h in atom_spec.home]
    per_atom = [
        tuple((lvl, pos) for lvl in (0, 1) for pos in pos_opts)
        for pos_opts in positions
    ]

    states = []
    for photons in product(range(cutoff + 1), repeat=cavities):
        if sum(photons) > cutoff:
            continue
        for atoms in product(*per_atom):
            st = BasisState(photons, atoms)
            if sector is not None and total_excitation(st) != sector:
                continue
            states.append(st)
    if not states:
        raise ValueError(
            f"empty Hilbert space (sector={sector} unreachable with "
            f"{atom_spec.count} atoms, cutoff={cutoff})"
        )
    states.sort(key=BasisState.sort_key)
    return HilbertSpace(cavities, atom_spec, sector, cutoff, states)


def atomic_space(n_atoms: int) -> HilbertSpace:
    """Atoms-only space of dimension 2^n (single cavity, zero photons)."""
    return enumerate_space(1, AtomSpec(n_atoms), sector=None, cutoff=0)
