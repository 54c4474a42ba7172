import pytest

from tcdark.hilbert import (
    AtomSpec,
    BasisState,
    atomic_space,
    enumerate_space,
    total_excitation,
)


def brute_force_count(cavities, atom_spec, sector, cutoff):
    """Independent enumeration oracle: count states by direct iteration."""
    from itertools import product

    positions = range(cavities) if atom_spec.mobile else None
    n = 0
    for photons in product(range(cutoff + 1), repeat=cavities):
        if sum(photons) > cutoff:
            continue
        if atom_spec.mobile:
            atom_opts = product(*[
                [(l, p) for l in (0, 1) for p in positions]
            ] * atom_spec.count)
        else:
            atom_opts = product(*[
                [(l, atom_spec.home[k]) for l in (0, 1)]
                for k in range(atom_spec.count)
            ])
        for atoms in atom_opts:
            N = sum(photons) + sum(l for l, _ in atoms)
            if sector is None or N == sector:
                n += 1
    return n


def test_total_excitation_vacuum():
    st = BasisState((0,), ((0, 0), (0, 0)))
    assert total_excitation(st) == 0


def test_total_excitation_mixed():
    st = BasisState((1,), ((0, 0), (1, 0)))
    assert total_excitation(st) == 2


def test_total_excitation_two_cavities():
    st = BasisState((0, 2), ((1, 1), (1, 2), (0, 1), (0, 2)))
    assert total_excitation(st) == 4


def test_two_fixed_atoms_sector1_dim3():
    sp = enumerate_space(1, AtomSpec(2), sector=1)
    assert sp.dim == 3
    expected = {
        BasisState((1,), ((0, 0), (0, 0))),
        BasisState((0,), ((1, 0), (0, 0))),
        BasisState((0,), ((0, 0), (1, 0))),
    }
    assert set(sp.basis) == expected


def test_four_fixed_atoms_sector2_dim11():
    sp = enumerate_space(1, AtomSpec(4), sector=2)
    assert sp.dim == 11
    by_photons = {}
    for st in sp.basis:
        by_photons.setdefault(sum(st.photons), 0)
        by_photons[sum(st.photons)] += 1
    assert by_photons == {0: 6, 1: 4, 2: 1}


def test_two_mobile_atoms_two_cavities_sector1_dim16():
    sp = enumerate_space(2, AtomSpec(2, mobile=True), sector=1)
    assert sp.dim == 16


@pytest.mark.parametrize("cavities,count,mobile,sector,cutoff", [
    (1, 2, False, 1, 1),
    (1, 4, False, 2, 2),
    (2, 2, True, 1, 1),
    (2, 3, True, 2, 2),
    (2, 4, True, None, 2),
    (2, 2, True, 2, 3),
])
def test_dimension_matches_brute_force(cavities, count, mobile, sector, cutoff):
    spec = AtomSpec(count, mobile=mobile)
    sp = enumerate_space(cavities, spec, sector=sector, cutoff=cutoff)
    assert sp.dim == brute_force_count(cavities, spec, sector, cutoff)


def test_enumeration_deterministic():
    a = enumerate_space(2, AtomSpec(2, mobile=True), sector=1)
    b = enumerate_space(2, AtomSpec(2, mobile=True), sector=1)
    assert a.basis == b.basis


def test_lexicographic_order():
    sp = enumerate_space(2, AtomSpec(2, mobile=True), sector=1)
    keys = [st.sort_key() for st in sp.basis]
    assert keys == sorted(keys)


def test_sector_dimensions_sum_to_unrestricted():
    # sectors partition the unrestricted space; N runs to cutoff + atom count
    # because atoms hold excitations beyond the photon cap
    spec = AtomSpec(3, mobile=True)
    cutoff = 2
    full = enumerate_space(2, spec, sector=None, cutoff=cutoff)
    total = sum(
        enumerate_space(2, spec, sector=N, cutoff=cutoff).dim
        for N in range(cutoff + spec.count + 1)
    )
    assert total == full.dim


def test_mobile_dimension_formula():
    # unrestricted dim = (#photon configs) x (2k)^n
    for k, n, cutoff in [(1, 2, 2), (2, 2, 1), (2, 4, 2)]:
        sp = enumerate_space(k, AtomSpec(n, mobile=True), cutoff=cutoff)
        n_ph = sum(
            1 for ph in __import__("itertools").product(range(cutoff + 1), repeat=k)
            if sum(ph) <= cutoff
        )
        assert sp.dim == n_ph * (2 * k) ** n


def test_index_roundtrip():
    sp = enumerate_space(1, AtomSpec(2), sector=1)
    for j, st in enumerate(sp.basis):
        assert sp.index_of(st) == j


def test_index_of_unknown_state_raises():
    sp = enumerate_space(1, AtomSpec(2), sector=1)
    outside = BasisState((0,), ((1, 0), (1, 0)))  # N=2, outside sector
    with pytest.raises(LookupError):
        sp.index_of(outside)


def test_empty_sector_raises():
    with pytest.raises(ValueError):
        enumerate_space(1, AtomSpec(2), sector=5, cutoff=1)


def test_cutoff_too_low_for_sector_raises():
    # 2 atoms + 1 photon can hold at most N=3
    with pytest.raises(ValueError):
        enumerate_space(1, AtomSpec(2), sector=4, cutoff=1)


def test_sector_beyond_photon_cutoff_is_valid():
    # atoms carry the excitations the photon cap cannot
    sp = enumerate_space(1, AtomSpec(2), sector=2, cutoff=1)
    assert sp.dim == 3


def test_label_format():
    st = BasisState((0, 1), ((1, 0), (0, 1)))
    assert st.label() == "|0 1|1@0 0@1⟩"


def test_atomic_space_dim():
    assert atomic_space(4).dim == 16
    assert all(sum(st.photons) == 0 for st in atomic_space(3).basis)


def test_home_out_of_range():
    with pytest.raises(ValueError):
        enumerate_space(1, AtomSpec(2, home=(0, 1)), sector=1)
