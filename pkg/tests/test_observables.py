import numpy as np
import numpy.testing as npt
import pytest

from tcdark.darkspace import singlet_state
from tcdark.hilbert import AtomSpec, BasisState, enumerate_space
from tcdark.observables import (
    amplitude,
    count_humps,
    fidelity,
    free_photon_probability,
    obs_dark_overlap,
    obs_split_atoms,
    photon_number_probability,
    reduced_photon_density,
    spectral_flow,
    spectrum,
)
from tcdark.operators import ModelParams, build_hamiltonian
from tcdark.propagator import Model, ObsContext
from tcdark.schedules import CouplingAssignment, Schedule


@pytest.fixture
def space2():
    return enumerate_space(1, AtomSpec(2), sector=1)


def test_amplitude_singlet_sign_convention(space2):
    s = singlet_state(space2, 0, 1)
    lam = amplitude(s, space2, BasisState((0,), ((0, 0), (1, 0))))
    npt.assert_allclose(lam, 1 / np.sqrt(2), atol=1e-15)


def test_amplitude_orthogonal_and_normalization(space2):
    s = singlet_state(space2, 0, 1)
    assert amplitude(s, space2, BasisState((1,), ((0, 0), (0, 0)))) == 0.0
    total = sum(abs(amplitude(s, space2, st)) ** 2 for st in space2.basis)
    npt.assert_allclose(total, 1.0, atol=1e-14)


def test_free_photon_probability_extremes(space2):
    s = singlet_state(space2, 0, 1)
    assert free_photon_probability(s, space2) == 0.0
    v = np.zeros(space2.dim, dtype=complex)
    v[space2.index_of(BasisState((1,), ((0, 0), (0, 0))))] = 1.0
    assert free_photon_probability(v, space2) == 1.0


def test_free_photon_consistency_with_vacuum_marginal(space2):
    rng = np.random.default_rng(2)
    v = rng.normal(size=space2.dim) + 1j * rng.normal(size=space2.dim)
    v /= np.linalg.norm(v)
    p_free = free_photon_probability(v, space2)
    p_vac = photon_number_probability(v, space2, (0,))
    npt.assert_allclose(p_free, 1.0 - p_vac, atol=1e-12)


def test_photon_number_probability_sums_to_one():
    sp = enumerate_space(1, AtomSpec(4), sector=2)
    rng = np.random.default_rng(4)
    v = rng.normal(size=sp.dim) + 1j * rng.normal(size=sp.dim)
    v /= np.linalg.norm(v)
    total = sum(photon_number_probability(v, sp, (n,)) for n in range(3))
    npt.assert_allclose(total, 1.0, atol=1e-12)


def test_reduced_photon_density_product_state(space2):
    v = np.zeros(space2.dim, dtype=complex)
    v[space2.index_of(BasisState((1,), ((0, 0), (0, 0))))] = 1.0
    rho = reduced_photon_density(v, space2)
    # pure photon state: rank 1
    eigs = np.linalg.eigvalsh(rho.matrix)
    npt.assert_allclose(sorted(eigs)[-1], 1.0, atol=1e-12)
    npt.assert_allclose(rho.purity, 1.0, atol=1e-12)


def test_reduced_photon_density_entangled_hand_oracle():
    # (|1>_ph|00> + |0>_ph|10>)/sqrt(2): diagonal (1/2, 1/2), purity 1/2
    sp = enumerate_space(1, AtomSpec(2), sector=1)
    v = np.zeros(sp.dim, dtype=complex)
    v[sp.index_of(BasisState((1,), ((0, 0), (0, 0))))] = 1 / np.sqrt(2)
    v[sp.index_of(BasisState((0,), ((1, 0), (0, 0))))] = 1 / np.sqrt(2)
    rho = reduced_photon_density(v, sp)
    assert rho.labels == [(0,), (1,)]
    npt.assert_allclose(np.diag(rho.matrix), [0.5, 0.5], atol=1e-14)
    npt.assert_allclose(rho.purity, 0.5, atol=1e-12)
    # off-diagonal vanishes: the atomic configurations differ
    npt.assert_allclose(rho.matrix[0, 1], 0.0, atol=1e-14)


def test_reduced_density_diagonal_matches_marginals():
    sp = enumerate_space(2, AtomSpec(2, mobile=True), sector=1)
    rng = np.random.default_rng(6)
    v = rng.normal(size=sp.dim) + 1j * rng.normal(size=sp.dim)
    v /= np.linalg.norm(v)
    rho = reduced_photon_density(v, sp)
    for lbl, diag in zip(rho.labels, np.diag(rho.matrix).real):
        npt.assert_allclose(photon_number_probability(v, sp, lbl), diag, atol=1e-12)
    assert 1.0 / len(rho.labels) <= rho.purity <= 1.0 + 1e-12


def test_fidelity_basics(space2):
    s = singlet_state(space2, 0, 1)
    assert fidelity(s, s) == pytest.approx(1.0)
    v = np.zeros(space2.dim, dtype=complex)
    v[space2.index_of(BasisState((1,), ((0, 0), (0, 0))))] = 1.0
    assert fidelity(s, v) == pytest.approx(0.0, abs=1e-15)
    with pytest.raises(ValueError):
        fidelity(s, np.zeros(5, dtype=complex))


def test_spectrum_jc_pair():
    sp = enumerate_space(1, AtomSpec(1), sector=1)
    g = 0.8
    params = ModelParams(omega=1.0, g_base=[[g]], frame="rotating")
    npt.assert_allclose(spectrum(build_hamiltonian(sp, params)), [-g, g], atol=1e-12)


def test_spectrum_zero_matrix():
    npt.assert_allclose(spectrum(np.zeros((3, 3))), 0.0, atol=0)


def test_spectrum_rejects_non_hermitian():
    with pytest.raises(ValueError):
        spectrum(np.array([[0.0, 1.0], [0.0, 0.0]]))


def test_two_atom_spectrum_no_degeneracies():
    sp = enumerate_space(1, AtomSpec(2), sector=1)
    params = ModelParams(omega=1.0, g_base=[[1.0, 0.6]], frame="lab")
    sched = Schedule("gaussian_bump", T=10.0)
    m = Model(space=sp, params=params,
              assignment=CouplingAssignment(couplings=((0, 1, sched),)))
    flow = spectral_flow(m, np.linspace(0, 10.0, 21))
    assert flow.levels.shape == (21, 3)
    assert not flow.degenerate.any()


def test_four_atom_flow_dark_pair_at_two_omega():
    sp = enumerate_space(1, AtomSpec(4), sector=2)
    omega = 0.0875
    params = ModelParams(omega=omega, g_base=[[1.0, 1.0, 1.0, 1.0]], frame="lab")
    sched = Schedule("gaussian_bump", T=100.0)
    m = Model(space=sp, params=params, assignment=CouplingAssignment(
        couplings=((0, 1, sched), (0, 3, sched))))
    flow = spectral_flow(m, np.linspace(0, 100.0, 26))
    assert flow.levels.shape[1] == 11
    # a degenerate pair sits exactly at 2*omega for every time
    for row in flow.levels:
        close = np.abs(row - 2 * omega) < 1e-9
        assert close.sum() >= 2
    assert flow.degenerate.any(axis=1).all()


def test_constant_schedule_flat_flow():
    sp = enumerate_space(1, AtomSpec(2), sector=1)
    params = ModelParams(omega=1.0, g_base=[[1.0, 0.7]], frame="lab")
    m = Model(space=sp, params=params)
    flow = spectral_flow(m, np.linspace(0, 5.0, 6))
    for j in range(flow.levels.shape[1]):
        npt.assert_allclose(flow.levels[:, j], flow.levels[0, j], atol=1e-12)


def test_flow_continuity_bound():
    sp = enumerate_space(1, AtomSpec(4), sector=2)
    params = ModelParams(omega=0.1, g_base=[[1.0, 1.0, 1.0, 1.0]], frame="lab")
    sched = Schedule("gaussian_bump", T=100.0)
    m = Model(space=sp, params=params, assignment=CouplingAssignment(
        couplings=((0, 1, sched), (0, 3, sched))))
    times = np.linspace(0, 100.0, 101)
    flow = spectral_flow(m, times)
    from tcdark.schedules import coupling_at
    for n in range(len(times) - 1):
        g_a = coupling_at(params, m.assignment, times[n])
        g_b = coupling_at(params, m.assignment, times[n + 1])
        h_diff = np.abs(
            build_hamiltonian(sp, params, g_b).toarray()
            - build_hamiltonian(sp, params, g_a).toarray()
        ).sum()
        jump = np.abs(flow.levels[n + 1] - flow.levels[n]).max()
        assert jump <= h_diff + 1e-12


def test_obs_split_atoms():
    sp = enumerate_space(2, AtomSpec(2, mobile=True), sector=1)
    together = singlet_state(sp, 0, 1, cavity=0)
    f = obs_split_atoms(sp)
    ctx = None
    assert f(together, ctx) == 0.0
    v = np.zeros(sp.dim, dtype=complex)
    v[sp.index_of(BasisState((0, 0), ((1, 0), (0, 1))))] = 1.0
    assert f(v, ctx) == 1.0


def test_obs_dark_overlap_tracks_deformed_singlet(space2):
    f = obs_dark_overlap(space2)
    g1, g2 = 1.0, 0.4
    dark = np.zeros(space2.dim, dtype=complex)
    dark[space2.index_of(BasisState((0,), ((0, 0), (1, 0))))] = g1
    dark[space2.index_of(BasisState((0,), ((1, 0), (0, 0))))] = -g2
    dark /= np.linalg.norm(dark)
    ctx = ObsContext(t=0.0, g_now=np.array([[g1, g2]]), mu_at_now=np.zeros((1, 1, 2)),
                     space=space2, params=None)
    npt.assert_allclose(f(dark, ctx), 1.0, atol=1e-12)


def test_count_humps_two_gaussians():
    t = np.linspace(0, 1, 2001)
    carrier = 0.5 * (1 + np.cos(2 * np.pi * 200 * t))
    env = np.exp(-((t - 0.25) / 0.05) ** 2) + np.exp(-((t - 0.75) / 0.05) ** 2)
    y = env * carrier * 1e-5
    assert count_humps(y, threshold=1e-7) == 2
    assert count_humps(y, threshold=2e-5) == 0
    assert count_humps(np.zeros(100), threshold=1e-12) == 0
