import numpy as np
import numpy.testing as npt
import pytest

from tcdark.experiments import (
    EXPERIMENTS,
    ComparisonSummary,
    build_experiment,
    compare_runs,
    load_config,
    parse_config_text,
    run_experiment,
)

@pytest.mark.parametrize("name", sorted(EXPERIMENTS))
def test_build_all_experiments(name):
    spec = build_experiment(name)
    npt.assert_allclose(np.linalg.norm(spec.initial), 1.0, atol=1e-12)
    assert "P_free" in spec.observers
    assert spec.config.nsteps > 0


def test_expected_dimensions():
    dims = {"E1": 3, "E2": 11, "E4": 16, "E6": 272}
    for name, dim in dims.items():
        assert build_experiment(name).model.space.dim == dim


def test_witness_only_on_four_atom_single_cavity():
    assert "witness" in build_experiment("E2").observers
    assert "witness" not in build_experiment("E1").observers
    assert "witness" not in build_experiment("E4").observers


def test_split_observable_only_for_two_cavities():
    assert "P_split" in build_experiment("E4").observers
    assert "P_split" not in build_experiment("E2").observers


def test_scheduled_assignments():
    e2 = build_experiment("E2")
    assigned = {(i, k) for i, k, _ in e2.model.assignment.couplings}
    assert assigned == {(0, 1), (0, 3)}
    e4 = build_experiment("E4")
    assigned = {(i, k) for i, k, _ in e4.model.assignment.couplings}
    assert assigned == {(0, 1), (1, 1)}
    assert e4.model.assignment.tunnels == ()
    e5 = build_experiment("E5")
    assert e5.model.assignment.couplings == ()
    tunneled = {(i, j, k) for i, j, k, _ in e5.model.assignment.tunnels}
    assert tunneled == {(0, 1, 0), (0, 1, 1)}


def test_overrides_typed_and_unknown_rejected():
    spec = build_experiment("E1", {"time.dt_units": "0.005"})
    assert spec.config.dt == 0.005
    with pytest.raises(ValueError, match="unknown config key"):
        build_experiment("E1", {"nonsense.key": "1"})
    with pytest.raises(ValueError, match="expects"):
        build_experiment("E1", {"sample_every": "many"})


def test_unknown_experiment():
    with pytest.raises(KeyError, match="unknown experiment"):
        load_config("E99")


def test_parse_config_text_errors():
    with pytest.raises(ValueError, match="expected"):
        parse_config_text("just a line\n")
    with pytest.raises(ValueError, match="duplicate"):
        parse_config_text("a.b = 1\na.b = 2\n".replace("a.b", "frame"))


def short_run(name, **extra):
    overrides = {"time.T_units": "20.0", "time.dt_units": "0.01",
                 "sample_every": "20"}
    overrides.update({k: str(v) for k, v in extra.items()})
    spec = build_experiment(name, overrides)
    return run_experiment(spec)


def test_run_experiment_deterministic():
    a = short_run("E1")
    b = short_run("E1")
    npt.assert_array_equal(a.times, b.times)
    for name in a.series:
        npt.assert_array_equal(a.series[name], b.series[name])
    npt.assert_array_equal(a.final_state, b.final_state)


def test_compare_runs_self_distance_zero():
    rec = short_run("E1")
    summary = compare_runs(rec, rec, "P_free")
    assert isinstance(summary, ComparisonSummary)
    assert summary.sup_distance == 0.0
    assert summary.ratio == pytest.approx(1.0) or np.isinf(summary.ratio)


def test_compare_runs_resamples_different_grids():
    a = short_run("E1")
    b = short_run("E1", sample_every=40)
    assert a.times.shape != b.times.shape
    summary = compare_runs(a, b, "fidelity_init")
    # same trajectory seen through linear resampling of a coarser grid
    assert summary.sup_distance < 0.05
    assert summary.ratio == pytest.approx(1.0, abs=1e-9)


def test_compare_runs_unknown_observable():
    rec = short_run("E1")
    with pytest.raises(ValueError, match="missing"):
        compare_runs(rec, rec, "no_such_series")


def test_spectrum_preset_refuses_trajectory_run():
    spec = build_experiment("E3")
    with pytest.raises(ValueError, match="spectrum"):
        run_experiment(spec)
