import numpy as np
import pytest

from chemclifford.engine import SaConfig, engineer
from chemclifford.hea import HeaTemplate, build_template
from chemclifford.io import load_hamiltonian
from chemclifford.pauli import HfFrame, PauliSum
from chemclifford.sim import exact_spectrum
from chemclifford.vqe import (
    TrialStats,
    VqeError,
    VqeOptions,
    baseline_template,
    gradient_histogram,
    minimize,
    parameter_cluster_report,
    run_trials,
    trial_seeds,
)
from conftest import DATA, random_even_y_hamiltonian


@pytest.fixture(scope="module")
def h4():
    return load_hamiltonian(DATA / "h4_2e3o.json")


def test_minimize_single_rotation():
    # -X on qubit 0 of a two-qubit R_y template with zero layers: E = -sin(theta_0)
    h = PauliSum.from_labels(2, [("XI", -1.0)])
    t = build_template(2, 0, ("Y",))
    res = minimize((h, t), None, VqeOptions(), e_ref=-1.0)
    assert abs(res.final_energy + 1.0) < 1e-8
    assert res.energy_trace[0] == 0.0
    assert res.error_vs_fci == pytest.approx(res.final_energy + 1.0)


def test_minimize_trace_and_bound():
    rng = np.random.default_rng(0)
    h = random_even_y_hamiltonian(rng, 3, 15)
    t = build_template(3, 2)
    res = minimize((h, t), rng.uniform(0, 2 * np.pi, t.n_params))
    trace = np.array(res.energy_trace)
    assert np.all(np.diff(trace) <= 1e-12)
    assert res.final_energy >= exact_spectrum(h)[0] - 1e-9
    assert len(trace) == res.iterations + 1


def test_minimize_stationary_point():
    rng = np.random.default_rng(1)
    h = random_even_y_hamiltonian(rng, 3, 10)
    t = build_template(3, 1)
    res = minimize((h, t), rng.uniform(-1, 1, t.n_params))
    from chemclifford.sim import energy_gradient

    assert np.max(np.abs(energy_gradient(t, res.final_params, h))) < 1e-5


def test_minimize_freeze_mask():
    rng = np.random.default_rng(2)
    h = random_even_y_hamiltonian(rng, 3, 10)
    t = build_template(3, 1)
    x0 = rng.uniform(-1, 1, t.n_params)
    freeze = np.zeros(t.n_params, dtype=bool)
    freeze[::2] = True
    res = minimize((h, t), x0, VqeOptions(freeze=freeze))
    assert np.array_equal(res.final_params[freeze], x0[freeze])
    all_frozen = minimize((h, t), x0, VqeOptions(freeze=np.ones(t.n_params, dtype=bool)))
    assert all_frozen.iterations == 0 and np.array_equal(all_frozen.final_params, x0)


def test_minimize_errors():
    h = PauliSum.from_labels(2, [("XI", 1.0)])
    t = build_template(2, 1)
    with pytest.raises(ValueError):
        minimize((h, t), np.zeros(3))
    with pytest.raises(ValueError):
        minimize((h, t), None, VqeOptions(freeze=np.zeros(2, dtype=bool)))


def test_minimize_nonfinite(monkeypatch):
    from chemclifford import sim

    h = PauliSum.from_labels(2, [("XI", 1.0)])
    t = build_template(2, 1)
    monkeypatch.setattr(sim.Circuit, "energy_and_gradient", lambda self, p, h: (float("nan"), np.zeros(len(p))))
    with pytest.raises(VqeError):
        minimize((h, t))


def test_engineered_first_energy_is_hf(h4):
    prob = engineer(h4.h, h4.frame, build_template(4, 3), SaConfig(seed=0))
    res = minimize(prob, e_ref=h4.e_fci)
    assert abs(res.first_energy - prob.hf_energy) < 1e-10
    assert res.iterations < 100
    assert res.error_vs_fci >= -1e-9


def test_trial_seeds_are_counter_based():
    a = trial_seeds(7, 5)
    assert a == trial_seeds(7, 5) and a[:3] == trial_seeds(7, 3)
    assert len(set(a)) == 5


def test_run_trials_reproducible(h4):
    a = run_trials(h4.h, h4.occupation, 2, "chem", 3, 11, e_ref=h4.e_fci)
    b = run_trials(h4.h, h4.occupation, 2, "chem", 3, 11, e_ref=h4.e_fci)
    assert [r.final_energy for r in a.records] == [r.final_energy for r in b.records]
    assert a.summary() == b.summary()
    assert a.min_error <= a.mean_abs_error <= a.max_error + 1e-15
    assert 0 <= a.zero_grad_ratio <= 1
    for r in a.records:
        assert abs(r.first_energy - (a.hf_error + a.e_ref)) < 1e-10
        assert r.error <= a.hf_error + 1e-10


def test_run_single_trial_equals_minimize(h4):
    st = run_trials(h4.h, h4.occupation, 1, "chem", 1, 3, e_ref=h4.e_fci)
    seed = trial_seeds(3, 1)[0]
    prob = engineer(h4.h, h4.frame, build_template(4, 1), SaConfig(seed=seed))
    res = minimize(prob, e_ref=h4.e_fci)
    assert st.records[0].final_energy == res.final_energy


def test_run_baseline(h4):
    st = run_trials(h4.h, h4.occupation, 1, "baseline", 2, 0, keep_params=True)
    assert st.mode == "baseline" and st.n_trials == 2
    assert np.isclose(st.e_ref, h4.e_fci)
    assert all(r.final_params.shape == (baseline_template(4, 1).n_params,) for r in st.records)
    assert baseline_template(4, 1).rotation_axes == ("Y",)


def test_run_trials_validation(h4):
    with pytest.raises(ValueError):
        run_trials(h4.h, h4.occupation, 1, "chem", 0)
    with pytest.raises(ValueError):
        run_trials(h4.h, h4.occupation, 1, "other", 1)


def test_gradient_histogram_examples():
    h = PauliSum.from_labels(2, [("ZI", 0.4), ("ZZ", 0.1)])
    prob = engineer(h, HfFrame("00"), build_template(2, 1), SaConfig(iterations=10))
    gh = gradient_histogram(prob)
    assert gh.zero_ratio == 1.0 and np.all(gh.values == 0)
    w = 0.6
    h = PauliSum.from_labels(2, [("XI", w)])
    prob = engineer(h, HfFrame("00"), HeaTemplate(2, 0, ("Y",)), SaConfig(iterations=1))
    gh = gradient_histogram(prob)
    nz = gh.values[gh.values > 1e-6]
    assert np.allclose(nz, [w])
    counts, edges = gh.counts()
    assert counts.sum() == len(gh.values)
    assert len(gh.rows()) == len(gh.values)


def test_parameter_cluster_report():
    assert parameter_cluster_report([np.zeros(10)])["fraction"] == 1.0
    rng = np.random.default_rng(0)
    rep = parameter_cluster_report([rng.uniform(0, 2 * np.pi, 20000)])
    assert abs(rep["fraction"] - 4 * 0.05 * 2 / (2 * np.pi)) < 0.03
    assert np.isclose(rep["random_floor"], 4 * 0.05 * 2 / (2 * np.pi))
    with pytest.raises(ValueError):
        parameter_cluster_report([])


def test_trial_stats_from_records():
    from chemclifford.vqe import TrialRecord

    recs = [TrialRecord(i, i, "chem", 1.0, 1.0, 0.0, e, e, 5 + i, 0.1, 0.5) for i, e in enumerate([0.2, 0.1, 0.3])]
    st = TrialStats.from_records("chem", recs, 0.0, 0.4)
    assert st.min_error == 0.1 and np.isclose(st.mean_abs_error, 0.2) and st.avg_iterations == 6
