import json

import numpy as np
import pytest

from bpscope.errors import ConfigError
from bpscope.runner import (Adam, AdamSettings, ScanConfig, VqeConfig,
                            best_half, field_sweep, model_hamiltonian,
                            run_trial, summarize, variance_scan, vqe_train,
                            write_csv)


def small_cfg(**overrides):
    base = {
        "ansatz": {"family": "ladder", "qubits": 2},
        "model": {"kind": "pauli_sum", "qubits": 2,
                  "terms": [[-1.0, "Z@[0]"], [-1.0, "Z@[1]"]]},
        "iterations": 60,
        "trials": 2,
        "seed": 11,
        "early_stop": {"enabled": False},
    }
    base.update(overrides)
    return VqeConfig.from_json(base)


def test_adam_matches_hand_computation():
    settings = AdamSettings(learning_rate=0.1, beta1=0.9, beta2=0.999, epsilon=1e-8)
    adam = Adam(settings, 2)
    theta = np.array([1.0, -2.0])
    g1 = np.array([0.5, -1.0])
    theta = adam.step(theta, g1)
    # first step: m_hat = g, v_hat = g^2, update = lr * g / (|g| + eps)
    np.testing.assert_allclose(
        theta, [1.0 - 0.1 * 0.5 / (0.5 + 1e-8), -2.0 + 0.1 * 1.0 / (1.0 + 1e-8)],
        rtol=1e-12)
    g2 = np.array([-0.25, 0.5])
    m = 0.9 * (0.1 * np.array([0.5, -1.0])) + 0.1 * g2
    v = 0.999 * (0.001 * np.array([0.25, 1.0])) + 0.001 * g2**2
    m_hat = m / (1 - 0.9**2)
    v_hat = v / (1 - 0.999**2)
    expected = theta - 0.1 * m_hat / (np.sqrt(v_hat) + 1e-8)
    theta = adam.step(theta, g2)
    np.testing.assert_allclose(theta, expected, rtol=1e-12)


def test_single_rotation_converges_tightly():
    # one trainable rotation against -Z: 200 Adam steps land within 1e-6
    from bpscope.circuit import Block, Circuit, Gate
    from bpscope.models import Hamiltonian
    from bpscope.pauli import PauliString
    from bpscope.simulator import adjoint_energy_gradient, compile_circuit, make_rng

    c = Circuit(1, (Block((Gate(PauliString.from_text("Y"), param_index=0),)),))
    hmt = Hamiltonian(1, ((-1.0, PauliString.from_text("Z")),))
    cc = compile_circuit(c)
    rng = make_rng(12, 17, 0)
    theta = rng.uniform(0, 2 * np.pi, 1)
    adam = Adam(AdamSettings(), 1)
    for _ in range(200):
        _, grad = adjoint_energy_gradient(cc, theta, hmt)
        theta = adam.step(theta, grad)
    energy, _ = adjoint_energy_gradient(cc, theta, hmt)
    assert energy == pytest.approx(-1.0, abs=1e-6)


def test_single_qubit_trains_to_ground():
    cfg = VqeConfig.from_json({
        "ansatz": {"family": "ladder", "qubits": 2},
        "model": {"kind": "pauli_sum", "qubits": 2, "terms": [[-1.0, "Z@[0]"]]},
        "iterations": 250, "trials": 1, "seed": 4,
        "early_stop": {"enabled": False},
    })
    result = run_trial(cfg, 0)
    assert result.final_energy == pytest.approx(-1.0, abs=1e-4)
    assert len(result.energies) == cfg.iterations + 1
    assert result.energies[0] > result.final_energy


def test_cartan_block_reaches_zz_ground():
    cfg = VqeConfig.from_json({
        "ansatz": {"family": "ladder", "qubits": 2},
        "model": {"kind": "pauli_sum", "qubits": 2, "terms": [[1.0, "ZZ"]]},
        "iterations": 400, "trials": 5, "seed": 3,
        "early_stop": {"enabled": False},
    })
    results = vqe_train(cfg)
    best = min(r.final_energy for r in results)
    assert best == pytest.approx(-1.0, abs=1e-3)


def test_trials_deterministic_and_independent():
    cfg = small_cfg()
    a = vqe_train(cfg)
    b = vqe_train(cfg)
    assert [r.energies for r in a] == [r.energies for r in b]
    assert a[0].energies != a[1].energies


def test_best_half_selection():
    cfg = small_cfg(trials=5, iterations=5)
    results = vqe_train(cfg)
    chosen = best_half(results, 0.5)
    assert len(chosen) == 3  # ceil(5 * 0.5)
    finals = sorted(r.final_energy for r in results)
    assert [r.final_energy for r in chosen] == finals[:3]


def test_config_validation_errors():
    with pytest.raises(ConfigError):
        VqeConfig.from_json({"model": {}})
    with pytest.raises(ConfigError):
        small_cfg(trials=0)
    with pytest.raises(ConfigError):
        small_cfg(best_fraction=0.0)
    with pytest.raises(ConfigError):
        small_cfg(optimizer={"kind": "adam", "learning_rate": -1})
    mismatched = VqeConfig.from_json({
        "ansatz": {"family": "ladder", "qubits": 3},
        "model": {"kind": "pauli_sum", "qubits": 2, "terms": [[1.0, "ZZ"]]},
    })
    with pytest.raises(ConfigError):
        run_trial(mismatched, 0)


def test_model_hamiltonian_kinds():
    hmt = model_hamiltonian({"kind": "pauli_sum", "qubits": 2,
                             "terms": [[0.5, "XX"], [0.25, "Z@[1]"]]})
    assert len(hmt.terms) == 2
    toric = model_hamiltonian({"kind": "toric", "rows": 3, "cols": 3,
                               "field": [0, 0, 0]})
    assert toric.n == 12
    with pytest.raises(ConfigError):
        model_hamiltonian({"kind": "bogus"})


def test_variance_scan_vs_delta_k_decreasing():
    scan = ScanConfig(kind="vs_delta_k", qubits=6, delta_k_list=(0, 1, 2, 3),
                      estimator="exact")
    rows = variance_scan(scan)
    values = [row["variance"] for row in rows]
    assert all(a > b for a, b in zip(values, values[1:]))
    assert all(row["variance"] >= row["theorem1"] - 1e-12 for row in rows)
    assert all(row["theorem1"] >= row["theorem2"] - 1e-12 for row in rows)


def test_variance_scan_mc_matches_exact():
    exact = variance_scan(ScanConfig(kind="vs_delta_k", qubits=4,
                                     delta_k_list=(0, 1), estimator="exact"))
    mc = variance_scan(ScanConfig(kind="vs_delta_k", qubits=4, delta_k_list=(0, 1),
                                  estimator="mc", samples=3000,
                                  mode="haar-sandwich", seed=5))
    for row_e, row_m in zip(exact, mc):
        assert abs(row_m["variance"] - row_e["variance"]) < 3 * row_m["std_error"]


def test_field_sweep_shape(tmp_path):
    cfg = small_cfg(iterations=40, trials=2)
    cfg = VqeConfig.from_json({**cfg.to_json(),
                               "ansatz": {"family": "fldc_claw", "rows": 2, "cols": 2},
                               "model": {"kind": "toric", "rows": 2, "cols": 2,
                                         "field": [0, 0, 0]}})
    rows = field_sweep(cfg, [0.0], ["fldc_claw"], pattern="z")
    assert len(rows) == 1
    row = rows[0]
    assert row["family"] == "fldc_claw"
    assert row["kept_trials"] == 1
    assert row["energy_per_site_mean"] >= row["ed_energy_per_site"] - 1e-9
    with pytest.raises(ConfigError):
        field_sweep(cfg, [], ["fldc_claw"])
    with pytest.raises(ConfigError):
        field_sweep(cfg, [0.0], [])


def test_csv_floats_have_17_significant_digits(tmp_path):
    path = tmp_path / "t.csv"
    write_csv(path, [{"a": 1 / 3, "b": 2}], ("a", "b"))
    body = path.read_text().splitlines()
    assert body[0] == "a,b"
    assert body[1].startswith("0.3333333333333333")
    assert len(body[1].split(",")[0].replace("0.", "")) >= 16


def test_threaded_training_matches_serial():
    cfg = small_cfg(trials=3, iterations=30)
    serial = vqe_train(cfg)
    threaded = vqe_train(VqeConfig.from_json({**cfg.to_json(), "threads": 2}))
    assert [r.final_energy for r in serial] == [r.final_energy for r in threaded]
