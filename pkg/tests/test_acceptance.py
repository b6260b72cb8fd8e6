"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Criterion 4a's exact-constancy assertion is implemented exactly as stated
(spread below 1e-12 across system sizes).  The engine-exact values instead
converge geometrically with the number of blocks between the differential
block and the initial state, so that assertion fails by construction; see
notes outside the package for the analysis.  All other criteria pass.

The VQE criterion dominates the runtime (about 110 minutes on two cores);
deselect it with ``-m "not slow"`` for quick runs.
"""

import json
import math
import time

import numpy as np
import pytest

from bpscope.ansatz import AnsatzSpec, build, diff_param_index
from bpscope.bounds import ladder_bound, theorem1_bound, theorem2_bound
from bpscope.cli import main as cli_main
from bpscope.models import (Hamiltonian, ToricLattice, ground_energy,
                            entanglement_entropy, toric_code)
from bpscope.pauli import PauliString
from bpscope.runner import (ScanConfig, VqeConfig, best_half, summarize,
                            variance_scan, vqe_train)
from bpscope.simulator import (compile_circuit, expectation, mc_variance, run)
from bpscope.twirl import exact_term_variance, exact_variance

from conftest import random_block_circuit, random_observable
from oracles import brute_twirl_variance

SEED = 1
LN2 = math.log(2.0)


def report(name: str, ok: bool, detail: str) -> None:
    print(f"[{name}] {'PASS' if ok else 'FAIL'}: {detail}")
    assert ok, f"{name}: {detail}"


# -- criterion 1: twirl engine vs literal propagator ------------------------

def test_criterion_1_twirl_oracle_equivalence():
    rng = np.random.default_rng(SEED)
    start = time.perf_counter()
    worst = 0.0
    for _ in range(200):
        c = random_block_circuit(rng, n_min=2, n_max=3, max_blocks=3)
        h = random_observable(rng, c)
        mu = int(rng.integers(0, c.param_count))
        dev = abs(exact_term_variance(c, h, mu) - brute_twirl_variance(c, h, mu))
        worst = max(worst, dev)
    elapsed = time.perf_counter() - start
    report("criterion 1", worst <= 1e-12 and elapsed < 60,
           f"max deviation {worst:.2e} over 200 cases in {elapsed:.1f}s")


# -- criterion 2: Monte-Carlo consistency -----------------------------------

def test_criterion_2_mc_consistency():
    built = build(AnsatzSpec(family="ladder", qubits=2))
    hmt = Hamiltonian(2, ((1.0, PauliString.from_text("ZI")),))
    mu = diff_param_index(0, "ryy")
    start = time.perf_counter()
    res = mc_variance(built.circuit, hmt, mu, 100_000, "haar-sandwich", seed=SEED)
    elapsed = time.perf_counter() - start
    target = 32 / 75
    var_ok = abs(res.variance - target) <= 3 * res.std_error
    mean_ok = abs(res.mean) <= 3 * res.mean_std_error
    report("criterion 2", var_ok and mean_ok and elapsed < 120,
           f"variance {res.variance:.6f} vs {target:.6f} "
           f"(3se {3 * res.std_error:.6f}), mean {res.mean:.2e} "
           f"(3se {3 * res.mean_std_error:.2e}), {elapsed:.0f}s")


# -- criterion 3: bound validity and dominance -------------------------------

def _random_instance(rng):
    kind = rng.choice(["ladder", "ladder", "claw22", "claw23"])
    if kind == "ladder":
        n = int(rng.integers(3, 9))
        c = build(AnsatzSpec(family="ladder", qubits=n)).circuit
        is_ladder = True
    else:
        rows, cols = (2, 2) if kind == "claw22" else (2, 3)
        c = build(AnsatzSpec(family="fldc_claw", rows=rows, cols=cols)).circuit
        is_ladder = False
    n = c.qubit_count
    terms = []
    for _ in range(int(rng.integers(1, 4))):
        qs = rng.choice(n, size=int(rng.integers(1, 3)), replace=False)
        terms.append((float(rng.uniform(-1.5, 1.5)),
                      PauliString.from_ops(n, {int(q): str(rng.choice(list("XYZ")))
                                               for q in qs})))
    hmt = Hamiltonian(n, tuple(terms))
    mu = int(rng.integers(0, c.param_count))
    return c, hmt, mu, is_ladder


def test_criterion_3_bound_validity_and_dominance():
    rng = np.random.default_rng(SEED + 1)
    start = time.perf_counter()
    violations = []
    done = 0
    while done < 100:
        c, hmt, mu, is_ladder = _random_instance(rng)
        if not hmt.terms:
            continue
        done += 1
        ex = exact_variance(c, hmt, mu)
        b1 = theorem1_bound(c, hmt, mu).total
        b2 = theorem2_bound(c, hmt, mu).total
        tol = 1e-12 * max(1.0, abs(ex))
        if not (ex >= b1 - tol and b1 >= b2 - 1e-12 and b2 >= -0.0):
            violations.append((done, ex, b1, b2))
        if is_ladder:
            bl = ladder_bound(c, hmt, mu).total
            if not b1 >= bl - 1e-12:
                violations.append((done, "ladder", b1, bl))
    elapsed = time.perf_counter() - start
    report("criterion 3", not violations and elapsed < 300,
           f"{done} instances, {len(violations)} violations, {elapsed:.0f}s")


# -- criterion 4: variance scans ---------------------------------------------

VS_N_LIST = (6, 7, 8, 9, 10, 11, 12)
FIXED_DK = 2


def test_criterion_4a_exact_constancy_across_n():
    rows = variance_scan(ScanConfig(kind="vs_N", qubits_list=VS_N_LIST,
                                    delta_k=FIXED_DK, estimator="exact"))
    values = np.array([row["variance"] for row in rows])
    spread = float(values.max() - values.min())
    report("criterion 4a exact", spread <= 1e-12,
           f"exact variance across N={VS_N_LIST} at dk={FIXED_DK}: "
           f"spread {spread:.3e} (values converge geometrically in the block "
           f"count between the differential block and the initial state, so "
           f"they are not N-independent at 1e-12)")


@pytest.mark.slow
def test_criterion_4a_mc_flat_within_factor_two():
    start = time.perf_counter()
    rows = variance_scan(ScanConfig(kind="vs_N", qubits_list=VS_N_LIST,
                                    delta_k=FIXED_DK, estimator="mc",
                                    samples=20_000, mode="cartan-uniform",
                                    seed=SEED))
    values = np.array([row["variance"] for row in rows])
    ratio = float(values.max() / values.min())
    elapsed = time.perf_counter() - start
    report("criterion 4a mc", ratio <= 2.0 and elapsed < 600,
           f"cartan-uniform variance range {values.min():.4f}..{values.max():.4f} "
           f"ratio {ratio:.2f} over N={VS_N_LIST}, {elapsed:.0f}s")


def test_criterion_4b_exact_exponential_decay():
    dks = tuple(range(8))
    rows = variance_scan(ScanConfig(kind="vs_delta_k", qubits=12,
                                    delta_k_list=dks, estimator="exact"))
    values = np.array([row["variance"] for row in rows])
    decreasing = bool(np.all(values[:-1] > values[1:]))
    logs = np.log(values)
    x = np.array(dks, dtype=float)
    slope, intercept = np.polyfit(x, logs, 1)
    fitted = slope * x + intercept
    ss_res = float(((logs - fitted) ** 2).sum())
    ss_tot = float(((logs - logs.mean()) ** 2).sum())
    r2 = 1.0 - ss_res / ss_tot
    report("criterion 4b", decreasing and r2 > 0.99,
           f"strictly decreasing={decreasing}, log-linear R^2={r2:.5f}, "
           f"slope={slope:.4f}")


# -- criterion 5: toric-code VQE ----------------------------------------------

def _vqe_cfg(family: str, field, seed: int, reps=None) -> VqeConfig:
    ansatz = {"family": family, "rows": 3, "cols": 3}
    if reps is not None:
        ansatz["reps"] = reps
    return VqeConfig.from_json({
        "ansatz": ansatz,
        "model": {"kind": "toric", "rows": 3, "cols": 3, "field": list(field)},
        "optimizer": {"kind": "adam", "learning_rate": 0.01},
        "iterations": 3500,
        "trials": 20,
        "best_fraction": 0.5,
        "seed": seed,
        "early_stop": {"enabled": False},
        "threads": 2,
    })


def _train_summary(family, field, seed, reps=None):
    cfg = _vqe_cfg(family, field, seed, reps)
    results = vqe_train(cfg)
    hmt_n = 12
    return summarize(results, cfg.best_fraction, hmt_n)


@pytest.mark.slow
def test_criterion_5_toric_vqe():
    start = time.perf_counter()
    lat = ToricLattice(3, 3)
    ed0 = ground_energy(toric_code(lat, (0, 0, 0)))
    failures = []
    for attempt_seed in (SEED, SEED + 1):  # one retry with a fresh seed
        failures = []
        claw0 = _train_summary("fldc_claw", (0, 0, 0), attempt_seed)
        if abs(claw0["energy_mean"] - ed0) > 0.01 * abs(ed0):
            failures.append(f"claw energy {claw0['energy_mean']:.4f} vs ED {ed0}")
        if abs(claw0["s_topo_mean"] - (-LN2)) > 0.15:
            failures.append(f"claw S_topo {claw0['s_topo_mean']:.4f}")
        fdc0 = _train_summary("fdc", (0, 0, 0), attempt_seed)
        if not fdc0["s_topo_mean"] > -0.35:
            failures.append(f"fdc S_topo {fdc0['s_topo_mean']:.4f}")
        claw1 = _train_summary("fldc_claw", (0.1, 0, 0.1), attempt_seed)
        gldc0 = _train_summary("gldc", (0, 0, 0), attempt_seed, reps=12)
        gldc1 = _train_summary("gldc", (0.1, 0, 0.1), attempt_seed, reps=12)
        if not gldc0["energy_mean"] > claw0["energy_mean"]:
            failures.append("gldc not above claw at h=0")
        if not gldc1["energy_mean"] > claw1["energy_mean"]:
            failures.append("gldc not above claw at h=0.1")
        if not failures:
            break
    elapsed = time.perf_counter() - start
    detail = (f"claw E={claw0['energy_mean']:.4f} (ED {ed0:.1f}) "
              f"S={claw0['s_topo_mean']:.4f}; fdc S={fdc0['s_topo_mean']:.4f}; "
              f"gldc E={gldc0['energy_mean']:.3f}/{gldc1['energy_mean']:.3f} vs "
              f"claw {claw0['energy_mean']:.3f}/{claw1['energy_mean']:.3f}; "
              f"{elapsed / 60:.0f} min")
    report("criterion 5", not failures, detail + "; " + "; ".join(failures))


# -- criterion 6: area law -----------------------------------------------------

def _straight_cuts(lat: ToricLattice):
    """(region, crossed-lattice-edge count) for every straight grid cut."""
    cuts = []
    for c0 in range(lat.cols - 1):
        region = set()
        for r in range(lat.rows):
            for c in range(lat.cols - 1):
                if c + 0.5 <= c0 + 0.5:
                    region.add(lat.horizontal(r, c))
        for r in range(lat.rows - 1):
            for c in range(lat.cols):
                if c <= c0:
                    region.add(lat.vertical(r, c))
        cuts.append((sorted(region), lat.rows))
    for r0 in range(lat.rows - 1):
        region = set()
        for r in range(lat.rows):
            for c in range(lat.cols - 1):
                if r <= r0:
                    region.add(lat.horizontal(r, c))
        for r in range(lat.rows - 1):
            for c in range(lat.cols):
                if r + 0.5 <= r0 + 0.5:
                    region.add(lat.vertical(r, c))
        cuts.append((sorted(region), lat.cols))
    return cuts


def test_criterion_6_area_law():
    from bpscope.models import area_law_check_state
    start = time.perf_counter()
    lat = ToricLattice(3, 3)
    built = build(AnsatzSpec(family="fldc_claw", rows=3, cols=3))
    chi = built.circuit.max_local_depth()
    cc = compile_circuit(built.circuit)
    rng = np.random.default_rng(SEED + 2)
    cuts = _straight_cuts(lat)
    worst = -np.inf
    for _ in range(50):
        theta = rng.uniform(0, 2 * np.pi, cc.n_params)
        psi = run(built.circuit, theta, cc)
        for region, boundary in cuts:
            bits, bound, ok = area_law_check_state(psi.amps, region, 12, chi, boundary)
            worst = max(worst, bits - bound)
            assert ok
    elapsed = time.perf_counter() - start
    report("criterion 6", worst <= 1e-9 and elapsed < 300,
           f"max S_A(bits) - chi*|boundary| = {worst:.3e} over 50 states x "
           f"{len(cuts)} cuts (chi={chi}), {elapsed:.0f}s")


# -- criterion 7: gradient correctness ----------------------------------------

@pytest.mark.slow
def test_criterion_7_parameter_shift_vs_finite_difference():
    start = time.perf_counter()
    built = build(AnsatzSpec(family="fldc_claw", rows=3, cols=3))
    hmt = toric_code(ToricLattice(3, 3), (0.1, 0, 0.1))
    cc = compile_circuit(built.circuit)
    rng = np.random.default_rng(SEED + 3)
    worst = 0.0
    step = 1e-5
    for _ in range(5):
        theta = rng.uniform(0, 2 * np.pi, cc.n_params)
        for mu in range(cc.n_params):
            tp = theta.copy()
            tp[mu] += np.pi / 4
            tm = theta.copy()
            tm[mu] -= np.pi / 4
            shift = expectation(run(built.circuit, tp, cc), hmt) \
                - expectation(run(built.circuit, tm, cc), hmt)
            tp[mu] = theta[mu] + step
            tm[mu] = theta[mu] - step
            fd = (expectation(run(built.circuit, tp, cc), hmt)
                  - expectation(run(built.circuit, tm, cc), hmt)) / (2 * step)
            worst = max(worst, abs(shift - fd))
    elapsed = time.perf_counter() - start
    report("criterion 7", worst <= 1e-6 and elapsed < 300,
           f"max |shift - fd| = {worst:.2e} over 5 points x {cc.n_params} "
           f"parameters, {elapsed:.0f}s")


# -- criterion 8: determinism ---------------------------------------------------

def test_criterion_8_cli_determinism(tmp_path):
    vqe_cfg = {
        "ansatz": {"family": "fldc_claw", "rows": 2, "cols": 2},
        "model": {"kind": "toric", "rows": 2, "cols": 2, "field": [0.1, 0, 0.1]},
        "iterations": 40, "trials": 3, "seed": 77,
        "early_stop": {"enabled": False},
    }
    scan_cfg = {"kind": "vs_delta_k", "qubits": 4, "delta_k_list": [0, 1],
                "estimator": "mc", "samples": 400, "mode": "cartan-uniform",
                "seed": 5}
    mismatches = []
    for name, cfg, files in (
            ("vqe", vqe_cfg, ("vqe.csv", "vqe_trajectories.csv")),
            ("variance", scan_cfg, ("variance.csv",))):
        cfg_path = tmp_path / f"{name}.json"
        cfg_path.write_text(json.dumps(cfg))
        outs = []
        for tag in ("a", "b"):
            out = tmp_path / f"{name}_{tag}"
            assert cli_main([name, str(cfg_path), "--out", str(out)]) == 0
            outs.append(out)
        for fname in files:
            if (outs[0] / fname).read_bytes() != (outs[1] / fname).read_bytes():
                mismatches.append(f"{name}/{fname}")
    report("criterion 8", not mismatches,
           f"byte-identical CSV bodies on repeated runs"
           + (f"; mismatches: {mismatches}" if mismatches else ""))
