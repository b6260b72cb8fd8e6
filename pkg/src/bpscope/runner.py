"""Experiment orchestration: VQE training, field sweeps and variance scans.

Every run is reproducible from one 64-bit seed: trials draw their parameter
initialisations from per-trial spawned Philox streams, results are sorted
before emission, and CSV floats carry 17 significant digits so repeated runs
are byte-identical (wall times live only in the JSON sidecar).
"""

from __future__ import annotations

import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import bounds as bounds_mod
from . import kernels
from .ansatz import AnsatzSpec, build, diff_param_index
from .errors import ConfigError
from .models import Hamiltonian, ToricLattice, ground_energy, toric_code, topological_entropy
from .pauli import PauliString
from .simulator import (adjoint_energy_gradient, compile_circuit,
                        expectation, make_rng, mc_variance, run)
from .twirl import term_variance

TRIAL_STREAM = 17  # spawn-key namespace for per-trial rngs


# -- configuration ---------------------------------------------------------

@dataclass(frozen=True)
class AdamSettings:
    learning_rate: float = 0.01
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ConfigError("optimizer.learning_rate", "must be positive")


@dataclass(frozen=True)
class EarlyStop:
    enabled: bool = True
    window: int = 50
    min_improvement: float = 1e-8


@dataclass(frozen=True)
class VqeConfig:
    ansatz: AnsatzSpec
    model: dict
    optimizer: AdamSettings = field(default_factory=AdamSettings)
    iterations: int = 500
    trials: int = 20
    best_fraction: float = 0.5
    seed: int = 0
    early_stop: EarlyStop = field(default_factory=EarlyStop)
    s_topo_regions: Optional[dict] = None
    threads: int = 1

    def __post_init__(self):
        if self.trials < 1:
            raise ConfigError("trials", "must be >= 1")
        if not 0.0 < self.best_fraction <= 1.0:
            raise ConfigError("best_fraction", "must be in (0, 1]")
        if self.iterations < 1:
            raise ConfigError("iterations", "must be >= 1")

    @classmethod
    def from_json(cls, d: dict) -> "VqeConfig":
        if "ansatz" not in d:
            raise ConfigError("ansatz", "missing")
        if "model" not in d:
            raise ConfigError("model", "missing")
        opt = d.get("optimizer", {})
        if opt.get("kind", "adam") != "adam":
            raise ConfigError("optimizer.kind", "only 'adam' is supported")
        es = d.get("early_stop", {})
        return cls(
            ansatz=AnsatzSpec.from_json(d["ansatz"]),
            model=dict(d["model"]),
            optimizer=AdamSettings(
                learning_rate=opt.get("learning_rate", 0.01),
                beta1=opt.get("beta1", 0.9),
                beta2=opt.get("beta2", 0.999),
                epsilon=opt.get("epsilon", 1e-8)),
            iterations=int(d.get("iterations", 500)),
            trials=int(d.get("trials", 20)),
            best_fraction=float(d.get("best_fraction", 0.5)),
            seed=int(d.get("seed", 0)),
            early_stop=EarlyStop(
                enabled=bool(es.get("enabled", True)),
                window=int(es.get("window", 50)),
                min_improvement=float(es.get("min_improvement", 1e-8))),
            s_topo_regions=d.get("s_topo_regions"),
            threads=int(d.get("threads", 1)),
        )

    def to_json(self) -> dict:
        return {
            "ansatz": self.ansatz.to_json(),
            "model": self.model,
            "optimizer": {"kind": "adam", "learning_rate": self.optimizer.learning_rate,
                          "beta1": self.optimizer.beta1, "beta2": self.optimizer.beta2,
                          "epsilon": self.optimizer.epsilon},
            "iterations": self.iterations,
            "trials": self.trials,
            "best_fraction": self.best_fraction,
            "seed": self.seed,
            "early_stop": {"enabled": self.early_stop.enabled,
                           "window": self.early_stop.window,
                           "min_improvement": self.early_stop.min_improvement},
            "s_topo_regions": self.s_topo_regions,
            "threads": self.threads,
        }


def model_hamiltonian(model: dict) -> Hamiltonian:
    kind = model.get("kind", "toric")
    if kind == "toric":
        lat = ToricLattice(int(model.get("rows", 3)), int(model.get("cols", 3)))
        return toric_code(lat, model.get("field", (0.0, 0.0, 0.0)),
                          prefactor=model.get("prefactor"))
    if kind == "pauli_sum":
        try:
            return Hamiltonian.from_strings(int(model["qubits"]), model["terms"])
        except KeyError as exc:
            raise ConfigError("model", f"missing key {exc}") from exc
    raise ConfigError("model.kind", f"unknown model kind {kind!r}")


def default_regions(model: dict) -> Optional[dict]:
    if model.get("kind", "toric") != "toric":
        return None
    key = f"{model.get('rows', 3)}x{model.get('cols', 3)}"
    with resources.files("bpscope.data").joinpath("s_topo_regions.json").open() as f:
        table = json.load(f)
    return table.get(key)


# -- Adam -------------------------------------------------------------------

class Adam:
    """Bias-corrected Adam on a flat parameter vector."""

    def __init__(self, settings: AdamSettings, n: int):
        self.s = settings
        self.m = np.zeros(n)
        self.v = np.zeros(n)
        self.t = 0

    def step(self, theta: np.ndarray, grad: np.ndarray) -> np.ndarray:
        s = self.s
        self.t += 1
        self.m = s.beta1 * self.m + (1.0 - s.beta1) * grad
        self.v = s.beta2 * self.v + (1.0 - s.beta2) * grad * grad
        m_hat = self.m / (1.0 - s.beta1**self.t)
        v_hat = self.v / (1.0 - s.beta2**self.t)
        return theta - s.learning_rate * m_hat / (np.sqrt(v_hat) + s.epsilon)


# -- VQE --------------------------------------------------------------------

@dataclass(frozen=True)
class TrialResult:
    trial: int
    seed: int
    energies: tuple[float, ...]
    final_energy: float
    final_s_topo: Optional[float]
    wall_time: float


def _regions_for(cfg: VqeConfig) -> Optional[dict]:
    regions = cfg.s_topo_regions or default_regions(cfg.model)
    if regions is None:
        return None
    return {k: list(v) for k, v in regions.items()}


def run_trial(cfg: VqeConfig, trial: int) -> TrialResult:
    start = time.perf_counter()
    built = build(cfg.ansatz)
    circ = built.circuit
    hmt = model_hamiltonian(cfg.model)
    if hmt.n != circ.qubit_count:
        raise ConfigError("model", "model and ansatz qubit counts differ")
    cc = compile_circuit(circ)
    rng = make_rng(cfg.seed, TRIAL_STREAM, trial)
    theta = rng.uniform(0.0, 2.0 * np.pi, size=cc.n_params)
    adam = Adam(cfg.optimizer, cc.n_params)
    energies: list[float] = []
    best = math.inf
    best_at = 0
    stopped = False
    for it in range(cfg.iterations):
        energy, grad = adjoint_energy_gradient(cc, theta, hmt)
        energies.append(energy)
        if energy < best - cfg.early_stop.min_improvement:
            best = energy
            best_at = it
        if (cfg.early_stop.enabled and it - best_at >= cfg.early_stop.window):
            stopped = True
            break
        theta = adam.step(theta, grad)
    if not stopped:
        energies.append(expectation(run(circ, theta, cc), hmt))
    final_state = run(circ, theta, cc)
    s_topo = None
    regions = _regions_for(cfg)
    if regions is not None:
        s_topo = topological_entropy(final_state.amps, regions["A"], regions["B"],
                                     regions["C"], circ.qubit_count)
    return TrialResult(trial, cfg.seed, tuple(energies), energies[-1],
                       s_topo, time.perf_counter() - start)


def _trial_worker(args) -> TrialResult:
    cfg_json, trial = args
    return run_trial(VqeConfig.from_json(cfg_json), trial)


def vqe_train(cfg: VqeConfig) -> list[TrialResult]:
    """Independent trials; deterministic given the config seed, any thread count."""
    if cfg.threads <= 1 or cfg.trials == 1:
        results = [run_trial(cfg, t) for t in range(cfg.trials)]
    else:
        cfg_json = cfg.to_json()
        with ProcessPoolExecutor(max_workers=cfg.threads) as pool:
            results = list(pool.map(_trial_worker,
                                    [(cfg_json, t) for t in range(cfg.trials)]))
    return sorted(results, key=lambda r: r.trial)


def best_half(results: Sequence[TrialResult], best_fraction: float) -> list[TrialResult]:
    keep = max(1, math.ceil(len(results) * best_fraction))
    return sorted(results, key=lambda r: r.final_energy)[:keep]


def summarize(results: Sequence[TrialResult], best_fraction: float, n_sites: int) -> dict:
    chosen = best_half(results, best_fraction)
    e = np.array([r.final_energy for r in chosen])
    out = {
        "energy_mean": float(e.mean()),
        "energy_std": float(e.std(ddof=0)),
        "energy_per_site_mean": float(e.mean() / n_sites),
        "energy_per_site_std": float(e.std(ddof=0) / n_sites),
        "kept_trials": len(chosen),
    }
    st = [r.final_s_topo for r in chosen if r.final_s_topo is not None]
    if st:
        st = np.array(st)
        out["s_topo_mean"] = float(st.mean())
        out["s_topo_std"] = float(st.std(ddof=0))
    return out


# -- field sweep -------------------------------------------------------------

FIELD_PATTERNS = {"xz": lambda h: (h, 0.0, h), "z": lambda h: (0.0, 0.0, h),
                  "x": lambda h: (h, 0.0, 0.0)}


def field_sweep(cfg: VqeConfig, grid: Sequence[float], families: Sequence[str],
                pattern: str = "xz") -> list[dict]:
    """Best-half VQE summary per (family, field) with the ED reference."""
    if not grid:
        raise ConfigError("sweep.grid", "field grid must be nonempty")
    if not families:
        raise ConfigError("sweep.families", "family list must be nonempty")
    if pattern not in FIELD_PATTERNS:
        raise ConfigError("sweep.pattern", f"unknown pattern {pattern!r}")
    rows = []
    for family in families:
        spec = AnsatzSpec.from_json({**cfg.ansatz.to_json(), "family": family})
        for h in grid:
            model = dict(cfg.model)
            model["field"] = list(FIELD_PATTERNS[pattern](float(h)))
            sub = VqeConfig.from_json({**cfg.to_json(), "model": model,
                                       "ansatz": spec.to_json()})
            results = vqe_train(sub)
            hmt = model_hamiltonian(model)
            row = {"family": family, "h": float(h), "pattern": pattern,
                   "n_qubits": hmt.n, "seed": cfg.seed,
                   "ed_energy_per_site": ground_energy(hmt) / hmt.n}
            row.update(summarize(results, cfg.best_fraction, hmt.n))
            rows.append(row)
    return rows


# -- variance scans -----------------------------------------------------------

def _z_last(n: int) -> Hamiltonian:
    return Hamiltonian(n, ((1.0, PauliString.from_ops(n, {n - 1: "Z"})),))


@dataclass(frozen=True)
class ScanConfig:
    kind: str                       # vs_N | vs_delta_k
    family: str = "ladder"
    qubits: int = 12
    qubits_list: tuple[int, ...] = (6, 7, 8, 9, 10, 11, 12)
    delta_k: int = 2
    delta_k_list: tuple[int, ...] = (0, 1, 2, 3, 4, 5, 6, 7)
    estimator: str = "exact"        # exact | mc
    samples: int = 20000
    mode: str = "cartan-uniform"
    diff_gate: str = "ryy"
    seed: int = 0

    def __post_init__(self):
        if self.kind not in ("vs_N", "vs_delta_k"):
            raise ConfigError("scan.kind", "must be vs_N or vs_delta_k")
        if self.family != "ladder":
            raise ConfigError("scan.family", "variance scans support the ladder family")
        if self.estimator not in ("exact", "mc"):
            raise ConfigError("scan.estimator", "must be exact or mc")

    @classmethod
    def from_json(cls, d: dict) -> "ScanConfig":
        kw = {}
        for key in ("kind", "family", "qubits", "delta_k", "estimator", "samples",
                    "mode", "diff_gate", "seed"):
            if key in d:
                kw[key] = d[key]
        if "qubits_list" in d:
            kw["qubits_list"] = tuple(int(v) for v in d["qubits_list"])
        if "delta_k_list" in d:
            kw["delta_k_list"] = tuple(int(v) for v in d["delta_k_list"])
        if "kind" not in kw:
            raise ConfigError("scan.kind", "missing")
        return cls(**kw)


def _scan_cell(n: int, delta_k: int, scan: ScanConfig) -> dict:
    built = build(AnsatzSpec(family="ladder", qubits=n))
    circ = built.circuit
    last_block = circ.block_count - 1
    block = last_block - delta_k
    if block < 0:
        raise ConfigError("scan.delta_k", f"delta_k {delta_k} exceeds chain length")
    param = diff_param_index(block, scan.diff_gate)
    hmt = _z_last(n)
    row = {"N": n, "delta_k": delta_k, "param_index": param, "term_index": 0,
           "estimator": scan.estimator, "seed": scan.seed,
           "theorem1": bounds_mod.theorem1_bound(circ, hmt, param).total,
           "theorem2": bounds_mod.theorem2_bound(circ, hmt, param).total,
           "ladder": bounds_mod.ladder_bound(circ, hmt, param).total}
    if scan.estimator == "exact":
        res = term_variance(circ, hmt.terms[0][1], param)
        row.update({"mode": "exact", "samples": 0, "mean": 0.0,
                    "variance": res.value, "std_error": 0.0,
                    "pruned_mass": res.pruned_mass})
    else:
        mc = mc_variance(circ, hmt, param, scan.samples, scan.mode, scan.seed)
        row.update({"mode": scan.mode, "samples": mc.samples, "mean": mc.mean,
                    "variance": mc.variance, "std_error": mc.std_error,
                    "pruned_mass": 0.0})
    return row


def variance_scan(scan: ScanConfig) -> list[dict]:
    rows = []
    if scan.kind == "vs_N":
        for n in scan.qubits_list:
            rows.append(_scan_cell(n, scan.delta_k, scan))
    else:
        for dk in scan.delta_k_list:
            rows.append(_scan_cell(scan.qubits, dk, scan))
    return rows


# -- emission -----------------------------------------------------------------

def _fmt(value) -> str:
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, float):
        return "%.17g" % value
    return str(value)


def write_csv(path: Path, rows: Sequence[dict], columns: Sequence[str]) -> None:
    lines = [",".join(columns)]
    for row in rows:
        lines.append(",".join(_fmt(row.get(col, "")) for col in columns))
    path.write_text("\n".join(lines) + "\n")


def write_sidecar(path: Path, resolved_config: dict, extra: Optional[dict] = None) -> None:
    payload = {"config": resolved_config, "backend": kernels.get_backend_name()}
    if extra:
        payload.update(extra)
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
