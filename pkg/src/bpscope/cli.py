"""Command line interface.

Subcommands consume a JSON config file and write CSVs plus a JSON sidecar
holding the fully resolved config and seeds.  Exit codes: 0 success,
2 configuration error, 3 assumption violation (structured blocks where local
2-designs are required).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import bounds as bounds_mod
from .ansatz import AnsatzSpec, build
from .circuit import circuit_from_json
from .errors import AssumptionViolation, BpscopeError, ConfigError, LayoutError
from .runner import (ScanConfig, VqeConfig, field_sweep, model_hamiltonian,
                     summarize, variance_scan, vqe_train, write_csv, write_sidecar)

ANALYZE_COLUMNS = ("param_index", "block_index", "theorem1", "theorem2",
                   "ladder", "sandwich_assumed")
VARIANCE_COLUMNS = ("N", "delta_k", "param_index", "term_index", "mode",
                    "samples", "mean", "variance", "std_error", "theorem1",
                    "theorem2", "ladder", "pruned_mass", "seed")
VQE_COLUMNS = ("trial", "final_energy", "final_s_topo", "n_energies", "seed")
SWEEP_COLUMNS = ("family", "h", "pattern", "n_qubits", "energy_per_site_mean",
                 "energy_per_site_std", "s_topo_mean", "s_topo_std",
                 "ed_energy_per_site", "kept_trials", "seed")


def _load_config(path: str) -> dict:
    p = Path(path)
    if not p.exists():
        raise ConfigError("config", f"file not found: {path}")
    try:
        return json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError("config", f"invalid JSON: {exc}") from exc


def _resolve_circuit(cfg: dict):
    if "circuit" in cfg:
        return circuit_from_json(cfg["circuit"]), None
    if "ansatz" in cfg:
        built = build(AnsatzSpec.from_json(cfg["ansatz"]))
        return built.circuit, built
    raise ConfigError("circuit", "config needs a 'circuit' or 'ansatz' entry")


def cmd_analyze(cfg: dict, out: Path) -> None:
    circ, _ = _resolve_circuit(cfg)
    if "model" not in cfg:
        raise ConfigError("model", "missing")
    hmt = model_hamiltonian(cfg["model"])
    params = cfg.get("parameters", "all")
    if params == "all":
        params = list(range(circ.param_count))
    rows = []
    details = []
    ladder_ok = bounds_mod.is_ladder_layout(circ)
    for mu in params:
        r1 = bounds_mod.theorem1_bound(circ, hmt, int(mu))
        r2 = bounds_mod.theorem2_bound(circ, hmt, int(mu))
        row = {"param_index": int(mu), "block_index": circ.block_of_param(int(mu)),
               "theorem1": r1.total, "theorem2": r2.total, "ladder": "",
               "sandwich_assumed": r1.sandwich_assumed}
        if ladder_ok:
            row["ladder"] = bounds_mod.ladder_bound(circ, hmt, int(mu)).total
        rows.append(row)
        details.append(r1.to_json())
    write_csv(out / "analyze.csv", rows, ANALYZE_COLUMNS)
    (out / "analyze_paths.json").write_text(json.dumps(details, indent=2) + "\n")
    write_sidecar(out / "analyze_config.json", cfg)
    for row in rows:
        print("param {param_index}: theorem1={theorem1:.6g} theorem2={theorem2:.6g} "
              "ladder={ladder} sandwich_assumed={sandwich_assumed}".format(**row))


def cmd_variance(cfg: dict, out: Path, estimator_override: str | None) -> None:
    if estimator_override:
        cfg = {**cfg, "estimator": estimator_override}
    scan = ScanConfig.from_json(cfg)
    rows = variance_scan(scan)
    write_csv(out / "variance.csv", rows, VARIANCE_COLUMNS)
    write_sidecar(out / "variance_config.json", cfg)
    for row in rows:
        print("N={N} delta_k={delta_k} variance={variance:.6g}".format(**row))


def cmd_vqe(cfg: dict, out: Path) -> None:
    vcfg = VqeConfig.from_json(cfg)
    results = vqe_train(vcfg)
    hmt = model_hamiltonian(vcfg.model)
    rows = [{"trial": r.trial, "final_energy": r.final_energy,
             "final_s_topo": "" if r.final_s_topo is None else r.final_s_topo,
             "n_energies": len(r.energies), "seed": r.seed} for r in results]
    write_csv(out / "vqe.csv", rows, VQE_COLUMNS)
    traj_rows = [{"trial": r.trial, "iteration": i, "energy": e}
                 for r in results for i, e in enumerate(r.energies)]
    write_csv(out / "vqe_trajectories.csv", traj_rows, ("trial", "iteration", "energy"))
    stats = summarize(results, vcfg.best_fraction, hmt.n)
    write_sidecar(out / "vqe_config.json", vcfg.to_json(),
                  extra={"summary": stats,
                         "wall_times": {r.trial: r.wall_time for r in results}})
    print(json.dumps(stats, indent=2, sort_keys=True))


def cmd_sweep(cfg: dict, out: Path) -> None:
    if "base" not in cfg:
        raise ConfigError("base", "sweep config needs a 'base' VQE config")
    base = VqeConfig.from_json(cfg["base"])
    grid = cfg.get("field_grid")
    families = cfg.get("families")
    if not grid:
        raise ConfigError("field_grid", "missing or empty")
    if not families:
        raise ConfigError("families", "missing or empty")
    rows = field_sweep(base, [float(h) for h in grid], list(families),
                       pattern=cfg.get("pattern", "xz"))
    write_csv(out / "sweep.csv", rows, SWEEP_COLUMNS)
    write_sidecar(out / "sweep_config.json", cfg)
    for row in rows:
        print("{family} h={h}: E/N={energy_per_site_mean:.6g} "
              "(ED {ed_energy_per_site:.6g})".format(**row))


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="bpscope",
        description="Trainability analysis and VQE experiments for local-2-design circuits")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("analyze", "variance", "vqe", "sweep"):
        p = sub.add_parser(name)
        p.add_argument("config", help="JSON config file")
        p.add_argument("--out", default=".", help="output directory")
        p.add_argument("--seed", type=int, default=None, help="override config seed")
        p.add_argument("--threads", type=int, default=None, help="worker processes")
        p.add_argument("--paper-scale", action="store_true",
                       help="restore 100 trials for VQE-style runs")
        if name == "variance":
            p.add_argument("--exact", action="store_true", help="force the exact estimator")
            p.add_argument("--mc", action="store_true", help="force the Monte-Carlo estimator")
    args = parser.parse_args(argv)

    try:
        cfg = _load_config(args.config)
        if args.seed is not None:
            if "base" in cfg:
                cfg["base"]["seed"] = args.seed
            cfg["seed"] = args.seed
        if args.threads is not None:
            if "base" in cfg:
                cfg["base"]["threads"] = args.threads
            cfg["threads"] = args.threads
        if args.paper_scale:
            if "base" in cfg:
                cfg["base"]["trials"] = 100
            else:
                cfg["trials"] = 100
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        if args.command == "analyze":
            cmd_analyze(cfg, out)
        elif args.command == "variance":
            override = "exact" if args.exact else "mc" if args.mc else None
            cmd_variance(cfg, out, override)
        elif args.command == "vqe":
            cmd_vqe(cfg, out)
        elif args.command == "sweep":
            cmd_sweep(cfg, out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except AssumptionViolation as exc:
        print(f"assumption violation: {exc}", file=sys.stderr)
        return 3
    except (BpscopeError, LayoutError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
