"""Command-line surface: JSON configs in, CSV + JSON summaries out.

Every command resolves its config against a published schema (all defaults
explicit), runs one experiment, prints a pass/fail line per check, and writes
`<command>.csv` and `<command>.json` into the output directory.  A figure is
rendered next to the CSV; `--emit-gnuplot` additionally writes a plain-text
gnuplot script that plots the CSV without any Python.

Exit codes: 0 all checks passed, 1 an experiment check failed (files are
still written), 2 the config failed schema validation, 3 internal error.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional

import numpy as np

from .decomp import alpha_symbols, dyadic_symbols, partition_residual
from .estimates import AdmissiblePair, bilinear_sweep, strichartz_sweep
from .evolve import (BlowupDetected, ContractionFailure, EvolutionConfig, evolve,
                     glassey_report, picard_solve, save_snapshot)
from .grid import (Field, FourierBump, Gaussian, GridSpec, PlaneWave, SumOfBumps,
                   make_grid, sample)
from .construct import (SupercriticalDataSpec, build_supercritical_u0,
                        inflation_sweep, norm_claim_report)
from .norms import norm_report
from .report import ExperimentReport
from .reporting import render_figure, write_csv, write_gnuplot, write_summary
from .schemas import COMMAND_SCHEMAS, ConfigError, resolve_config

__all__ = ["RunConfig", "run", "main"]


@dataclass
class RunConfig:
    """One CLI invocation: a command name plus resolved options."""

    command: str
    config: dict = field(default_factory=dict)
    jobs: int = 1
    out_dir: Path = Path(".")
    emit_gnuplot: bool = False


def _grid_from(block: dict) -> GridSpec:
    return make_grid(int(block["d"]), int(block["n"]), float(block["L"]))


def _as_center(value, d: int):
    if isinstance(value, (list, tuple)):
        return tuple(float(v) for v in value)
    return float(value) if d == 1 else (float(value),) + (0.0,) * (d - 1)


def _field_from(grid: GridSpec, block: dict) -> Field:
    kind = block["kind"]
    amplitude = float(block.get("amplitude", 1.0))
    if kind == "zero":
        return Field(grid, np.zeros(grid.shape, dtype=complex))
    if kind == "gaussian":
        spec = Gaussian(center=_as_center(block["center"], grid.d),
                        width=float(block["width"]),
                        modulation=_as_center(block["modulation"], grid.d))
    elif kind == "fourier_bump":
        spec = FourierBump(center=_as_center(block["center"], grid.d),
                           width=float(block["width"]))
    elif kind == "plane_wave":
        spec = PlaneWave(frequency=_as_center(block["frequency"], grid.d))
    elif kind == "sum":
        spec = SumOfBumps([FourierBump(center=_as_center(b["center"], grid.d),
                                       width=float(b["width"]),
                                       amplitude=float(b.get("amplitude", 1.0)))
                           for b in block["bumps"]])
    else:
        raise ConfigError(f"unknown field kind {kind!r}")
    f = sample(grid, spec)
    if amplitude != 1.0:
        f = Field(grid, amplitude * f.values)
    return f


def _run_decompose(cfg: dict, jobs: int) -> ExperimentReport:
    grid = _grid_from(cfg["grid"])
    report = ExperimentReport(
        name="decompose",
        parameters={"grid_n": grid.n, "grid_L": grid.L, "d": grid.d,
                    "alphas": list(cfg["alphas"])},
        row_fields=["family", "alpha", "pieces", "residual"],
    )
    syms = dyadic_symbols(grid)
    residual = partition_residual(syms)
    report.rows.append({"family": "dyadic", "alpha": None,
                        "pieces": len(syms.indices), "residual": residual})
    report.add_check("dyadic_residual", residual,
                     passed=residual <= cfg["dyadic_tolerance"],
                     detail=f"tolerance {cfg['dyadic_tolerance']:g}")
    for a in cfg["alphas"]:
        syms = alpha_symbols(grid, float(a), C=cfg["C"])
        residual = partition_residual(syms)
        report.rows.append({"family": "alpha", "alpha": float(a),
                            "pieces": len(syms.indices), "residual": residual})
        report.add_check(f"alpha_residual_{a:g}", residual,
                         passed=residual <= cfg["alpha_tolerance"],
                         detail=f"tolerance {cfg['alpha_tolerance']:g}")
    return report


def _run_norm(cfg: dict, jobs: int) -> ExperimentReport:
    grid = _grid_from(cfg["grid"])
    f = _field_from(grid, cfg["field"])
    rep = norm_report(f, float(cfg["s"]), float(cfg["alpha"]), C=cfg["C"])
    report = ExperimentReport(
        name="norm",
        parameters={"s": rep.s, "alpha": rep.alpha, "C": rep.C,
                    "grid_n": grid.n, "grid_L": grid.L, "d": grid.d,
                    "zero_mode_note": rep.zero_mode_note},
        row_fields=["term_rank", "index", "weight", "sharp_mass", "sharp_term",
                    "smooth_term", "partial_sum"],
    )
    for rank, entry in enumerate(rep.series):
        row = dict(entry)
        row["term_rank"] = rank
        row["index"] = "|".join(str(i) for i in entry["index"])
        report.rows.append(row)
    report.metrics = {
        "l2": rep.l2, "linf": rep.linf,
        "modulation_sharp": rep.modulation_sharp,
        "modulation_smooth": rep.modulation_smooth,
        "besov": rep.besov, "sobolev": rep.sobolev,
        "sobolev_homogeneous": rep.sobolev_homogeneous,
        "sharp_smooth_ratio": rep.sharp_smooth_ratio,
        "max_box_index": rep.max_box_index,
        "max_dyadic_level": rep.max_dyadic_level,
    }
    return report


def _run_evolve(cfg: dict, jobs: int, out_dir: Path) -> ExperimentReport:
    grid = _grid_from(cfg["grid"])
    u0 = _field_from(grid, cfg["field"])
    config = EvolutionConfig(lam=float(cfg["lam"]), kappa=int(cfg["kappa"]),
                             dt=float(cfg["dt"]), t_end=float(cfg["t_end"]),
                             dealias=bool(cfg["dealias"]),
                             snapshot_stride=int(cfg["snapshot_stride"]))
    stopped_early = False
    try:
        traj = evolve(u0, config)
    except BlowupDetected as stop:
        traj = stop.trajectory
        stopped_early = True
    rows = traj.conservation_rows()
    report = ExperimentReport(
        name="evolve",
        parameters={"lam": config.lam, "kappa": config.kappa, "dt": config.dt,
                    "t_end": config.t_end, "dealias": config.dealias,
                    "grid_n": grid.n, "grid_L": grid.L, "d": grid.d},
        row_fields=list(rows[0].keys()),
        rows=rows,
    )
    mass0 = rows[0]["mass"]
    drift = max(abs(r["mass"] - mass0) for r in rows)
    energy0 = rows[0]["energy"]
    report.metrics = {
        "mass_drift": drift,
        "energy_drift": max(abs(r["energy"] - energy0) for r in rows),
        "final_t": rows[-1]["t"],
        "final_gradient": rows[-1]["gradient_norm"],
        "stopped_early": stopped_early,
    }
    report.add_check("mass_conserved", drift,
                     passed=drift <= cfg["mass_tolerance"],
                     detail=f"tolerance {cfg['mass_tolerance']:g}")
    report.add_check("reached_t_end", rows[-1]["t"], passed=not stopped_early,
                     detail="gradient guard stopped the run" if stopped_early else "")
    if cfg["save_final"]:
        save_snapshot(traj.final, rows[-1]["t"], out_dir / "evolve_final.amodfld")
    return report


def _run_strichartz(cfg: dict, jobs: int) -> ExperimentReport:
    pair = AdmissiblePair(float(cfg["q"]), float(cfg["r"]))
    return strichartz_sweep(float(cfg["alpha"]), pair,
                            [int(k) for k in cfg["k_values"]], d=int(cfg["d"]),
                            C=cfg["C"], width_fraction=float(cfg["width_fraction"]),
                            T0=float(cfg["T0"]), n=int(cfg["n"]),
                            safety=float(cfg["safety"]), rtol=float(cfg["rtol"]),
                            seed_tolerance=float(cfg["tolerance"]), jobs=jobs)


def _run_bilinear(cfg: dict, jobs: int) -> ExperimentReport:
    n = cfg["n"]
    return bilinear_sweep([float(x) for x in cfg["separations"]],
                          width=float(cfg["width"]), d=int(cfg["d"]),
                          n=None if n is None else int(n),
                          conj1=bool(cfg["conj1"]), conj2=bool(cfg["conj2"]),
                          tolerance=float(cfg["tolerance"]),
                          compare_oracle=bool(cfg["compare_oracle"]), jobs=jobs)


def _run_construct(cfg: dict, jobs: int) -> ExperimentReport:
    grid = _grid_from(cfg["grid"])
    spec = SupercriticalDataSpec(eps=float(cfg["eps"]), alpha=float(cfg["alpha"]),
                                 kappa=int(cfg["kappa"]), d=int(cfg["d"]),
                                 s=float(cfg["s"]), J=int(cfg["J"]),
                                 n_pieces=int(cfg["n_pieces"]), c=float(cfg["c"]))
    u0 = build_supercritical_u0(spec, grid)
    return norm_claim_report(u0, spec, sigmas=tuple(float(x) for x in cfg["sigmas"]),
                             refine_base_n=int(cfg["refine_base_n"]),
                             refine_levels=int(cfg["refine_levels"]), C=cfg["C"])


def _run_inflate(cfg: dict, jobs: int) -> ExperimentReport:
    grid = _grid_from(cfg["grid"])
    return inflation_sweep(float(cfg["s"]), float(cfg["alpha"]), int(cfg["kappa"]),
                           int(cfg["d"]), [int(N) for N in cfg["N_values"]], grid,
                           C=cfg["C"], time_constant=float(cfg["time_constant"]),
                           tolerance=float(cfg["tolerance"]), jobs=jobs,
                           expect=cfg["expect"])


def _run_picard(cfg: dict, jobs: int) -> ExperimentReport:
    grid = _grid_from(cfg["grid"])
    u0 = _field_from(grid, cfg["field"])
    n_time = int(cfg["n_time"])
    config = EvolutionConfig(lam=float(cfg["lam"]), kappa=int(cfg["kappa"]),
                             dt=float(cfg["t_end"]) / max(1, n_time - 1),
                             t_end=float(cfg["t_end"]))
    expect = cfg["expect"]
    report = ExperimentReport(
        name="picard",
        parameters={"lam": config.lam, "kappa": config.kappa,
                    "t_end": config.t_end, "s": cfg["s"], "alpha": cfg["alpha"],
                    "n_time": n_time, "max_iter": int(cfg["max_iter"]),
                    "expect": expect, "grid_n": grid.n, "grid_L": grid.L},
        row_fields=["iteration", "factor", "diff"],
    )
    try:
        result = picard_solve(u0, config, float(cfg["s"]), float(cfg["alpha"]),
                              n_time=n_time, max_iter=int(cfg["max_iter"]),
                              threshold=float(cfg["threshold"]), C=cfg["C"])
        factors, diffs = result.factors, result.diffs
        converged = result.converged
        iterations = result.iterations
        report.metrics = {"converged": converged, "iterations": iterations,
                          "ball": result.ball}
    except ContractionFailure as stop:
        factors, diffs = stop.factors, stop.diffs
        converged = False
        iterations = len(factors)
        report.metrics = {"converged": False, "iterations": iterations}
    for i, (fac, diff) in enumerate(zip(factors, diffs), start=1):
        report.rows.append({"iteration": i, "factor": fac, "diff": diff})
    if expect == "contract":
        within = int(cfg["contraction_within"])
        ok = converged and iterations <= within
        report.add_check("contracts", float(iterations), passed=ok,
                         detail=f"threshold {cfg['threshold']:g} within {within}"
                                " iterations")
    else:
        report.add_check("fails_to_contract", float(iterations),
                         passed=not converged,
                         detail="iteration must not reach the threshold")
    return report


def _run_glassey(cfg: dict, jobs: int) -> ExperimentReport:
    return glassey_report(n=int(cfg["n"]), L=float(cfg["L"]),
                          amplitude=float(cfg["amplitude"]),
                          chirp=float(cfg["chirp"]), kappa=int(cfg["kappa"]),
                          dt=float(cfg["dt"]), t_end=float(cfg["t_end"]),
                          growth_target=float(cfg["growth_target"]))


_HANDLERS = {
    "decompose": lambda cfg, rc: _run_decompose(cfg, rc.jobs),
    "norm": lambda cfg, rc: _run_norm(cfg, rc.jobs),
    "evolve": lambda cfg, rc: _run_evolve(cfg, rc.jobs, rc.out_dir),
    "strichartz": lambda cfg, rc: _run_strichartz(cfg, rc.jobs),
    "bilinear": lambda cfg, rc: _run_bilinear(cfg, rc.jobs),
    "construct": lambda cfg, rc: _run_construct(cfg, rc.jobs),
    "inflate": lambda cfg, rc: _run_inflate(cfg, rc.jobs),
    "picard": lambda cfg, rc: _run_picard(cfg, rc.jobs),
    "glassey": lambda cfg, rc: _run_glassey(cfg, rc.jobs),
}


def run(command: str, run_config: RunConfig) -> int:
    """Execute one command and write its report files; returns the exit code."""
    try:
        resolved = resolve_config(command, run_config.config)
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return 2
    out_dir = Path(run_config.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    try:
        report = _HANDLERS[command](resolved, run_config)
        csv_path = out_dir / f"{command}.csv"
        write_csv(csv_path, report.row_fields, report.rows)
        write_summary(out_dir / f"{command}.json", command, resolved, report)
        render_figure(out_dir / f"{command}.png", command, report)
        if run_config.emit_gnuplot:
            write_gnuplot(out_dir / f"{command}.gp", command, csv_path.name,
                          report.row_fields, report)
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return 2
    except Exception as err:  # noqa: BLE001 - map anything else to exit 3
        print(f"internal error: {type(err).__name__}: {err}", file=sys.stderr)
        return 3
    for check in report.checks:
        status = "PASS" if check.passed else "FAIL"
        line = f"[{status}] {check.name}: value={check.value:.6g}"
        if check.target is not None:
            line += f" target={check.target:.6g}"
        if check.tolerance is not None:
            line += f" tolerance={check.tolerance:.6g}"
        if check.detail:
            line += f" ({check.detail})"
        print(line)
    print(f"wrote {out_dir / (command + '.csv')} and {out_dir / (command + '.json')}")
    return 0 if report.passed else 1


def main(argv: Optional[List[str]] = None) -> int:
    parser = argparse.ArgumentParser(
        prog="alphamod",
        description="Frequency-decomposition experiments: decompositions, norms, "
                    "dispersive sweeps, and data-construction reports.",
    )
    parser.add_argument("command", choices=sorted(COMMAND_SCHEMAS))
    parser.add_argument("--config", type=Path, default=None,
                        help="JSON config; omitted means schema defaults")
    parser.add_argument("--jobs", type=int, default=1,
                        help="parallel workers for sweep points")
    parser.add_argument("--out", type=Path, default=Path("."),
                        help="directory for CSV/JSON/figure outputs")
    parser.add_argument("--emit-gnuplot", action="store_true",
                        help="also write a gnuplot script next to the CSV")
    args = parser.parse_args(argv)
    config = {}
    if args.config is not None:
        try:
            with open(args.config) as fh:
                config = json.load(fh)
        except (OSError, json.JSONDecodeError) as err:
            print(f"config error: {err}", file=sys.stderr)
            return 2
    rc = RunConfig(command=args.command, config=config, jobs=args.jobs,
                   out_dir=args.out, emit_gnuplot=args.emit_gnuplot)
    return run(args.command, rc)


if __name__ == "__main__":
    sys.exit(main())
