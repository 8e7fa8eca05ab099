"""Batch experiment runner with deterministic file outputs.

Subcommands
-----------
solve        run one or more (n, delta) cells of a named problem
table1       noise-free accuracy comparison of the Galerkin baseline and the
             representer solver on test problem 2
figure-data  emit the solution/error grids behind the standard figures
dump-gram    write the Gram matrix and its eigenvalues as CSV

All numeric output is formatted with 17 significant digits; identical
configuration and seed produce byte-identical files.  Per-phase runtimes are
logged to stderr (and optionally to a sidecar file, which is excluded from
the determinism guarantee).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import DegenerateProblemError, NonFiniteIntegrandError, QuadratureError
from .gram import assemble_gram, spectral_factorize
from .problems import build_problem, galerkin_baseline, problem_names
from .regparam import add_noise, select_parameters
from .rkhs import shift_rhs
from .riesz import build_basis
from .solver import (
    DataVector,
    coefficients_teig,
    residual_norm,
    solution_sweep,
    w_norm,
)

ENV_OUTPUT_DIR = "RIESZREG_OUTPUT_DIR"

_SELECTORS = ("best", "discrepancy", "lcurve", "all")


@dataclass
class ExperimentConfig:
    """One batch of experiment cells; mirrors the JSON config document."""

    problem: str = "tp1"
    n: list = field(default_factory=lambda: [10])
    delta: list = field(default_factory=lambda: [0.0])
    seed: int = 1
    tau: float | None = None
    selector: str = "all"
    grid_points: int = 1000
    output_dir: str | None = None
    formats: list = field(default_factory=lambda: ["csv", "json"])
    lcurve: bool = False
    plot: bool = False
    timings: bool = False
    z0: float = 4.0

    def __post_init__(self):
        if isinstance(self.n, (int, float)):
            self.n = [int(self.n)]
        if isinstance(self.delta, (int, float)):
            self.delta = [float(self.delta)]
        if isinstance(self.formats, str):
            self.formats = [v for v in self.formats.split(",") if v]
        self.n = [int(v) for v in self.n]
        self.delta = [float(v) for v in self.delta]
        if self.selector not in _SELECTORS:
            raise ValueError(f"selector must be one of {_SELECTORS}, got {self.selector!r}")
        if self.grid_points < 2:
            raise ValueError("grid_points must be at least 2")
        if not self.formats:
            raise ValueError("at least one output format is required")
        unknown = set(self.formats) - {"csv", "json"}
        if unknown:
            raise ValueError(f"unknown output format(s): {sorted(unknown)}")

    @property
    def resolved_tau(self) -> float:
        if self.tau is not None:
            return self.tau
        return 1.3 if self.problem.startswith("fdem") else 1.1

    def resolved_output_dir(self) -> Path:
        base = self.output_dir or os.environ.get(ENV_OUTPUT_DIR) or "rieszreg-out"
        return Path(base)


# ---------------------------------------------------------------------------
# Deterministic file writers.
# ---------------------------------------------------------------------------

def _fmt(value) -> str:
    return format(float(value), ".17g")


def write_csv(path: Path, header: list, columns: list) -> Path:
    """Write columns (equal-length arrays) with a header row."""
    rows = len(columns[0])
    lines = [",".join(header)]
    for r in range(rows):
        lines.append(",".join(_fmt(col[r]) for col in columns))
    path.write_text("\n".join(lines) + "\n")
    return path


def write_json(path: Path, obj: dict) -> Path:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")
    return path


def _delta_tag(delta: float) -> str:
    return "0" if delta == 0 else format(delta, ".0e")


# ---------------------------------------------------------------------------
# Core cell computation shared by solve / figure-data.
# ---------------------------------------------------------------------------

class Cell:
    """Everything computed for one (problem, n, delta, seed) combination."""

    def __init__(self, cfg: ExperimentConfig, n: int, delta: float):
        self.timings = {}
        tic = time.perf_counter()
        self.ps = build_problem(cfg.problem, n, z0=cfg.z0)
        self.basis = build_basis(self.ps)
        self.timings["basis"] = time.perf_counter() - tic

        tic = time.perf_counter()
        G = assemble_gram(self.basis)
        self.timings["gram"] = time.perf_counter() - tic

        tic = time.perf_counter()
        self.fac = spectral_factorize(G)
        self.timings["factorize"] = time.perf_counter() - tic

        exact = shift_rhs(self.ps, self.ps.rhs_exact)
        self.exact = DataVector(exact)
        self.noisy, self.noise = add_noise(self.exact, delta, cfg.seed)

        tic = time.perf_counter()
        self.grid = np.linspace(self.ps.iv.a, self.ps.iv.b, cfg.grid_points)
        self.F, self.C = solution_sweep(self.fac, self.basis, self.noisy, self.grid)
        self.timings["solve"] = time.perf_counter() - tic

        tic = time.perf_counter()
        self.report = select_parameters(
            self.fac,
            self.basis,
            self.noisy,
            noise_norm=self.noise.realized_norm or None,
            truth=self.ps.truth,
            tau=cfg.resolved_tau,
        )
        self.timings["select"] = time.perf_counter() - tic
        self.n = n
        self.delta = delta
        self.cfg = cfg

    def solution_at(self, kappa: int) -> np.ndarray:
        return self.F[kappa - 1]

    def selected_kappas(self) -> dict:
        sel = self.cfg.selector
        out = {"full": self.fac.cutoff}
        if sel in ("best", "all") and self.report.kappa_best is not None:
            out["best"] = self.report.kappa_best
        if sel in ("discrepancy", "all") and self.report.kappa_d is not None:
            out["discrepancy"] = self.report.kappa_d
        if sel in ("lcurve", "all") and self.report.kappa_lc is not None:
            out["lcurve"] = self.report.kappa_lc
        return out

    def errors_for(self, values: np.ndarray) -> dict:
        if self.ps.truth is None:
            return {}
        tv = np.asarray(self.ps.truth(self.grid), dtype=float)
        h = (self.ps.iv.b - self.ps.iv.a) / (len(self.grid) - 1)
        return {
            "max_norm": float(np.max(np.abs(values - tv))),
            "grid_l2": float(np.sqrt(np.sum((values - tv) ** 2) * h)),
        }


def _emit_cell(cell: Cell, outdir: Path) -> list:
    cfg = cell.cfg
    tag = f"{cfg.problem.replace(':', '-')}_n{cell.n}_d{_delta_tag(cell.delta)}"
    written = []
    kappas = cell.selected_kappas()
    header = ["t"]
    columns = [cell.grid]
    if cell.ps.truth is not None:
        header.append("truth")
        columns.append(np.asarray(cell.ps.truth(cell.grid), dtype=float))
    solution_series = {}
    for name, kappa in kappas.items():
        header.append(name)
        values = cell.solution_at(kappa)
        columns.append(values)
        solution_series[f"{name} (k={kappa})"] = values

    if "csv" in cfg.formats:
        written.append(write_csv(outdir / f"solution_{tag}.csv", header, columns))
    if "json" in cfg.formats:
        summary = {
            "problem": cfg.problem,
            "n": cell.n,
            "delta": cell.delta,
            "seed": cfg.seed,
            "tau": cfg.resolved_tau,
            "size": cell.ps.size,
            "cutoff": cell.fac.cutoff,
            "cond_estimate": cell.fac.cond_estimate,
            "negative_tail": cell.fac.negative_tail,
            "noise_norm": cell.noise.realized_norm,
            "grid_points": cfg.grid_points,
            "selection": cell.report.to_dict(),
            "solutions": {},
        }
        for name, kappa in kappas.items():
            coeffs = coefficients_teig(cell.fac, cell.noisy, kappa)
            entry = {
                "kappa": int(kappa),
                "residual": residual_norm(cell.fac, cell.noisy, kappa),
                "w_norm": w_norm(cell.fac, coeffs),
                "coeffs": [float(c) for c in coeffs],
            }
            entry.update(cell.errors_for(cell.solution_at(kappa)))
            summary["solutions"][name] = entry
        written.append(write_json(outdir / f"summary_{tag}.json", summary))
    if cfg.lcurve and cell.report.lcurve_points:
        pts = np.asarray(cell.report.lcurve_points)
        written.append(
            write_csv(
                outdir / f"lcurve_{tag}.csv",
                ["log_residual", "log_w_norm"],
                [pts[:, 0], pts[:, 1]],
            )
        )
    if cfg.timings:
        write_json(outdir / f"timings_{tag}.json", {k: float(v) for k, v in cell.timings.items()})
    print(
        "phase runtimes "
        + tag
        + ": "
        + ", ".join(f"{k}={v:.3f}s" for k, v in cell.timings.items()),
        file=sys.stderr,
    )
    if cfg.plot:
        from .plotting import render_series

        png = outdir / f"solution_{tag}.png"
        series = {}
        if cell.ps.truth is not None:
            series["truth"] = np.asarray(cell.ps.truth(cell.grid), dtype=float)
        series.update(solution_series)
        render_series(png, cell.grid, series, ylabel="f(t)", title=tag)
        written.append(png)
        if cell.ps.truth is not None:
            tv = np.asarray(cell.ps.truth(cell.grid), dtype=float)
            errs = {name: np.abs(vals - tv) for name, vals in solution_series.items()}
            png2 = outdir / f"errors_{tag}.png"
            render_series(png2, cell.grid, errs, ylabel="|error|", logy=True, title=tag)
            written.append(png2)
    return written


def run_experiment(cfg: ExperimentConfig) -> list:
    """Run all (n, delta) cells of a configuration; returns written paths."""
    outdir = cfg.resolved_output_dir()
    outdir.mkdir(parents=True, exist_ok=True)
    written = []
    for n in cfg.n:
        for delta in cfg.delta:
            cell = Cell(cfg, n, delta)
            written.extend(_emit_cell(cell, outdir))
    return written


# ---------------------------------------------------------------------------
# table1: Galerkin baseline vs representer solver, noise-free.
# ---------------------------------------------------------------------------

def run_table1(cfg: ExperimentConfig) -> list:
    outdir = cfg.resolved_output_dir()
    outdir.mkdir(parents=True, exist_ok=True)
    sizes = [6, 10, 20]
    galerkin_errors = []
    riesz_errors = []
    for n in sizes:
        cell_cfg = ExperimentConfig(
            problem="tp2",
            n=[n],
            delta=[0.0],
            seed=cfg.seed,
            selector="all",
            grid_points=cfg.grid_points,
            output_dir=str(outdir),
        )
        cell = Cell(cell_cfg, n, 0.0)
        riesz_errors.append(cell.errors_for(cell.solution_at(cell.fac.cutoff))["max_norm"])
        base = galerkin_baseline(n)
        coeffs = base.solve()
        values = base.evaluate(coeffs, cell.grid)
        tv = np.sin(cell.grid)
        galerkin_errors.append(float(np.max(np.abs(values - tv))))
    path = write_csv(
        outdir / "table1.csv",
        ["n", "galerkin_error", "riesz_error"],
        [np.array(sizes, dtype=float), np.array(galerkin_errors), np.array(riesz_errors)],
    )
    print(
        "note: the comparison covers the box-function Galerkin baseline only; "
        "no spline-collocation baseline is implemented",
        file=sys.stderr,
    )
    written = [path]
    if cfg.plot:
        from .plotting import render_series

        png = outdir / "table1.png"
        render_series(
            png,
            np.array(sizes, dtype=float),
            {"galerkin": np.array(galerkin_errors), "riesz": np.array(riesz_errors)},
            xlabel="n",
            ylabel="max-norm error",
            logy=True,
            title="noise-free accuracy",
        )
        written.append(png)
    return written


# ---------------------------------------------------------------------------
# figure-data: grids behind the standard figures.
# ---------------------------------------------------------------------------

def _cell_for(cfg: ExperimentConfig, problem: str, n: int, delta: float, tau: float | None = None) -> Cell:
    sub = ExperimentConfig(
        problem=problem,
        n=[n],
        delta=[delta],
        seed=cfg.seed,
        tau=tau,
        selector="all",
        grid_points=cfg.grid_points,
        output_dir=cfg.output_dir,
        z0=cfg.z0,
    )
    return Cell(sub, n, delta)


def _series_csv(outdir, name, grid, series: dict, plot: bool, logy=False, truth=None):
    header = ["t"] + list(series)
    columns = [grid] + [series[k] for k in series]
    if truth is not None:
        header.insert(1, "truth")
        columns.insert(1, truth)
    paths = [write_csv(outdir / f"{name}.csv", header, columns)]
    if plot:
        from .plotting import render_series

        full = dict(series)
        if truth is not None:
            full = {"truth": truth, **full}
        paths.append(
            render_series(outdir / f"{name}.png", grid, full, logy=logy, title=name)
        )
    return paths


def run_figure_data(cfg: ExperimentConfig, name: str) -> list:
    outdir = cfg.resolved_output_dir()
    outdir.mkdir(parents=True, exist_ok=True)
    written = []
    plot = cfg.plot
    if name == "fig2":
        # Noise-free full reconstructions and their error curves.
        sols, errs = {}, {}
        grid = truth = None
        for n in (5, 10, 20):
            cell = _cell_for(cfg, "tp1", n, 0.0)
            grid = cell.grid
            truth = np.asarray(cell.ps.truth(grid))
            values = cell.solution_at(cell.fac.cutoff)
            sols[f"n{n}"] = values
            errs[f"n{n}"] = np.abs(values - truth)
        written += _series_csv(outdir, "fig2_solutions", grid, sols, plot, truth=truth)
        written += _series_csv(outdir, "fig2_errors", grid, errs, plot, logy=True)
    elif name == "fig3":
        # Noisy full reconstructions vs oracle-truncated ones.
        full, best, kappas = {}, {}, {}
        grid = truth = None
        for n in (5, 10, 20):
            cell = _cell_for(cfg, "tp1", n, 1e-4)
            grid, truth = cell.grid, np.asarray(cell.ps.truth(cell.grid))
            full[f"n{n}"] = cell.solution_at(cell.fac.cutoff)
            kb = cell.report.kappa_best
            best[f"n{n}"] = cell.solution_at(kb)
            kappas[f"n{n}"] = kb
        written += _series_csv(outdir, "fig3_full", grid, full, plot, truth=truth)
        written += _series_csv(outdir, "fig3_best", grid, best, plot, truth=truth)
        written.append(write_json(outdir / "fig3_kappas.json", kappas))
    elif name == "fig4":
        errs_left = {}
        grid = None
        for delta in (1e-8, 1e-4, 1e-2):
            cell = _cell_for(cfg, "tp1", 10, delta)
            grid = cell.grid
            truth = np.asarray(cell.ps.truth(grid))
            errs_left[f"d{_delta_tag(delta)}"] = np.abs(
                cell.solution_at(cell.report.kappa_best) - truth
            )
        written += _series_csv(outdir, "fig4_left", grid, errs_left, plot, logy=True)
        cell = _cell_for(cfg, "tp1", 20, 1e-4, tau=1.1)
        truth = np.asarray(cell.ps.truth(cell.grid))
        kmap = {
            "best": cell.report.kappa_best,
            "discrepancy": cell.report.kappa_d,
            "lcurve": cell.report.kappa_lc,
        }
        errs_right = {
            sel: np.abs(cell.solution_at(k) - truth) for sel, k in kmap.items() if k
        }
        written += _series_csv(outdir, "fig4_right", cell.grid, errs_right, plot, logy=True)
        written.append(write_json(outdir / "fig4_kappas.json", kmap))
    elif name == "fig7":
        left = {}
        grid = truth = None
        for delta in (1e-8, 1e-4, 1e-2):
            cell = _cell_for(cfg, "fdem:sigma1", 10, delta)
            grid, truth = cell.grid, np.asarray(cell.ps.truth(cell.grid))
            left[f"d{_delta_tag(delta)}"] = cell.solution_at(cell.report.kappa_best)
        written += _series_csv(outdir, "fig7_left", grid, left, plot, truth=truth)
        right = {}
        for n in (5, 10, 20):
            cell = _cell_for(cfg, "fdem:sigma1", n, 1e-2)
            right[f"n{n}"] = cell.solution_at(cell.report.kappa_best)
        written += _series_csv(outdir, "fig7_right", cell.grid, right, plot, truth=truth)
    elif name == "fig8":
        for side, profile in (("left", "fdem:sigma2"), ("right", "fdem:sigma3")):
            series = {}
            grid = truth = None
            for delta in (1e-8, 1e-4, 1e-2):
                cell = _cell_for(cfg, profile, 10, delta)
                grid, truth = cell.grid, np.asarray(cell.ps.truth(cell.grid))
                series[f"d{_delta_tag(delta)}"] = cell.solution_at(cell.report.kappa_best)
            written += _series_csv(outdir, f"fig8_{side}", grid, series, plot, truth=truth)
    elif name == "fig12":
        cell = _cell_for(cfg, "fdem:sigma1", 10, 1e-4, tau=1.3)
        truth = np.asarray(cell.ps.truth(cell.grid))
        kmap = {
            "best": cell.report.kappa_best,
            "discrepancy": cell.report.kappa_d,
            "lcurve": cell.report.kappa_lc,
        }
        series = {sel: cell.solution_at(k) for sel, k in kmap.items() if k}
        written += _series_csv(outdir, "fig12", cell.grid, series, plot, truth=truth)
        written.append(write_json(outdir / "fig12_kappas.json", kmap))
    else:
        raise ValueError(
            f"unknown figure name {name!r}; known: fig2, fig3, fig4, fig7, fig8, fig12"
        )
    return written


# ---------------------------------------------------------------------------
# dump-gram.
# ---------------------------------------------------------------------------

def run_dump_gram(cfg: ExperimentConfig) -> list:
    outdir = cfg.resolved_output_dir()
    outdir.mkdir(parents=True, exist_ok=True)
    written = []
    for n in cfg.n:
        ps = build_problem(cfg.problem, n, z0=cfg.z0)
        basis = build_basis(ps)
        G = assemble_gram(basis)
        fac = spectral_factorize(G)
        tag = f"{cfg.problem.replace(':', '-')}_n{n}"
        header = [f"c{j+1}" for j in range(G.shape[1])]
        written.append(write_csv(outdir / f"gram_{tag}.csv", header, list(G.T)))
        written.append(
            write_csv(outdir / f"eigenvalues_{tag}.csv", ["lambda"], [fac.eigenvalues])
        )
    return written


# ---------------------------------------------------------------------------
# Argument parsing and entry point.
# ---------------------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        print(json.dumps({"error": message, "type": "usage"}), file=sys.stderr)
        raise SystemExit(1)


def _int_list(text: str) -> list:
    return [int(v) for v in text.split(",") if v]


def _float_list(text: str) -> list:
    return [float(v) for v in text.split(",") if v]


def _add_common(p: argparse.ArgumentParser):
    p.add_argument("--config", help="JSON config file; flags override its values")
    p.add_argument("--problem", help=f"one of: {', '.join(problem_names())}")
    p.add_argument("--n", type=_int_list, help="problem size(s), comma separated")
    p.add_argument("--delta", type=_float_list, help="noise level(s), comma separated")
    p.add_argument("--seed", type=int, help="noise seed")
    p.add_argument("--tau", type=float, help="discrepancy safety factor")
    p.add_argument("--selector", choices=_SELECTORS, help="truncation selector(s) to report")
    p.add_argument("--grid-points", type=int, dest="grid_points", help="evaluation grid size")
    p.add_argument("--output-dir", dest="output_dir", help="output directory")
    p.add_argument(
        "--format",
        dest="formats",
        type=lambda s: [v for v in s.split(",") if v],
        help="comma list of csv,json",
    )
    p.add_argument("--lcurve", action="store_true", default=None, help="emit L-curve CSV")
    p.add_argument("--plot", action="store_true", default=None, help="render PNG figures")
    p.add_argument("--timings", action="store_true", default=None, help="write timing sidecars")
    p.add_argument("--z0", type=float, help="truncation depth for fdem problems")


def _build_config(args) -> ExperimentConfig:
    values = {}
    if args.config:
        with open(args.config) as fh:
            values.update(json.load(fh))
    for key in (
        "problem",
        "n",
        "delta",
        "seed",
        "tau",
        "selector",
        "grid_points",
        "output_dir",
        "formats",
        "lcurve",
        "plot",
        "timings",
        "z0",
    ):
        flag = getattr(args, key, None)
        if flag is not None:
            values[key] = flag
    return ExperimentConfig(**values)


def main(argv=None) -> int:
    parser = _Parser(prog="rieszreg", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("solve", "table1", "dump-gram"):
        p = sub.add_parser(name)
        _add_common(p)
    p = sub.add_parser("figure-data")
    p.add_argument("--name", required=True, help="fig2|fig3|fig4|fig7|fig8|fig12")
    _add_common(p)

    args = parser.parse_args(argv)
    try:
        cfg = _build_config(args)
        if args.command == "solve":
            written = run_experiment(cfg)
        elif args.command == "table1":
            written = run_table1(cfg)
        elif args.command == "figure-data":
            written = run_figure_data(cfg, args.name)
        elif args.command == "dump-gram":
            written = run_dump_gram(cfg)
        else:  # pragma: no cover
            raise ValueError(f"unknown command {args.command!r}")
    except (ValueError, OSError, json.JSONDecodeError) as exc:
        print(json.dumps({"error": str(exc), "type": type(exc).__name__}), file=sys.stderr)
        return 1
    except (
        DegenerateProblemError,
        NonFiniteIntegrandError,
        QuadratureError,
        np.linalg.LinAlgError,
    ) as exc:
        print(json.dumps({"error": str(exc), "type": type(exc).__name__}), file=sys.stderr)
        return 2
    for path in written:
        print(str(path))
    return 0


if __name__ == "__main__":
    sys.exit(main())
